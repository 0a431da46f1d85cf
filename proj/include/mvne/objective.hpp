#pragma once

// Node-to-node contrastive objective.
//
// For node i in view r the positive pair is (z_i^r, z_i), with z_i the fused
// embedding. Negatives are every other node of the fused view and of view r;
// with InfoMin enabled, every node of every other view k != r (including i
// itself) is added as well. The critic is cos(p(u), p(v)) / tau where p is a
// shared two-layer projection.

#include <cstddef>
#include <random>
#include <span>

#include "mvne/autodiff.hpp"

namespace mvne {

struct ProjectionParams {
    bool identity = false;  ///< p(u) = u; used by closed-form tests
    Parameter W1;           ///< hidden x d
    Parameter b1;           ///< hidden x 1
    Parameter W2;           ///< hidden x hidden
    Parameter b2;           ///< hidden x 1

    static ProjectionParams init(std::size_t dim, std::size_t hidden, std::mt19937_64& rng);
    static ProjectionParams make_identity();
    std::vector<Parameter*> parameters();
};

struct ObjectiveConfig {
    double tau = 0.7;
    bool infomin_enabled = true;
};

/// p(U) = W2 elu(W1 u + b1) + b2, row by row.
Var project(Var u, ProjectionParams& p);
/// theta(u_i, v_i) for paired rows, [m x 1].
Var critic(Var u, Var v, ProjectionParams& p, double tau);

/// Batched objective J (1 x 1, <= 0). Training minimizes -J.
Var objective(std::span<const Var> views, Var fused, ProjectionParams& p, const ObjectiveConfig& cfg);

// Per-pair reference path --------------------------------------------------

struct PairLoss {
    double value = 0.0;         ///< log(e^pos / denominator) <= 0
    std::size_t negatives = 0;  ///< number of negative terms in the denominator
};

/// Row-wise projection on plain values.
Tensor project_values(const ProjectionParams& p, const Tensor& u);

PairLoss infomax_pair_loss(std::size_t i, const Tensor& view, const Tensor& fused, const ProjectionParams& p,
                           double tau);
PairLoss full_pair_loss(std::size_t i, std::size_t r, std::span<const Tensor> views, const Tensor& fused,
                        const ProjectionParams& p, const ObjectiveConfig& cfg);
/// J evaluated pair by pair.
double objective_by_pairs(std::span<const Tensor> views, const Tensor& fused, const ProjectionParams& p,
                          const ObjectiveConfig& cfg);

}  // namespace mvne
