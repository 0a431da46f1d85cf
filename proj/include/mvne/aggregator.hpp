#pragma once

#include <random>
#include <span>

#include "mvne/autodiff.hpp"

namespace mvne {

enum class AggregatorVariant { attention, mean, max };

/// Semantic attention shared by all views: score(i, r) = q^T tanh(W z_i^r + b).
struct AggregatorParams {
    Parameter W;  ///< d x d
    Parameter b;  ///< d x 1
    Parameter q;  ///< d x 1

    static AggregatorParams init(std::size_t dim, std::mt19937_64& rng);
    std::vector<Parameter*> parameters() { return {&W, &b, &q}; }
};

/// [N x |R|] view scores. With `global_scores`, each column is replaced by its mean over nodes.
Var view_scores(std::span<const Var> views, AggregatorParams& p, bool global_scores = false);
/// Row-wise softmax over views.
Var view_weights(Var scores);
/// z_i = sum_r beta[i][r] * z_i^r
Var fuse(std::span<const Var> views, Var beta);
Var fuse_mean(std::span<const Var> views);
Var fuse_max(std::span<const Var> views);

}  // namespace mvne
