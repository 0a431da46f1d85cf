#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mvne/aggregator.hpp"
#include "mvne/graph.hpp"
#include "mvne/objective.hpp"
#include "mvne/view_encoder.hpp"

namespace mvne {

struct ModelConfig {
    std::size_t dim = 64;
    std::size_t heads = 4;
    std::size_t proj_dim = 0;  ///< projection width; 0 means dim
    double dropout = 0.6;
    EncoderVariant encoder = EncoderVariant::attention;
    AggregatorVariant aggregator = AggregatorVariant::attention;
    bool global_scores = false;
    ObjectiveConfig objective{};

    std::size_t head_dim() const { return heads ? dim / heads : 0; }
    std::size_t projection_dim() const { return proj_dim ? proj_dim : dim; }
};

/// Throws ConfigError on an inconsistent configuration.
void check(const ModelConfig& cfg);

struct ModelParams {
    std::vector<ViewEncoderParams> encoders;      ///< one per view
    std::optional<AggregatorParams> aggregator;   ///< attention fusion only
    ProjectionParams projection;

    /// Every learnable tensor in a fixed order.
    std::vector<Parameter*> parameters();
    std::vector<const Parameter*> parameters() const;
    std::size_t count() const;
    void zero_grad();
};

/// Closed-form parameter count of the attention/attention model:
/// |R|(dF + 2d) + (d^2 + 2d) + (h d + h + h^2 + h), with h the projection width.
std::size_t expected_parameter_count(std::size_t views, std::size_t attrs, const ModelConfig& cfg);

/// Glorot-uniform weights, zero biases. Consumes `rng` in a fixed order.
ModelParams init_model(const MultiViewGraph& g, const ModelConfig& cfg, std::mt19937_64& rng);

struct Forward {
    std::vector<Var> views;
    Var fused;
    Var beta;  ///< [N x |R|] view weights; invalid unless the aggregator is attention
};

Forward forward(Tape& tape, const MultiViewGraph& g, ModelParams& params, const ModelConfig& cfg, bool training,
                std::mt19937_64& rng);

struct EmbeddingSet {
    std::vector<Tensor> views;  ///< Z^r
    Tensor fused;               ///< Z
    Tensor view_weights;        ///< beta, empty unless attention fusion
};

/// Inference-mode embeddings (dropout off).
EmbeddingSet embed(const MultiViewGraph& g, ModelParams& params, const ModelConfig& cfg);

/// Objective J of the inference-mode forward pass.
double evaluate_objective(const MultiViewGraph& g, ModelParams& params, const ModelConfig& cfg);

std::string to_string(EncoderVariant v);
std::string to_string(AggregatorVariant v);
EncoderVariant parse_encoder_variant(const std::string& s);
AggregatorVariant parse_aggregator_variant(const std::string& s);

}  // namespace mvne
