#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "mvne/autodiff.hpp"
#include "mvne/graph.hpp"

namespace mvne {

enum class EncoderVariant { attention, mean, max };

/// Learnable state of one view's encoder: per head a transformation M (d_head x F)
/// and, for the attention variant, a weight vector a (2*d_head x 1).
struct ViewEncoderParams {
    std::size_t in_dim = 0;
    std::size_t heads = 0;
    std::size_t head_dim = 0;
    std::vector<Parameter> transform;  ///< one per head
    std::vector<Parameter> attention;  ///< one per head; empty unless variant is attention

    std::size_t out_dim() const noexcept { return heads * head_dim; }
    bool has_attention() const noexcept { return !attention.empty(); }

    /// Glorot-uniform initialization. Parameter names start with `prefix`.
    static ViewEncoderParams init(const std::string& prefix, std::size_t in_dim, std::size_t heads,
                                  std::size_t head_dim, bool with_attention, std::mt19937_64& rng);

    std::vector<Parameter*> parameters();
};

/// Attention coefficients of one head, aligned with the entries of `view`
/// (entry e belongs to node sources()[e] and points to targets()[e]).
Var attention_coefficients(const ViewGraph& view, Var x, ViewEncoderParams& p, std::size_t head);

/// Per-view embedding [N x K*d_head]. Dropout is applied to the attributes when training.
Var encode_view(const ViewGraph& view, Var x, ViewEncoderParams& p, EncoderVariant variant, double dropout_rate,
                bool training, std::mt19937_64& rng);

inline Var encode_view_mean(const ViewGraph& view, Var x, ViewEncoderParams& p, double dropout_rate, bool training,
                            std::mt19937_64& rng) {
    return encode_view(view, x, p, EncoderVariant::mean, dropout_rate, training, rng);
}
inline Var encode_view_max(const ViewGraph& view, Var x, ViewEncoderParams& p, double dropout_rate, bool training,
                           std::mt19937_64& rng) {
    return encode_view(view, x, p, EncoderVariant::max, dropout_rate, training, rng);
}

/// Glorot-uniform matrix with the given fan sizes.
Tensor glorot_uniform(std::size_t rows, std::size_t cols, std::size_t fan_in, std::size_t fan_out,
                      std::mt19937_64& rng);

}  // namespace mvne
