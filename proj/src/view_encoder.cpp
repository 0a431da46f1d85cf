#include "mvne/view_encoder.hpp"

#include <cmath>

#include "mvne/error.hpp"

namespace mvne {

Tensor glorot_uniform(std::size_t rows, std::size_t cols, std::size_t fan_in, std::size_t fan_out,
                      std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> u(-limit, limit);
    Tensor t(rows, cols);
    for (double& v : t.data()) v = u(rng);
    return t;
}

ViewEncoderParams ViewEncoderParams::init(const std::string& prefix, std::size_t in_dim, std::size_t heads,
                                          std::size_t head_dim, bool with_attention, std::mt19937_64& rng) {
    if (heads == 0 || head_dim == 0 || in_dim == 0) throw ConfigError("encoder dimensions must be positive");
    ViewEncoderParams p;
    p.in_dim = in_dim;
    p.heads = heads;
    p.head_dim = head_dim;
    for (std::size_t k = 0; k < heads; ++k) {
        const std::string h = prefix + ".head" + std::to_string(k);
        p.transform.emplace_back(h + ".M", glorot_uniform(head_dim, in_dim, in_dim, head_dim, rng));
        if (with_attention)
            p.attention.emplace_back(h + ".a", glorot_uniform(2 * head_dim, 1, 2 * head_dim, 1, rng), false);
    }
    return p;
}

std::vector<Parameter*> ViewEncoderParams::parameters() {
    std::vector<Parameter*> out;
    for (std::size_t k = 0; k < heads; ++k) {
        out.push_back(&transform[k]);
        if (has_attention()) out.push_back(&attention[k]);
    }
    return out;
}

namespace {

// Scores LeakyReLU(a^T [h_i || h_j]) for every entry (i, j), softmax-normalized per neighborhood.
Var attention_from_features(const ViewGraph& view, Var h, Var a) {
    const auto src = view.sources();
    const auto& dst = view.targets();
    Var pair = concat_cols(std::vector<Var>{gather_rows(h, src), gather_rows(h, dst)});
    return segment_softmax(leaky_relu(matmul(pair, a)), view.offsets());
}

void check_inputs(const ViewGraph& view, Var x, const ViewEncoderParams& p) {
    if (x.value().rows() != view.num_nodes())
        throw ShapeError("encoder: attribute rows " + std::to_string(x.value().rows()) + " != view nodes " +
                         std::to_string(view.num_nodes()));
    if (x.value().cols() != p.in_dim)
        throw ShapeError("encoder: attribute width " + std::to_string(x.value().cols()) + " != expected " +
                         std::to_string(p.in_dim));
}

}  // namespace

Var attention_coefficients(const ViewGraph& view, Var x, ViewEncoderParams& p, std::size_t head) {
    check_inputs(view, x, p);
    if (head >= p.heads || !p.has_attention()) throw IndexError("attention head " + std::to_string(head) + " unavailable");
    Tape& t = *x.tape;
    Var h = matmul_nt(x, t.parameter(p.transform[head]));
    return attention_from_features(view, h, t.parameter(p.attention[head]));
}

Var encode_view(const ViewGraph& view, Var x, ViewEncoderParams& p, EncoderVariant variant, double dropout_rate,
                bool training, std::mt19937_64& rng) {
    check_inputs(view, x, p);
    if (variant == EncoderVariant::attention && !p.has_attention())
        throw ConfigError("attention encoder requested but parameters have no attention vectors");
    Tape& t = *x.tape;
    Var xin = dropout(x, dropout_rate, training, rng);
    const auto& dst = view.targets();
    const auto& offsets = view.offsets();

    Tensor mean_weights;
    if (variant == EncoderVariant::mean) {
        mean_weights = Tensor(dst.size(), 1);
        for (NodeId i = 0; i < view.num_nodes(); ++i)
            for (std::size_t e = offsets[i]; e < offsets[i + 1]; ++e)
                mean_weights[e] = 1.0 / static_cast<double>(offsets[i + 1] - offsets[i]);
    }

    std::vector<Var> heads;
    for (std::size_t k = 0; k < p.heads; ++k) {
        Var h = matmul_nt(xin, t.parameter(p.transform[k]));
        Var rows = gather_rows(h, dst);
        Var agg;
        switch (variant) {
            case EncoderVariant::attention:
                agg = segment_weighted_sum(attention_from_features(view, h, t.parameter(p.attention[k])), rows,
                                           offsets);
                break;
            case EncoderVariant::mean: agg = segment_weighted_sum(t.constant(mean_weights), rows, offsets); break;
            case EncoderVariant::max: agg = segment_max(rows, offsets); break;
        }
        heads.push_back(relu(agg));
    }
    return heads.size() == 1 ? heads.front() : concat_cols(heads);
}

}  // namespace mvne
