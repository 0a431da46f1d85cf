#include "mvne/model.hpp"

#include "mvne/error.hpp"

namespace mvne {

void check(const ModelConfig& cfg) {
    if (cfg.dim == 0) throw ConfigError("model.dim must be positive");
    if (cfg.heads == 0 || cfg.dim % cfg.heads != 0)
        throw ConfigError("encoder.heads must divide model.dim (dim=" + std::to_string(cfg.dim) +
                          ", heads=" + std::to_string(cfg.heads) + ")");
    if (!(cfg.dropout >= 0.0) || cfg.dropout >= 1.0) throw ConfigError("encoder.dropout must lie in [0, 1)");
    if (!(cfg.objective.tau > 0.0)) throw ConfigError("objective.tau must be > 0");
}

std::vector<Parameter*> ModelParams::parameters() {
    std::vector<Parameter*> out;
    for (auto& e : encoders)
        for (Parameter* p : e.parameters()) out.push_back(p);
    if (aggregator)
        for (Parameter* p : aggregator->parameters()) out.push_back(p);
    for (Parameter* p : projection.parameters()) out.push_back(p);
    return out;
}

std::vector<const Parameter*> ModelParams::parameters() const {
    auto all = const_cast<ModelParams*>(this)->parameters();
    return {all.begin(), all.end()};
}

std::size_t ModelParams::count() const {
    std::size_t n = 0;
    for (const Parameter* p : parameters()) n += p->value.size();
    return n;
}

void ModelParams::zero_grad() {
    for (Parameter* p : parameters()) p->zero_grad();
}

std::size_t expected_parameter_count(std::size_t views, std::size_t attrs, const ModelConfig& cfg) {
    const std::size_t d = cfg.dim;
    const std::size_t h = cfg.projection_dim();
    return views * (d * attrs + 2 * d) + (d * d + 2 * d) + (h * d + h + h * h + h);
}

ModelParams init_model(const MultiViewGraph& g, const ModelConfig& cfg, std::mt19937_64& rng) {
    check(cfg);
    ModelParams p;
    const bool attn = cfg.encoder == EncoderVariant::attention;
    for (std::size_t r = 0; r < g.num_views(); ++r)
        p.encoders.push_back(ViewEncoderParams::init("encoder." + std::to_string(r), g.num_attributes(), cfg.heads,
                                                     cfg.head_dim(), attn, rng));
    if (cfg.aggregator == AggregatorVariant::attention) p.aggregator = AggregatorParams::init(cfg.dim, rng);
    p.projection = ProjectionParams::init(cfg.dim, cfg.projection_dim(), rng);
    return p;
}

Forward forward(Tape& tape, const MultiViewGraph& g, ModelParams& params, const ModelConfig& cfg, bool training,
                std::mt19937_64& rng) {
    if (params.encoders.size() != g.num_views())
        throw ShapeError("model has " + std::to_string(params.encoders.size()) + " encoders but graph has " +
                         std::to_string(g.num_views()) + " views");
    Var x = tape.constant(g.attributes);
    Forward out;
    for (std::size_t r = 0; r < g.num_views(); ++r)
        out.views.push_back(encode_view(g.views[r], x, params.encoders[r], cfg.encoder, cfg.dropout, training, rng));
    switch (cfg.aggregator) {
        case AggregatorVariant::attention:
            if (!params.aggregator) throw ConfigError("attention aggregator requested but parameters are missing");
            out.beta = view_weights(view_scores(out.views, *params.aggregator, cfg.global_scores));
            out.fused = fuse(out.views, out.beta);
            break;
        case AggregatorVariant::mean: out.fused = fuse_mean(out.views); break;
        case AggregatorVariant::max: out.fused = fuse_max(out.views); break;
    }
    return out;
}

EmbeddingSet embed(const MultiViewGraph& g, ModelParams& params, const ModelConfig& cfg) {
    Tape tape;
    std::mt19937_64 unused(0);
    Forward f = forward(tape, g, params, cfg, false, unused);
    EmbeddingSet out;
    for (const Var& v : f.views) out.views.push_back(v.value());
    out.fused = f.fused.value();
    if (f.beta.valid()) out.view_weights = f.beta.value();
    return out;
}

double evaluate_objective(const MultiViewGraph& g, ModelParams& params, const ModelConfig& cfg) {
    Tape tape;
    std::mt19937_64 unused(0);
    Forward f = forward(tape, g, params, cfg, false, unused);
    return objective(f.views, f.fused, params.projection, cfg.objective).value()[0];
}

std::string to_string(EncoderVariant v) {
    switch (v) {
        case EncoderVariant::attention: return "attention";
        case EncoderVariant::mean: return "mean";
        case EncoderVariant::max: return "max";
    }
    return "?";
}

std::string to_string(AggregatorVariant v) {
    switch (v) {
        case AggregatorVariant::attention: return "attention";
        case AggregatorVariant::mean: return "mean";
        case AggregatorVariant::max: return "max";
    }
    return "?";
}

EncoderVariant parse_encoder_variant(const std::string& s) {
    if (s == "attention") return EncoderVariant::attention;
    if (s == "mean") return EncoderVariant::mean;
    if (s == "max") return EncoderVariant::max;
    throw ConfigError("unknown encoder variant '" + s + "' (expected attention|mean|max)");
}

AggregatorVariant parse_aggregator_variant(const std::string& s) {
    if (s == "attention") return AggregatorVariant::attention;
    if (s == "mean") return AggregatorVariant::mean;
    if (s == "max") return AggregatorVariant::max;
    throw ConfigError("unknown aggregator variant '" + s + "' (expected attention|mean|max)");
}

}  // namespace mvne
