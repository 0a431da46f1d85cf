#include "mvne/trainer.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <set>

#include "mvne/error.hpp"

namespace mvne {

void check(const TrainConfig& cfg) {
    check(cfg.model);
    if (!(cfg.lr > 0.0)) throw ConfigError("trainer.lr must be > 0");
    if (!(cfg.weight_decay >= 0.0)) throw ConfigError("trainer.weight_decay must be >= 0");
    if (cfg.epochs == 0) throw ConfigError("trainer.epochs must be positive");
}

KeyValues to_key_values(const TrainConfig& cfg) {
    const ModelConfig& m = cfg.model;
    return {
        {"aggregator.global_scores", m.global_scores ? "true" : "false"},
        {"aggregator.variant", to_string(m.aggregator)},
        {"encoder.dropout", format_real(m.dropout)},
        {"encoder.heads", std::to_string(m.heads)},
        {"encoder.variant", to_string(m.encoder)},
        {"model.dim", std::to_string(m.dim)},
        {"model.proj_dim", std::to_string(m.proj_dim)},
        {"objective.infomin", m.objective.infomin_enabled ? "true" : "false"},
        {"objective.tau", format_real(m.objective.tau)},
        {"trainer.epochs", std::to_string(cfg.epochs)},
        {"trainer.lr", format_real(cfg.lr)},
        {"trainer.patience", std::to_string(cfg.patience)},
        {"trainer.seed", std::to_string(cfg.seed)},
        {"trainer.weight_decay", format_real(cfg.weight_decay)},
    };
}

TrainConfig train_config_from(const KeyValues& kv) {
    const KeyValues known = to_key_values(TrainConfig{});
    for (const auto& [k, v] : kv)
        if (!known.contains(k)) throw ConfigError("unknown configuration key '" + k + "'");
    TrainConfig c;
    ModelConfig& m = c.model;
    m.global_scores = kv_bool(kv, "aggregator.global_scores", m.global_scores);
    m.aggregator = parse_aggregator_variant(kv_string(kv, "aggregator.variant", to_string(m.aggregator)));
    m.dropout = kv_real(kv, "encoder.dropout", m.dropout);
    m.heads = kv_uint(kv, "encoder.heads", m.heads);
    m.encoder = parse_encoder_variant(kv_string(kv, "encoder.variant", to_string(m.encoder)));
    m.dim = kv_uint(kv, "model.dim", m.dim);
    m.proj_dim = kv_uint(kv, "model.proj_dim", m.proj_dim);
    m.objective.infomin_enabled = kv_bool(kv, "objective.infomin", m.objective.infomin_enabled);
    m.objective.tau = kv_real(kv, "objective.tau", m.objective.tau);
    c.epochs = kv_uint(kv, "trainer.epochs", c.epochs);
    c.lr = kv_real(kv, "trainer.lr", c.lr);
    c.patience = kv_uint(kv, "trainer.patience", c.patience);
    c.seed = kv_uint(kv, "trainer.seed", c.seed);
    c.weight_decay = kv_real(kv, "trainer.weight_decay", c.weight_decay);
    check(c);
    return c;
}

std::string config_hash(const TrainConfig& cfg) { return hex64(fnv1a64(format_key_values(to_key_values(cfg)))); }

void adam_step(std::span<Parameter* const> params, AdamState& s, double lr, double weight_decay) {
    if (s.m.empty()) {
        for (const Parameter* p : params) {
            s.m.emplace_back(p->value.rows(), p->value.cols());
            s.v.emplace_back(p->value.rows(), p->value.cols());
        }
    }
    if (s.m.size() != params.size()) throw ShapeError("adam: parameter count changed between steps");
    ++s.step;
    const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
    const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
    for (std::size_t k = 0; k < params.size(); ++k) {
        Parameter& p = *params[k];
        if (p.grad.shape() != p.value.shape() || s.m[k].shape() != p.value.shape())
            throw ShapeError("adam: shape mismatch for '" + p.name + "'");
        const double wd = p.decay ? weight_decay : 0.0;
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            const double g = p.grad[i] + wd * p.value[i];
            s.m[k][i] = s.beta1 * s.m[k][i] + (1.0 - s.beta1) * g;
            s.v[k][i] = s.beta2 * s.v[k][i] + (1.0 - s.beta2) * g * g;
            const double mhat = s.m[k][i] / c1;
            const double vhat = s.v[k][i] / c2;
            p.value[i] -= lr * mhat / (std::sqrt(vhat) + s.eps);
        }
    }
}

ModelParams init_params(const MultiViewGraph& g, const TrainConfig& cfg) {
    std::mt19937_64 rng(cfg.seed);
    return init_model(g, cfg.model, rng);
}

TrainResult train(const MultiViewGraph& g, const TrainConfig& cfg, const EpochCallback& on_epoch) {
    check(cfg);
    if (auto v = validate(g); !v.empty()) throw Error("invalid graph: " + v.front().message);
    std::mt19937_64 rng(cfg.seed);
    ModelParams params = init_model(g, cfg.model, rng);
    AdamState adam;
    TrainResult result;
    result.best_loss = std::numeric_limits<double>::infinity();
    ModelParams best = params;
    std::size_t since_best = 0;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        params.zero_grad();
        Tape tape;
        Forward f = forward(tape, g, params, cfg.model, true, rng);
        Var loss = scale(objective(f.views, f.fused, params.projection, cfg.model.objective), -1.0);
        const double value = loss.value()[0];
        if (!std::isfinite(value)) throw NumericalError(epoch, value);
        result.loss_history.push_back(value);
        if (on_epoch) on_epoch(epoch, value);

        if (value < result.best_loss - 1e-5) {
            result.best_loss = value;
            result.best_epoch = epoch;
            best = params;
            since_best = 0;
        } else if (++since_best >= cfg.patience && cfg.patience > 0) {
            result.stopped_early = true;
            break;
        }
        tape.backward(loss);
        const auto ps = params.parameters();
        adam_step(ps, adam, cfg.lr, cfg.weight_decay);
    }
    result.params = std::move(best);
    result.embeddings = embed(g, result.params, cfg.model);
    return result;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[5] = {'M', 'V', 'N', 'E', '1'};

template <typename T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& path) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw ParseError(path.string() + ": truncated checkpoint");
    return v;
}

std::string get_bytes(std::istream& in, std::size_t n, const std::filesystem::path& path) {
    std::string s(n, '\0');
    if (n && !in.read(s.data(), static_cast<std::streamsize>(n)))
        throw ParseError(path.string() + ": truncated checkpoint");
    return s;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params, const TrainConfig& cfg) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(kMagic, sizeof kMagic);
    const auto ps = params.parameters();
    put<std::uint32_t>(out, static_cast<std::uint32_t>(ps.size()));
    for (const Parameter* p : ps) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(p->name.size()));
        out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
        put<std::uint32_t>(out, 2);
        put<std::uint64_t>(out, p->value.rows());
        put<std::uint64_t>(out, p->value.cols());
        out.write(reinterpret_cast<const char*>(p->value.data().data()),
                  static_cast<std::streamsize>(p->value.size() * sizeof(double)));
    }
    KeyValues text = to_key_values(cfg);
    text["config_hash"] = config_hash(cfg);
    text["seed"] = std::to_string(cfg.seed);
    const std::string block = format_key_values(text);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(block.size()));
    out.write(block.data(), static_cast<std::streamsize>(block.size()));
    if (!out) throw IoError("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path, bool allow_config_mismatch) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    if (get_bytes(in, sizeof kMagic, path) != std::string(kMagic, sizeof kMagic))
        throw ParseError(path.string() + ": not an MVNE1 checkpoint (bad magic/version)");
    Checkpoint ck;
    const auto count = get<std::uint32_t>(in, path);
    for (std::uint32_t k = 0; k < count; ++k) {
        const auto name_len = get<std::uint32_t>(in, path);
        std::string name = get_bytes(in, name_len, path);
        const auto ndim = get<std::uint32_t>(in, path);
        if (ndim != 2) throw ParseError(path.string() + ": tensor '" + name + "' has unsupported rank");
        const auto rows = get<std::uint64_t>(in, path);
        const auto cols = get<std::uint64_t>(in, path);
        std::vector<double> data(rows * cols);
        if (!data.empty() &&
            !in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(double))))
            throw ParseError(path.string() + ": truncated data for '" + name + "'");
        ck.tensors.emplace_back(std::move(name), Tensor({rows, cols}, std::move(data)));
    }
    const auto text_len = get<std::uint32_t>(in, path);
    ck.text = parse_key_values(get_bytes(in, text_len, path));

    KeyValues cfg_kv = ck.text;
    const std::string stored_hash = kv_string(cfg_kv, "config_hash", "");
    cfg_kv.erase("config_hash");
    cfg_kv.erase("seed");
    ck.config = train_config_from(cfg_kv);
    ck.config_hash_matches = stored_hash == config_hash(ck.config);
    if (!ck.config_hash_matches) {
        if (!allow_config_mismatch)
            throw ConfigError(path.string() + ": config hash mismatch (stored " + stored_hash + ", computed " +
                              config_hash(ck.config) + "); pass the allow-mismatch flag to proceed");
        std::cerr << "warning: " << path.string() << ": config hash mismatch, proceeding\n";
    }
    return ck;
}

void restore_params(ModelParams& params, const Checkpoint& ckpt) {
    std::set<std::string> seen;
    auto ps = params.parameters();
    for (const Parameter& t : ckpt.tensors) {
        Parameter* target = nullptr;
        for (Parameter* p : ps)
            if (p->name == t.name) target = p;
        if (!target) throw ShapeError("checkpoint tensor '" + t.name + "' has no counterpart in the model");
        if (target->value.shape() != t.value.shape())
            throw ShapeError("tensor '" + t.name + "': checkpoint shape " + to_string(t.value.shape()) +
                             " but model expects " + to_string(target->value.shape()));
        target->value = t.value;
        seen.insert(t.name);
    }
    for (Parameter* p : ps)
        if (!seen.contains(p->name)) throw ShapeError("tensor '" + p->name + "' missing from checkpoint");
}

}  // namespace mvne
