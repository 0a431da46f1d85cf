#include "mvne/synthetic.hpp"

#include <cmath>
#include <algorithm>
#include <random>

#include "mvne/error.hpp"

namespace mvne {

void check(const SynthSpec& s) {
    if (s.n == 0) throw ConfigError("n must be positive");
    if (s.clusters < 2) throw ConfigError("c >= 2 required");
    if (s.clusters > s.n) throw ConfigError("c must not exceed n");
    if (s.views == 0) throw ConfigError("views must be positive");
    if (!(s.p_in >= 0.0 && s.p_in <= 1.0) || !(s.p_out >= 0.0 && s.p_out <= 1.0))
        throw ConfigError("edge probabilities must lie in [0, 1]");
    if (!(s.p_out < s.p_in)) throw ConfigError("constraint violated: 0 <= p_out < p_in <= 1");
    if (s.attr_dim == 0) throw ConfigError("attr_dim must be positive");
    if (!(s.attr_noise >= 0.0)) throw ConfigError("attr_noise must be >= 0");
}

KeyValues to_key_values(const SynthSpec& s) {
    return {
        {"attr_dim", std::to_string(s.attr_dim)},
        {"attr_noise", format_real(s.attr_noise)},
        {"c", std::to_string(s.clusters)},
        {"complementary", s.complementary ? "true" : "false"},
        {"n", std::to_string(s.n)},
        {"p_in", format_real(s.p_in)},
        {"p_out", format_real(s.p_out)},
        {"seed", std::to_string(s.seed)},
        {"views", std::to_string(s.views)},
    };
}

SynthSpec synth_spec_from(const KeyValues& kv) {
    const KeyValues known = to_key_values(SynthSpec{});
    for (const auto& [k, v] : kv)
        if (!known.contains(k)) throw ConfigError("unknown spec key '" + k + "'");
    SynthSpec s;
    s.attr_dim = kv_uint(kv, "attr_dim", s.attr_dim);
    s.attr_noise = kv_real(kv, "attr_noise", s.attr_noise);
    s.clusters = kv_uint(kv, "c", s.clusters);
    s.complementary = kv_bool(kv, "complementary", s.complementary);
    s.n = kv_uint(kv, "n", s.n);
    s.p_in = kv_real(kv, "p_in", s.p_in);
    s.p_out = kv_real(kv, "p_out", s.p_out);
    s.seed = kv_uint(kv, "seed", s.seed);
    s.views = kv_uint(kv, "views", s.views);
    check(s);
    return s;
}

std::vector<int> planted_labels(std::size_t n, std::size_t clusters) {
    // Contiguous blocks; the first n % c clusters get one extra node.
    std::vector<int> labels(n);
    const std::size_t base = n / clusters, extra = n % clusters;
    std::size_t i = 0;
    for (std::size_t c = 0; c < clusters; ++c)
        for (std::size_t k = 0; k < base + (c < extra ? 1 : 0); ++k) labels[i++] = static_cast<int>(c);
    return labels;
}

bool view_separates(const SynthSpec& spec, std::size_t v, int a, int b) {
    if (a == b) return false;
    if (!spec.complementary) return true;
    std::size_t digits = 0;
    while ((std::size_t{1} << digits) < spec.clusters) ++digits;
    const std::size_t stride = std::min(spec.views, digits);
    const auto diff = static_cast<unsigned>(a ^ b);
    for (std::size_t t = v % stride; t < digits; t += stride)
        if (diff & (1u << t)) return true;
    return false;
}

MultiViewGraph generate(const SynthSpec& spec) {
    check(spec);
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const std::size_t n = spec.n;
    MultiViewGraph g;
    g.num_nodes = n;
    g.labels = planted_labels(n, spec.clusters);
    const auto& lab = *g.labels;

    std::size_t width = 1;
    for (std::size_t v = spec.views; v >= 10; v /= 10) ++width;
    for (std::size_t v = 0; v < spec.views; ++v) {
        std::vector<Edge> edges;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const double p = view_separates(spec, v, lab[i], lab[j]) ? spec.p_out : spec.p_in;
                if (unif(rng) < p) edges.emplace_back(i, j);
            }
        std::string idx = std::to_string(v);
        idx.insert(0, width - idx.size(), '0');
        g.views.push_back(ViewGraph::from_edges("view" + idx, n, edges));
    }

    std::normal_distribution<double> normal(0.0, 1.0);
    // Entries N(0, 1/F): each row has unit expected norm, so the map roughly preserves lengths.
    const double map_scale = 1.0 / std::sqrt(static_cast<double>(spec.attr_dim));
    Tensor map(spec.clusters, spec.attr_dim);
    for (double& x : map.data()) x = map_scale * normal(rng);
    g.attributes = Tensor(n, spec.attr_dim);
    std::vector<double> latent(spec.clusters);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < spec.clusters; ++c)
            latent[c] = (static_cast<int>(c) == lab[i] ? 1.0 : 0.0) + spec.attr_noise * normal(rng);
        for (std::size_t f = 0; f < spec.attr_dim; ++f) {
            double s = 0.0;
            for (std::size_t c = 0; c < spec.clusters; ++c) s += latent[c] * map(c, f);
            g.attributes(i, f) = s;
        }
    }
    return g;
}

std::vector<std::filesystem::path> save_synthetic(const MultiViewGraph& g, const SynthSpec& spec,
                                                  const std::filesystem::path& dir) {
    auto files = save_multiview_graph(g, dir);
    write_key_values(dir / "spec.txt", to_key_values(spec));
    return files;
}

}  // namespace mvne
