#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "mvne/config.hpp"
#include "mvne/graph.hpp"

namespace mvne {

/// Multi-view planted-partition (stochastic block model) specification.
///
/// In complementary mode cluster ids are written in binary (D = ceil(log2 c)
/// digits) and view v only separates cluster pairs that differ in one of its
/// digits {t : t = v mod min(views, D)}. Every other pair is wired with p_in,
/// so a single view sees merged clusters and only the union of views resolves
/// the full partition.
struct SynthSpec {
    std::size_t n = 600;
    std::size_t clusters = 4;
    std::size_t views = 2;
    double p_in = 0.10;
    double p_out = 0.01;
    bool complementary = true;
    std::size_t attr_dim = 32;
    double attr_noise = 1.0;
    std::uint64_t seed = 0;
};

void check(const SynthSpec& spec);
KeyValues to_key_values(const SynthSpec& spec);
/// Unknown keys are rejected; missing keys take their defaults.
SynthSpec synth_spec_from(const KeyValues& kv);

/// Planted cluster of each node; sizes differ by at most one.
std::vector<int> planted_labels(std::size_t n, std::size_t clusters);
/// Whether view `v` separates clusters a and b.
bool view_separates(const SynthSpec& spec, std::size_t v, int a, int b);

/// Graph with labels = planted clusters. Attributes are (e_c + noise * eps) R,
/// with R a fixed random clusters x attr_dim Gaussian map.
MultiViewGraph generate(const SynthSpec& spec);

/// Writes the graph files plus `spec.txt`. Returns the graph files only.
std::vector<std::filesystem::path> save_synthetic(const MultiViewGraph& g, const SynthSpec& spec,
                                                  const std::filesystem::path& dir);

}  // namespace mvne
