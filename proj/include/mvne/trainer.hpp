#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mvne/config.hpp"
#include "mvne/model.hpp"

namespace mvne {

struct TrainConfig {
    ModelConfig model{};
    double lr = 1e-3;
    double weight_decay = 1e-5;
    std::size_t epochs = 500;
    std::size_t patience = 50;
    std::uint64_t seed = 0;
};

void check(const TrainConfig& cfg);

/// Full configuration as dotted keys (every key present).
KeyValues to_key_values(const TrainConfig& cfg);
/// Unknown keys are rejected; missing keys take their defaults.
TrainConfig train_config_from(const KeyValues& kv);
std::string config_hash(const TrainConfig& cfg);

struct AdamState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::size_t step = 0;
    std::vector<Tensor> m;
    std::vector<Tensor> v;
};

/// One Adam step using each parameter's `grad`. Weight decay is added to the
/// gradient (g + wd * w) for parameters with `decay` set.
void adam_step(std::span<Parameter* const> params, AdamState& state, double lr, double weight_decay);

ModelParams init_params(const MultiViewGraph& g, const TrainConfig& cfg);

struct TrainResult {
    ModelParams params;  ///< parameters at the best epoch
    EmbeddingSet embeddings;
    std::vector<double> loss_history;  ///< -J per epoch
    double best_loss = 0.0;
    std::size_t best_epoch = 0;
    bool stopped_early = false;
};

/// Called after each epoch with (epoch, loss).
using EpochCallback = std::function<void(std::size_t, double)>;

/// Full-batch training. Throws NumericalError on a non-finite loss.
TrainResult train(const MultiViewGraph& g, const TrainConfig& cfg, const EpochCallback& on_epoch = {});

// Checkpoints ---------------------------------------------------------------
//   "MVNE1" | u32 count | count x (u32 name_len, name, u32 ndim=2, u64 rows, u64 cols, f64[rows*cols])
//   | u32 text_len | key=value text (config, seed, config_hash)
// Integers and doubles are little-endian.

struct Checkpoint {
    std::vector<Parameter> tensors;
    TrainConfig config;
    KeyValues text;
    bool config_hash_matches = true;
};

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params, const TrainConfig& cfg);
/// A checkpoint whose stored config_hash disagrees with its config is rejected
/// unless `allow_config_mismatch` is set, in which case a warning is printed.
Checkpoint load_checkpoint(const std::filesystem::path& path, bool allow_config_mismatch = false);
/// Copies checkpoint tensors into `params`, matching by name. ShapeError names the offending tensor.
void restore_params(ModelParams& params, const Checkpoint& ckpt);

}  // namespace mvne
