#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mvne/tensor.hpp"

namespace mvne {

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Random train/test partition of 0..n-1. When labels are given the split is
/// stratified: each class contributes round(ratio * size) training nodes,
/// clamped so that both sides receive at least one member.
Split split_nodes(std::size_t n, double train_ratio, std::uint64_t seed,
                  std::optional<std::span<const int>> labels = std::nullopt);

struct LogisticRegressionOptions {
    double l2 = 1e-4;
    std::size_t max_iter = 2000;
    double grad_tol = 1e-5;
};

/// Multinomial softmax regression (with bias) fitted by full-batch gradient
/// descent on mean cross-entropy + l2/2 |W|^2. Returns argmax predictions for
/// `test`; ties go to the lowest class id.
std::vector<int> logistic_regression(const Tensor& train, std::span<const int> train_labels, const Tensor& test,
                                     std::size_t num_classes, const LogisticRegressionOptions& opt = {});

struct F1 {
    double macro = 0.0;
    double micro = 0.0;
};

/// Macro F1 averages the per-class F1 over classes that occur in `truth` or
/// `pred` (a class with no true positives scores 0). Micro F1 pools counts.
F1 f1_scores(std::span<const int> pred, std::span<const int> truth, std::size_t num_classes);

struct KMeansResult {
    std::vector<int> assignment;
    Tensor centroids;
    double inertia = 0.0;
    std::vector<double> inertia_trace;  ///< per Lloyd iteration of the winning restart
};

/// Lloyd's algorithm with k-means++ seeding; best of `restarts` by inertia.
KMeansResult kmeans(const Tensor& points, std::size_t k, std::uint64_t seed, std::size_t restarts = 10,
                    std::size_t max_iter = 300);

/// I(a;b) / sqrt(H(a) H(b)) with natural logarithms.
double nmi(std::span<const int> a, std::span<const int> b);

struct EvalReport {
    std::vector<double> macro_f1;
    std::vector<double> micro_f1;
    std::vector<double> nmi;
    double mean_macro_f1 = 0.0;
    double mean_micro_f1 = 0.0;
    double mean_nmi = 0.0;
    double train_ratio = 0.8;
    std::uint64_t base_seed = 0;
    bool classification = true;

    std::size_t runs() const noexcept { return nmi.size(); }
};

struct EvalOptions {
    std::size_t runs = 50;
    double train_ratio = 0.8;
    std::uint64_t base_seed = 0;
    bool classification = true;  ///< false: clustering (NMI) only
    std::size_t kmeans_restarts = 10;
};

/// Run r uses seed base_seed + r for both its split and its k-means.
EvalReport evaluate(const Tensor& embeddings, std::span<const int> labels, const EvalOptions& opt = {});

/// Human-readable table.
std::string format_report_table(const EvalReport& report);
/// "metric=<m> run=<r> value=<v>" lines followed by "metric=<m> run=mean value=<v>".
std::string format_report_records(const EvalReport& report);

/// Embedding matrix text: "N d" header, then N rows of d reals.
void write_embeddings(const std::filesystem::path& path, const Tensor& z);
Tensor read_embeddings(const std::filesystem::path& path);

}  // namespace mvne
