#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "mvne/error.hpp"
#include "mvne/evaluation.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace mvne;
using mvne::testing::random_tensor;
using mvne::testing::TempDir;

namespace {

double accuracy(const std::vector<int>& a, const std::vector<int>& b) {
    std::size_t hit = 0;
    for (std::size_t i = 0; i < a.size(); ++i) hit += a[i] == b[i];
    return static_cast<double>(hit) / static_cast<double>(a.size());
}

}  // namespace

TEST(Split, StratificationArithmetic) {
    const std::vector<int> labels{0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
    const auto s = split_nodes(10, 0.8, 7, labels);
    EXPECT_EQ(s.train.size(), 8u);
    EXPECT_EQ(s.test.size(), 2u);
    int train0 = 0, test0 = 0;
    for (auto i : s.train) train0 += labels[i] == 0;
    for (auto i : s.test) test0 += labels[i] == 0;
    EXPECT_EQ(train0, 4);
    EXPECT_EQ(test0, 1);
}

TEST(Split, DeterministicPartition) {
    std::vector<int> labels(37);
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 3);
    const auto a = split_nodes(37, 0.6, 11, labels), b = split_nodes(37, 0.6, 11, labels);
    EXPECT_EQ(a.train, b.train);
    EXPECT_EQ(a.test, b.test);
    std::set<std::size_t> all(a.train.begin(), a.train.end());
    for (auto i : a.test) EXPECT_TRUE(all.insert(i).second);
    EXPECT_EQ(all.size(), 37u);
    EXPECT_NE(split_nodes(37, 0.6, 12, labels).train, a.train);
    const auto u = split_nodes(20, 0.5, 1);
    EXPECT_EQ(u.train.size(), 10u);
}

TEST(Split, Errors) {
    const std::vector<int> labels{0, 0, 1};
    EXPECT_THROW(split_nodes(3, 0.5, 0, labels), DomainError);
    EXPECT_THROW(split_nodes(3, 1.0, 0), DomainError);
    EXPECT_THROW(split_nodes(3, 0.0, 0), DomainError);
}

TEST(LogisticRegression, SeparableOneDimensional) {
    const Tensor train = Tensor::column({-1, -1, -1, 1, 1, 1});
    const std::vector<int> y{0, 0, 0, 1, 1, 1};
    const auto pred = logistic_regression(train, y, Tensor::column({-1, 1, -1, 1}), 2);
    EXPECT_EQ(pred, (std::vector<int>{0, 1, 0, 1}));
}

TEST(LogisticRegression, ConstantFeaturesPredictMajority) {
    const Tensor train(7, 2, 3.0);
    const std::vector<int> y{2, 1, 2, 0, 2, 1, 2};
    const auto pred = logistic_regression(train, y, Tensor(3, 2, 3.0), 3);
    EXPECT_EQ(pred, (std::vector<int>{2, 2, 2}));
}

TEST(LogisticRegression, TiesGoToLowestClass) {
    const Tensor train(4, 1, 0.0);
    const std::vector<int> y{0, 1, 1, 0};
    EXPECT_EQ(logistic_regression(train, y, Tensor(2, 1, 0.0), 2), (std::vector<int>{0, 0}));
}

TEST(LogisticRegression, MatchesConvexSolverDecisionPattern) {
    const auto li = oracle::logistic_instance();
    const auto pred = logistic_regression(li.train, li.labels, li.probes, 2);
    for (std::size_t k = 0; k < 25; ++k) EXPECT_EQ(pred[k], li.margins[k] > 0 ? 1 : 0) << "probe " << k;
}

TEST(LogisticRegression, SingleClassTrainingSetIsRejected) {
    EXPECT_THROW(logistic_regression(Tensor(3, 1, 1.0), std::vector<int>{1, 1, 1}, Tensor(1, 1), 2), DomainError);
}

TEST(F1, PerfectAllZeroAndSingleClass) {
    const std::vector<int> t{0, 1, 2, 1};
    auto f = f1_scores(t, t, 3);
    EXPECT_EQ(f.macro, 1.0);
    EXPECT_EQ(f.micro, 1.0);

    f = f1_scores(std::vector<int>{0, 0, 0, 0}, std::vector<int>{0, 0, 1, 1}, 2);
    EXPECT_DOUBLE_EQ(f.micro, 0.5);
    EXPECT_DOUBLE_EQ(f.macro, 1.0 / 3.0);

    f = f1_scores(std::vector<int>{2, 2}, std::vector<int>{2, 2}, 3);
    EXPECT_EQ(f.macro, 1.0);
    EXPECT_EQ(f.micro, 1.0);
}

TEST(F1, MicroEqualsAccuracy) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> cls(0, 3);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<int> a(50), b(50);
        for (auto& v : a) v = cls(rng);
        for (auto& v : b) v = cls(rng);
        EXPECT_NEAR(f1_scores(a, b, 4).micro, accuracy(a, b), 1e-15);
    }
}

TEST(KMeans, SeparatedClouds) {
    std::mt19937_64 rng(4);
    Tensor x(40, 2);
    std::vector<int> truth(40);
    std::normal_distribution<double> noise(0.0, 0.1);
    for (std::size_t i = 0; i < 40; ++i) {
        truth[i] = i < 20 ? 0 : 1;
        x(i, 0) = (truth[i] ? 10.0 : -10.0) + noise(rng);
        x(i, 1) = noise(rng);
    }
    const auto r = kmeans(x, 2, 9);
    EXPECT_EQ(nmi(r.assignment, truth), 1.0);
}

TEST(KMeans, OneClusterPerPoint) {
    std::mt19937_64 rng(5);
    const Tensor x = random_tensor(9, 3, rng);
    const auto r = kmeans(x, 9, 1);
    EXPECT_EQ(r.inertia, 0.0);
    EXPECT_EQ(std::set<int>(r.assignment.begin(), r.assignment.end()).size(), 9u);
}

TEST(KMeans, MatchesExhaustiveSearchOnTwelvePoints) {
    const Tensor x = oracle::twelve_points();
    EXPECT_NEAR(kmeans(x, 3, 2).inertia, oracle::brute_force_inertia(x, 3), 1e-9);
}

TEST(KMeans, InertiaTraceNonIncreasingAndDeterministic) {
    std::mt19937_64 rng(6);
    const Tensor x = random_tensor(200, 4, rng);
    const auto a = kmeans(x, 6, 3), b = kmeans(x, 6, 3);
    EXPECT_EQ(a.assignment, b.assignment);
    EXPECT_EQ(a.inertia, b.inertia);
    ASSERT_GE(a.inertia_trace.size(), 2u);
    for (std::size_t k = 1; k < a.inertia_trace.size(); ++k) EXPECT_LE(a.inertia_trace[k], a.inertia_trace[k - 1] + 1e-9);
    EXPECT_NEAR(a.inertia_trace.back(), a.inertia, 1e-9);
}

TEST(KMeans, TooManyClusters) { EXPECT_THROW(kmeans(Tensor(3, 2), 4, 0), DomainError); }

TEST(NMI, HandValues) {
    const std::vector<int> b{0, 0, 1, 1, 2, 2};
    EXPECT_NEAR(nmi(b, b), 1.0, 1e-12);
    EXPECT_NEAR(nmi(std::vector<int>{5, 5, 9, 9, 0, 0}, b), 1.0, 1e-12);
    EXPECT_NEAR(nmi(std::vector<int>{0, 0, 1, 1}, std::vector<int>{0, 1, 0, 1}), 0.0, 1e-15);
    // b refines a: I = H(a) = ln 2, H(b) = 1.5 ln 2.
    EXPECT_NEAR(nmi(std::vector<int>{0, 0, 1, 1}, std::vector<int>{0, 0, 1, 2}), 1.0 / std::sqrt(1.5), 1e-12);
    EXPECT_EQ(nmi(std::vector<int>{3, 3, 3}, std::vector<int>{1, 1, 1}), 1.0);
    EXPECT_EQ(nmi(std::vector<int>{3, 3, 3}, std::vector<int>{0, 1, 1}), 0.0);
    EXPECT_THROW(nmi(std::vector<int>{0}, std::vector<int>{0, 1}), ShapeError);
}

TEST(NMI, SymmetricAndBounded) {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> cls(0, 4);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<int> a(30), b(30);
        for (auto& v : a) v = cls(rng);
        for (auto& v : b) v = cls(rng);
        const double ab = nmi(a, b);
        EXPECT_NEAR(ab, nmi(b, a), 1e-12);
        EXPECT_GE(ab, -1e-9);
        EXPECT_LE(ab, 1.0 + 1e-9);
    }
}

TEST(Evaluate, SingleRunReproducesDirectMetrics) {
    std::mt19937_64 rng(8);
    Tensor z = random_tensor(60, 4, rng);
    std::vector<int> labels(60);
    for (std::size_t i = 0; i < 60; ++i) labels[i] = static_cast<int>(i % 3);
    for (std::size_t i = 0; i < 60; ++i) z.row(i)[0] += 3.0 * labels[i];

    EvalOptions opt;
    opt.runs = 1;
    opt.base_seed = 5;
    const auto rep = evaluate(z, labels, opt);

    const auto s = split_nodes(60, opt.train_ratio, 5, labels);
    Tensor tr(s.train.size(), 4), te(s.test.size(), 4);
    std::vector<int> ytr, yte;
    for (std::size_t k = 0; k < s.train.size(); ++k) {
        std::copy_n(z.row(s.train[k]).begin(), 4, tr.row(k).begin());
        ytr.push_back(labels[s.train[k]]);
    }
    for (std::size_t k = 0; k < s.test.size(); ++k) {
        std::copy_n(z.row(s.test[k]).begin(), 4, te.row(k).begin());
        yte.push_back(labels[s.test[k]]);
    }
    const F1 f = f1_scores(logistic_regression(tr, ytr, te, 3), yte, 3);
    EXPECT_EQ(rep.mean_macro_f1, f.macro);
    EXPECT_EQ(rep.mean_micro_f1, f.micro);
    EXPECT_EQ(rep.mean_nmi, nmi(kmeans(z, 3, 5).assignment, labels));
}

TEST(Evaluate, SeedStreaming) {
    std::mt19937_64 rng(9);
    const Tensor z = random_tensor(40, 3, rng);
    std::vector<int> labels(40);
    for (std::size_t i = 0; i < 40; ++i) labels[i] = static_cast<int>(i % 2);
    EvalOptions opt;
    opt.runs = 3;
    const auto a = evaluate(z, labels, opt);
    opt.runs = 6;
    const auto b = evaluate(z, labels, opt);
    for (std::size_t r = 0; r < 3; ++r) {
        EXPECT_EQ(a.macro_f1[r], b.macro_f1[r]);
        EXPECT_EQ(a.micro_f1[r], b.micro_f1[r]);
        EXPECT_EQ(a.nmi[r], b.nmi[r]);
    }
    double m = 0.0;
    for (double v : b.nmi) m += v;
    EXPECT_NEAR(b.mean_nmi, m / 6.0, 1e-15);
}

TEST(Evaluate, OneHotEmbeddingsArePerfect) {
    std::vector<int> labels(30);
    Tensor z(30, 3);
    for (std::size_t i = 0; i < 30; ++i) {
        labels[i] = static_cast<int>(i % 3);
        z(i, labels[i]) = 1.0;
    }
    const auto rep = evaluate(z, labels, {.runs = 4});
    EXPECT_EQ(rep.mean_macro_f1, 1.0);
    EXPECT_EQ(rep.mean_micro_f1, 1.0);
    EXPECT_NEAR(rep.mean_nmi, 1.0, 1e-12);
}

TEST(Evaluate, RecordsAndTable) {
    std::vector<int> labels(20);
    Tensor z(20, 2);
    for (std::size_t i = 0; i < 20; ++i) {
        labels[i] = static_cast<int>(i % 2);
        z(i, labels[i]) = 1.0;
    }
    const auto rep = evaluate(z, labels, {.runs = 5});
    std::istringstream in(format_report_records(rep));
    std::size_t lines = 0, means = 0;
    for (std::string line; std::getline(in, line); ++lines) means += line.find("run=mean") != std::string::npos;
    EXPECT_EQ(lines, 3u * 6u);
    EXPECT_EQ(means, 3u);
    EXPECT_NE(format_report_table(rep).find("MiF1"), std::string::npos);

    const auto nmi_only = evaluate(z, labels, {.runs = 2, .classification = false});
    EXPECT_TRUE(nmi_only.macro_f1.empty());
    EXPECT_EQ(format_report_records(nmi_only).find("macro_f1"), std::string::npos);
}

TEST(Embeddings, FileRoundTrip) {
    TempDir dir("emb");
    std::mt19937_64 rng(10);
    const Tensor z = random_tensor(7, 3, rng);
    write_embeddings(dir / "z.txt", z);
    EXPECT_EQ(read_embeddings(dir / "z.txt"), z);
}
