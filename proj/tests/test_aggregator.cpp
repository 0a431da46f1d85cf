#include <gtest/gtest.h>

#include <cmath>

#include "mvne/aggregator.hpp"
#include "mvne/error.hpp"
#include "test_support.hpp"

using namespace mvne;
using mvne::testing::random_tensor;

namespace {

std::vector<Var> constants(Tape& t, const std::vector<Tensor>& zs) {
    std::vector<Var> out;
    for (const auto& z : zs) out.push_back(t.constant(z));
    return out;
}

}  // namespace

TEST(ViewScores, ZeroQOrZeroWeightsGiveZero) {
    std::mt19937_64 rng(1);
    const std::vector<Tensor> zs{random_tensor(4, 3, rng), random_tensor(4, 3, rng)};
    auto p = AggregatorParams::init(3, rng);
    {
        auto q0 = p;
        q0.q.value.fill(0.0);
        Tape t;
        EXPECT_EQ(view_scores(constants(t, zs), q0).value(), Tensor(4, 2));
    }
    {
        auto w0 = p;
        w0.W.value.fill(0.0);
        w0.b.value.fill(0.0);
        Tape t;
        EXPECT_EQ(view_scores(constants(t, zs), w0).value(), Tensor(4, 2));
    }
}

TEST(ViewScores, MatchesLoopOracle) {
    std::mt19937_64 rng(2);
    const std::vector<Tensor> zs{random_tensor(3, 4, rng), random_tensor(3, 4, rng)};
    auto p = AggregatorParams::init(4, rng);
    p.b.value = random_tensor(4, 1, rng);
    Tape t;
    const Tensor s = view_scores(constants(t, zs), p).value();
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t r = 0; r < 2; ++r) {
            double expect = 0.0;
            for (std::size_t a = 0; a < 4; ++a) {
                double pre = p.b.value[a];
                for (std::size_t c = 0; c < 4; ++c) pre += p.W.value(a, c) * zs[r](i, c);
                expect += p.q.value[a] * std::tanh(pre);
            }
            EXPECT_NEAR(s(i, r), expect, 1e-12);
        }
}

TEST(ViewScores, GlobalModeAveragesOverNodes) {
    std::mt19937_64 rng(3);
    const std::vector<Tensor> zs{random_tensor(5, 3, rng), random_tensor(5, 3, rng), random_tensor(5, 3, rng)};
    auto p = AggregatorParams::init(3, rng);
    Tape t;
    const Tensor local = view_scores(constants(t, zs), p).value();
    const Tensor global = view_scores(constants(t, zs), p, true).value();
    for (std::size_t r = 0; r < 3; ++r) {
        double m = 0.0;
        for (std::size_t i = 0; i < 5; ++i) m += local(i, r) / 5.0;
        for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(global(i, r), m, 1e-14);
    }
}

TEST(ViewWeights, UniformSingletonAndHandArithmetic) {
    Tape t;
    const Tensor eq = view_weights(t.constant(Tensor::from_rows({{0.3, 0.3, 0.3}, {-2, -2, -2}}))).value();
    for (double v : eq.data()) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
    EXPECT_EQ(view_weights(t.constant(Tensor::column({5, -1}))).value(), Tensor(2, 1, 1.0));
    const Tensor w = view_weights(t.constant(Tensor::from_rows({{std::log(3.0), 0.0}}))).value();
    EXPECT_NEAR(w(0, 0), 0.75, 1e-15);
    EXPECT_NEAR(w(0, 1), 0.25, 1e-15);
}

TEST(ViewWeights, RowsSumToOneAndShiftInvariant) {
    std::mt19937_64 rng(4);
    const Tensor s = random_tensor(6, 3, rng, -4, 4);
    Tensor shifted = s;
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t r = 0; r < 3; ++r) shifted(i, r) += static_cast<double>(i) * 1.5 - 2.0;
    Tape t;
    const Tensor b = view_weights(t.constant(s)).value();
    for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(b(i, 0) + b(i, 1) + b(i, 2), 1.0, 1e-6);
    EXPECT_LT(max_abs_diff(b, view_weights(t.constant(shifted)).value()), 1e-12);
}

TEST(Fuse, SingleViewIsIdentity) {
    std::mt19937_64 rng(5);
    const Tensor z = random_tensor(4, 3, rng);
    auto p = AggregatorParams::init(3, rng);
    Tape t;
    const std::vector<Var> vs{t.constant(z)};
    EXPECT_EQ(fuse(vs, view_weights(view_scores(vs, p))).value(), z);
    EXPECT_EQ(fuse_mean(vs).value(), z);
    EXPECT_EQ(fuse_max(vs).value(), z);
}

TEST(Fuse, IdenticalViewsGiveThatView) {
    std::mt19937_64 rng(6);
    const Tensor z = random_tensor(4, 3, rng);
    Tape t;
    const std::vector<Var> vs{t.constant(z), t.constant(z)};
    const Tensor beta = view_weights(t.constant(random_tensor(4, 2, rng))).value();
    EXPECT_LT(max_abs_diff(fuse(vs, t.constant(beta)).value(), z), 1e-15);
}

TEST(Fuse, MatchesLoopOracleAndStaysInHull) {
    std::mt19937_64 rng(7);
    const Tensor z1 = random_tensor(5, 3, rng), z2 = random_tensor(5, 3, rng);
    Tensor beta(5, 2);
    for (std::size_t i = 0; i < 5; ++i) {
        beta(i, 0) = 0.75;
        beta(i, 1) = 0.25;
    }
    Tape t;
    const std::vector<Var> vs{t.constant(z1), t.constant(z2)};
    const Tensor z = fuse(vs, t.constant(beta)).value();
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t c = 0; c < 3; ++c) {
            EXPECT_NEAR(z(i, c), 0.75 * z1(i, c) + 0.25 * z2(i, c), 1e-12);
            EXPECT_GE(z(i, c), std::min(z1(i, c), z2(i, c)) - 1e-15);
            EXPECT_LE(z(i, c), std::max(z1(i, c), z2(i, c)) + 1e-15);
        }
}

TEST(Fuse, MeanCancellationAndMaxHandArithmetic) {
    std::mt19937_64 rng(8);
    const Tensor z = random_tensor(3, 2, rng);
    Tensor neg = z;
    for (double& v : neg.data()) v = -v;
    Tape t;
    EXPECT_LT(frobenius_norm(fuse_mean(std::vector<Var>{t.constant(z), t.constant(neg)}).value()), 1e-15);
    EXPECT_EQ(fuse_max(std::vector<Var>{t.constant(Tensor::from_rows({{1, 5}})), t.constant(Tensor::from_rows({{3, 2}}))})
                  .value(),
              Tensor::from_rows({{3, 5}}));
}

TEST(Fuse, EmptyViewListIsRejected) {
    Tape t;
    EXPECT_THROW(fuse_mean(std::vector<Var>{}), ShapeError);
    EXPECT_THROW(fuse_max(std::vector<Var>{}), ShapeError);
}

TEST(Aggregator, GradientsMatchFiniteDifferences) {
    std::mt19937_64 rng(9);
    Parameter z1("z1", random_tensor(4, 3, rng)), z2("z2", random_tensor(4, 3, rng));
    auto p = AggregatorParams::init(3, rng);
    p.b.value = random_tensor(3, 1, rng);
    const Tensor w = random_tensor(4, 3, rng);
    for (bool global : {false, true}) {
        auto loss = [&](Tape& t) {
            const std::vector<Var> vs{t.parameter(z1), t.parameter(z2)};
            return sum(mul(fuse(vs, view_weights(view_scores(vs, p, global))), t.constant(w)));
        };
        std::vector<Parameter*> params = p.parameters();
        params.push_back(&z1);
        params.push_back(&z2);
        const double err = mvne::testing::max_gradient_error(
            params,
            [&] {
                Tape t;
                return loss(t).value()[0];
            },
            [&] {
                Tape t;
                t.backward(loss(t));
            });
        EXPECT_LT(err, 1e-4);
    }
}
