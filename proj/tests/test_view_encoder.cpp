#include <gtest/gtest.h>

#include <cmath>

#include "mvne/error.hpp"
#include "mvne/view_encoder.hpp"
#include "test_support.hpp"

using namespace mvne;
using mvne::testing::random_graph;
using mvne::testing::random_tensor;

namespace {

// Materializes the full N x N score matrix, masks non-edges and normalizes row by row.
Tensor dense_attention(const ViewGraph& v, const Tensor& x, const Parameter& M, const Parameter& a) {
    const std::size_t n = x.rows(), dh = M.value.rows(), f = x.cols();
    Tensor h(n, dh);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < dh; ++k)
            for (std::size_t c = 0; c < f; ++c) h(i, k) += M.value(k, c) * x(i, c);
    Tensor alpha(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> e(n, -std::numeric_limits<double>::infinity());
        for (NodeId j : v.neighbors(i)) {
            double s = 0.0;
            for (std::size_t k = 0; k < dh; ++k) s += a.value[k] * h(i, k) + a.value[dh + k] * h(j, k);
            e[j] = s > 0 ? s : 0.2 * s;
        }
        const double mx = *std::max_element(e.begin(), e.end());
        double z = 0.0;
        for (std::size_t j = 0; j < n; ++j) z += std::exp(e[j] - mx);
        for (std::size_t j = 0; j < n; ++j) alpha(i, j) = std::exp(e[j] - mx) / z;
    }
    return alpha;
}

Tensor dense_encoder(const ViewGraph& v, const Tensor& x, const ViewEncoderParams& p) {
    const std::size_t n = x.rows(), dh = p.head_dim, f = x.cols();
    Tensor out(n, p.out_dim());
    for (std::size_t k = 0; k < p.heads; ++k) {
        const Tensor alpha = dense_attention(v, x, p.transform[k], p.attention[k]);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t d = 0; d < dh; ++d) {
                double s = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    double hj = 0.0;
                    for (std::size_t c = 0; c < f; ++c) hj += p.transform[k].value(d, c) * x(j, c);
                    s += alpha(i, j) * hj;
                }
                out(i, k * dh + d) = std::max(0.0, s);
            }
    }
    return out;
}

Tensor encode(const ViewGraph& v, const Tensor& x, ViewEncoderParams& p, EncoderVariant variant) {
    Tape t;
    std::mt19937_64 rng(0);
    return encode_view(v, t.constant(x), p, variant, 0.0, false, rng).value();
}

}  // namespace

TEST(AttentionCoefficients, IsolatedNodeGetsFullWeight) {
    std::mt19937_64 rng(1);
    const auto v = ViewGraph::from_edges("r", 3, std::vector<Edge>{{0, 1}});
    auto p = ViewEncoderParams::init("e", 2, 1, 3, true, rng);
    Tape t;
    Var alpha = attention_coefficients(v, t.constant(random_tensor(3, 2, rng)), p, 0);
    EXPECT_EQ(alpha.value()[v.offsets()[2]], 1.0);
}

TEST(AttentionCoefficients, ZeroAttentionVectorIsUniform) {
    std::mt19937_64 rng(2);
    const auto g = random_graph(8, 1, 3, 2);
    auto p = ViewEncoderParams::init("e", 3, 2, 4, true, rng);
    for (auto& a : p.attention) a.value.fill(0.0);
    for (double scale : {1.0, 1e3}) {
        Tensor x = g.attributes;
        for (double& val : x.data()) val *= scale;
        for (std::size_t h = 0; h < 2; ++h) {
            Tape t;
            const Tensor alpha = attention_coefficients(g.views[0], t.constant(x), p, h).value();
            for (NodeId i = 0; i < 8; ++i)
                for (std::size_t e = g.views[0].offsets()[i]; e < g.views[0].offsets()[i + 1]; ++e)
                    EXPECT_EQ(alpha[e], 1.0 / static_cast<double>(g.views[0].degree(i)));
        }
    }
}

TEST(AttentionCoefficients, MatchesDenseOracleOnFourNodes) {
    std::mt19937_64 rng(3);
    const auto v = ViewGraph::from_edges("r", 4, std::vector<Edge>{{0, 1}, {1, 2}, {1, 3}, {2, 3}});
    const Tensor x = random_tensor(4, 3, rng);
    auto p = ViewEncoderParams::init("e", 3, 1, 2, true, rng);
    const Tensor dense = dense_attention(v, x, p.transform[0], p.attention[0]);
    Tape t;
    const Tensor alpha = attention_coefficients(v, t.constant(x), p, 0).value();
    const auto src = v.sources();
    for (std::size_t e = 0; e < alpha.size(); ++e) EXPECT_NEAR(alpha[e], dense(src[e], v.targets()[e]), 1e-10);
}

TEST(AttentionCoefficients, NeighborhoodsSumToOne) {
    std::mt19937_64 rng(4);
    const auto g = random_graph(15, 2, 5, 4, 0.3);
    for (std::size_t r = 0; r < 2; ++r) {
        auto p = ViewEncoderParams::init("e", 5, 4, 3, true, rng);
        for (std::size_t h = 0; h < 4; ++h) {
            Tape t;
            const Tensor alpha = attention_coefficients(g.views[r], t.constant(g.attributes), p, h).value();
            for (NodeId i = 0; i < 15; ++i) {
                double s = 0.0;
                for (std::size_t e = g.views[r].offsets()[i]; e < g.views[r].offsets()[i + 1]; ++e) s += alpha[e];
                EXPECT_NEAR(s, 1.0, 1e-6);
            }
        }
    }
}

TEST(EncodeView, IdentityLikeSetupReturnsAttributes) {
    std::mt19937_64 rng(5);
    const auto v = ViewGraph::from_edges("r", 2, std::vector<Edge>{});
    auto p = ViewEncoderParams::init("e", 2, 1, 2, true, rng);
    p.transform[0].value = Tensor::from_rows({{1, 0}, {0, 1}});
    p.attention[0].value.fill(0.0);
    const Tensor x = Tensor::from_rows({{0.5, 2.0}, {0.5, 2.0}});
    EXPECT_EQ(encode(v, x, p, EncoderVariant::attention), x);
}

TEST(EncodeView, MatchesDenseOracleOnTwoViews) {
    std::mt19937_64 rng(7);
    const auto g = random_graph(6, 2, 4, 7, 0.35);
    for (std::size_t r = 0; r < 2; ++r) {
        auto p = ViewEncoderParams::init("e" + std::to_string(r), 4, 2, 3, true, rng);
        EXPECT_LT(max_abs_diff(encode(g.views[r], g.attributes, p, EncoderVariant::attention),
                               dense_encoder(g.views[r], g.attributes, p)),
                  1e-10);
    }
}

TEST(EncodeView, PermutationEquivariantForAllVariants) {
    std::mt19937_64 rng(8);
    const auto g = random_graph(10, 1, 3, 8, 0.3);
    const std::vector<NodeId> perm{4, 9, 0, 7, 2, 1, 8, 3, 6, 5};
    const auto pg = permute(g, perm);
    auto p = ViewEncoderParams::init("e", 3, 2, 4, true, rng);
    for (auto variant : {EncoderVariant::attention, EncoderVariant::mean, EncoderVariant::max}) {
        const Tensor z = encode(g.views[0], g.attributes, p, variant);
        const Tensor pz = encode(pg.views[0], pg.attributes, p, variant);
        ASSERT_EQ(z.cols(), 8u);
        for (NodeId i = 0; i < 10; ++i)
            for (std::size_t c = 0; c < z.cols(); ++c) EXPECT_NEAR(pz(perm[i], c), z(i, c), 1e-12);
    }
}

TEST(EncodeView, SingletonNeighborhoodForMeanAndMax) {
    std::mt19937_64 rng(9);
    const auto v = ViewGraph::from_edges("r", 3, std::vector<Edge>{{0, 1}});
    auto p = ViewEncoderParams::init("e", 2, 1, 3, false, rng);
    const Tensor x = random_tensor(3, 2, rng);
    for (auto variant : {EncoderVariant::mean, EncoderVariant::max}) {
        const Tensor z = encode(v, x, p, variant);
        for (std::size_t d = 0; d < 3; ++d) {
            double s = 0.0;
            for (std::size_t c = 0; c < 2; ++c) s += p.transform[0].value(d, c) * x(2, c);
            EXPECT_NEAR(z(2, d), std::max(0.0, s), 1e-15);
        }
    }
}

TEST(EncodeView, MeanOverIdenticalRows) {
    std::mt19937_64 rng(10);
    const auto v = ViewGraph::from_edges("r", 3, std::vector<Edge>{{0, 1}, {0, 2}});
    auto p = ViewEncoderParams::init("e", 2, 1, 2, false, rng);
    p.transform[0].value = Tensor::from_rows({{1, 0}, {0, 1}});
    const Tensor x = Tensor::from_rows({{0.25, -1}, {0.25, -1}, {0.25, -1}});
    const Tensor z = encode(v, x, p, EncoderVariant::mean);
    EXPECT_DOUBLE_EQ(z(0, 0), 0.25);
    EXPECT_DOUBLE_EQ(z(0, 1), 0.0);
}

TEST(EncodeView, MaxMatchesLoopOracleExactly) {
    const auto v = ViewGraph::from_edges("r", 3, std::vector<Edge>{{0, 1}, {1, 2}});
    std::mt19937_64 rng(11);
    auto p = ViewEncoderParams::init("e", 2, 1, 2, false, rng);
    p.transform[0].value = Tensor::from_rows({{1, -1}, {0.5, 2}});
    const Tensor x = Tensor::from_rows({{1, 2}, {-3, 0.5}, {2, -1}});
    Tensor h(3, 2);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t d = 0; d < 2; ++d)
            h(i, d) = p.transform[0].value(d, 0) * x(i, 0) + p.transform[0].value(d, 1) * x(i, 1);
    Tensor expect(3, 2);
    for (NodeId i = 0; i < 3; ++i)
        for (std::size_t d = 0; d < 2; ++d) {
            double m = -std::numeric_limits<double>::infinity();
            for (NodeId j : v.neighbors(i)) m = std::max(m, h(j, d));
            expect(i, d) = std::max(0.0, m);
        }
    EXPECT_EQ(encode(v, x, p, EncoderVariant::max), expect);
}

TEST(EncodeView, GradientsMatchFiniteDifferences) {
    std::mt19937_64 rng(12);
    const auto g = random_graph(6, 1, 3, 12);
    const Tensor w = random_tensor(6, 4, rng);
    for (auto variant : {EncoderVariant::attention, EncoderVariant::mean, EncoderVariant::max}) {
        auto p = ViewEncoderParams::init("e", 3, 2, 2, variant == EncoderVariant::attention, rng);
        auto loss = [&](Tape& t) {
            std::mt19937_64 mask(99);
            return sum(mul(encode_view(g.views[0], t.constant(g.attributes), p, variant, 0.3, true, mask),
                           t.constant(w)));
        };
        const double err = mvne::testing::max_gradient_error(
            p.parameters(),
            [&] {
                Tape t;
                return loss(t).value()[0];
            },
            [&] {
                Tape t;
                t.backward(loss(t));
            });
        EXPECT_LT(err, 1e-4) << static_cast<int>(variant);
    }
}

TEST(EncodeView, ShapeAndVariantErrors) {
    std::mt19937_64 rng(13);
    const auto g = random_graph(5, 1, 3, 13);
    auto p = ViewEncoderParams::init("e", 3, 2, 2, false, rng);
    EXPECT_THROW(encode(g.views[0], g.attributes, p, EncoderVariant::attention), ConfigError);
    EXPECT_THROW(encode(g.views[0], Tensor(5, 4), p, EncoderVariant::mean), ShapeError);
    EXPECT_THROW(encode(g.views[0], Tensor(4, 3), p, EncoderVariant::mean), ShapeError);
    EXPECT_EQ(p.parameters().size(), 2u);
}

TEST(EncodeView, DropoutOnlyInTraining) {
    std::mt19937_64 rng(14);
    const auto g = random_graph(6, 1, 3, 14);
    auto p = ViewEncoderParams::init("e", 3, 1, 4, true, rng);
    Tape t;
    std::mt19937_64 r1(1), r2(1);
    Var x = t.constant(g.attributes);
    EXPECT_EQ(encode_view(g.views[0], x, p, EncoderVariant::attention, 0.6, false, r1).value(),
              encode(g.views[0], g.attributes, p, EncoderVariant::attention));
    EXPECT_NE(encode_view(g.views[0], x, p, EncoderVariant::attention, 0.6, true, r2).value(),
              encode(g.views[0], g.attributes, p, EncoderVariant::attention));
}
