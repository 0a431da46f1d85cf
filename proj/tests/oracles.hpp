#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "mvne/objective.hpp"
#include "mvne/tensor.hpp"

namespace mvne::oracle {

// Scalar re-implementation of the projection head.
inline std::vector<double> mlp(const ProjectionParams& p, std::span<const double> u) {
    if (p.identity) return {u.begin(), u.end()};
    const std::size_t h = p.W1.value.rows(), d = u.size();
    std::vector<double> hidden(h), out(p.W2.value.rows());
    for (std::size_t a = 0; a < h; ++a) {
        double s = p.b1.value[a];
        for (std::size_t c = 0; c < d; ++c) s += p.W1.value(a, c) * u[c];
        hidden[a] = s > 0 ? s : std::expm1(s);
    }
    for (std::size_t a = 0; a < out.size(); ++a) {
        double s = p.b2.value[a];
        for (std::size_t c = 0; c < h; ++c) s += p.W2.value(a, c) * hidden[c];
        out[a] = s;
    }
    return out;
}

inline double theta(const ProjectionParams& p, std::span<const double> u, std::span<const double> v, double tau) {
    const auto pu = mlp(p, u), pv = mlp(p, v);
    double dot = 0, nu = 0, nv = 0;
    for (std::size_t c = 0; c < pu.size(); ++c) {
        dot += pu[c] * pv[c];
        nu += pu[c] * pu[c];
        nv += pv[c] * pv[c];
    }
    return dot / (std::sqrt(nu) * std::sqrt(nv) + 1e-12) / tau;
}

struct Enumerated {
    double loss;
    std::size_t negatives;
};

// Lists every term of the denominator explicitly.
inline Enumerated enumerate_pair(std::size_t i, std::size_t r, const std::vector<Tensor>& views, const Tensor& fused,
                                 const ProjectionParams& p, double tau, bool infomin) {
    const std::size_t n = fused.rows();
    const double pos = theta(p, views[r].row(i), fused.row(i), tau);
    std::vector<double> terms{pos};
    for (std::size_t j = 0; j < n; ++j)
        if (j != i) terms.push_back(theta(p, views[r].row(i), fused.row(j), tau));
    for (std::size_t j = 0; j < n; ++j)
        if (j != i) terms.push_back(theta(p, views[r].row(i), views[r].row(j), tau));
    if (infomin)
        for (std::size_t k = 0; k < views.size(); ++k)
            if (k != r)
                for (std::size_t j = 0; j < n; ++j) terms.push_back(theta(p, views[r].row(i), views[k].row(j), tau));
    double denom = 0.0;
    for (double t : terms) denom += std::exp(t);
    return {pos - std::log(denom), terms.size() - 1};
}

inline double enumerate_objective(const std::vector<Tensor>& views, const Tensor& fused, const ProjectionParams& p,
                                  double tau, bool infomin) {
    double total = 0.0;
    for (std::size_t r = 0; r < views.size(); ++r)
        for (std::size_t i = 0; i < fused.rows(); ++i) total += enumerate_pair(i, r, views, fused, p, tau, infomin).loss;
    return total / static_cast<double>(fused.rows() * views.size());
}

// Exhaustive minimum of the k-means objective over every assignment with no empty cluster.
inline double brute_force_inertia(const Tensor& x, std::size_t k) {
    const std::size_t n = x.rows(), d = x.cols();
    std::vector<std::size_t> a(n, 0);
    double best = std::numeric_limits<double>::infinity();
    for (;;) {
        std::vector<double> sum(k * d, 0.0);
        std::vector<std::size_t> cnt(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            ++cnt[a[i]];
            for (std::size_t c = 0; c < d; ++c) sum[a[i] * d + c] += x(i, c);
        }
        if (std::find(cnt.begin(), cnt.end(), 0u) == cnt.end()) {
            double cost = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t c = 0; c < d; ++c) {
                    const double m = sum[a[i] * d + c] / static_cast<double>(cnt[a[i]]);
                    cost += (x(i, c) - m) * (x(i, c) - m);
                }
            best = std::min(best, cost);
        }
        std::size_t pos = 0;
        while (pos < n && ++a[pos] == k) a[pos++] = 0;
        if (pos == n) break;
    }
    return best;
}

inline Tensor twelve_points() {
    return Tensor::from_rows({{0.0, 0.0}, {0.9, 0.3}, {0.4, 1.1}, {1.2, 0.8}, {5.0, 5.2}, {5.8, 4.6},
                              {4.7, 5.9}, {6.1, 5.5}, {0.2, 6.0}, {1.1, 5.4}, {-0.3, 5.1}, {2.9, 2.7}});
}

// 20-point two-class problem and the margins s1 - s0 on the 5x5 probe grid {-2..2}^2 (first coordinate outer),
// frozen from an independent convex solver on mean cross-entropy + 1e-4/2 |W|^2 with an unpenalized bias.
struct LogisticInstance {
    Tensor train;
    std::vector<int> labels;
    Tensor probes;
    std::vector<double> margins;
};

inline LogisticInstance logistic_instance() {
    LogisticInstance li;
    li.train = Tensor::from_rows({{1.54, 2.46},  {1.72, -1.46}, {-2.09, 0.1},  {1.29, 0.76},  {2.72, 1.13},
                                  {0.96, -1.1},  {-1.66, 2.23}, {0.07, 1.22},  {-2.06, -0.65}, {-1.94, -1.16},
                                  {1.35, -2.22}, {-0.8, 0.25},  {-1.0, -0.38}, {-0.33, 0.63}, {-0.65, 0.41},
                                  {0.09, 0.64},  {0.34, 2.49},  {-1.0, 1.8},   {-0.6, -1.44}, {1.82, -0.66}});
    li.labels = {0, 1, 0, 1, 1, 1, 0, 0, 0, 0, 1, 0, 0, 1, 1, 1, 0, 0, 1, 1};
    li.margins = {1.4696, -1.4394, -4.3485, -7.2575, -10.1665, 4.7009,  1.7919,  -1.1171, -4.0262,
                  -6.9352, 7.9323, 5.0232,  2.1142,  -0.7948, -3.7039, 11.1636, 8.2546,  5.3455,
                  2.4365,  -0.4725, 14.3949, 11.4859, 8.5769, 5.6678,  2.7588};
    li.probes = Tensor(25, 2);
    for (int a = 0; a < 5; ++a)
        for (int b = 0; b < 5; ++b) {
            li.probes(a * 5 + b, 0) = a - 2;
            li.probes(a * 5 + b, 1) = b - 2;
        }
    return li;
}

}  // namespace mvne::oracle
