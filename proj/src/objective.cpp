#include "mvne/objective.hpp"

#include <cmath>

#include "mvne/error.hpp"
#include "mvne/view_encoder.hpp"

namespace mvne {

ProjectionParams ProjectionParams::init(std::size_t dim, std::size_t hidden, std::mt19937_64& rng) {
    ProjectionParams p;
    p.W1 = Parameter("projection.W1", glorot_uniform(hidden, dim, dim, hidden, rng));
    p.b1 = Parameter("projection.b1", Tensor(hidden, 1), false);
    p.W2 = Parameter("projection.W2", glorot_uniform(hidden, hidden, hidden, hidden, rng));
    p.b2 = Parameter("projection.b2", Tensor(hidden, 1), false);
    return p;
}

ProjectionParams ProjectionParams::make_identity() {
    ProjectionParams p;
    p.identity = true;
    return p;
}

std::vector<Parameter*> ProjectionParams::parameters() {
    if (identity) return {};
    return {&W1, &b1, &W2, &b2};
}

Var project(Var u, ProjectionParams& p) {
    if (p.identity) return u;
    Tape& t = *u.tape;
    Var h = elu(add_row(matmul_nt(u, t.parameter(p.W1)), t.parameter(p.b1)));
    return add_row(matmul_nt(h, t.parameter(p.W2)), t.parameter(p.b2));
}

Var critic(Var u, Var v, ProjectionParams& p, double tau) {
    if (!(tau > 0.0)) throw DomainError("temperature must be positive");
    return scale(row_cosine(project(u, p), project(v, p)), 1.0 / tau);
}

Var objective(std::span<const Var> views, Var fused, ProjectionParams& p, const ObjectiveConfig& cfg) {
    if (!(cfg.tau > 0.0)) throw DomainError("temperature must be positive");
    if (views.empty()) throw ShapeError("objective: no views");
    for (const Var& v : views)
        if (v.shape() != fused.shape())
            throw ShapeError("objective: view " + to_string(v.shape()) + " vs fused " + to_string(fused.shape()));

    const double inv_tau = 1.0 / cfg.tau;
    std::vector<Var> proj;
    for (const Var& v : views) proj.push_back(project(v, p));
    Var pf = project(fused, p);

    Var total;
    for (std::size_t r = 0; r < views.size(); ++r) {
        Var to_fused = cosine_matrix(proj[r], pf);
        Var positive = scale(diagonal(to_fused), inv_tau);
        // The fused row sum already contains the positive term.
        Var denom = add(row_sum_exp(to_fused, inv_tau), row_sum_exp(cosine_matrix(proj[r], proj[r]), inv_tau, true));
        if (cfg.infomin_enabled)
            for (std::size_t k = 0; k < views.size(); ++k)
                if (k != r) denom = add(denom, row_sum_exp(cosine_matrix(proj[r], proj[k]), inv_tau));
        Var term = sum(sub(positive, log(denom)));
        total = r == 0 ? term : add(total, term);
    }
    const double n = static_cast<double>(fused.shape().rows * views.size());
    return scale(total, 1.0 / n);
}

// ---------------------------------------------------------------------------

namespace {

double cosine(std::span<const double> u, std::span<const double> v) {
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t c = 0; c < u.size(); ++c) {
        dot += u[c] * v[c];
        nu += u[c] * u[c];
        nv += v[c] * v[c];
    }
    return dot / (std::sqrt(nu) * std::sqrt(nv) + kCosineEps);
}

PairLoss pair_loss_projected(std::size_t i, std::size_t r, std::span<const Tensor> views, const Tensor& fused,
                             double tau, bool infomin) {
    const std::size_t n = fused.rows();
    auto anchor = views[r].row(i);
    const double pos = cosine(anchor, fused.row(i)) / tau;
    // Negatives relative to the positive: value = -log(1 + sum_neg exp(t - pos)).
    double rest = 0.0;
    PairLoss out;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        rest += std::exp(cosine(anchor, fused.row(j)) / tau - pos);
        rest += std::exp(cosine(anchor, views[r].row(j)) / tau - pos);
        out.negatives += 2;
    }
    if (infomin) {
        for (std::size_t k = 0; k < views.size(); ++k) {
            if (k == r) continue;
            for (std::size_t j = 0; j < n; ++j) {
                rest += std::exp(cosine(anchor, views[k].row(j)) / tau - pos);
                ++out.negatives;
            }
        }
    }
    out.value = -std::log1p(rest);
    return out;
}

void check_pair_args(std::size_t i, std::size_t r, std::span<const Tensor> views, const Tensor& fused, double tau) {
    if (!(tau > 0.0)) throw DomainError("temperature must be positive");
    if (r >= views.size()) throw IndexError("view index " + std::to_string(r) + " out of range");
    if (i >= fused.rows()) throw IndexError("node index " + std::to_string(i) + " out of range");
    for (const Tensor& v : views)
        if (v.shape() != fused.shape()) throw ShapeError("pair loss: view and fused shapes differ");
}

}  // namespace

Tensor project_values(const ProjectionParams& p, const Tensor& u) {
    if (p.identity) return u;
    const std::size_t hidden = p.W1.value.rows();
    if (p.W1.value.cols() != u.cols()) throw ShapeError("projection input width mismatch");
    Tensor out(u.rows(), hidden);
    std::vector<double> h(hidden);
    for (std::size_t i = 0; i < u.rows(); ++i) {
        for (std::size_t a = 0; a < hidden; ++a) {
            double s = p.b1.value[a];
            for (std::size_t c = 0; c < u.cols(); ++c) s += p.W1.value(a, c) * u(i, c);
            h[a] = s > 0.0 ? s : std::expm1(s);
        }
        for (std::size_t a = 0; a < hidden; ++a) {
            double s = p.b2.value[a];
            for (std::size_t c = 0; c < hidden; ++c) s += p.W2.value(a, c) * h[c];
            out(i, a) = s;
        }
    }
    return out;
}

PairLoss infomax_pair_loss(std::size_t i, const Tensor& view, const Tensor& fused, const ProjectionParams& p,
                           double tau) {
    const Tensor views[] = {view};
    check_pair_args(i, 0, views, fused, tau);
    const Tensor pv[] = {project_values(p, view)};
    return pair_loss_projected(i, 0, pv, project_values(p, fused), tau, false);
}

PairLoss full_pair_loss(std::size_t i, std::size_t r, std::span<const Tensor> views, const Tensor& fused,
                        const ProjectionParams& p, const ObjectiveConfig& cfg) {
    check_pair_args(i, r, views, fused, cfg.tau);
    std::vector<Tensor> pv;
    for (const Tensor& v : views) pv.push_back(project_values(p, v));
    return pair_loss_projected(i, r, pv, project_values(p, fused), cfg.tau, cfg.infomin_enabled);
}

double objective_by_pairs(std::span<const Tensor> views, const Tensor& fused, const ProjectionParams& p,
                          const ObjectiveConfig& cfg) {
    if (views.empty()) throw ShapeError("objective: no views");
    check_pair_args(0, 0, views, fused, cfg.tau);
    std::vector<Tensor> pv;
    for (const Tensor& v : views) pv.push_back(project_values(p, v));
    const Tensor pf = project_values(p, fused);
    double total = 0.0;
    for (std::size_t i = 0; i < fused.rows(); ++i)
        for (std::size_t r = 0; r < views.size(); ++r)
            total += pair_loss_projected(i, r, pv, pf, cfg.tau, cfg.infomin_enabled).value;
    return total / static_cast<double>(fused.rows() * views.size());
}

}  // namespace mvne
