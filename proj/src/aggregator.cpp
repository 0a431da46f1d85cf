#include "mvne/aggregator.hpp"

#include "mvne/error.hpp"
#include "mvne/view_encoder.hpp"

namespace mvne {

AggregatorParams AggregatorParams::init(std::size_t dim, std::mt19937_64& rng) {
    AggregatorParams p;
    p.W = Parameter("aggregator.W", glorot_uniform(dim, dim, dim, dim, rng));
    p.b = Parameter("aggregator.b", Tensor(dim, 1), false);
    p.q = Parameter("aggregator.q", glorot_uniform(dim, 1, dim, 1, rng), false);
    return p;
}

namespace {

void check_views(std::span<const Var> views) {
    if (views.empty()) throw ShapeError("aggregator: empty view list");
    for (const Var& v : views)
        if (v.shape() != views.front().shape())
            throw ShapeError("aggregator: view shapes differ, " + to_string(v.shape()) + " vs " +
                             to_string(views.front().shape()));
}

}  // namespace

Var view_scores(std::span<const Var> views, AggregatorParams& p, bool global_scores) {
    check_views(views);
    Tape& t = *views.front().tape;
    Var W = t.parameter(p.W);
    Var b = t.parameter(p.b);
    Var q = t.parameter(p.q);
    std::vector<Var> cols;
    for (const Var& z : views) cols.push_back(matmul(tanh(add_row(matmul_nt(z, W), b)), q));
    Var scores = concat_cols(cols);
    return global_scores ? col_mean_broadcast(scores) : scores;
}

Var view_weights(Var scores) { return softmax_rows(scores); }

Var fuse(std::span<const Var> views, Var beta) {
    check_views(views);
    if (beta.shape() != Shape{views.front().shape().rows, views.size()})
        throw ShapeError("fuse: weights " + to_string(beta.shape()) + " do not match " +
                         std::to_string(views.size()) + " views");
    Var out = scale_rows(views[0], column(beta, 0));
    for (std::size_t r = 1; r < views.size(); ++r) out = add(out, scale_rows(views[r], column(beta, r)));
    return out;
}

Var fuse_mean(std::span<const Var> views) {
    check_views(views);
    if (views.size() == 1) return views.front();
    Var acc = views[0];
    for (std::size_t r = 1; r < views.size(); ++r) acc = add(acc, views[r]);
    return scale(acc, 1.0 / static_cast<double>(views.size()));
}

Var fuse_max(std::span<const Var> views) {
    check_views(views);
    if (views.size() == 1) return views.front();
    return elementwise_max(views);
}

}  // namespace mvne
