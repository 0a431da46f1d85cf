#include "mvne/autodiff.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "mvne/error.hpp"

namespace mvne {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapC = Eigen::Map<const RowMat>;
using Map = Eigen::Map<RowMat>;

MapC view(const Tensor& t) { return MapC(t.data().data(), t.rows(), t.cols()); }
Map view(Tensor& t) { return Map(t.data().data(), t.rows(), t.cols()); }

Tape& same_tape(Var a, Var b) {
    if (a.tape == nullptr || a.tape != b.tape) throw Error("operands belong to different tapes");
    return *a.tape;
}

void require_shape(bool ok, const char* op, Shape a, Shape b) {
    if (!ok) throw ShapeError(std::string(op) + ": incompatible shapes " + to_string(a) + " and " + to_string(b));
}

void check_offsets(const Offsets& offsets, std::size_t total, const char* op) {
    if (offsets.empty() || offsets.front() != 0 || offsets.back() != total)
        throw ShapeError(std::string(op) + ": offsets do not partition [0," + std::to_string(total) + ")");
    for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
        if (offsets[s + 1] < offsets[s])
            throw ShapeError(std::string(op) + ": offsets not monotone");
        if (offsets[s + 1] == offsets[s])
            throw ShapeError(std::string(op) + ": empty segment " + std::to_string(s));
    }
}

}  // namespace

const Tensor& Var::value() const { return tape->value(id); }

Var Tape::constant(Tensor value) {
    Node n;
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return {this, nodes_.size() - 1};
}

Var Tape::parameter(Parameter& p) {
    Node n;
    n.value = p.value;
    n.param = &p;
    n.needs_grad = true;
    nodes_.push_back(std::move(n));
    return {this, nodes_.size() - 1};
}

Var Tape::record(Tensor value, std::vector<std::size_t> inputs, BackwardFn backward) {
    Node n;
    n.value = std::move(value);
    n.needs_grad = std::any_of(inputs.begin(), inputs.end(),
                               [this](std::size_t i) { return nodes_[i].needs_grad; });
    if (n.needs_grad) n.backward = std::move(backward);
    n.inputs = std::move(inputs);
    nodes_.push_back(std::move(n));
    return {this, nodes_.size() - 1};
}

Tensor& Tape::grad(std::size_t id) {
    Node& n = nodes_[id];
    if (n.grad.shape() != n.value.shape()) n.grad = Tensor(n.value.rows(), n.value.cols());
    return n.grad;
}

void Tape::backward(Var loss) {
    if (loss.tape != this) throw Error("backward: loss is not on this tape");
    if (value(loss).shape() != Shape{1, 1})
        throw ShapeError("backward: loss must be scalar, got " + to_string(value(loss).shape()));
    grad(loss.id)[0] = 1.0;
    for (std::size_t k = loss.id + 1; k-- > 0;) {
        Node& n = nodes_[k];
        if (!n.needs_grad || n.grad.empty()) continue;
        if (n.backward) n.backward(*this, k);
        if (n.param != nullptr) {
            Tensor& pg = n.param->grad;
            if (pg.shape() != n.value.shape()) pg = Tensor(n.value.rows(), n.value.cols());
            for (std::size_t i = 0; i < pg.size(); ++i) pg[i] += n.grad[i];
        }
    }
    clear();
}

// ---------------------------------------------------------------------------
// Linear algebra

Var matmul(Var a, Var b) {
    Tape& t = same_tape(a, b);
    const Tensor& A = a.value();
    const Tensor& B = b.value();
    require_shape(A.cols() == B.rows(), "matmul", A.shape(), B.shape());
    Tensor out(A.rows(), B.cols());
    view(out).noalias() = view(A) * view(B);
    return t.record(std::move(out), {a.id, b.id}, [ia = a.id, ib = b.id](Tape& tp, std::size_t self) {
        const Tensor& g = tp.grad(self);
        if (tp.needs_grad(ia)) view(tp.grad(ia)).noalias() += view(g) * view(tp.value(ib)).transpose();
        if (tp.needs_grad(ib)) view(tp.grad(ib)).noalias() += view(tp.value(ia)).transpose() * view(g);
    });
}

Var matmul_nt(Var a, Var b) {
    Tape& t = same_tape(a, b);
    const Tensor& A = a.value();
    const Tensor& B = b.value();
    require_shape(A.cols() == B.cols(), "matmul_nt", A.shape(), B.shape());
    Tensor out(A.rows(), B.rows());
    view(out).noalias() = view(A) * view(B).transpose();
    return t.record(std::move(out), {a.id, b.id}, [ia = a.id, ib = b.id](Tape& tp, std::size_t self) {
        const Tensor& g = tp.grad(self);
        if (tp.needs_grad(ia)) view(tp.grad(ia)).noalias() += view(g) * view(tp.value(ib));
        if (tp.needs_grad(ib)) view(tp.grad(ib)).noalias() += view(g).transpose() * view(tp.value(ia));
    });
}

Var add(Var a, Var b) {
    Tape& t = same_tape(a, b);
    require_shape(a.shape() == b.shape(), "add", a.shape(), b.shape());
    Tensor out = a.value();
    view(out) += view(b.value());
    return t.record(std::move(out), {a.id, b.id}, [ia = a.id, ib = b.id](Tape& tp, std::size_t self) {
        const Tensor& g = tp.grad(self);
        if (tp.needs_grad(ia)) view(tp.grad(ia)) += view(g);
        if (tp.needs_grad(ib)) view(tp.grad(ib)) += view(g);
    });
}

Var sub(Var a, Var b) {
    Tape& t = same_tape(a, b);
    require_shape(a.shape() == b.shape(), "sub", a.shape(), b.shape());
    Tensor out = a.value();
    view(out) -= view(b.value());
    return t.record(std::move(out), {a.id, b.id}, [ia = a.id, ib = b.id](Tape& tp, std::size_t self) {
        const Tensor& g = tp.grad(self);
        if (tp.needs_grad(ia)) view(tp.grad(ia)) += view(g);
        if (tp.needs_grad(ib)) view(tp.grad(ib)) -= view(g);
    });
}

Var mul(Var a, Var b) {
    Tape& t = same_tape(a, b);
    require_shape(a.shape() == b.shape(), "mul", a.shape(), b.shape());
    Tensor out = a.value();
    view(out).array() *= view(b.value()).array();
    return t.record(std::move(out), {a.id, b.id}, [ia = a.id, ib = b.id](Tape& tp, std::size_t self) {
        const Tensor& g = tp.grad(self);
        if (tp.needs_grad(ia)) view(tp.grad(ia)).array() += view(g).array() * view(tp.value(ib)).array();
        if (tp.needs_grad(ib)) view(tp.grad(ib)).array() += view(g).array() * view(tp.value(ia)).array();
    });
}

Var add_row(Var a, Var bias) {
    Tape& t = same_tape(a, bias);
    const Tensor& A = a.value();
    const Tensor& B = bias.value();
    require_shape(B.size() == A.cols() && (B.rows() == 1 || B.cols() == 1), "add_row", A.shape(), B.shape());
    Tensor out = A;
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += B[j];
    return t.record(std::move(out), {a.id, bias.id}, [ia = a.id, ib = bias.id](Tape& tp, std::size_t self) {
        const Tensor& g = tp.grad(self);
        if (tp.needs_grad(ia)) view(tp.grad(ia)) += view(g);
        if (tp.needs_grad(ib)) {
            Tensor& gb = tp.grad(ib);
            for (std::size_t i = 0; i < g.rows(); ++i)
                for (std::size_t j = 0; j < g.cols(); ++j) gb[j] += g(i, j);
        }
    });
}

Var scale(Var a, double c) {
    Tensor out = a.value();
    view(out) *= c;
    return a.tape->record(std::move(out), {a.id}, [ia = a.id, c](Tape& tp, std::size_t self) {
        view(tp.grad(ia)) += c * view(tp.grad(self));
    });
}

// ---------------------------------------------------------------------------
// Pointwise

Var elementwise(Activation op, Var x) {
    const Tensor& X = x.value();
    Tensor out(X.rows(), X.cols());
    for (std::size_t i = 0; i < X.size(); ++i) {
        const double v = X[i];
        switch (op) {
            case Activation::relu: out[i] = v > 0.0 || std::isnan(v) ? v : 0.0; break;
            case Activation::leaky_relu: out[i] = v > 0.0 ? v : kLeakySlope * v; break;
            case Activation::tanh: out[i] = std::tanh(v); break;
            case Activation::exp: out[i] = std::exp(v); break;
            case Activation::log:
                if (v <= 0.0) throw DomainError("log of non-positive value " + std::to_string(v));
                out[i] = std::log(v);
                break;
            case Activation::elu: out[i] = v > 0.0 ? v : std::expm1(v); break;
        }
    }
    return x.tape->record(std::move(out), {x.id}, [ix = x.id, op](Tape& tp, std::size_t self) {
        const Tensor& g = tp.grad(self);
        const Tensor& in = tp.value(ix);
        const Tensor& y = tp.value(self);
        Tensor& gx = tp.grad(ix);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double v = in[i];
            double d = 0.0;
            switch (op) {
                case Activation::relu: d = v > 0.0 ? 1.0 : 0.0; break;
                case Activation::leaky_relu: d = v > 0.0 ? 1.0 : kLeakySlope; break;
                case Activation::tanh: d = 1.0 - y[i] * y[i]; break;
                case Activation::exp: d = y[i]; break;
                case Activation::log: d = 1.0 / v; break;
                case Activation::elu: d = v > 0.0 ? 1.0 : y[i] + 1.0; break;
            }
            gx[i] += g[i] * d;
        }
    });
}

Var dropout(Var x, double rate, bool training, std::mt19937_64& rng) {
    if (!(rate >= 0.0) || rate >= 1.0) throw DomainError("dropout rate must lie in [0, 1)");
    if (!training || rate == 0.0) return x;
    const Tensor& X = x.value();
    std::bernoulli_distribution keep(1.0 - rate);
    const double s = 1.0 / (1.0 - rate);
    Tensor mask(X.rows(), X.cols());
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = keep(rng) ? s : 0.0;
    Tensor out = X;
    view(out).array() *= view(mask).array();
    return x.tape->record(std::move(out), {x.id}, [ix = x.id, mask = std::move(mask)](Tape& tp, std::size_t self) {
        view(tp.grad(ix)).array() += view(tp.grad(self)).array() * view(mask).array();
    });
}

// ---------------------------------------------------------------------------
// Indexing

Var gather_rows(Var x, std::span<const std::size_t> idx) {
    const Tensor& X = x.value();
    const std::size_t d = X.cols();
    Tensor out(idx.size(), d);
    for (std::size_t e = 0; e < idx.size(); ++e) {
        if (idx[e] >= X.rows())
            throw IndexError("gather_rows: index " + std::to_string(idx[e]) + " out of range " +
                             std::to_string(X.rows()));
        std::copy_n(X.row(idx[e]).begin(), d, out.row(e).begin());
    }
    return x.tape->record(std::move(out), {x.id},
                          [ix = x.id, idx = std::vector<std::size_t>(idx.begin(), idx.end())](Tape& tp, std::size_t self) {
                              const Tensor& g = tp.grad(self);
                              Tensor& gx = tp.grad(ix);
                              for (std::size_t e = 0; e < idx.size(); ++e) {
                                  auto src = g.row(e);
                                  auto dst = gx.row(idx[e]);
                                  for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
                              }
                          });
}

Var concat_cols(std::span<const Var> parts) {
    if (parts.empty()) throw ShapeError("concat_cols: no inputs");
    Tape& t = *parts.front().tape;
    const std::size_t m = parts.front().value().rows();
    std::size_t total = 0;
    std::vector<std::size_t> ids;
    std::vector<std::size_t> widths;
    for (const Var& p : parts) {
        if (p.tape != &t) throw Error("concat_cols: operands belong to different tapes");
        require_shape(p.value().rows() == m, "concat_cols", parts.front().shape(), p.shape());
        ids.push_back(p.id);
        widths.push_back(p.value().cols());
        total += p.value().cols();
    }
    Tensor out(m, total);
    std::size_t off = 0;
    for (const Var& p : parts) {
        const Tensor& P = p.value();
        for (std::size_t i = 0; i < m; ++i) std::copy_n(P.row(i).begin(), P.cols(), out.row(i).begin() + off);
        off += P.cols();
    }
    auto inputs = ids;
    return t.record(std::move(out), std::move(inputs), [ids, widths](Tape& tp, std::size_t self) {
        const Tensor& g = tp.grad(self);
        std::size_t off = 0;
        for (std::size_t k = 0; k < ids.size(); ++k) {
            if (tp.needs_grad(ids[k])) {
                Tensor& gk = tp.grad(ids[k]);
                for (std::size_t i = 0; i < g.rows(); ++i)
                    for (std::size_t c = 0; c < widths[k]; ++c) gk(i, c) += g(i, off + c);
            }
            off += widths[k];
        }
    });
}

Var column(Var x, std::size_t c) {
    const Tensor& X = x.value();
    if (c >= X.cols()) throw IndexError("column: " + std::to_string(c) + " out of range");
    Tensor out(X.rows(), 1);
    for (std::size_t i = 0; i < X.rows(); ++i) out[i] = X(i, c);
    return x.tape->record(std::move(out), {x.id}, [ix = x.id, c](Tape& tp, std::size_t self) {
        const Tensor& g = tp.grad(self);
        Tensor& gx = tp.grad(ix);
        for (std::size_t i = 0; i < g.rows(); ++i) gx(i, c) += g[i];
    });
}

Var scale_rows(Var x, Var w) {
    Tape& t = same_tape(x, w);
    const Tensor& X = x.value();
    const Tensor& W = w.value();
    require_shape(W.rows() == X.rows() && W.cols() == 1, "scale_rows", X.shape(), W.shape());
    Tensor out = X;
    for (std::size_t i = 0; i < X.rows(); ++i)
        for (double& v : out.row(i)) v *= W[i];
    return t.record(std::move(out), {x.id, w.id}, [ix = x.id, iw = w.id](Tape& tp, std::size_t self) {
        const Tensor& g = tp.grad(self);
        const Tensor& X = tp.value(ix);
        const Tensor& W = tp.value(iw);
        if (tp.needs_grad(ix)) {
            Tensor& gx = tp.grad(ix);
            for (std::size_t i = 0; i < g.rows(); ++i)
                for (std::size_t c = 0; c < g.cols(); ++c) gx(i, c) += g(i, c) * W[i];
        }
        if (tp.needs_grad(iw)) {
            Tensor& gw = tp.grad(iw);
            for (std::size_t i = 0; i < g.rows(); ++i) {
                double s = 0.0;
                for (std::size_t c = 0; c < g.cols(); ++c) s += g(i, c) * X(i, c);
                gw[i] += s;
            }
        }
    });
}

// ---------------------------------------------------------------------------
// Segment operations

Var segment_softmax(Var scores, const Offsets& offsets) {
    const Tensor& S = scores.value();
    if (S.cols() != 1) throw ShapeError("segment_softmax: scores must be a column, got " + to_string(S.shape()));
    check_offsets(offsets, S.rows(), "segment_softmax");
    Tensor out(S.rows(), 1);
    for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
        const std::size_t b = offsets[s], e = offsets[s + 1];
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t k = b; k < e; ++k) mx = std::max(mx, S[k]);
        double z = 0.0;
        for (std::size_t k = b; k < e; ++k) z += (out[k] = std::exp(S[k] - mx));
        for (std::size_t k = b; k < e; ++k) out[k] /= z;
    }
    return scores.tape->record(std::move(out), {scores.id}, [is = scores.id, offsets](Tape& tp, std::size_t self) {
        const Tensor& g = tp.grad(self);
        const Tensor& y = tp.value(self);
        Tensor& gs = tp.grad(is);
        for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
            double dot = 0.0;
            for (std::size_t k = offsets[s]; k < offsets[s + 1]; ++k) dot += g[k] * y[k];
            for (std::size_t k = offsets[s]; k < offsets[s + 1]; ++k) gs[k] += y[k] * (g[k] - dot);
        }
    });
}

Var segment_weighted_sum(Var weights, Var rows, const Offsets& offsets) {
    Tape& t = same_tape(weights, rows);
    const Tensor& W = weights.value();
    const Tensor& R = rows.value();
    require_shape(W.cols() == 1 && W.rows() == R.rows(), "segment_weighted_sum", W.shape(), R.shape());
    check_offsets(offsets, R.rows(), "segment_weighted_sum");
    const std::size_t d = R.cols();
    Tensor out(offsets.size() - 1, d);
    for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
        auto o = out.row(s);
        for (std::size_t k = offsets[s]; k < offsets[s + 1]; ++k) {
            auto r = R.row(k);
            for (std::size_t c = 0; c < d; ++c) o[c] += W[k] * r[c];
        }
    }
    return t.record(std::move(out), {weights.id, rows.id},
                    [iw = weights.id, ir = rows.id, offsets](Tape& tp, std::size_t self) {
                        const Tensor& g = tp.grad(self);
                        const Tensor& W = tp.value(iw);
                        const Tensor& R = tp.value(ir);
                        const bool gw_needed = tp.needs_grad(iw);
                        const bool gr_needed = tp.needs_grad(ir);
                        for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
                            auto gs = g.row(s);
                            for (std::size_t k = offsets[s]; k < offsets[s + 1]; ++k) {
                                if (gw_needed) {
                                    double dot = 0.0;
                                    auto r = R.row(k);
                                    for (std::size_t c = 0; c < gs.size(); ++c) dot += gs[c] * r[c];
                                    tp.grad(iw)[k] += dot;
                                }
                                if (gr_needed) {
                                    auto gr = tp.grad(ir).row(k);
                                    for (std::size_t c = 0; c < gs.size(); ++c) gr[c] += W[k] * gs[c];
                                }
                            }
                        }
                    });
}

Var segment_max(Var rows, const Offsets& offsets) {
    const Tensor& R = rows.value();
    check_offsets(offsets, R.rows(), "segment_max");
    const std::size_t d = R.cols();
    const std::size_t S = offsets.size() - 1;
    Tensor out(S, d);
    std::vector<std::size_t> argmax(S * d);
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t c = 0; c < d; ++c) {
            std::size_t best = offsets[s];
            for (std::size_t k = offsets[s] + 1; k < offsets[s + 1]; ++k)
                if (R(k, c) > R(best, c)) best = k;
            argmax[s * d + c] = best;
            out(s, c) = R(best, c);
        }
    }
    return rows.tape->record(std::move(out), {rows.id}, [ir = rows.id, argmax = std::move(argmax), d](Tape& tp, std::size_t self) {
        const Tensor& g = tp.grad(self);
        Tensor& gr = tp.grad(ir);
        for (std::size_t k = 0; k < argmax.size(); ++k) gr(argmax[k], k % d) += g[k];
    });
}

// ---------------------------------------------------------------------------
// Row-wise and reductions

Var softmax_rows(Var x) {
    const Tensor& X = x.value();
    Tensor out(X.rows(), X.cols());
    for (std::size_t i = 0; i < X.rows(); ++i) {
        auto in = X.row(i);
        auto o = out.row(i);
        const double mx = *std::max_element(in.begin(), in.end());
        double z = 0.0;
        for (std::size_t c = 0; c < in.size(); ++c) z += (o[c] = std::exp(in[c] - mx));
        for (double& v : o) v /= z;
    }
    return x.tape->record(std::move(out), {x.id}, [ix = x.id](Tape& tp, std::size_t self) {
        const Tensor& g = tp.grad(self);
        const Tensor& y = tp.value(self);
        Tensor& gx = tp.grad(ix);
        for (std::size_t i = 0; i < g.rows(); ++i) {
            double dot = 0.0;
            for (std::size_t c = 0; c < g.cols(); ++c) dot += g(i, c) * y(i, c);
            for (std::size_t c = 0; c < g.cols(); ++c) gx(i, c) += y(i, c) * (g(i, c) - dot);
        }
    });
}

Var col_mean_broadcast(Var x) {
    const Tensor& X = x.value();
    const double n = static_cast<double>(X.rows());
    Tensor out(X.rows(), X.cols());
    for (std::size_t c = 0; c < X.cols(); ++c) {
        double s = 0.0;
        for (std::size_t i = 0; i < X.rows(); ++i) s += X(i, c);
        for (std::size_t i = 0; i < X.rows(); ++i) out(i, c) = s / n;
    }
    return x.tape->record(std::move(out), {x.id}, [ix = x.id](Tape& tp, std::size_t self) {
        const Tensor& g = tp.grad(self);
        Tensor& gx = tp.grad(ix);
        const double n = static_cast<double>(g.rows());
        for (std::size_t c = 0; c < g.cols(); ++c) {
            double s = 0.0;
            for (std::size_t i = 0; i < g.rows(); ++i) s += g(i, c);
            for (std::size_t i = 0; i < g.rows(); ++i) gx(i, c) += s / n;
        }
    });
}

Var elementwise_max(std::span<const Var> xs) {
    if (xs.empty()) throw ShapeError("elementwise_max: no inputs");
    Tape& t = *xs.front().tape;
    const Shape shp = xs.front().shape();
    std::vector<std::size_t> ids;
    for (const Var& v : xs) {
        if (v.tape != &t) throw Error("elementwise_max: operands belong to different tapes");
        require_shape(v.shape() == shp, "elementwise_max", shp, v.shape());
        ids.push_back(v.id);
    }
    Tensor out = xs.front().value();
    std::vector<std::size_t> which(out.size(), 0);
    for (std::size_t k = 1; k < xs.size(); ++k) {
        const Tensor& X = xs[k].value();
        for (std::size_t i = 0; i < out.size(); ++i)
            if (X[i] > out[i]) {
                out[i] = X[i];
                which[i] = k;
            }
    }
    auto inputs = ids;
    return t.record(std::move(out), std::move(inputs), [ids, which = std::move(which)](Tape& tp, std::size_t self) {
        const Tensor& g = tp.grad(self);
        for (std::size_t i = 0; i < g.size(); ++i)
            if (tp.needs_grad(ids[which[i]])) tp.grad(ids[which[i]])[i] += g[i];
    });
}

Var sum(Var x) {
    double s = 0.0;
    for (double v : x.value().data()) s += v;
    return x.tape->record(Tensor::scalar(s), {x.id}, [ix = x.id](Tape& tp, std::size_t self) {
        const double g = tp.grad(self)[0];
        for (double& v : tp.grad(ix).data()) v += g;
    });
}

Var mean(Var x) {
    const std::size_t n = x.value().size();
    if (n == 0) throw ShapeError("mean of empty tensor");
    return scale(sum(x), 1.0 / static_cast<double>(n));
}

Var row_sum(Var x, bool exclude_diagonal) {
    const Tensor& X = x.value();
    Tensor out(X.rows(), 1);
    for (std::size_t i = 0; i < X.rows(); ++i) {
        double s = 0.0;
        for (std::size_t c = 0; c < X.cols(); ++c)
            if (!(exclude_diagonal && c == i)) s += X(i, c);
        out[i] = s;
    }
    return x.tape->record(std::move(out), {x.id}, [ix = x.id, exclude_diagonal](Tape& tp, std::size_t self) {
        const Tensor& g = tp.grad(self);
        Tensor& gx = tp.grad(ix);
        for (std::size_t i = 0; i < gx.rows(); ++i)
            for (std::size_t c = 0; c < gx.cols(); ++c)
                if (!(exclude_diagonal && c == i)) gx(i, c) += g[i];
    });
}

Var row_sum_exp(Var x, double c, bool exclude_diagonal) {
    const Tensor& X = x.value();
    Tensor out(X.rows(), 1);
    for (std::size_t i = 0; i < X.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < X.cols(); ++j)
            if (!(exclude_diagonal && j == i)) s += std::exp(c * X(i, j));
        out[i] = s;
    }
    return x.tape->record(std::move(out), {x.id}, [ix = x.id, c, exclude_diagonal](Tape& tp, std::size_t self) {
        const Tensor& g = tp.grad(self);
        const Tensor& X = tp.value(ix);
        Tensor& gx = tp.grad(ix);
        for (std::size_t i = 0; i < X.rows(); ++i)
            for (std::size_t j = 0; j < X.cols(); ++j)
                if (!(exclude_diagonal && j == i)) gx(i, j) += g[i] * c * std::exp(c * X(i, j));
    });
}

Var diagonal(Var x) {
    const Tensor& X = x.value();
    const std::size_t n = std::min(X.rows(), X.cols());
    Tensor out(n, 1);
    for (std::size_t i = 0; i < n; ++i) out[i] = X(i, i);
    return x.tape->record(std::move(out), {x.id}, [ix = x.id](Tape& tp, std::size_t self) {
        const Tensor& g = tp.grad(self);
        Tensor& gx = tp.grad(ix);
        for (std::size_t i = 0; i < g.rows(); ++i) gx(i, i) += g[i];
    });
}

// ---------------------------------------------------------------------------
// Cosine similarity

namespace {

Eigen::VectorXd row_norms(const Tensor& t) { return view(t).rowwise().norm(); }

}  // namespace

Var row_cosine(Var u, Var v) {
    Tape& t = same_tape(u, v);
    require_shape(u.shape() == v.shape(), "row_cosine", u.shape(), v.shape());
    const Tensor& U = u.value();
    const Tensor& V = v.value();
    const Eigen::VectorXd nu = row_norms(U), nv = row_norms(V);
    Tensor out(U.rows(), 1);
    for (std::size_t i = 0; i < U.rows(); ++i) {
        const double dot = view(U).row(i).dot(view(V).row(i));
        out[i] = dot / (nu[i] * nv[i] + kCosineEps);
    }
    return t.record(std::move(out), {u.id, v.id}, [iu = u.id, iv = v.id](Tape& tp, std::size_t self) {
        const Tensor& g = tp.grad(self);
        const Tensor& U = tp.value(iu);
        const Tensor& V = tp.value(iv);
        const Eigen::VectorXd nu = row_norms(U), nv = row_norms(V);
        for (std::size_t i = 0; i < U.rows(); ++i) {
            const double dot = view(U).row(i).dot(view(V).row(i));
            const double D = nu[i] * nv[i] + kCosineEps;
            if (tp.needs_grad(iu)) {
                auto gu = view(tp.grad(iu)).row(i);
                gu += g[i] / D * view(V).row(i);
                if (nu[i] > 0.0) gu -= g[i] * dot * nv[i] / (nu[i] * D * D) * view(U).row(i);
            }
            if (tp.needs_grad(iv)) {
                auto gv = view(tp.grad(iv)).row(i);
                gv += g[i] / D * view(U).row(i);
                if (nv[i] > 0.0) gv -= g[i] * dot * nu[i] / (nv[i] * D * D) * view(V).row(i);
            }
        }
    });
}

Var cosine_matrix(Var u, Var v) {
    Tape& t = same_tape(u, v);
    require_shape(u.value().cols() == v.value().cols(), "cosine_matrix", u.shape(), v.shape());
    const Tensor& U = u.value();
    const Tensor& V = v.value();
    const Eigen::VectorXd nu = row_norms(U), nv = row_norms(V);
    Tensor out(U.rows(), V.rows());
    view(out).noalias() = view(U) * view(V).transpose();
    view(out).array() /= ((nu * nv.transpose()).array() + kCosineEps);
    return t.record(std::move(out), {u.id, v.id}, [iu = u.id, iv = v.id](Tape& tp, std::size_t self) {
        // With D = |u_i||v_j| + eps and C = <u_i,v_j>/D:
        //   dC/du_i = v_j / D - <u_i,v_j> |v_j| u_i / (|u_i| D^2)
        const Tensor& G = tp.grad(self);
        const Tensor& U = tp.value(iu);
        const Tensor& V = tp.value(iv);
        const Eigen::VectorXd nu = row_norms(U), nv = row_norms(V);
        const Eigen::ArrayXXd D = (nu * nv.transpose()).array() + kCosineEps;
        const Eigen::ArrayXXd C = view(tp.value(self)).array();  // dot / D
        const RowMat GD = (view(G).array() / D).matrix();
        // G * dot / D^2 = G * C / D
        const Eigen::ArrayXXd H = view(G).array() * C / D;
        if (tp.needs_grad(iu)) {
            Map gu = view(tp.grad(iu));
            gu.noalias() += GD * view(V);
            const Eigen::VectorXd a = (H.matrix() * nv);
            for (Eigen::Index i = 0; i < gu.rows(); ++i)
                if (nu[i] > 0.0) gu.row(i) -= (a[i] / nu[i]) * view(U).row(i);
        }
        if (tp.needs_grad(iv)) {
            Map gv = view(tp.grad(iv));
            gv.noalias() += GD.transpose() * view(U);
            const Eigen::VectorXd b = (H.matrix().transpose() * nu);
            for (Eigen::Index j = 0; j < gv.rows(); ++j)
                if (nv[j] > 0.0) gv.row(j) -= (b[j] / nv[j]) * view(V).row(j);
        }
    });
}

}  // namespace mvne
