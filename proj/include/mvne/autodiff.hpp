#pragma once

// Define-by-run reverse-mode differentiation over dense 2-D tensors.
//
// A Tape records every operation of one forward pass. Var is a cheap handle
// (tape pointer + node index). Calling Tape::backward on a scalar Var sweeps
// the tape in reverse, adds the resulting gradients into the Parameter objects
// that were registered with Tape::parameter, and clears the tape.

#include <cstddef>
#include <deque>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "mvne/tensor.hpp"

namespace mvne {

class Tape;

struct Var {
    Tape* tape = nullptr;
    std::size_t id = 0;

    const Tensor& value() const;
    Shape shape() const { return value().shape(); }
    bool valid() const noexcept { return tape != nullptr; }
};

class Tape {
public:
    /// Accumulates into the grads of this node's inputs given this node's grad.
    using BackwardFn = std::function<void(Tape&, std::size_t self)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Tensor value);
    /// Registers a leaf whose gradient is added to `p.grad` by backward().
    /// The parameter must outlive the tape sweep.
    Var parameter(Parameter& p);

    Var record(Tensor value, std::vector<std::size_t> inputs, BackwardFn backward);

    const Tensor& value(std::size_t id) const { return nodes_[id].value; }
    const Tensor& value(Var v) const { return nodes_[v.id].value; }
    bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }
    const std::vector<std::size_t>& inputs(std::size_t id) const { return nodes_[id].inputs; }

    /// Gradient buffer of a node, allocated (zeroed) on first access.
    Tensor& grad(std::size_t id);

    /// Reverse sweep from a 1x1 loss. Clears the tape afterwards.
    void backward(Var loss);

    std::size_t size() const noexcept { return nodes_.size(); }
    void clear() { nodes_.clear(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        std::vector<std::size_t> inputs;
        BackwardFn backward;
        Parameter* param = nullptr;
        bool needs_grad = false;
    };
    std::deque<Node> nodes_;  // stable addresses: values stay valid while recording
};

/// Offsets partitioning [0, E) into segments: segment s is [offsets[s], offsets[s+1]).
using Offsets = std::vector<std::size_t>;

enum class Activation { relu, leaky_relu, tanh, exp, log, elu };

inline constexpr double kLeakySlope = 0.2;
inline constexpr double kCosineEps = 1e-12;

// Linear algebra
Var matmul(Var a, Var b);     ///< a [m x k] * b [k x n]
Var matmul_nt(Var a, Var b);  ///< a [m x k] * b^T, b [n x k]
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);        ///< elementwise
Var add_row(Var a, Var bias); ///< bias [1 x n] or [n x 1] added to every row of a [m x n]
Var scale(Var a, double c);

// Pointwise maps
Var elementwise(Activation op, Var x);
inline Var relu(Var x) { return elementwise(Activation::relu, x); }
inline Var leaky_relu(Var x) { return elementwise(Activation::leaky_relu, x); }
inline Var tanh(Var x) { return elementwise(Activation::tanh, x); }
inline Var exp(Var x) { return elementwise(Activation::exp, x); }
inline Var log(Var x) { return elementwise(Activation::log, x); }
inline Var elu(Var x) { return elementwise(Activation::elu, x); }

/// Inverted dropout. Identity when `training` is false or rate is 0.
Var dropout(Var x, double rate, bool training, std::mt19937_64& rng);

// Indexing and layout
Var gather_rows(Var x, std::span<const std::size_t> idx);
Var concat_cols(std::span<const Var> parts);
Var column(Var x, std::size_t c);  ///< [m x 1] slice
Var scale_rows(Var x, Var w);      ///< row i of x times w[i]; w is [m x 1]

// Segment (neighborhood) operations
Var segment_softmax(Var scores, const Offsets& offsets);
Var segment_weighted_sum(Var weights, Var rows, const Offsets& offsets);
Var segment_max(Var rows, const Offsets& offsets);

// Row-wise and reductions
Var softmax_rows(Var x);
Var col_mean_broadcast(Var x);  ///< out[i][c] = mean_k x[k][c]
Var elementwise_max(std::span<const Var> xs);
Var sum(Var x);
Var mean(Var x);
Var row_sum(Var x, bool exclude_diagonal = false);
/// out[i] = sum_j exp(c * x[i][j]), optionally skipping j == i. Does not keep the exp matrix.
Var row_sum_exp(Var x, double c, bool exclude_diagonal = false);
Var diagonal(Var x);

// Cosine similarity with an epsilon-guarded denominator: <u,v> / (|u| |v| + eps).
Var row_cosine(Var u, Var v);      ///< paired rows, [m x d] x [m x d] -> [m x 1]
Var cosine_matrix(Var u, Var v);   ///< all pairs, [m x d] x [n x d] -> [m x n]

}  // namespace mvne
