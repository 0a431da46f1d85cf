#include "mvne/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "mvne/error.hpp"

namespace mvne {

std::string to_string(Shape s) {
    return "[" + std::to_string(s.rows) + "x" + std::to_string(s.cols) + "]";
}

Tensor::Tensor(std::size_t rows, std::size_t cols, double fill)
    : shape_{rows, cols}, values_(rows * cols, fill) {}

Tensor::Tensor(Shape shape, std::vector<double> values) : shape_(shape), values_(std::move(values)) {
    if (values_.size() != shape_.size())
        throw ShapeError("tensor of shape " + to_string(shape_) + " given " +
                         std::to_string(values_.size()) + " values");
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r ? rows.begin()->size() : 0;
    std::vector<double> v;
    v.reserve(r * c);
    for (const auto& row : rows) {
        if (row.size() != c) throw ShapeError("ragged rows in Tensor::from_rows");
        v.insert(v.end(), row.begin(), row.end());
    }
    return Tensor({r, c}, std::move(v));
}

Tensor Tensor::column(std::initializer_list<double> values) {
    return Tensor({values.size(), 1}, std::vector<double>(values));
}

void Tensor::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

double max_abs_diff(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape())
        throw ShapeError("max_abs_diff: " + to_string(a.shape()) + " vs " + to_string(b.shape()));
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double frobenius_norm(const Tensor& a) {
    double s = 0.0;
    for (double v : a.data()) s += v * v;
    return std::sqrt(s);
}

}  // namespace mvne
