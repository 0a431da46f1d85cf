#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace mvne {

struct Shape {
    std::size_t rows = 0;
    std::size_t cols = 0;

    std::size_t size() const noexcept { return rows * cols; }
    friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(Shape s);

/// Dense row-major matrix of doubles. Vectors are stored as n x 1, scalars as 1 x 1.
class Tensor {
public:
    Tensor() = default;
    Tensor(std::size_t rows, std::size_t cols, double fill = 0.0);
    Tensor(Shape shape, std::vector<double> values);

    static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);
    static Tensor column(std::initializer_list<double> values);
    static Tensor scalar(double v) { return Tensor(1, 1, v); }

    Shape shape() const noexcept { return shape_; }
    std::size_t rows() const noexcept { return shape_.rows; }
    std::size_t cols() const noexcept { return shape_.cols; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return values_[r * shape_.cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return values_[r * shape_.cols + c]; }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    std::span<double> row(std::size_t r) { return {values_.data() + r * shape_.cols, shape_.cols}; }
    std::span<const double> row(std::size_t r) const {
        return {values_.data() + r * shape_.cols, shape_.cols};
    }

    std::span<double> data() noexcept { return values_; }
    std::span<const double> data() const noexcept { return values_; }
    const std::vector<double>& values() const noexcept { return values_; }

    void fill(double v);

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    Shape shape_{};
    std::vector<double> values_;
};

/// Largest absolute elementwise difference. Shapes must match.
double max_abs_diff(const Tensor& a, const Tensor& b);
double frobenius_norm(const Tensor& a);

/// A named learnable tensor with its accumulated gradient.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;
    bool decay = true;  ///< whether weight decay applies

    Parameter() = default;
    Parameter(std::string n, Tensor v, bool wd = true)
        : name(std::move(n)), value(std::move(v)), grad(value.rows(), value.cols()), decay(wd) {}

    void zero_grad() { grad = Tensor(value.rows(), value.cols()); }
};

}  // namespace mvne
