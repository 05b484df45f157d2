#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace aisf {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

/// Dense row-major tensor of doubles.
///
/// The shape is fixed at construction; `reshaped` and `permuted` return new
/// tensors holding copies of the data.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0);
    Tensor(Shape shape, std::vector<double> data);

    static Tensor scalar(double v) { return Tensor({}, std::vector<double>{v}); }
    static Tensor from(Shape shape, std::initializer_list<double> values);

    [[nodiscard]] const Shape& shape() const { return shape_; }
    [[nodiscard]] std::size_t rank() const { return shape_.size(); }
    [[nodiscard]] std::size_t dim(std::size_t i) const;
    [[nodiscard]] std::size_t size() const { return data_.size(); }
    [[nodiscard]] bool empty() const { return data_.empty(); }

    [[nodiscard]] std::span<const double> data() const { return data_; }
    [[nodiscard]] std::span<double> data() { return data_; }
    [[nodiscard]] const std::vector<double>& values() const { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    // Bounds-checked multi-index access.
    double& at(std::size_t i);
    double at(std::size_t i) const;
    double& at(std::size_t i, std::size_t j);
    double at(std::size_t i, std::size_t j) const;
    double& at(std::size_t i, std::size_t j, std::size_t k);
    double at(std::size_t i, std::size_t j, std::size_t k) const;

    /// Value of a rank-0 or single-element tensor.
    [[nodiscard]] double item() const;

    [[nodiscard]] Tensor reshaped(Shape shape) const;
    /// Rank-3 axis swap: (A, B, C) -> (A, C, B).
    [[nodiscard]] Tensor swapped_last() const;

    void fill(double v);
    /// this += other (same shape).
    void add_(const Tensor& other);
    void scale_(double s);

    friend bool operator==(const Tensor& a, const Tensor& b) = default;

private:
    Shape shape_{0};
    std::vector<double> data_;
};

[[nodiscard]] double max_abs_diff(const Tensor& a, const Tensor& b);
[[nodiscard]] double l2_norm_sq(const Tensor& t);

}  // namespace aisf
