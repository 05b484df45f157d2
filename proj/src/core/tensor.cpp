#include "aisf/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "aisf/errors.hpp"

namespace aisf {

std::size_t shape_numel(const Shape& shape)
{
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_str(const Shape& shape)
{
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        os << (i ? "," : "") << shape[i];
    }
    os << ')';
    return os.str();
}

Tensor::Tensor(Shape shape, double fill)
  : shape_(std::move(shape))
  , data_(shape_numel(shape_), fill)
{ }

Tensor::Tensor(Shape shape, std::vector<double> data)
  : shape_(std::move(shape))
  , data_(std::move(data))
{
    if (data_.size() != shape_numel(shape_)) {
        throw DimensionError("tensor data length " + std::to_string(data_.size())
                             + " does not match shape " + shape_str(shape_));
    }
}

Tensor Tensor::from(Shape shape, std::initializer_list<double> values)
{
    return Tensor(std::move(shape), std::vector<double>(values));
}

std::size_t Tensor::dim(std::size_t i) const
{
    if (i >= shape_.size()) {
        throw DimensionError("axis " + std::to_string(i) + " out of range for shape " + shape_str(shape_));
    }
    return shape_[i];
}

namespace {
[[noreturn]] void out_of_bounds(const Shape& shape)
{
    throw DimensionError("index out of bounds for shape " + shape_str(shape));
}
}  // namespace

double& Tensor::at(std::size_t i)
{
    if (rank() != 1 || i >= shape_[0]) out_of_bounds(shape_);
    return data_[i];
}

double Tensor::at(std::size_t i) const
{
    return const_cast<Tensor*>(this)->at(i);
}

double& Tensor::at(std::size_t i, std::size_t j)
{
    if (rank() != 2 || i >= shape_[0] || j >= shape_[1]) out_of_bounds(shape_);
    return data_[i * shape_[1] + j];
}

double Tensor::at(std::size_t i, std::size_t j) const
{
    return const_cast<Tensor*>(this)->at(i, j);
}

double& Tensor::at(std::size_t i, std::size_t j, std::size_t k)
{
    if (rank() != 3 || i >= shape_[0] || j >= shape_[1] || k >= shape_[2]) out_of_bounds(shape_);
    return data_[(i * shape_[1] + j) * shape_[2] + k];
}

double Tensor::at(std::size_t i, std::size_t j, std::size_t k) const
{
    return const_cast<Tensor*>(this)->at(i, j, k);
}

double Tensor::item() const
{
    if (data_.size() != 1) {
        throw DimensionError("item() needs a single-element tensor, got " + shape_str(shape_));
    }
    return data_[0];
}

Tensor Tensor::reshaped(Shape shape) const
{
    if (shape_numel(shape) != data_.size()) {
        throw DimensionError("cannot reshape " + shape_str(shape_) + " to " + shape_str(shape));
    }
    return Tensor(std::move(shape), data_);
}

Tensor Tensor::swapped_last() const
{
    if (rank() != 3) {
        throw DimensionError("swapped_last expects rank 3, got " + shape_str(shape_));
    }
    const std::size_t a = shape_[0], b = shape_[1], c = shape_[2];
    Tensor out({a, c, b});
    for (std::size_t i = 0; i < a; ++i) {
        const double* src = data_.data() + i * b * c;
        double* dst = out.data_.data() + i * b * c;
        for (std::size_t j = 0; j < b; ++j) {
            for (std::size_t k = 0; k < c; ++k) {
                dst[k * b + j] = src[j * c + k];
            }
        }
    }
    return out;
}

void Tensor::fill(double v)
{
    std::fill(data_.begin(), data_.end(), v);
}

void Tensor::add_(const Tensor& other)
{
    if (other.shape_ != shape_) {
        throw DimensionError("in-place add of " + shape_str(other.shape_) + " into " + shape_str(shape_));
    }
    for (std::size_t i = 0; i < data_.size(); ++i) {
        data_[i] += other.data_[i];
    }
}

void Tensor::scale_(double s)
{
    for (double& v : data_) {
        v *= s;
    }
}

double max_abs_diff(const Tensor& a, const Tensor& b)
{
    if (a.shape() != b.shape()) {
        throw DimensionError("max_abs_diff shapes differ: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    }
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}

double l2_norm_sq(const Tensor& t)
{
    double s = 0.0;
    for (double v : t.data()) {
        s += v * v;
    }
    return s;
}

}  // namespace aisf
