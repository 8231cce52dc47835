#include "expeval/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "expeval/errors.hpp"

namespace expeval {

int Tensor::shape_size(const std::vector<int>& shape) {
  int n = 1;
  for (int d : shape) {
    if (d <= 0) throw ShapeError("tensor dimension must be positive, got " + std::to_string(d));
    n *= d;
  }
  return n;
}

std::string Tensor::shape_str(const std::vector<int>& shape) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ")";
  return os.str();
}

Tensor::Tensor(std::vector<int> shape, double fill)
    : shape_(std::move(shape)), data_(static_cast<size_t>(shape_size(shape_)), fill) {}

Tensor::Tensor(std::vector<int> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_size(shape_) != static_cast<int>(data_.size())) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_str(shape_));
  }
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double Tensor::sum() const {
  double s = 0.0;
  for (double v : data_) s += v;
  return s;
}

double Tensor::min() const { return *std::min_element(data_.begin(), data_.end()); }
double Tensor::max() const { return *std::max_element(data_.begin(), data_.end()); }

Tensor Tensor::reshaped(std::vector<int> shape) const {
  if (shape_size(shape) != size()) {
    throw ShapeError("cannot reshape " + shape_str(shape_) + " into " + shape_str(shape));
  }
  return Tensor(std::move(shape), data_);
}

}  // namespace expeval
