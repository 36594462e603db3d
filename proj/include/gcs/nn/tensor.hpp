#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace gcs::nn {

using Shape = std::vector<int>;

std::size_t shape_size(const Shape& s);
std::string shape_string(const Shape& s);

// Dense row-major f64 array with up to six axes.
struct Tensor {
  Shape shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(Shape s, double fill = 0.0);
  Tensor(Shape s, std::vector<double> values);

  std::size_t size() const { return data.size(); }
  int rank() const { return static_cast<int>(shape.size()); }
  int dim(int axis) const { return shape[axis < 0 ? axis + rank() : axis]; }
  double* ptr() { return data.data(); }
  const double* ptr() const { return data.data(); }
  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }
};

}  // namespace gcs::nn
