#include "gcs/nn/tensor.hpp"

#include <utility>

#include "gcs/common/error.hpp"

namespace gcs::nn {

std::size_t shape_size(const Shape& s) {
  std::size_t n = 1;
  for (int d : s) {
    if (d < 0) throw ShapeError("negative tensor dimension");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

std::string shape_string(const Shape& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(s[i]);
  }
  return out + ")";
}

Tensor::Tensor(Shape s, double fill) : shape(std::move(s)) {
  if (shape.size() > 6) throw ShapeError("tensors have at most six axes");
  data.assign(shape_size(shape), fill);
}

Tensor::Tensor(Shape s, std::vector<double> values) : shape(std::move(s)), data(std::move(values)) {
  if (shape.size() > 6) throw ShapeError("tensors have at most six axes");
  if (data.size() != shape_size(shape)) throw ShapeError("value count does not match shape " + shape_string(shape));
}

}  // namespace gcs::nn
