#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "gcs/nn/tensor.hpp"

namespace gcs::nn {

// Graph node: a value, its gradient buffer and the closure that pushes the gradient to parents.
struct Node {
  Tensor value;
  std::vector<double> grad;  // empty until needed
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  std::vector<double>& grad_buffer() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
    return grad;
  }
};

class Var {
 public:
  Var() = default;
  explicit Var(Tensor value, bool requires_grad = false);

  const Tensor& value() const { return node_->value; }
  Tensor& mutable_value() const { return node_->value; }
  const Shape& shape() const { return node_->value.shape; }
  std::size_t size() const { return node_->value.size(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  // Gradient accumulated by backward(); zeros when none was propagated.
  std::vector<double> grad() const;
  void zero_grad() { node_->grad.clear(); }
  bool defined() const { return static_cast<bool>(node_); }

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

// Result node of an op. When no parent needs a gradient (or grad mode is off) the closure is dropped.
Var make_result(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backward);

// Gradient of a scalar `loss` with respect to every reachable node that requires it.
void backward(const Var& loss);

bool grad_enabled();

// Disables graph recording in its scope (inference).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

}  // namespace gcs::nn
