#pragma once

#include <cstdint>
#include <vector>

#include "gcs/nn/autodiff.hpp"
#include "gcs/nn/tensor.hpp"

// Differentiable primitives. Spatial tensors are channels-last [N, X, Y, Z, C]; dense-style ops act on the
// last axis.
namespace gcs::nn {

enum class KernelBackend { serial, parallel };
void set_kernel_backend(KernelBackend b);
KernelBackend kernel_backend();

class BranchRecorder;
void record_branch(std::uint64_t v);

// Fingerprint of the branch choices (relu masks, pool winners) made on this thread while alive. Finite-difference
// checks use it to discard stencils that straddle a kink.
class BranchRecorder {
 public:
  BranchRecorder();
  ~BranchRecorder();
  BranchRecorder(const BranchRecorder&) = delete;
  BranchRecorder& operator=(const BranchRecorder&) = delete;
  std::uint64_t fingerprint() const { return hash_; }

 private:
  friend void record_branch(std::uint64_t v);
  std::uint64_t hash_;
  BranchRecorder* previous_;
};

Var constant(Tensor t);
Var parameter(Tensor t);

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);

Var relu(const Var& x);
Var sigmoid(const Var& x);
Var tanh(const Var& x);

// w: [k, k, k, ci, co]; b: [co] or undefined.
Var conv3d(const Var& x, const Var& w, const Var& b, int stride, int pad);
Var max_pool2(const Var& x);
Var upsample2(const Var& x);

Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps = 1e-5);
// w: [ci, co]; b: [co] or undefined.
Var dense(const Var& x, const Var& w, const Var& b);
Var softmax(const Var& x);
// [B, M, K] x [B, K, N] (or [B, N, K] when transpose_b) -> [B, M, N].
Var bmm(const Var& a, const Var& b, bool transpose_b = false);

Var reshape(const Var& x, Shape shape);
Var permute(const Var& x, const std::vector<int>& axes);
Var concat_last(const Var& a, const Var& b);
Var slice_last(const Var& x, int begin, int end);
// [N, ...] -> [N * times, ...] with each leading entry repeated `times` times consecutively.
Var repeat_leading(const Var& x, int times);
// T tensors of shape [N, ...] -> [N, T, ...].
Var stack_axis1(const std::vector<Var>& xs);
// x: [B, T, C] plus table [T, C] broadcast over B.
Var add_broadcast_leading(const Var& x, const Var& table);
// x: [..., C] times a: [..., 1].
Var mul_channel_broadcast(const Var& x, const Var& a);

Var sum(const Var& x);
Var mean(const Var& x);
// Mean of squared differences over all elements.
Var mse(const Var& prediction, const Tensor& target);

}  // namespace gcs::nn
