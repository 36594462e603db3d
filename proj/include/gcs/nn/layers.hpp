#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gcs/common/rng.hpp"
#include "gcs/nn/autodiff.hpp"
#include "gcs/nn/ops.hpp"

namespace gcs::nn {

// Ordered named trainable tensors. Registration order is the checkpoint order.
class ParameterStore {
 public:
  Var add(const std::string& name, Tensor init);
  const Var& get(const std::string& name) const;
  const std::vector<std::pair<std::string, Var>>& entries() const { return entries_; }
  std::size_t scalar_count() const;
  void zero_grad();

 private:
  std::vector<std::pair<std::string, Var>> entries_;
};

// U(-a, a) with a = sqrt(3 / fan_in).
Tensor lecun_uniform(const Shape& shape, int fan_in, Rng& rng);
Tensor normal_tensor(const Shape& shape, double stddev, Rng& rng);

struct Conv3d {
  Var w, b;
  int stride = 1;
  int pad = 1;

  // Same-padding for stride 1; no padding for stride > 1 (kernel equal to stride).
  static Conv3d create(ParameterStore& ps, const std::string& name, int ci, int co, int k, int stride, Rng& rng);
  Var operator()(const Var& x) const { return conv3d(x, w, b, stride, pad); }
};

struct LayerNorm {
  Var gamma, beta;
  double eps = 1e-5;

  static LayerNorm create(ParameterStore& ps, const std::string& name, int c);
  Var operator()(const Var& x) const { return layer_norm(x, gamma, beta, eps); }
};

struct Dense {
  Var w, b;

  static Dense create(ParameterStore& ps, const std::string& name, int ci, int co, Rng& rng);
  Var operator()(const Var& x) const { return dense(x, w, b); }
};

// conv -> norm -> relu -> conv -> norm, plus skip (1x1 projection when widths differ), then relu.
struct ResidualBlock {
  Conv3d conv1, conv2;
  LayerNorm norm1, norm2;
  std::optional<Conv3d> proj;

  static ResidualBlock create(ParameterStore& ps, const std::string& name, int ci, int co, Rng& rng);
  Var operator()(const Var& x) const;
};

// alpha = sigmoid(psi(relu(Wx x + Wg g))) at g's resolution, upsampled to x's; returns x * alpha.
struct AttentionGate {
  Conv3d wx, wg, psi;
  int stride = 2;

  static AttentionGate create(ParameterStore& ps, const std::string& name, int cx, int cg, int stride, Rng& rng);
  Var alpha(const Var& x, const Var& g) const;
  Var operator()(const Var& x, const Var& g) const;
};

struct MultiHeadAttention {
  Dense q, k, v, o;
  int heads = 4;

  static MultiHeadAttention create(ParameterStore& ps, const std::string& name, int c, int heads, Rng& rng);
  // Concatenated head outputs before the output projection. `weights` receives [B * heads, T, T].
  Var attend(const Var& tokens, Tensor* weights = nullptr) const;
  Var operator()(const Var& tokens, Tensor* weights = nullptr) const { return o(attend(tokens, weights)); }
};

// Pre-norm: h = x + MHA(LN(x)); out = h + MLP(LN(h)).
struct TransformerLayer {
  LayerNorm norm1, norm2;
  MultiHeadAttention attn;
  Dense fc1, fc2;

  static TransformerLayer create(ParameterStore& ps, const std::string& name, int c, int heads, int mlp, Rng& rng);
  Var operator()(const Var& tokens, Tensor* weights = nullptr) const;
};

// Tokens are the voxels of a [N, X, Y, Z, C] map, with a trainable positional embedding [X*Y*Z, C].
struct TransformerBlock {
  Var position;
  std::vector<TransformerLayer> layers;

  static TransformerBlock create(ParameterStore& ps, const std::string& name, int tokens, int c, int heads, int mlp,
                                 int n_layers, Rng& rng);
  Var forward_tokens(const Var& tokens) const;
  Var operator()(const Var& x) const;
};

// Gates i, f, o, g from one 3^3 convolution over concat(x, h).
struct ConvLstm {
  Conv3d gates;
  int hidden = 0;

  static ConvLstm create(ParameterStore& ps, const std::string& name, int ci, int hidden, Rng& rng);
  // Zero initial state, the same input every step; returns n_t hidden maps.
  std::vector<Var> operator()(const Var& x, int n_t) const;
};

}  // namespace gcs::nn
