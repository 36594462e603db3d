#include "gcs/nn/layers.hpp"

#include <cmath>

#include "gcs/common/error.hpp"

namespace gcs::nn {

Var ParameterStore::add(const std::string& name, Tensor init) {
  for (const auto& [n, v] : entries_) {
    if (n == name) throw ArgumentError("duplicate parameter '" + name + "'");
  }
  Var v = parameter(std::move(init));
  entries_.emplace_back(name, v);
  return v;
}

const Var& ParameterStore::get(const std::string& name) const {
  for (const auto& [n, v] : entries_) {
    if (n == name) return v;
  }
  throw ArgumentError("unknown parameter '" + name + "'");
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.second.size();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& e : entries_) e.second.zero_grad();
}

Tensor lecun_uniform(const Shape& shape, int fan_in, Rng& rng) {
  Tensor t(shape);
  const double a = std::sqrt(3.0 / fan_in);
  for (auto& v : t.data) v = rng.uniform(-a, a);
  return t;
}

Tensor normal_tensor(const Shape& shape, double stddev, Rng& rng) {
  Tensor t(shape);
  for (auto& v : t.data) v = stddev * rng.normal();
  return t;
}

Conv3d Conv3d::create(ParameterStore& ps, const std::string& name, int ci, int co, int k, int stride, Rng& rng) {
  Conv3d c;
  c.w = ps.add(name + ".w", lecun_uniform({k, k, k, ci, co}, k * k * k * ci, rng));
  c.b = ps.add(name + ".b", Tensor({co}));
  c.stride = stride;
  c.pad = stride == 1 ? (k - 1) / 2 : 0;
  return c;
}

LayerNorm LayerNorm::create(ParameterStore& ps, const std::string& name, int c) {
  LayerNorm n;
  n.gamma = ps.add(name + ".gamma", Tensor({c}, 1.0));
  n.beta = ps.add(name + ".beta", Tensor({c}));
  return n;
}

Dense Dense::create(ParameterStore& ps, const std::string& name, int ci, int co, Rng& rng) {
  Dense d;
  d.w = ps.add(name + ".w", lecun_uniform({ci, co}, ci, rng));
  d.b = ps.add(name + ".b", Tensor({co}));
  return d;
}

ResidualBlock ResidualBlock::create(ParameterStore& ps, const std::string& name, int ci, int co, Rng& rng) {
  ResidualBlock r;
  r.conv1 = Conv3d::create(ps, name + ".conv1", ci, co, 3, 1, rng);
  r.norm1 = LayerNorm::create(ps, name + ".norm1", co);
  r.conv2 = Conv3d::create(ps, name + ".conv2", co, co, 3, 1, rng);
  r.norm2 = LayerNorm::create(ps, name + ".norm2", co);
  if (ci != co) r.proj = Conv3d::create(ps, name + ".proj", ci, co, 1, 1, rng);
  return r;
}

Var ResidualBlock::operator()(const Var& x) const {
  const int ci = conv1.w.shape()[3];
  if (x.shape().size() != 5 || x.shape()[4] != ci) {
    throw ShapeError("residual block expects " + std::to_string(ci) + " channels, got " + shape_string(x.shape()));
  }
  Var h = relu(norm1(conv1(x)));
  h = norm2(conv2(h));
  return relu(add(h, proj ? (*proj)(x) : x));
}

AttentionGate AttentionGate::create(ParameterStore& ps, const std::string& name, int cx, int cg, int stride, Rng& rng) {
  if (stride != 1 && stride != 2) throw ArgumentError("attention gate stride must be 1 or 2");
  AttentionGate a;
  a.stride = stride;
  a.wx = Conv3d::create(ps, name + ".wx", cx, cx, stride, stride, rng);
  a.wg = Conv3d::create(ps, name + ".wg", cg, cx, 1, 1, rng);
  a.psi = Conv3d::create(ps, name + ".psi", cx, 1, 1, 1, rng);
  return a;
}

Var AttentionGate::alpha(const Var& x, const Var& g) const {
  const auto& xs = x.shape();
  const auto& gs = g.shape();
  if (xs.size() != 5 || gs.size() != 5 || xs[0] != gs[0] || xs[1] != stride * gs[1] || xs[2] != stride * gs[2] ||
      xs[3] != stride * gs[3]) {
    throw ShapeError("attention gate: x " + shape_string(xs) + " and g " + shape_string(gs) + " differ by other than stride " +
                     std::to_string(stride));
  }
  Var a = sigmoid(psi(relu(add(wx(x), wg(g)))));
  return stride == 2 ? upsample2(a) : a;
}

Var AttentionGate::operator()(const Var& x, const Var& g) const { return mul_channel_broadcast(x, alpha(x, g)); }

MultiHeadAttention MultiHeadAttention::create(ParameterStore& ps, const std::string& name, int c, int heads, Rng& rng) {
  if (heads < 1 || c % heads != 0) {
    throw ShapeError("channel count " + std::to_string(c) + " is not divisible by " + std::to_string(heads) + " heads");
  }
  MultiHeadAttention m;
  m.heads = heads;
  m.q = Dense::create(ps, name + ".q", c, c, rng);
  m.k = Dense::create(ps, name + ".k", c, c, rng);
  m.v = Dense::create(ps, name + ".v", c, c, rng);
  m.o = Dense::create(ps, name + ".o", c, c, rng);
  return m;
}

Var MultiHeadAttention::attend(const Var& tokens, Tensor* weights) const {
  const auto& s = tokens.shape();
  if (s.size() != 3) throw ShapeError("attention expects [B, T, C] tokens");
  const int B = s[0], T = s[1], C = s[2];
  if (C % heads != 0) throw ShapeError("token channels not divisible by head count");
  const int dh = C / heads;
  auto split = [&](const Var& t) {
    return reshape(permute(reshape(t, {B, T, heads, dh}), {0, 2, 1, 3}), {B * heads, T, dh});
  };
  Var qh = split(q(tokens));
  Var kh = split(k(tokens));
  Var vh = split(v(tokens));
  Var a = softmax(scale(bmm(qh, kh, true), 1.0 / std::sqrt(static_cast<double>(dh))));
  if (weights) *weights = a.value();
  Var out = bmm(a, vh);
  return reshape(permute(reshape(out, {B, heads, T, dh}), {0, 2, 1, 3}), {B, T, C});
}

TransformerLayer TransformerLayer::create(ParameterStore& ps, const std::string& name, int c, int heads, int mlp,
                                          Rng& rng) {
  TransformerLayer l;
  l.norm1 = LayerNorm::create(ps, name + ".norm1", c);
  l.attn = MultiHeadAttention::create(ps, name + ".attn", c, heads, rng);
  l.norm2 = LayerNorm::create(ps, name + ".norm2", c);
  l.fc1 = Dense::create(ps, name + ".fc1", c, mlp, rng);
  l.fc2 = Dense::create(ps, name + ".fc2", mlp, c, rng);
  return l;
}

Var TransformerLayer::operator()(const Var& tokens, Tensor* weights) const {
  Var h = add(tokens, attn(norm1(tokens), weights));
  return add(h, fc2(relu(fc1(norm2(h)))));
}

TransformerBlock TransformerBlock::create(ParameterStore& ps, const std::string& name, int tokens, int c, int heads,
                                          int mlp, int n_layers, Rng& rng) {
  TransformerBlock b;
  b.position = ps.add(name + ".position", normal_tensor({tokens, c}, 0.02, rng));
  for (int i = 0; i < n_layers; ++i) {
    b.layers.push_back(TransformerLayer::create(ps, name + ".layer" + std::to_string(i), c, heads, mlp, rng));
  }
  return b;
}

Var TransformerBlock::forward_tokens(const Var& tokens) const {
  Var h = add_broadcast_leading(tokens, position);
  for (const auto& l : layers) h = l(h);
  return h;
}

Var TransformerBlock::operator()(const Var& x) const {
  const auto& s = x.shape();
  if (s.size() != 5) throw ShapeError("transformer block expects [N, X, Y, Z, C]");
  const int T = s[1] * s[2] * s[3];
  if (T != position.shape()[0] || s[4] != position.shape()[1]) {
    throw ShapeError("transformer block built for " + shape_string(position.shape()) + " tokens, got " + shape_string(s));
  }
  return reshape(forward_tokens(reshape(x, {s[0], T, s[4]})), s);
}

ConvLstm ConvLstm::create(ParameterStore& ps, const std::string& name, int ci, int hidden, Rng& rng) {
  ConvLstm l;
  l.hidden = hidden;
  l.gates = Conv3d::create(ps, name + ".gates", ci + hidden, 4 * hidden, 3, 1, rng);
  return l;
}

std::vector<Var> ConvLstm::operator()(const Var& x, int n_t) const {
  if (n_t < 1) throw ArgumentError("convLSTM needs at least one step");
  Shape hs = x.shape();
  hs.back() = hidden;
  Var h = constant(Tensor(hs));
  Var c = constant(Tensor(hs));
  std::vector<Var> out;
  const int H = hidden;
  for (int t = 0; t < n_t; ++t) {
    Var z = gates(concat_last(x, h));
    Var i = sigmoid(slice_last(z, 0, H));
    Var f = sigmoid(slice_last(z, H, 2 * H));
    Var o = sigmoid(slice_last(z, 2 * H, 3 * H));
    Var g = tanh(slice_last(z, 3 * H, 4 * H));
    c = add(mul(f, c), mul(i, g));
    h = mul(o, tanh(c));
    out.push_back(h);
  }
  return out;
}

}  // namespace gcs::nn
