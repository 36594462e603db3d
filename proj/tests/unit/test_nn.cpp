#include <doctest.h>

#include <cmath>
#include <numeric>

#include "gcs/common/error.hpp"
#include "gcs/nn/kernels.hpp"
#include "gcs/nn/layers.hpp"
#include "gcs/nn/ops.hpp"
#include "../support/gradcheck.hpp"

using namespace gcs;
using namespace gcs::nn;
using gcs::testing::grad_check;
using gcs::testing::offset_tensor;
using gcs::testing::random_tensor;

namespace {

constexpr double kPrimitiveTol = 1e-5;

void check_primitive(const char* name, const std::function<Var(const std::vector<Var>&)>& f, std::vector<Tensor> in,
                     std::uint64_t seed) {
  const auto r = grad_check(f, std::move(in), seed);
  INFO(std::string(name) << " max relative error " << r.max_rel);
  CHECK(r.checked >= 5);
  CHECK(r.max_rel < kPrimitiveTol);
}

}  // namespace

TEST_CASE("1x1x1 unit kernel is the identity") {
  Rng rng(3);
  const Tensor x = random_tensor({2, 3, 2, 4, 1}, rng);
  Var y = conv3d(constant(x), constant(Tensor({1, 1, 1, 1, 1}, 1.0)), Var(), 1, 0);
  CHECK(y.value().data == x.data);
}

TEST_CASE("softmax rows sum to one") {
  Rng rng(4);
  Var y = softmax(constant(random_tensor({7, 9}, rng, -30.0, 30.0)));
  for (int r = 0; r < 7; ++r) {
    double s = 0.0;
    for (int c = 0; c < 9; ++c) s += y.value().data[r * 9 + c];
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
}

TEST_CASE("elementwise primitives pass gradient checks") {
  Rng rng(5);
  const Shape s{3, 4};
  check_primitive("add", [](const auto& v) { return add(v[0], v[1]); }, {random_tensor(s, rng), random_tensor(s, rng)}, 1);
  check_primitive("sub", [](const auto& v) { return sub(v[0], v[1]); }, {random_tensor(s, rng), random_tensor(s, rng)}, 2);
  check_primitive("mul", [](const auto& v) { return mul(v[0], v[1]); }, {random_tensor(s, rng), random_tensor(s, rng)}, 3);
  check_primitive("scale", [](const auto& v) { return scale(v[0], -2.5); }, {random_tensor(s, rng)}, 4);
  check_primitive("relu", [](const auto& v) { return relu(v[0]); }, {offset_tensor(s, rng)}, 5);
  check_primitive("sigmoid", [](const auto& v) { return sigmoid(v[0]); }, {random_tensor(s, rng, -3, 3)}, 6);
  check_primitive("tanh", [](const auto& v) { return nn::tanh(v[0]); }, {random_tensor(s, rng, -2, 2)}, 7);
  check_primitive("sum", [](const auto& v) { return sum(v[0]); }, {random_tensor(s, rng)}, 8);
  check_primitive("mean", [](const auto& v) { return mean(v[0]); }, {random_tensor(s, rng)}, 9);
  const Tensor target = random_tensor(s, rng);
  check_primitive("mse", [&](const auto& v) { return mse(v[0], target); }, {random_tensor(s, rng)}, 10);
}

TEST_CASE("spatial primitives pass gradient checks") {
  Rng rng(6);
  check_primitive("conv3d k3 s1",
                  [](const auto& v) { return conv3d(v[0], v[1], v[2], 1, 1); },
                  {random_tensor({2, 4, 3, 5, 2}, rng), random_tensor({3, 3, 3, 2, 3}, rng), random_tensor({3}, rng)}, 11);
  check_primitive("conv3d k2 s2",
                  [](const auto& v) { return conv3d(v[0], v[1], v[2], 2, 0); },
                  {random_tensor({1, 4, 4, 6, 3}, rng), random_tensor({2, 2, 2, 3, 2}, rng), random_tensor({2}, rng)}, 12);
  check_primitive("conv3d no bias", [](const auto& v) { return conv3d(v[0], v[1], Var(), 1, 0); },
                  {random_tensor({1, 3, 3, 3, 2}, rng), random_tensor({1, 1, 1, 2, 4}, rng)}, 13);
  check_primitive("max_pool2", [](const auto& v) { return max_pool2(v[0]); }, {random_tensor({2, 4, 2, 4, 3}, rng)}, 14);
  check_primitive("upsample2", [](const auto& v) { return upsample2(v[0]); }, {random_tensor({1, 2, 3, 2, 2}, rng)}, 15);
}

TEST_CASE("dense-style primitives pass gradient checks") {
  Rng rng(7);
  check_primitive("layer_norm", [](const auto& v) { return layer_norm(v[0], v[1], v[2]); },
                  {random_tensor({5, 6}, rng), random_tensor({6}, rng), random_tensor({6}, rng)}, 16);
  check_primitive("dense", [](const auto& v) { return dense(v[0], v[1], v[2]); },
                  {random_tensor({2, 3, 4}, rng), random_tensor({4, 5}, rng), random_tensor({5}, rng)}, 17);
  check_primitive("softmax", [](const auto& v) { return softmax(v[0]); }, {random_tensor({4, 5}, rng, -2, 2)}, 18);
  check_primitive("bmm", [](const auto& v) { return bmm(v[0], v[1]); },
                  {random_tensor({2, 3, 4}, rng), random_tensor({2, 4, 5}, rng)}, 19);
  check_primitive("bmm transposed", [](const auto& v) { return bmm(v[0], v[1], true); },
                  {random_tensor({2, 3, 4}, rng), random_tensor({2, 5, 4}, rng)}, 20);
}

TEST_CASE("layout primitives pass gradient checks") {
  Rng rng(8);
  check_primitive("reshape", [](const auto& v) { return reshape(v[0], {6, 4}); }, {random_tensor({2, 3, 4}, rng)}, 21);
  check_primitive("permute", [](const auto& v) { return permute(v[0], {2, 0, 1}); }, {random_tensor({2, 3, 4}, rng)}, 22);
  check_primitive("concat_last", [](const auto& v) { return concat_last(v[0], v[1]); },
                  {random_tensor({2, 3, 2}, rng), random_tensor({2, 3, 5}, rng)}, 23);
  check_primitive("slice_last", [](const auto& v) { return slice_last(v[0], 1, 4); }, {random_tensor({3, 5}, rng)}, 24);
  check_primitive("repeat_leading", [](const auto& v) { return repeat_leading(v[0], 3); }, {random_tensor({2, 4}, rng)}, 25);
  check_primitive("stack_axis1", [](const auto& v) { return stack_axis1({v[0], v[1], v[0]}); },
                  {random_tensor({2, 3}, rng), random_tensor({2, 3}, rng)}, 26);
  check_primitive("add_broadcast_leading", [](const auto& v) { return add_broadcast_leading(v[0], v[1]); },
                  {random_tensor({3, 4, 2}, rng), random_tensor({4, 2}, rng)}, 27);
  check_primitive("mul_channel_broadcast", [](const auto& v) { return mul_channel_broadcast(v[0], v[1]); },
                  {random_tensor({2, 3, 4}, rng), random_tensor({2, 3, 1}, rng)}, 28);
}

TEST_CASE("primitives reject incompatible shapes") {
  Var a = constant(Tensor({2, 3}));
  Var b = constant(Tensor({3, 2}));
  CHECK_THROWS_AS(add(a, b), ShapeError);
  CHECK_THROWS_AS(dense(a, constant(Tensor({2, 2})), Var()), ShapeError);
  CHECK_THROWS_AS(conv3d(constant(Tensor({1, 2, 2, 2, 3})), constant(Tensor({3, 3, 3, 2, 1})), Var(), 1, 1), ShapeError);
  CHECK_THROWS_AS(max_pool2(constant(Tensor({1, 3, 2, 2, 1}))), ShapeError);
  CHECK_THROWS_AS(bmm(constant(Tensor({1, 2, 3})), constant(Tensor({1, 2, 3}))), ShapeError);
  CHECK_THROWS_AS(reshape(a, {5}), ShapeError);
  CHECK_THROWS_AS(Tensor({2, 2}, std::vector<double>(3)), ShapeError);
}

TEST_CASE("gradients accumulate over reused inputs") {
  Var x = parameter(Tensor({3}, std::vector<double>{1.0, -2.0, 0.5}));
  Var y = sum(add(mul(x, x), x));
  backward(y);
  const auto g = x.grad();
  CHECK(g[0] == doctest::Approx(3.0));
  CHECK(g[1] == doctest::Approx(-3.0));
  CHECK(g[2] == doctest::Approx(2.0));
}

TEST_CASE("no-grad mode records no graph") {
  Var x = parameter(Tensor({2}, 1.0));
  NoGradGuard guard;
  Var y = mul(x, x);
  CHECK_FALSE(y.requires_grad());
  CHECK(y.node()->parents.empty());
}

TEST_CASE("serial and parallel kernels agree bit for bit") {
  Rng rng(9);
  ConvGeom g{2, 6, 5, 4, 3, 4, 3, 1, 1};
  const Tensor x = random_tensor({2, 6, 5, 4, 3}, rng);
  const Tensor w = random_tensor({3, 3, 3, 3, 4}, rng);
  const Tensor b = random_tensor({4}, rng);
  const std::size_t on = static_cast<std::size_t>(g.n) * g.OX() * g.OY() * g.OZ() * g.co;
  std::vector<double> o1(on), o2(on);
  serial::conv3d_forward(g, x.ptr(), w.ptr(), b.ptr(), o1.data());
  parallel::conv3d_forward(g, x.ptr(), w.ptr(), b.ptr(), o2.data());
  CHECK(o1 == o2);
  const Tensor go = random_tensor({static_cast<int>(on)}, rng);
  std::vector<double> gi1(x.size()), gi2(x.size()), gw1(w.size()), gw2(w.size()), gb1(4), gb2(4);
  serial::conv3d_backward_input(g, go.ptr(), w.ptr(), gi1.data());
  parallel::conv3d_backward_input(g, go.ptr(), w.ptr(), gi2.data());
  serial::conv3d_backward_weight(g, x.ptr(), go.ptr(), gw1.data(), gb1.data());
  parallel::conv3d_backward_weight(g, x.ptr(), go.ptr(), gw2.data(), gb2.data());
  CHECK(gi1 == gi2);
  CHECK(gw1 == gw2);
  CHECK(gb1 == gb2);

  std::vector<double> p1(2 * 3 * 2 * 2 * 3), p2(p1.size());
  std::vector<int> a1(p1.size()), a2(p1.size());
  serial::max_pool2_forward(2, 6, 4, 4, 3, x.ptr(), p1.data(), a1.data());
  parallel::max_pool2_forward(2, 6, 4, 4, 3, x.ptr(), p2.data(), a2.data());
  CHECK(p1 == p2);
  CHECK(a1 == a2);
}

TEST_CASE("switching the kernel backend leaves results unchanged") {
  Rng rng(10);
  const Tensor x = random_tensor({1, 4, 4, 4, 2}, rng);
  const Tensor w = random_tensor({3, 3, 3, 2, 3}, rng);
  set_kernel_backend(KernelBackend::serial);
  const auto ys = conv3d(constant(x), constant(w), Var(), 1, 1).value().data;
  set_kernel_backend(KernelBackend::parallel);
  const auto yp = conv3d(constant(x), constant(w), Var(), 1, 1).value().data;
  CHECK(ys == yp);
}

TEST_CASE("residual block") {
  Rng rng(11);
  ParameterStore ps;
  auto block = ResidualBlock::create(ps, "rb", 3, 3, rng);
  const Tensor x = random_tensor({1, 4, 4, 4, 3}, rng);

  SUBCASE("zero convolutions reduce it to relu of the skip") {
    for (auto& [name, v] : ps.entries()) {
      if (name.find(".w") != std::string::npos) std::fill(v.mutable_value().data.begin(), v.mutable_value().data.end(), 0.0);
    }
    const auto y = block(constant(x)).value();
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y.data[i] == std::max(0.0, x.data[i]));
  }
  SUBCASE("projection changes the width and keeps the spatial shape") {
    auto wide = ResidualBlock::create(ps, "wide", 3, 5, rng);
    CHECK(wide(constant(x)).shape() == Shape{1, 4, 4, 4, 5});
    CHECK_THROWS_AS(wide(constant(Tensor({1, 4, 4, 4, 2}))), ShapeError);
  }
  SUBCASE("gradient check") {
    const auto r = grad_check(
        [&](const std::vector<Var>& v) {
          ResidualBlock b = block;
          b.conv1.w = v[1];
          b.norm2.gamma = v[2];
          return b(v[0]);
        },
        {x, block.conv1.w.value(), block.norm2.gamma.value()}, 31);
    CHECK(r.max_rel < kPrimitiveTol);
  }
}

TEST_CASE("attention gate") {
  Rng rng(12);
  ParameterStore ps;
  auto gate = AttentionGate::create(ps, "g", 3, 5, 2, rng);
  const Tensor x = random_tensor({2, 4, 4, 4, 3}, rng);
  const Tensor g = random_tensor({2, 2, 2, 2, 5}, rng);
  auto zero_psi = [&](double bias) {
    std::fill(gate.psi.w.mutable_value().data.begin(), gate.psi.w.mutable_value().data.end(), 0.0);
    gate.psi.b.mutable_value().data[0] = bias;
  };

  SUBCASE("coefficients lie strictly inside (0, 1)") {
    const auto a = gate.alpha(constant(x), constant(g)).value();
    CHECK(a.shape == Shape{2, 4, 4, 4, 1});
    for (double v : a.data) CHECK((v > 0.0 && v < 1.0));
  }
  SUBCASE("saturated open gate passes x through") {
    zero_psi(20.0);
    const auto y = gate(constant(x), constant(g)).value();
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(y.data[i] - x.data[i]) < 1e-8);
  }
  SUBCASE("closed gate blocks x") {
    zero_psi(-20.0);
    const auto y = gate(constant(x), constant(g)).value();
    for (double v : y.data) CHECK(std::abs(v) < 1e-8);
  }
  SUBCASE("size-one gate works at equal resolution") {
    auto same = AttentionGate::create(ps, "s", 3, 5, 1, rng);
    CHECK(same(constant(x), constant(random_tensor({2, 4, 4, 4, 5}, rng))).shape() == x.shape);
    CHECK_THROWS_AS(same(constant(x), constant(g)), ShapeError);
  }
  SUBCASE("gradient check") {
    const auto r = grad_check(
        [&](const std::vector<Var>& v) {
          AttentionGate a = gate;
          a.wx.w = v[2];
          a.psi.w = v[3];
          return a(v[0], v[1]);
        },
        {x, g, gate.wx.w.value(), gate.psi.w.value()}, 32);
    CHECK(r.max_rel < kPrimitiveTol);
  }
}

TEST_CASE("multi-head attention") {
  Rng rng(13);
  ParameterStore ps;
  auto mha = MultiHeadAttention::create(ps, "mha", 8, 4, rng);

  SUBCASE("attention rows are distributions") {
    Tensor w;
    mha(constant(random_tensor({2, 6, 8}, rng)), &w);
    CHECK(w.shape == Shape{8, 6, 6});
    for (int r = 0; r < 8 * 6; ++r) {
      double s = 0.0;
      for (int c = 0; c < 6; ++c) {
        CHECK(w.data[r * 6 + c] >= 0.0);
        s += w.data[r * 6 + c];
      }
      CHECK(std::abs(s - 1.0) < 1e-12);
    }
  }
  SUBCASE("a single token attends only to itself") {
    const Tensor t = random_tensor({3, 1, 8}, rng);
    const auto a = mha.attend(constant(t)).value();
    const auto v = mha.v(constant(t)).value();
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a.data[i] - v.data[i]) < 1e-14);
  }
  SUBCASE("head count must divide the width") {
    ParameterStore other;
    CHECK_THROWS_AS(MultiHeadAttention::create(other, "bad", 6, 4, rng), ShapeError);
  }
}

TEST_CASE("transformer block") {
  Rng rng(14);
  ParameterStore ps;
  auto block = TransformerBlock::create(ps, "tb", 8, 8, 4, 16, 2, rng);
  const Tensor tokens = random_tensor({2, 8, 8}, rng);

  SUBCASE("permuting tokens and embedding permutes the output") {
    const std::vector<int> perm{3, 0, 7, 1, 6, 2, 5, 4};
    const auto y = block.forward_tokens(constant(tokens)).value();
    Tensor pt(tokens.shape), pe(block.position.shape());
    const auto& e = block.position.value();
    for (int b = 0; b < 2; ++b) {
      for (int t = 0; t < 8; ++t) {
        for (int c = 0; c < 8; ++c) pt.data[(b * 8 + t) * 8 + c] = tokens.data[(b * 8 + perm[t]) * 8 + c];
      }
    }
    for (int t = 0; t < 8; ++t) {
      for (int c = 0; c < 8; ++c) pe.data[t * 8 + c] = e.data[perm[t] * 8 + c];
    }
    TransformerBlock permuted = block;
    permuted.position = constant(pe);
    const auto yp = permuted.forward_tokens(constant(pt)).value();
    for (int b = 0; b < 2; ++b) {
      for (int t = 0; t < 8; ++t) {
        for (int c = 0; c < 8; ++c) {
          CHECK(std::abs(yp.data[(b * 8 + t) * 8 + c] - y.data[(b * 8 + perm[t]) * 8 + c]) < 1e-12);
        }
      }
    }
  }
  SUBCASE("spatial map round trip and shape checks") {
    CHECK(block(constant(random_tensor({1, 2, 2, 2, 8}, rng))).shape() == Shape{1, 2, 2, 2, 8});
    CHECK_THROWS_AS(block(constant(Tensor({1, 2, 2, 1, 8}))), ShapeError);
  }
  SUBCASE("gradient check") {
    const auto r = grad_check(
        [&](const std::vector<Var>& v) {
          TransformerBlock b = block;
          b.position = v[1];
          b.layers[0].attn.q.w = v[2];
          b.layers[1].fc1.w = v[3];
          return b.forward_tokens(v[0]);
        },
        {tokens, block.position.value(), block.layers[0].attn.q.w.value(), block.layers[1].fc1.w.value()}, 33);
    CHECK(r.max_rel < kPrimitiveTol);
  }
}

TEST_CASE("convolutional LSTM") {
  Rng rng(15);
  ParameterStore ps;
  auto lstm = ConvLstm::create(ps, "lstm", 2, 3, rng);
  const Tensor x = random_tensor({1, 3, 3, 2, 2}, rng);

  CHECK(lstm(constant(x), 1).size() == 1);
  CHECK(lstm(constant(x), 4).size() == 4);
  CHECK(lstm(constant(x), 2)[1].shape() == Shape{1, 3, 3, 2, 3});
  CHECK_THROWS_AS(lstm(constant(x), 0), ArgumentError);

  SUBCASE("closed output gate silences the hidden state") {
    ConvLstm closed = lstm;
    Tensor b = lstm.gates.b.value();
    for (int c = 6; c < 9; ++c) b.data[c] = -20.0;
    closed.gates.b = constant(b);
    for (const auto& h : closed(constant(x), 3)) {
      for (double v : h.value().data) CHECK(std::abs(v) < 1e-8);
    }
  }
  SUBCASE("gradient check through three steps") {
    const auto r = grad_check(
        [&](const std::vector<Var>& v) {
          ConvLstm l = lstm;
          l.gates.w = v[1];
          l.gates.b = v[2];
          return stack_axis1(l(v[0], 3));
        },
        {x, lstm.gates.w.value(), lstm.gates.b.value()}, 34);
    CHECK(r.max_rel < kPrimitiveTol);
  }
}
