#include <doctest.h>

#include <chrono>
#include <cmath>
#include <filesystem>

#include "gcs/common/error.hpp"
#include "gcs/common/fileio.hpp"
#include "gcs/surrogate/checkpoint.hpp"
#include "gcs/surrogate/data.hpp"
#include "gcs/surrogate/net.hpp"
#include "gcs/surrogate/train.hpp"
#include "../support/gradcheck.hpp"

using namespace gcs;
using namespace gcs::surrogate;
using gcs::testing::random_tensor;

namespace {

NetSpec tiny_spec(TargetKind t, int n_t = 2) {
  NetSpec s = NetSpec::reduced(t, 8, 8, 8, n_t);
  s.widths = {4, 8, 8, 8};
  s.lstm_width = 8;
  s.mlp_width = 8;
  return s;
}

}  // namespace

TEST_CASE("shape contract at desk size") {
  NetSpec spec = NetSpec::reduced(TargetKind::saturation, 16, 16, 16, 5);
  SurrogateNet net(spec);
  Rng rng(1);
  ShapeTrace trace;
  const auto y = net.forward(nn::constant(random_tensor({1, 16, 16, 16, 3}, rng)), &trace);
  CHECK(y.shape() == nn::Shape{1, 5, 16, 16, 16, 1});
  const auto [c1, c2, c3, c4] = spec.widths;
  const int L = spec.lstm_width;
  const ShapeTrace expected{{"F1", {1, 16, 16, 16, c1}}, {"F2", {1, 8, 8, 8, c2}},  {"F3", {1, 8, 8, 8, c3}},
                            {"F4", {1, 4, 4, 4, c4}},    {"F5", {1, 2, 2, 2, c4}},  {"H", {5, 4, 4, 4, L}},
                            {"G1", {5, 4, 4, 4, c4}},    {"D1", {5, 4, 4, 4, L}},   {"G2", {5, 8, 8, 8, c3}},
                            {"D2", {5, 8, 8, 8, c3}},    {"G3", {5, 8, 8, 8, c2}},  {"D3", {5, 8, 8, 8, c2}},
                            {"G4", {5, 16, 16, 16, c1}}, {"D4", {5, 16, 16, 16, c1}}, {"output", {1, 5, 16, 16, 16, 1}}};
  CHECK(trace == expected);
  for (double v : y.value().data) CHECK(v >= 0.0);
}

TEST_CASE("spec validation") {
  NetSpec s = tiny_spec(TargetKind::pressure);
  s.nx = 12;
  CHECK_THROWS_AS(SurrogateNet{s}, ShapeError);
  s = tiny_spec(TargetKind::pressure);
  s.widths[3] = 6;
  CHECK_THROWS_AS(SurrogateNet{s}, ShapeError);
  SurrogateNet net(tiny_spec(TargetKind::pressure));
  CHECK_THROWS_AS(net.forward(nn::constant(nn::Tensor({1, 8, 8, 16, 3}))), ShapeError);
  CHECK(NetSpec::from_json(net.spec().to_json()).digest() == net.spec().digest());
}

TEST_CASE("end-to-end gradient check on an 8^3 input") {
  for (TargetKind kind : {TargetKind::pressure, TargetKind::saturation}) {
    SurrogateNet net(tiny_spec(kind));
    Rng rng(2);
    nn::Var x = nn::parameter(random_tensor({1, 8, 8, 8, 3}, rng));
    std::vector<nn::Var> params{x};
    for (const auto& n : {"enc1.conv1.w", "enc4.norm1.gamma", "transformer.position", "transformer.layer0.attn.v.w",
                          "transformer.layer1.fc2.w", "lstm.gates.w", "gate1.psi.w", "gate2.wx.w", "gate3.wg.w",
                          "dec1.proj.w", "dec4.conv2.w", "head.w", "head.b"}) {
      params.push_back(net.parameters().get(n));
    }
    const auto r = gcs::testing::param_grad_check([&] { return net.forward(x); }, params, 3);
    INFO(target_name(kind) << " max relative error " << r.max_rel);
    CHECK(r.checked == 5 * static_cast<int>(params.size()));
    CHECK(r.max_rel < 1e-4);
  }
}

TEST_CASE("forward pass is deterministic") {
  Rng rng(4);
  const nn::Tensor x = random_tensor({2, 8, 8, 8, 3}, rng);
  SurrogateNet a(tiny_spec(TargetKind::saturation));
  SurrogateNet b(tiny_spec(TargetKind::saturation));
  CHECK(a.predict(x).data == a.predict(x).data);
  CHECK(a.predict(x).data == b.predict(x).data);
}

TEST_CASE("pressure normalization") {
  std::vector<flowsim::FieldSeries> stack(3);
  Rng rng(5);
  for (auto& s : stack) {
    s.dims = {2, 2, 2};
    s.times_years = {1.0, 2.0};
    s.pressure.resize(16);
    s.saturation.assign(16, 0.0);
    for (auto& p : s.pressure) p = 2e7 + 1e6 * rng.normal();
  }
  const auto n = normalize_pressure(stack);
  double m = 0.0, v = 0.0;
  for (double x : n.values) m += x;
  m /= n.values.size();
  for (double x : n.values) v += (x - m) * (x - m);
  v /= n.values.size();
  CHECK(std::abs(m) < 1e-10);
  CHECK(std::abs(std::sqrt(v) - 1.0) < 1e-10);
  const auto back = denormalize(n.values, n.stats);
  for (std::size_t i = 0; i < 16; ++i) CHECK(std::abs(back[i] - stack[0].pressure[i]) <= 1e-12 * stack[0].pressure[i]);

  const auto t = stack_targets(stack, TargetKind::pressure, &n.stats);
  CHECK(t.shape == nn::Shape{3, 2, 2, 2, 2, 1});
  CHECK(t.data == n.values);

  for (auto& s : stack) s.pressure.assign(16, 1.8e7);
  CHECK_THROWS_AS(normalize_pressure(stack), NumericalError);
}

TEST_CASE("input scaling divides by the channel maximum") {
  std::vector<nn::Tensor> ch{nn::Tensor({1, 1, 2, 3}, {2.0, 0.1, -1.0, -4.0, 0.3, 0.5}),
                             nn::Tensor({1, 1, 2, 3}, {1.0, 0.2, 0.25, 3.0, 0.1, 0.1})};
  const auto scale = fit_input_scale(ch);
  CHECK(scale == std::vector<double>{4.0, 0.3, 1.0});
  const auto x = stack_inputs(ch, scale);
  CHECK(x.shape == nn::Shape{2, 1, 1, 2, 3});
  CHECK(x.data[3] == -1.0);
  CHECK(x.data[4] == 1.0);
}

TEST_CASE("plateau scheduler halves the rate after each plateau") {
  PlateauScheduler s(5e-4, 10, 2.0, 1e-7);
  s.observe(1.0);
  for (int i = 0; i < 9; ++i) s.observe(1.0);
  CHECK(s.rate() == 5e-4);
  s.observe(1.0);
  CHECK(s.rate() == 2.5e-4);
  for (int i = 0; i < 10; ++i) s.observe(1.5);
  CHECK(s.rate() == doctest::Approx(1.25e-4).epsilon(1e-15));
  s.observe(0.5);
  for (int i = 0; i < 9; ++i) s.observe(0.5);
  CHECK(s.rate() == 1.25e-4);
  PlateauScheduler floor(1e-6, 1, 2.0, 1e-7);
  for (int i = 0; i < 20; ++i) floor.observe(1.0);
  CHECK(floor.rate() == 1e-7);
}

TEST_CASE("loss of an exact prediction is zero") {
  Rng rng(6);
  const nn::Tensor t = random_tensor({2, 3, 4}, rng);
  CHECK(loss(nn::constant(t), t).value().data[0] == 0.0);
}

TEST_CASE("training reduces the loss and is reproducible") {
  SurrogateNet a(tiny_spec(TargetKind::saturation));
  SurrogateNet b(tiny_spec(TargetKind::saturation));
  Rng rng(7);
  Dataset d{random_tensor({3, 8, 8, 8, 3}, rng), random_tensor({3, 2, 8, 8, 8, 1}, rng, 0.0, 1.0)};
  TrainConfig cfg;
  cfg.epochs = 15;
  cfg.batch_size = 2;
  cfg.learning_rate = 5e-3;
  const auto ra = train(a, d, cfg);
  const auto rb = train(b, d, cfg);
  CHECK(ra.loss_history == rb.loss_history);
  CHECK(ra.loss_history.back() < 0.5 * ra.loss_history.front());
  CHECK(evaluate_loss(a, d, 2) == doctest::Approx(evaluate_loss(a, d, 3)).epsilon(1e-12));
  CHECK_THROWS_AS(train(a, Dataset{}, cfg), ArgumentError);
}

TEST_CASE("checkpoint round trip and corruption") {
  SurrogateNet net(tiny_spec(TargetKind::pressure));
  net.pressure_norm = NormStats{1.9e7, 3.1e5};
  net.input_scale = {3.0, 0.3, 1.0};
  net.output_times = {2.0, 6.0};
  const auto bytes = serialize_checkpoint(net);
  SurrogateNet back = deserialize_checkpoint(bytes);
  CHECK(serialize_checkpoint(back) == bytes);
  CHECK(back.pressure_norm == net.pressure_norm);
  Rng rng(8);
  const nn::Tensor x = random_tensor({1, 8, 8, 8, 3}, rng);
  CHECK(back.predict(x).data == net.predict(x).data);

  std::string bad = bytes;
  bad[bad.size() / 2] ^= 0x10;
  CHECK_THROWS_WITH_AS(deserialize_checkpoint(bad), doctest::Contains("checksum"), IoError);
  bad = bytes;
  bad[8] = 9;
  CHECK_THROWS_WITH_AS(deserialize_checkpoint(bad), doctest::Contains("version"), IoError);
  bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_WITH_AS(deserialize_checkpoint(bad), doctest::Contains("magic"), IoError);
  CHECK_THROWS_WITH_AS(deserialize_checkpoint(bytes.substr(0, 40)), doctest::Contains("truncated"), IoError);

  const auto dir = std::filesystem::temp_directory_path() / "gcs_ckpt_test";
  save_checkpoint(net, dir / "p.ckpt");
  CHECK(read_file(dir / "p.ckpt") == bytes);
  CHECK(load_checkpoint(dir / "p.ckpt").spec().digest() == net.spec().digest());
  std::filesystem::remove_all(dir);

  SurrogateNet sat(tiny_spec(TargetKind::saturation));
  sat.pressure_norm = NormStats{};
  CHECK_THROWS_AS(serialize_checkpoint(sat), ArgumentError);
}
