#include "gcs/surrogate/net.hpp"

#include "gcs/common/error.hpp"
#include "gcs/common/hash.hpp"

namespace gcs::surrogate {

namespace {
constexpr double kHeadWeightScale = 0.1;
constexpr double kReluHeadBias = 0.05;
}  // namespace

using nn::Var;

std::string_view target_name(TargetKind t) { return t == TargetKind::pressure ? "pressure" : "saturation"; }

TargetKind target_from_name(std::string_view name) {
  if (name == "pressure") return TargetKind::pressure;
  if (name == "saturation") return TargetKind::saturation;
  throw ArgumentError("unknown target '" + std::string(name) + "'");
}

NetSpec NetSpec::reduced(TargetKind target, int nx, int ny, int nz, int n_t) {
  NetSpec s;
  s.widths = {4, 8, 8, 16};
  s.lstm_width = 16;
  s.nx = nx;
  s.ny = ny;
  s.nz = nz;
  s.n_t = n_t;
  s.target = target;
  return s;
}

void NetSpec::validate() const {
  if (in_channels < 1 || lstm_width < 1 || mlp_width < 1 || transformer_layers < 0 || n_t < 1) {
    throw ArgumentError("network widths and counts must be positive");
  }
  for (int w : widths) {
    if (w < 1) throw ArgumentError("network widths must be positive");
  }
  if (pool_levels != 3) throw ArgumentError("only three pooling levels are supported");
  if (nx < 8 || ny < 8 || nz < 8 || nx % 8 || ny % 8 || nz % 8) {
    throw ShapeError("input dims must be positive multiples of 8");
  }
  if (heads < 1 || widths[3] % heads) throw ShapeError("bottleneck width must be divisible by the head count");
}

nlohmann::json NetSpec::to_json() const {
  return {{"in_channels", in_channels},
          {"widths", widths},
          {"lstm_width", lstm_width},
          {"pool_levels", pool_levels},
          {"heads", heads},
          {"mlp_width", mlp_width},
          {"transformer_layers", transformer_layers},
          {"n_t", n_t},
          {"dims", {nx, ny, nz}},
          {"target", std::string(target_name(target))},
          {"seed", seed}};
}

NetSpec NetSpec::from_json(const nlohmann::json& j) {
  NetSpec s;
  s.in_channels = j.at("in_channels").get<int>();
  s.widths = j.at("widths").get<std::array<int, 4>>();
  s.lstm_width = j.at("lstm_width").get<int>();
  s.pool_levels = j.at("pool_levels").get<int>();
  s.heads = j.at("heads").get<int>();
  s.mlp_width = j.at("mlp_width").get<int>();
  s.transformer_layers = j.at("transformer_layers").get<int>();
  s.n_t = j.at("n_t").get<int>();
  const auto dims = j.at("dims").get<std::array<int, 3>>();
  s.nx = dims[0];
  s.ny = dims[1];
  s.nz = dims[2];
  s.target = target_from_name(j.at("target").get<std::string>());
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

std::uint64_t NetSpec::digest() const { return fnv1a(to_json().dump()); }

SurrogateNet::SurrogateNet(const NetSpec& spec) : spec_(spec) {
  spec_.validate();
  input_scale.assign(spec_.in_channels, 1.0);
  if (spec_.target == TargetKind::pressure) pressure_norm = NormStats{};
  Rng rng(spec_.seed, "surrogate-init", static_cast<std::uint64_t>(spec_.target));
  const auto [c1, c2, c3, c4] = spec_.widths;
  const int L = spec_.lstm_width;
  auto& ps = params_;
  enc1_ = nn::ResidualBlock::create(ps, "enc1", spec_.in_channels, c1, rng);
  enc2_ = nn::ResidualBlock::create(ps, "enc2", c1, c2, rng);
  enc3_ = nn::ResidualBlock::create(ps, "enc3", c2, c3, rng);
  enc4_ = nn::ResidualBlock::create(ps, "enc4", c3, c4, rng);
  transformer_ = nn::TransformerBlock::create(ps, "transformer", spec_.tokens(), c4, spec_.heads, spec_.mlp_width,
                                              spec_.transformer_layers, rng);
  lstm_ = nn::ConvLstm::create(ps, "lstm", c4, L, rng);
  gate1_ = nn::AttentionGate::create(ps, "gate1", c4, c4, 2, rng);
  dec1_ = nn::ResidualBlock::create(ps, "dec1", L + c4, L, rng);
  gate2_ = nn::AttentionGate::create(ps, "gate2", c3, L, 2, rng);
  dec2_ = nn::ResidualBlock::create(ps, "dec2", L + c3, c3, rng);
  gate3_ = nn::AttentionGate::create(ps, "gate3", c2, c3, 1, rng);
  dec3_ = nn::ResidualBlock::create(ps, "dec3", c3 + c2, c2, rng);
  gate4_ = nn::AttentionGate::create(ps, "gate4", c1, c2, 2, rng);
  dec4_ = nn::ResidualBlock::create(ps, "dec4", c2 + c1, c1, rng);
  head_ = nn::Conv3d::create(ps, "head", c1, 1, 3, 1, rng);
  // Small initial head output; the rectified head also starts in its linear region so early updates cannot silence it.
  for (auto& v : head_.w.mutable_value().data) v *= kHeadWeightScale;
  if (spec_.relu_head()) {
    for (auto& v : head_.b.mutable_value().data) v = kReluHeadBias;
  }
}

Var SurrogateNet::forward(const Var& x, ShapeTrace* trace) const {
  const auto& s = x.shape();
  if (s.size() != 5 || s[1] != spec_.nz || s[2] != spec_.ny || s[3] != spec_.nx || s[4] != spec_.in_channels) {
    throw ShapeError("network built for [N, " + std::to_string(spec_.nz) + ", " + std::to_string(spec_.ny) + ", " +
                     std::to_string(spec_.nx) + ", " + std::to_string(spec_.in_channels) + "], got " + nn::shape_string(s));
  }
  auto note = [trace](const char* name, const Var& v) {
    if (trace) trace->emplace_back(name, v.shape());
    return v;
  };
  const int n = s[0];
  const int T = spec_.n_t;

  Var f1 = note("F1", enc1_(x));
  Var f2 = note("F2", enc2_(nn::max_pool2(f1)));
  Var f3 = note("F3", enc3_(f2));
  Var f4 = note("F4", enc4_(nn::max_pool2(f3)));
  Var f5 = note("F5", transformer_(nn::max_pool2(f4)));

  std::vector<Var> hs = lstm_(nn::upsample2(f5), T);
  nn::Shape hshape = hs[0].shape();
  hshape[0] = n * T;
  Var h = note("H", nn::reshape(nn::stack_axis1(hs), hshape));

  // Encoder features shared by every time step.
  Var f1t = nn::repeat_leading(f1, T);
  Var f2t = nn::repeat_leading(f2, T);
  Var f3t = nn::repeat_leading(f3, T);
  Var f4t = nn::repeat_leading(f4, T);
  Var f5t = nn::repeat_leading(f5, T);

  Var d1 = note("D1", dec1_(nn::concat_last(h, note("G1", gate1_(f4t, f5t)))));
  Var d2 = note("D2", dec2_(nn::concat_last(nn::upsample2(d1), note("G2", gate2_(f3t, d1)))));
  Var d3 = note("D3", dec3_(nn::concat_last(d2, note("G3", gate3_(f2t, d2)))));
  Var d4 = note("D4", dec4_(nn::concat_last(nn::upsample2(d3), note("G4", gate4_(f1t, d3)))));
  Var out = head_(d4);
  if (spec_.relu_head()) out = nn::relu(out);
  return note("output", nn::reshape(out, {n, T, spec_.nz, spec_.ny, spec_.nx, 1}));
}

nn::Tensor SurrogateNet::predict(const nn::Tensor& x) const {
  nn::NoGradGuard guard;
  return forward(nn::constant(x)).value();
}

void SurrogateNet::validate_metadata() const {
  if (static_cast<int>(input_scale.size()) != spec_.in_channels) throw ShapeError("input scale count != input channels");
  for (double v : input_scale) {
    if (!(v > 0.0)) throw ArgumentError("input scales must be positive");
  }
  if (pressure_norm.has_value() != (spec_.target == TargetKind::pressure)) {
    throw ArgumentError("normalization stats must be present exactly for the pressure network");
  }
  if (pressure_norm && !(pressure_norm->stddev > 0.0)) throw NumericalError("pressure std must be positive");
  if (!output_times.empty() && static_cast<int>(output_times.size()) != spec_.n_t) {
    throw ShapeError("output time count != n_t");
  }
}

}  // namespace gcs::surrogate
