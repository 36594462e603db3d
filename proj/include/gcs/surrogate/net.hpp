#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gcs/nn/layers.hpp"

namespace gcs::surrogate {

enum class TargetKind : std::uint8_t { pressure = 0, saturation = 1 };
std::string_view target_name(TargetKind t);
TargetKind target_from_name(std::string_view name);

struct NetSpec {
  int in_channels = 3;
  // Encoder block widths at full, half, half and quarter resolution.
  std::array<int, 4> widths{16, 32, 32, 64};
  int lstm_width = 64;
  int pool_levels = 3;
  int heads = 4;
  int mlp_width = 64;
  int transformer_layers = 2;
  int n_t = 5;
  // Spatial extent of the input, cells.
  int nx = 16, ny = 16, nz = 16;
  TargetKind target = TargetKind::saturation;
  std::uint64_t seed = 1;

  // Narrow widths for fast CI runs.
  static NetSpec reduced(TargetKind target, int nx, int ny, int nz, int n_t);

  bool relu_head() const { return target == TargetKind::saturation; }
  int tokens() const { return (nx / 8) * (ny / 8) * (nz / 8); }
  void validate() const;
  nlohmann::json to_json() const;
  static NetSpec from_json(const nlohmann::json& j);
  std::uint64_t digest() const;
};

struct NormStats {
  double mean = 0.0;
  double stddev = 1.0;
  bool operator==(const NormStats&) const = default;
};

// Layer name and output shape, in evaluation order.
using ShapeTrace = std::vector<std::pair<std::string, nn::Shape>>;

// Tensors are [N, nz, ny, nx, C]; the output is [N, n_t, nz, ny, nx, 1] in training units.
class SurrogateNet {
 public:
  explicit SurrogateNet(const NetSpec& spec);
  SurrogateNet(SurrogateNet&&) = default;
  SurrogateNet& operator=(SurrogateNet&&) = default;
  SurrogateNet(const SurrogateNet&) = delete;
  SurrogateNet& operator=(const SurrogateNet&) = delete;

  const NetSpec& spec() const { return spec_; }
  nn::ParameterStore& parameters() { return params_; }
  const nn::ParameterStore& parameters() const { return params_; }

  nn::Var forward(const nn::Var& x, ShapeTrace* trace = nullptr) const;
  // Gradient-free forward.
  nn::Tensor predict(const nn::Tensor& x) const;

  // Per-channel divisor applied to the raw input channels.
  std::vector<double> input_scale;
  // Present iff the target is pressure.
  std::optional<NormStats> pressure_norm;
  std::vector<double> output_times;

  void validate_metadata() const;

 private:
  NetSpec spec_;
  nn::ParameterStore params_;
  nn::ResidualBlock enc1_, enc2_, enc3_, enc4_;
  nn::TransformerBlock transformer_;
  nn::ConvLstm lstm_;
  nn::AttentionGate gate1_, gate2_, gate3_, gate4_;
  nn::ResidualBlock dec1_, dec2_, dec3_, dec4_;
  nn::Conv3d head_;
};

}  // namespace gcs::surrogate
