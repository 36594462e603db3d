#pragma once

#include <span>
#include <vector>

#include "gcs/flowsim/series.hpp"
#include "gcs/geomodel/layout.hpp"
#include "gcs/geomodel/realization.hpp"
#include "gcs/nn/tensor.hpp"
#include "gcs/surrogate/net.hpp"

namespace gcs::surrogate {

// Raw input channels over the domain box, [nz, ny, nx, 3]: log10 kx, porosity, kz / kx.
nn::Tensor domain_channels(const geomodel::Realization& r, const geomodel::GridLayout& layout);

// Largest absolute value of each channel over the given samples.
std::vector<double> fit_input_scale(std::span<const nn::Tensor> channels);

// [N, nz, ny, nx, C] after dividing channel c by scale[c].
nn::Tensor stack_inputs(std::span<const nn::Tensor> channels, std::span<const double> scale);

// Global mean and (population) std over every value; throws NumericalError when the std is zero.
NormStats fit_norm(std::span<const double> values);
std::vector<double> normalize(std::span<const double> values, const NormStats& s);
std::vector<double> denormalize(std::span<const double> values, const NormStats& s);

struct NormalizedStack {
  std::vector<double> values;
  NormStats stats;
};
// Pressure of all series, times and cells, normalized by the global statistics.
NormalizedStack normalize_pressure(std::span<const flowsim::FieldSeries> series);

// [N, n_t, nz, ny, nx, 1]; pressure is normalized with `norm`.
nn::Tensor stack_targets(std::span<const flowsim::FieldSeries> series, TargetKind kind, const NormStats* norm);

struct Dataset {
  nn::Tensor inputs;   // [N, nz, ny, nx, C]
  nn::Tensor targets;  // [N, n_t, nz, ny, nx, 1]

  int size() const { return inputs.shape.empty() ? 0 : inputs.shape[0]; }
  // Samples `rows` in the given order.
  Dataset subset(std::span<const int> rows) const;
};

}  // namespace gcs::surrogate
