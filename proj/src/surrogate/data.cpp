#include "gcs/surrogate/data.hpp"

#include <algorithm>
#include <cmath>

#include "gcs/common/error.hpp"
#include "gcs/common/stats.hpp"

namespace gcs::surrogate {

nn::Tensor domain_channels(const geomodel::Realization& r, const geomodel::GridLayout& layout) {
  if (r.cell_count() != layout.cell_count()) throw ShapeError("realization does not match the layout");
  const auto& b = layout.domain_box();
  nn::Tensor t({b.nz(), b.ny(), b.nx(), 3});
  std::size_t o = 0;
  for (int k = b.k0; k < b.k1; ++k) {
    for (int j = b.j0; j < b.j1; ++j) {
      for (int i = b.i0; i < b.i1; ++i) {
        const std::size_t c = layout.index(i, j, k);
        t.data[o++] = std::log10(r.kx[c]);
        t.data[o++] = r.phi[c];
        t.data[o++] = r.kz[c] / r.kx[c];
      }
    }
  }
  return t;
}

std::vector<double> fit_input_scale(std::span<const nn::Tensor> channels) {
  if (channels.empty()) throw ArgumentError("no samples to fit input scales");
  const int c = channels[0].dim(-1);
  std::vector<double> scale(c, 0.0);
  for (const auto& t : channels) {
    if (t.dim(-1) != c) throw ShapeError("samples have different channel counts");
    for (std::size_t i = 0; i < t.size(); ++i) scale[i % c] = std::max(scale[i % c], std::abs(t.data[i]));
  }
  for (double s : scale) {
    if (!(s > 0.0)) throw NumericalError("input channel is identically zero");
  }
  return scale;
}

nn::Tensor stack_inputs(std::span<const nn::Tensor> channels, std::span<const double> scale) {
  if (channels.empty()) throw ArgumentError("no samples to stack");
  nn::Shape s = channels[0].shape;
  const int c = s.back();
  if (static_cast<int>(scale.size()) != c) throw ShapeError("scale count != channel count");
  s.insert(s.begin(), static_cast<int>(channels.size()));
  nn::Tensor out(s);
  const std::size_t block = channels[0].size();
  for (std::size_t n = 0; n < channels.size(); ++n) {
    if (channels[n].shape != channels[0].shape) throw ShapeError("samples have different shapes");
    for (std::size_t i = 0; i < block; ++i) out.data[n * block + i] = channels[n].data[i] / scale[i % c];
  }
  return out;
}

NormStats fit_norm(std::span<const double> values) {
  if (values.empty()) throw ArgumentError("no values to normalize");
  const double m = stats::pairwise_sum(values) / static_cast<double>(values.size());
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) sq[i] = (values[i] - m) * (values[i] - m);
  const double sd = std::sqrt(stats::pairwise_sum(sq) / static_cast<double>(values.size()));
  if (!(sd > 1e-300) || sd <= 1e-14 * std::abs(m)) throw NumericalError("zero standard deviation; cannot normalize");
  return {m, sd};
}

std::vector<double> normalize(std::span<const double> values, const NormStats& s) {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - s.mean) / s.stddev;
  return out;
}

std::vector<double> denormalize(std::span<const double> values, const NormStats& s) {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] * s.stddev + s.mean;
  return out;
}

NormalizedStack normalize_pressure(std::span<const flowsim::FieldSeries> series) {
  std::vector<double> all;
  for (const auto& s : series) all.insert(all.end(), s.pressure.begin(), s.pressure.end());
  NormalizedStack out;
  out.stats = fit_norm(all);
  out.values = normalize(all, out.stats);
  return out;
}

nn::Tensor stack_targets(std::span<const flowsim::FieldSeries> series, TargetKind kind, const NormStats* norm) {
  if (series.empty()) throw ArgumentError("no series to stack");
  const auto& d = series[0].dims;
  const int nt = static_cast<int>(series[0].n_times());
  nn::Tensor out({static_cast<int>(series.size()), nt, d.nz, d.ny, d.nx, 1});
  const std::size_t block = static_cast<std::size_t>(nt) * d.count();
  for (std::size_t n = 0; n < series.size(); ++n) {
    const auto& s = series[n];
    if (!(s.dims == d) || static_cast<int>(s.n_times()) != nt) throw ShapeError("series have different shapes");
    const auto& src = kind == TargetKind::pressure ? s.pressure : s.saturation;
    for (std::size_t i = 0; i < block; ++i) {
      out.data[n * block + i] = (kind == TargetKind::pressure && norm) ? (src[i] - norm->mean) / norm->stddev : src[i];
    }
  }
  return out;
}

Dataset Dataset::subset(std::span<const int> rows) const {
  auto take = [&](const nn::Tensor& t) {
    nn::Shape s = t.shape;
    const std::size_t block = t.size() / static_cast<std::size_t>(s[0]);
    s[0] = static_cast<int>(rows.size());
    nn::Tensor out(s);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r] < 0 || rows[r] >= t.shape[0]) throw ArgumentError("dataset row out of range");
      std::copy_n(t.data.begin() + static_cast<std::ptrdiff_t>(rows[r] * block), block, out.data.begin() + r * block);
    }
    return out;
  };
  return {take(inputs), take(targets)};
}

}  // namespace gcs::surrogate
