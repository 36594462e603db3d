#include "gcs/metrics/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gcs/common/error.hpp"
#include "gcs/common/stats.hpp"

namespace gcs::metrics {

namespace {

void check_pair(const flowsim::FieldSeries& sim, const flowsim::FieldSeries& surr, const CellMask& mask) {
  if (!(sim.dims == surr.dims) || sim.n_times() != surr.n_times() || sim.saturation.size() != surr.saturation.size() ||
      sim.pressure.size() != surr.pressure.size()) {
    throw ShapeError("simulated and surrogate series differ in grid or time count");
  }
  if (!mask.empty() && mask.size() != sim.n_cells()) throw ShapeError("cell mask does not match the series grid");
}

bool selected(const CellMask& mask, std::size_t c) { return mask.empty() || mask[c]; }

}  // namespace

CellMask aggregation_mask(const flowsim::FieldSeries& series, const geomodel::GridLayout& layout,
                          std::span<const geomodel::Region> regions) {
  CellMask mask(series.n_cells(), 0);
  for (std::size_t c = 0; c < series.n_cells(); ++c) {
    const auto r = layout.region(series.global_cell(c, layout));
    if (r == geomodel::Region::caprock) continue;
    if (!regions.empty() && std::find(regions.begin(), regions.end(), r) == regions.end()) continue;
    mask[c] = 1;
  }
  return mask;
}

PlumeMae saturation_mae(const flowsim::FieldSeries& sim, const flowsim::FieldSeries& surr, double eps,
                        const CellMask& mask) {
  check_pair(sim, surr, mask);
  PlumeMae out;
  double sum = 0.0;
  const auto n = sim.n_cells();
  for (std::size_t t = 0; t < sim.n_times(); ++t) {
    for (std::size_t c = 0; c < n; ++c) {
      if (!selected(mask, c)) continue;
      const double s = sim.saturation[t * n + c], sh = surr.saturation[t * n + c];
      if (s > eps || sh > eps) {
        sum += std::abs(sh - s);
        ++out.count;
      }
    }
  }
  out.empty_plume = out.count == 0;
  out.value = out.count ? sum / static_cast<double>(out.count) : 0.0;
  return out;
}

double pressure_relative_error(const flowsim::FieldSeries& sim, const flowsim::FieldSeries& surr,
                               const CellMask& mask) {
  check_pair(sim, surr, mask);
  const auto n = sim.n_cells();
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < sim.n_times(); ++t) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t c = 0; c < n; ++c) {
      if (!selected(mask, c)) continue;
      lo = std::min(lo, sim.pressure[t * n + c]);
      hi = std::max(hi, sim.pressure[t * n + c]);
    }
    if (!(hi > lo)) throw NumericalError("simulated pressure range is zero at report " + std::to_string(t));
    for (std::size_t c = 0; c < n; ++c) {
      if (!selected(mask, c)) continue;
      sum += std::abs(surr.pressure[t * n + c] - sim.pressure[t * n + c]) / (hi - lo);
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

PercentileSummary percentile_summary(std::span<const double> values) {
  using stats::percentile_nearest_rank;
  return {percentile_nearest_rank(values, 10), percentile_nearest_rank(values, 25),
          percentile_nearest_rank(values, 50), percentile_nearest_rank(values, 75),
          percentile_nearest_rank(values, 90)};
}

void ErrorReport::add(const PlumeMae& s, double p) {
  if (s.empty_plume) {
    ++empty_plume_samples;
  } else {
    saturation_mae.push_back(s.value);
  }
  pressure_error.push_back(p);
}

void ErrorReport::summarize() {
  saturation_summary.reset();
  pressure_summary.reset();
  if (!saturation_mae.empty()) saturation_summary = percentile_summary(saturation_mae);
  if (!pressure_error.empty()) pressure_summary = percentile_summary(pressure_error);
}

std::vector<RegionMae> region_breakdown(const flowsim::FieldSeries& sim, const flowsim::FieldSeries& surr,
                                        const geomodel::GridLayout& layout,
                                        std::span<const geomodel::Region> regions, double eps) {
  std::vector<RegionMae> out;
  for (auto r : regions) {
    const geomodel::Region one[1] = {r};
    out.push_back({r, saturation_mae(sim, surr, eps, aggregation_mask(sim, layout, one))});
  }
  return out;
}

}  // namespace gcs::metrics
