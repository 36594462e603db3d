#pragma once

#include <optional>
#include <span>
#include <vector>

#include "gcs/flowsim/series.hpp"
#include "gcs/geomodel/layout.hpp"

namespace gcs::metrics {

// Per-cell selection on a series grid; empty means every cell.
using CellMask = std::vector<char>;

// Cells of `series` counted in error aggregation: caprock excluded, optionally restricted to `regions`.
CellMask aggregation_mask(const flowsim::FieldSeries& series, const geomodel::GridLayout& layout,
                          std::span<const geomodel::Region> regions = {});

struct PlumeMae {
  double value = 0.0;
  std::size_t count = 0;  // qualifying (cell, time) pairs
  bool empty_plume = false;
};

// Mean |S_hat - S| over (cell, time) pairs with S > eps or S_hat > eps.
PlumeMae saturation_mae(const flowsim::FieldSeries& sim, const flowsim::FieldSeries& surr, double eps = 0.02,
                        const CellMask& mask = {});

// Mean over cells and times of |p_hat - p| / (max_t p - min_t p), range taken over the selected simulated cells.
double pressure_relative_error(const flowsim::FieldSeries& sim, const flowsim::FieldSeries& surr,
                               const CellMask& mask = {});

struct PercentileSummary {
  double p10 = 0, p25 = 0, p50 = 0, p75 = 0, p90 = 0;
};
PercentileSummary percentile_summary(std::span<const double> values);

struct RegionMae {
  geomodel::Region region;
  PlumeMae mae;
};

struct ErrorReport {
  std::vector<double> saturation_mae;   // samples with a nonempty plume
  std::vector<double> pressure_error;
  std::size_t empty_plume_samples = 0;
  std::optional<PercentileSummary> saturation_summary;
  std::optional<PercentileSummary> pressure_summary;

  void add(const PlumeMae& s, double p);
  void summarize();
};

// Plume MAE evaluated separately for each region (same aggregation as saturation_mae).
std::vector<RegionMae> region_breakdown(const flowsim::FieldSeries& sim, const flowsim::FieldSeries& surr,
                                        const geomodel::GridLayout& layout,
                                        std::span<const geomodel::Region> regions, double eps = 0.02);

}  // namespace gcs::metrics
