#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gcs/flowsim/series.hpp"
#include "gcs/geomodel/layout.hpp"

namespace gcs::assimilate {

enum class StrategyKind : std::uint8_t { full_sp, partial_sp, full_p, partial_p };
std::string_view strategy_name(StrategyKind k);
StrategyKind strategy_from_name(std::string_view name);

enum class DataKind : std::uint8_t { pressure, saturation };

struct MonitoringStrategy {
  StrategyKind kind = StrategyKind::full_sp;
  std::vector<geomodel::WellLocation> wells;
  // Observed global layer indices, bottom to top.
  std::vector<int> layers;
  std::vector<double> times;
  std::vector<DataKind> kinds;

  // Full strategies observe the target, middle and upper aquifer layers; partial ones only middle and upper.
  // `sp` strategies record pressure and saturation, `p` strategies pressure only.
  static MonitoringStrategy make(StrategyKind kind, const geomodel::GridLayout& layout, std::vector<double> times);
  std::size_t entry_count() const { return times.size() * layers.size() * wells.size() * kinds.size(); }
};

struct ObservationIndex {
  int well = 0;
  int layer = 0;
  int time = 0;
  DataKind kind = DataKind::pressure;
};

struct NoiseConfig {
  double saturation_std = 0.02;
  double pressure_std_pa = 0.095e6;
};

// Entries are ordered kind, time, well, layer (layer fastest).
struct ObservationSet {
  std::vector<double> values;
  std::vector<ObservationIndex> index;
  std::vector<double> noise_std;

  std::size_t size() const { return values.size(); }
  void validate() const;
};

// Observation-point values of `series` (full grid or any sub-box containing the wells) in strategy order.
std::vector<double> extract(const flowsim::FieldSeries& series, const geomodel::GridLayout& layout,
                            const MonitoringStrategy& strategy);

// d_obs = d_true + eps, eps ~ N(0, C_D); deterministic per seed.
ObservationSet make_observations(const flowsim::FieldSeries& truth, const geomodel::GridLayout& layout,
                                 const MonitoringStrategy& strategy, const NoiseConfig& noise, std::uint64_t seed);

}  // namespace gcs::assimilate
