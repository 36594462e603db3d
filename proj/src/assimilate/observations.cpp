#include "gcs/assimilate/observations.hpp"

#include <algorithm>
#include <cmath>

#include "gcs/common/error.hpp"
#include "gcs/common/rng.hpp"

namespace gcs::assimilate {

std::string_view strategy_name(StrategyKind k) {
  switch (k) {
    case StrategyKind::full_sp: return "full_sp";
    case StrategyKind::partial_sp: return "partial_sp";
    case StrategyKind::full_p: return "full_p";
    case StrategyKind::partial_p: return "partial_p";
  }
  return "unknown";
}

StrategyKind strategy_from_name(std::string_view name) {
  for (auto k : {StrategyKind::full_sp, StrategyKind::partial_sp, StrategyKind::full_p, StrategyKind::partial_p}) {
    if (strategy_name(k) == name) return k;
  }
  throw ArgumentError("unknown monitoring strategy '" + std::string(name) + "'");
}

MonitoringStrategy MonitoringStrategy::make(StrategyKind kind, const geomodel::GridLayout& layout,
                                            std::vector<double> times) {
  MonitoringStrategy s;
  s.kind = kind;
  s.wells = layout.observers();
  if (s.wells.empty()) throw ArgumentError("layout has no monitoring wells");
  const bool full = kind == StrategyKind::full_sp || kind == StrategyKind::full_p;
  std::vector<geomodel::Zone> zones{geomodel::Zone::middle, geomodel::Zone::upper};
  if (full) zones.insert(zones.begin(), geomodel::Zone::target);
  for (auto z : zones) {
    for (int k : layout.layers_of(z)) s.layers.push_back(k);
  }
  std::sort(s.layers.begin(), s.layers.end());
  s.times = std::move(times);
  if (s.times.empty()) throw ArgumentError("strategy needs at least one observation time");
  s.kinds = {DataKind::pressure};
  if (kind == StrategyKind::full_sp || kind == StrategyKind::partial_sp) s.kinds.push_back(DataKind::saturation);
  return s;
}

void ObservationSet::validate() const {
  if (index.size() != values.size() || noise_std.size() != values.size()) {
    throw ShapeError("observation values, index and noise must have equal length");
  }
  for (double s : noise_std) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw ArgumentError("noise standard deviations must be finite and nonnegative");
  }
}

namespace {

int time_slot(const flowsim::FieldSeries& series, double t) {
  for (std::size_t i = 0; i < series.n_times(); ++i) {
    if (std::abs(series.times_years[i] - t) <= 1e-9 * std::max(1.0, std::abs(t))) return static_cast<int>(i);
  }
  throw ArgumentError("observation time " + std::to_string(t) + " is not a report time of the series");
}

}  // namespace

std::vector<double> extract(const flowsim::FieldSeries& series, const geomodel::GridLayout& layout,
                            const MonitoringStrategy& strategy) {
  (void)layout;
  std::vector<int> slots;
  for (double t : strategy.times) slots.push_back(time_slot(series, t));
  const auto& d = series.dims;
  const auto& o = series.origin;
  std::vector<double> out;
  out.reserve(strategy.entry_count());
  for (DataKind kind : strategy.kinds) {
    const auto& field = kind == DataKind::pressure ? series.pressure : series.saturation;
    for (int slot : slots) {
      for (const auto& w : strategy.wells) {
        for (int k : strategy.layers) {
          const int i = w.i - o[0], j = w.j - o[1], kk = k - o[2];
          if (i < 0 || i >= d.nx || j < 0 || j >= d.ny || kk < 0 || kk >= d.nz) {
            throw ArgumentError("observation point of well " + w.name + " lies outside the series grid");
          }
          const std::size_t c = (static_cast<std::size_t>(kk) * d.ny + j) * d.nx + i;
          out.push_back(field[slot * series.n_cells() + c]);
        }
      }
    }
  }
  return out;
}

ObservationSet make_observations(const flowsim::FieldSeries& truth, const geomodel::GridLayout& layout,
                                 const MonitoringStrategy& strategy, const NoiseConfig& noise, std::uint64_t seed) {
  ObservationSet obs;
  obs.values = extract(truth, layout, strategy);
  for (DataKind kind : strategy.kinds) {
    for (int t = 0; t < static_cast<int>(strategy.times.size()); ++t) {
      for (int w = 0; w < static_cast<int>(strategy.wells.size()); ++w) {
        for (int k : strategy.layers) {
          obs.index.push_back({w, k, t, kind});
          obs.noise_std.push_back(kind == DataKind::pressure ? noise.pressure_std_pa : noise.saturation_std);
        }
      }
    }
  }
  obs.validate();
  Rng rng(seed, "observation-noise");
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double e = rng.normal();
    obs.values[i] += obs.noise_std[i] * e;
  }
  return obs;
}

}  // namespace gcs::assimilate
