#pragma once

#include <cstddef>
#include <vector>

#include "gcs/flowsim/config.hpp"
#include "gcs/flowsim/model.hpp"
#include "gcs/flowsim/series.hpp"

namespace gcs::flowsim {

struct SimStats {
  std::size_t pressure_steps = 0;
  std::size_t substeps = 0;
};

// IMPES march from the hydrostatic brine state; one snapshot per report time on the full grid.
FieldSeries simulate(const FlowModel& model, const SimConfig& cfg, SimStats* stats = nullptr);
FieldSeries simulate(const geomodel::Realization& real, const geomodel::GridLayout& layout, const SimConfig& cfg,
                     SimStats* stats = nullptr);

// Total CO2 mass injected by `t_years`.
double injected_co2_mass(const FlowModel& model, const SimConfig& cfg, double t_years);

// CO2 mass held in the grid at every report time.
std::vector<double> stored_co2_mass(const FieldSeries& series, const FlowModel& model, const SimConfig& cfg);

// |stored - injected| / injected per report time (0 when nothing was injected).
std::vector<double> mass_balance(const FieldSeries& series, const FlowModel& model, const SimConfig& cfg);

}  // namespace gcs::flowsim
