#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "gcs/geomodel/layout.hpp"

namespace gcs::flowsim {

inline constexpr double kSecondsPerYear = 365.25 * 86400.0;
inline constexpr double kSquareMetersPerMillidarcy = 9.869233e-16;

struct CoreyParams {
  double n_w = 2.0;
  double n_n = 2.0;
  double s_wr = 0.2;  // residual brine saturation
  double s_nr = 0.0;  // residual CO2 saturation
  double krw_max = 1.0;
  double krn_max = 1.0;
};

// Corey drainage curves as functions of CO2 saturation.
double relperm_brine(const CoreyParams& c, double s_co2);
double relperm_co2(const CoreyParams& c, double s_co2);

struct SimConfig {
  std::vector<double> report_times_years{2.0, 6.0, 10.0, 14.0, 20.0};
  double injection_years = 20.0;
  double rate_mt_per_year = 1.0;  // per injector
  double brine_density = 1000.0;
  // CO2 density in the target, middle and upper aquifer systems. Each value also
  // applies to the seal directly above the aquifer and, for the target, the underburden.
  std::array<double, 3> co2_density{624.0, 612.0, 128.0};
  double brine_viscosity = 5e-4;
  double co2_viscosity = 6e-5;
  CoreyParams corey;
  double compressibility = 5.866e-10;  // Pa^-1
  bool gravity = true;
  double gravity_accel = 9.80665;
  double max_cfl = 0.9;
  // Hydrostatic brine pressure is anchored at this (depth, pressure) pair.
  double datum_pressure_pa = 18e6;
  double datum_depth_m = 1880.0;
  double max_step_years = 0.5;
  std::size_t max_substeps = 200000;  // per pressure step
  // Pore-volume multiplier on lateral-edge cells of the permeable regions; stands in for the aquifer extent
  // beyond the modeled grid.
  double boundary_pv_multiplier = 1.0;

  double co2_density_in(geomodel::Zone z) const;
  double hydrostatic_gradient() const { return brine_density * gravity_accel; }
  void validate() const;
};

}  // namespace gcs::flowsim
