#include "gcs/flowsim/config.hpp"

#include <algorithm>
#include <cmath>

#include "gcs/common/error.hpp"

namespace gcs::flowsim {

namespace {

double effective(const CoreyParams& c, double s) {
  return std::clamp(s / (1.0 - c.s_wr - c.s_nr), 0.0, 1.0);
}

}  // namespace

double relperm_brine(const CoreyParams& c, double s_co2) {
  const double se = effective(c, 1.0 - s_co2 - c.s_wr);
  return c.krw_max * std::pow(se, c.n_w);
}

double relperm_co2(const CoreyParams& c, double s_co2) {
  const double se = effective(c, s_co2 - c.s_nr);
  return c.krn_max * std::pow(se, c.n_n);
}

double SimConfig::co2_density_in(geomodel::Zone z) const {
  using geomodel::Zone;
  switch (z) {
    case Zone::underburden:
    case Zone::target:
    case Zone::caprock_lower: return co2_density[0];
    case Zone::middle:
    case Zone::caprock_upper: return co2_density[1];
    case Zone::upper:
    case Zone::overburden: return co2_density[2];
  }
  return co2_density[0];
}

void SimConfig::validate() const {
  if (report_times_years.empty()) throw ArgumentError("at least one report time is required");
  for (std::size_t i = 0; i < report_times_years.size(); ++i) {
    if (!(report_times_years[i] > 0.0)) throw ArgumentError("report times must be positive");
    if (i > 0 && !(report_times_years[i] > report_times_years[i - 1])) {
      throw ArgumentError("report times must be strictly increasing");
    }
  }
  if (report_times_years.back() != injection_years) {
    throw ArgumentError("the last report time must equal the injection duration");
  }
  if (rate_mt_per_year < 0.0) throw ArgumentError("injection rate must be non-negative");
  if (brine_density <= 0.0 || brine_viscosity <= 0.0 || co2_viscosity <= 0.0) {
    throw ArgumentError("fluid densities and viscosities must be positive");
  }
  for (double rho : co2_density) {
    if (rho <= 0.0) throw ArgumentError("CO2 densities must be positive");
  }
  for (double s : {corey.s_wr, corey.s_nr}) {
    if (!(s >= 0.0 && s < 0.5)) throw ArgumentError("residual saturations must lie in [0, 0.5)");
  }
  if (corey.n_w < 1.0 || corey.n_n < 1.0) throw ArgumentError("Corey exponents must be at least 1");
  if (corey.krw_max <= 0.0 || corey.krn_max <= 0.0) throw ArgumentError("end-point relative permeabilities must be positive");
  if (compressibility < 0.0) throw ArgumentError("compressibility must be non-negative");
  if (!(max_cfl > 0.0 && max_cfl <= 1.0)) throw ArgumentError("CFL number must lie in (0, 1]");
  if (!(max_step_years > 0.0)) throw ArgumentError("pressure step must be positive");
  if (max_substeps == 0) throw ArgumentError("sub-step cap must be positive");
  if (!(boundary_pv_multiplier >= 1.0)) throw ArgumentError("boundary pore-volume multiplier must be at least 1");
  if (!(datum_pressure_pa > 0.0)) throw ArgumentError("datum pressure must be positive");
}

}  // namespace gcs::flowsim
