#include "gcs/geomodel/realization.hpp"

#include <cmath>
#include <string>

#include "gcs/common/error.hpp"

namespace gcs::geomodel {

Realization assemble_realization(const Metaparameters& meta, std::span<const double> field, const GridLayout& layout,
                                 const FixedRockProperties& fixed) {
  const auto& targets = layout.target_cells();
  if (field.size() != targets.size()) throw ShapeError("Gaussian field must cover every target-aquifer cell");
  const std::size_t n = layout.cell_count();
  Realization r;
  r.kx.assign(n, 0.0);
  r.kz.assign(n, 0.0);
  r.phi.assign(n, 0.0);
  r.meta = meta;

  const double mu = meta[Param::mu_logk];
  const double sigma = meta[Param::sigma_logk];
  const double ar = meta.anisotropy_ratio();
  const double d = meta[Param::d];
  const double e = meta[Param::e];

  for (std::size_t c = 0; c < n; ++c) {
    double k = 0.0;
    double ani = 1.0;
    double phi = 0.0;
    switch (layout.region(c)) {
      case Region::target: continue;
      case Region::surround:
        k = fixed.surround_permeability_md;
        ani = fixed.surround_anisotropy;
        phi = fixed.surround_porosity;
        break;
      case Region::caprock:
      case Region::overburden:
      case Region::underburden:
        k = fixed.seal_permeability_md;
        ani = fixed.seal_anisotropy;
        phi = fixed.seal_porosity;
        break;
      case Region::middle:
        k = meta[Param::k_m];
        ani = fixed.aquifer_anisotropy;
        phi = fixed.aquifer_porosity;
        break;
      case Region::upper:
        k = meta[Param::k_u];
        ani = fixed.aquifer_anisotropy;
        phi = fixed.aquifer_porosity;
        break;
      case Region::fault1_tm: k = meta.fault_permeability(0, true); phi = fixed.fault_porosity; break;
      case Region::fault1_mu: k = meta.fault_permeability(0, false); phi = fixed.fault_porosity; break;
      case Region::fault2_tm: k = meta.fault_permeability(1, true); phi = fixed.fault_porosity; break;
      case Region::fault2_mu: k = meta.fault_permeability(1, false); phi = fixed.fault_porosity; break;
    }
    r.kx[c] = k;
    r.kz[c] = ani * k;
    r.phi[c] = phi;
  }

  for (std::size_t t = 0; t < targets.size(); ++t) {
    const std::size_t c = targets[t];
    const double logk = sigma * field[t] + mu;
    r.kx[c] = std::exp(logk);
    r.kz[c] = ar * r.kx[c];
    r.phi[c] = d * logk + e;
  }

  for (std::size_t c = 0; c < n; ++c) {
    if (!(r.phi[c] > 0.0 && r.phi[c] < 1.0)) {
      throw ArgumentError("porosity " + std::to_string(r.phi[c]) + " outside (0, 1) in cell " + std::to_string(c));
    }
  }
  return r;
}

Realization mirror_x(const Realization& r, const GridLayout& layout) {
  Realization m = r;
  for (int k = 0; k < layout.nz(); ++k) {
    for (int j = 0; j < layout.ny(); ++j) {
      for (int i = 0; i < layout.nx(); ++i) {
        const auto src = layout.index(i, j, k);
        const auto dst = layout.index(layout.nx() - 1 - i, j, k);
        m.kx[dst] = r.kx[src];
        m.kz[dst] = r.kz[src];
        m.phi[dst] = r.phi[src];
      }
    }
  }
  return m;
}

}  // namespace gcs::geomodel
