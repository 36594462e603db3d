#pragma once

#include <span>
#include <vector>

#include "gcs/geomodel/layout.hpp"
#include "gcs/geomodel/metaparameters.hpp"

namespace gcs::geomodel {

// Fixed rock properties of the non-target regions.
struct FixedRockProperties {
  double seal_permeability_md = 1e-4;  // caprock, overburden, underburden
  double seal_porosity = 0.01;
  double seal_anisotropy = 0.1;
  double aquifer_porosity = 0.3;  // middle and upper
  double aquifer_anisotropy = 0.1;
  double surround_permeability_md = 5.0;
  double surround_porosity = 0.05;
  double surround_anisotropy = 0.1;
  double fault_porosity = 0.2;
};

// Per-cell properties over the full grid, with the parameters that generated them.
struct Realization {
  std::vector<double> kx;   // horizontal permeability, md
  std::vector<double> kz;   // vertical permeability, md
  std::vector<double> phi;  // porosity
  Metaparameters meta;
  std::vector<double> xi;

  std::size_t cell_count() const { return kx.size(); }
};

// `field` is the standard Gaussian field on layout.target_cells().
Realization assemble_realization(const Metaparameters& meta, std::span<const double> field, const GridLayout& layout,
                                 const FixedRockProperties& fixed = {});

// Realization mirrored in x (cell (i, j, k) -> (nx - 1 - i, j, k)).
Realization mirror_x(const Realization& r, const GridLayout& layout);

}  // namespace gcs::geomodel
