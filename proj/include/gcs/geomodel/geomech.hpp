#pragma once

namespace gcs::geomodel {

inline constexpr double kPascalPerPsi = 6894.757293168361;

struct GeomechConstants {
  double phi_bar = 0.19;   // volumetric average porosity
  double biot = 1.0;       // Biot coefficient
  double youngs_pa = 7.74e9;
  double poisson = 0.23;

  void validate() const;
};

// Effective rock compressibility (1/Pa) of a flow-only model from averaged
// geomechanical properties.
double effective_compressibility(const GeomechConstants& g);

}  // namespace gcs::geomodel
