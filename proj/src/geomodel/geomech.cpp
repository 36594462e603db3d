#include "gcs/geomodel/geomech.hpp"

#include "gcs/common/error.hpp"

namespace gcs::geomodel {

void GeomechConstants::validate() const {
  if (!(phi_bar > 0.0 && phi_bar < 1.0)) throw ArgumentError("average porosity must lie in (0, 1)");
  if (!(poisson > 0.0 && poisson <= 0.5)) throw ArgumentError("Poisson's ratio must lie in (0, 0.5]");
  if (!(youngs_pa > 0.0)) throw ArgumentError("Young's modulus must be positive");
}

double effective_compressibility(const GeomechConstants& g) {
  g.validate();
  const double v = g.poisson;
  const double b = g.biot;
  if (v == 0.5) return 0.0;
  return (1.0 - 2.0 * v) / (g.phi_bar * g.youngs_pa) *
         (b * b * (1.0 + v) / (1.0 - v) + 3.0 * (b - g.phi_bar) * (1.0 - b));
}

}  // namespace gcs::geomodel
