#pragma once

#include <span>
#include <vector>

#include "gcs/flowsim/series.hpp"
#include "gcs/geomodel/layout.hpp"
#include "gcs/geomodel/realization.hpp"
#include "gcs/surrogate/net.hpp"

namespace gcs::surrogate {

// The pressure and saturation networks as one forward model on the domain of interest.
struct Surrogate {
  SurrogateNet pressure;
  SurrogateNet saturation;

  // Domain FieldSeries at the networks' output times; pressure in Pa, saturation clipped to [0, 1].
  flowsim::FieldSeries predict(const geomodel::Realization& r, const geomodel::GridLayout& layout) const;
  std::vector<flowsim::FieldSeries> predict(std::span<const geomodel::Realization> rs,
                                            const geomodel::GridLayout& layout, int batch_size = 8) const;
};

}  // namespace gcs::surrogate
