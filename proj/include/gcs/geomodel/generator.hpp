#pragma once

#include <cstdint>
#include <span>

#include "gcs/geomodel/covariance.hpp"
#include "gcs/geomodel/layout.hpp"
#include "gcs/geomodel/metaparameters.hpp"
#include "gcs/geomodel/pca.hpp"
#include "gcs/geomodel/realization.hpp"

namespace gcs::geomodel {

struct GeneratorConfig {
  CorrelationLengths lengths;
  int n_construct = 200;
  double energy_fraction = 0.9;
  int n_modes = 0;  // 0 selects the mode count from energy_fraction
  std::uint64_t pca_seed = 1;
  FixedRockProperties fixed;
  // Draws whose porosity leaves (0, 1) are discarded and redrawn, up to this many times.
  int max_redraws = 1000;
};

// Layout, prior and PCA basis bundled for drawing realizations.
class Generator {
 public:
  Generator(GridLayout layout, PriorSpec prior, GeneratorConfig cfg = {});

  const GridLayout& layout() const { return layout_; }
  const PriorSpec& prior() const { return prior_; }
  const PcaBasis& basis() const { return basis_; }
  const GeneratorConfig& config() const { return cfg_; }

  // Throws ArgumentError when the porosity map leaves (0, 1).
  Realization realize(const Metaparameters& meta, std::span<const double> xi) const;

  // Realization `index` of the ensemble rooted at `seed`.
  Realization draw(std::uint64_t seed, std::uint64_t index) const;

 private:
  GridLayout layout_;
  PriorSpec prior_;
  GeneratorConfig cfg_;
  PcaBasis basis_;
};

}  // namespace gcs::geomodel
