#include "gcs/geomodel/generator.hpp"

#include <string>
#include <utility>

#include "gcs/common/error.hpp"
#include "gcs/common/rng.hpp"

namespace gcs::geomodel {

Generator::Generator(GridLayout layout, PriorSpec prior, GeneratorConfig cfg)
    : layout_(std::move(layout)), prior_(prior), cfg_(cfg) {
  prior_.validate();
  const Eigen::MatrixXd cov = build_covariance(layout_, cfg_.lengths);
  basis_ = cfg_.n_modes > 0 ? build_pca_basis(cov, cfg_.n_construct, cfg_.n_modes, cfg_.pca_seed)
                            : build_pca_basis_for_energy(cov, cfg_.n_construct, cfg_.energy_fraction, cfg_.pca_seed);
}

Realization Generator::realize(const Metaparameters& meta, std::span<const double> xi) const {
  const Eigen::VectorXd y = reconstruct_field(basis_, xi);
  Realization r = assemble_realization(meta, std::span<const double>(y.data(), static_cast<std::size_t>(y.size())),
                                       layout_, cfg_.fixed);
  r.xi.assign(xi.begin(), xi.end());
  return r;
}

Realization Generator::draw(std::uint64_t seed, std::uint64_t index) const {
  Rng rng(seed, "realization", index);
  std::vector<double> xi(static_cast<std::size_t>(basis_.n_modes()));
  for (int attempt = 0; attempt <= cfg_.max_redraws; ++attempt) {
    const Metaparameters meta = sample_metaparameters(prior_, rng);
    for (double& v : xi) v = rng.normal();
    try {
      return realize(meta, xi);
    } catch (const ArgumentError&) {
      // porosity outside (0, 1): redraw
    }
  }
  throw ArgumentError("no valid realization after " + std::to_string(cfg_.max_redraws) + " redraws");
}

}  // namespace gcs::geomodel
