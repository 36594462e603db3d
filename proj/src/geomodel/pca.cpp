#include "gcs/geomodel/pca.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

#include "gcs/common/error.hpp"
#include "gcs/common/rng.hpp"

namespace gcs::geomodel {

namespace {

// L with L * L^T = C, from the eigendecomposition; tolerates numerically zero modes.
Eigen::MatrixXd symmetric_factor(const Eigen::MatrixXd& cov) {
  if (cov.rows() != cov.cols() || cov.rows() == 0) throw ArgumentError("covariance must be square and nonempty");
  if (!cov.isApprox(cov.transpose(), 1e-12)) throw NumericalError("covariance is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw NumericalError("covariance eigendecomposition failed");
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());
  if (lambda.minCoeff() < -1e-8 * scale) {
    throw NumericalError("covariance is not positive semi-definite (min eigenvalue " +
                         std::to_string(lambda.minCoeff()) + ")");
  }
  const Eigen::VectorXd root = lambda.cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

}  // namespace

Eigen::MatrixXd construction_realizations(const Eigen::MatrixXd& covariance, int n_construct, std::uint64_t seed) {
  if (n_construct < 2) throw ArgumentError("PCA construction needs at least two realizations");
  const Eigen::MatrixXd factor = symmetric_factor(covariance);
  const Eigen::Index n = covariance.rows();
  Rng rng(seed, "pca-construction");
  Eigen::MatrixXd z(n, n_construct);
  for (int c = 0; c < n_construct; ++c) {
    for (Eigen::Index r = 0; r < n; ++r) z(r, c) = rng.normal();
  }
  return factor * z;
}

int modes_for_energy(const Eigen::VectorXd& s, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ArgumentError("energy fraction must lie in (0, 1]");
  const double total = s.squaredNorm();
  if (total <= 0.0) throw NumericalError("construction set has no variance");
  double acc = 0.0;
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    acc += s[k] * s[k];
    if (acc >= fraction * total) return static_cast<int>(k + 1);
  }
  return static_cast<int>(s.size());
}

namespace {

PcaBasis build_from_samples(const Eigen::MatrixXd& samples, int n_modes, bool by_energy, double energy) {
  const int n_construct = static_cast<int>(samples.cols());
  PcaBasis basis;
  basis.n_construct = n_construct;
  basis.mean = samples.rowwise().mean();
  const Eigen::MatrixXd centered = samples.colwise() - basis.mean;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU);
  basis.all_singular_values = svd.singularValues();
  if (by_energy) {
    // Centering removes one degree of freedom; cap at n_construct - 1.
    const Eigen::VectorXd usable = basis.all_singular_values.head(std::min<Eigen::Index>(
        basis.all_singular_values.size(), n_construct - 1));
    n_modes = modes_for_energy(usable, energy);
  }
  if (n_modes < 1 || n_modes > n_construct - 1 || n_modes > samples.rows()) {
    throw ArgumentError("n_modes must lie in [1, n_construct - 1] and not exceed the cell count");
  }
  basis.singular_values = basis.all_singular_values.head(n_modes);
  basis.left_vectors = svd.matrixU().leftCols(n_modes);
  const double norm = 1.0 / std::sqrt(static_cast<double>(n_construct - 1));
  basis.phi = basis.left_vectors * (basis.singular_values * norm).asDiagonal();
  return basis;
}

}  // namespace

PcaBasis build_pca_basis(const Eigen::MatrixXd& covariance, int n_construct, int n_modes, std::uint64_t seed) {
  if (n_modes >= n_construct) throw ArgumentError("n_modes must be smaller than n_construct");
  return build_from_samples(construction_realizations(covariance, n_construct, seed), n_modes, false, 0.0);
}

PcaBasis build_pca_basis_for_energy(const Eigen::MatrixXd& covariance, int n_construct, double energy_fraction,
                                    std::uint64_t seed) {
  return build_from_samples(construction_realizations(covariance, n_construct, seed), 0, true, energy_fraction);
}

Eigen::VectorXd reconstruct_field(const PcaBasis& basis, std::span<const double> xi) {
  if (static_cast<int>(xi.size()) != basis.n_modes()) throw ShapeError("latent vector length differs from n_modes");
  const Eigen::Map<const Eigen::VectorXd> x(xi.data(), static_cast<Eigen::Index>(xi.size()));
  return basis.phi * x + basis.mean;
}

std::vector<double> project_field(const PcaBasis& basis, std::span<const double> field) {
  if (static_cast<int>(field.size()) != basis.n_cells()) throw ShapeError("field length differs from basis");
  const Eigen::Map<const Eigen::VectorXd> y(field.data(), static_cast<Eigen::Index>(field.size()));
  const double root = std::sqrt(static_cast<double>(basis.n_construct - 1));
  Eigen::VectorXd xi = basis.left_vectors.transpose() * (y - basis.mean);
  for (Eigen::Index k = 0; k < xi.size(); ++k) xi[k] *= root / basis.singular_values[k];
  return {xi.data(), xi.data() + xi.size()};
}

}  // namespace gcs::geomodel
