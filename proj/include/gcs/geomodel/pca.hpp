#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

namespace gcs::geomodel {

// Truncated PCA representation y = Phi * xi + mean of a standard Gaussian field.
//
// `left_vectors` holds the orthonormal leading left singular vectors U of the
// centered construction matrix; `phi` is U scaled column-wise by
// sigma_k / sqrt(n_construct - 1), so xi ~ N(0, I) reproduces the sample
// covariance of the construction set.
struct PcaBasis {
  Eigen::MatrixXd phi;
  Eigen::MatrixXd left_vectors;
  Eigen::VectorXd mean;
  Eigen::VectorXd singular_values;      // leading n_modes
  Eigen::VectorXd all_singular_values;  // full spectrum of the construction set
  int n_construct = 0;

  int n_modes() const { return static_cast<int>(phi.cols()); }
  int n_cells() const { return static_cast<int>(phi.rows()); }
};

// Draws `n_construct` realizations through a symmetric factorization of the
// covariance, centers them and keeps the leading `n_modes` components.
PcaBasis build_pca_basis(const Eigen::MatrixXd& covariance, int n_construct, int n_modes, std::uint64_t seed);

// Smallest number of modes whose squared singular values reach `fraction` of the total.
int modes_for_energy(const Eigen::VectorXd& singular_values, double fraction);

// Same construction, keeping the smallest mode count reaching the energy fraction.
PcaBasis build_pca_basis_for_energy(const Eigen::MatrixXd& covariance, int n_construct, double energy_fraction,
                                    std::uint64_t seed);

Eigen::VectorXd reconstruct_field(const PcaBasis& basis, std::span<const double> xi);

// Least-squares latent vector of a field (inverse of reconstruct_field on the basis span).
std::vector<double> project_field(const PcaBasis& basis, std::span<const double> field);

// Construction set realizations regenerated from the same seed (columns), uncentered.
Eigen::MatrixXd construction_realizations(const Eigen::MatrixXd& covariance, int n_construct, std::uint64_t seed);

}  // namespace gcs::geomodel
