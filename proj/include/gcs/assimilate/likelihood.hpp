#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gcs/assimilate/observations.hpp"

namespace gcs::assimilate {

// Sample covariance of residual rows (surrogate minus simulator at observation points), with
// 1e-10 * trace / N added to the diagonal until a Cholesky factorization succeeds.
Eigen::MatrixXd estimate_model_error_cov(const Eigen::MatrixXd& residuals);

// C_tot = C_D + C_surr with a cached Cholesky factor.
class ErrorCovariance {
 public:
  ErrorCovariance(const std::vector<double>& noise_std, const Eigen::MatrixXd& c_surr);
  static ErrorCovariance diagonal(const std::vector<double>& noise_std);

  int size() const { return static_cast<int>(total_.rows()); }
  const Eigen::MatrixXd& total() const { return total_; }
  // r^T C_tot^{-1} r.
  double quadratic_form(std::span<const double> r) const;

 private:
  Eigen::MatrixXd total_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

// -1/2 r^T C_tot^{-1} r with r = d_obs - prediction.
double log_likelihood(std::span<const double> prediction, const ObservationSet& obs, const ErrorCovariance& cov);

}  // namespace gcs::assimilate
