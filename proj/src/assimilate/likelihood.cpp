#include "gcs/assimilate/likelihood.hpp"

#include "gcs/common/error.hpp"

namespace gcs::assimilate {

Eigen::MatrixXd estimate_model_error_cov(const Eigen::MatrixXd& residuals) {
  const auto n = residuals.rows();
  const auto d = residuals.cols();
  if (n < 2) throw ArgumentError("model-error covariance needs at least two residual vectors");
  const Eigen::RowVectorXd mean = residuals.colwise().mean();
  const Eigen::MatrixXd centered = residuals.rowwise() - mean;
  Eigen::MatrixXd c = (centered.transpose() * centered) / static_cast<double>(n - 1);
  c = 0.5 * (c + c.transpose());
  const double tr = c.trace();
  const double step = tr > 0.0 ? 1e-10 * tr / static_cast<double>(d) : 1e-10;
  for (int attempt = 0; attempt < 100000; ++attempt) {
    Eigen::LLT<Eigen::MatrixXd> llt(c);
    if (llt.info() == Eigen::Success) return c;
    c.diagonal().array() += step;
  }
  throw NumericalError("model-error covariance could not be regularized to positive definite");
}

ErrorCovariance::ErrorCovariance(const std::vector<double>& noise_std, const Eigen::MatrixXd& c_surr) {
  const auto n = static_cast<Eigen::Index>(noise_std.size());
  if (c_surr.size() != 0 && (c_surr.rows() != n || c_surr.cols() != n)) {
    throw ShapeError("model-error covariance does not match the observation count");
  }
  total_ = c_surr.size() == 0 ? Eigen::MatrixXd::Zero(n, n) : c_surr;
  for (Eigen::Index i = 0; i < n; ++i) total_(i, i) += noise_std[i] * noise_std[i];
  llt_.compute(total_);
  if (llt_.info() != Eigen::Success) throw NumericalError("total error covariance is not positive definite");
}

ErrorCovariance ErrorCovariance::diagonal(const std::vector<double>& noise_std) {
  return ErrorCovariance(noise_std, Eigen::MatrixXd());
}

double ErrorCovariance::quadratic_form(std::span<const double> r) const {
  if (static_cast<Eigen::Index>(r.size()) != total_.rows()) throw ShapeError("residual length does not match covariance");
  const Eigen::Map<const Eigen::VectorXd> rv(r.data(), static_cast<Eigen::Index>(r.size()));
  const Eigen::VectorXd y = llt_.matrixL().solve(rv);
  return y.squaredNorm();
}

double log_likelihood(std::span<const double> prediction, const ObservationSet& obs, const ErrorCovariance& cov) {
  if (prediction.size() != obs.size()) throw ShapeError("prediction length does not match the observation count");
  std::vector<double> r(obs.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = obs.values[i] - prediction[i];
  return -0.5 * cov.quadratic_form(r);
}

}  // namespace gcs::assimilate
