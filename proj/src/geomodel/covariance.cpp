#include "gcs/geomodel/covariance.hpp"

#include <cmath>

#include "gcs/common/error.hpp"

namespace gcs::geomodel {

double spherical_covariance(double h) {
  if (h >= 1.0) return 0.0;
  return 1.0 - 1.5 * h + 0.5 * h * h * h;
}

namespace {

void check_lengths(const CorrelationLengths& l) {
  if (!(l.lx > 0.0 && l.ly > 0.0 && l.lz > 0.0)) throw ArgumentError("correlation lengths must be positive");
}

struct TargetCoords {
  std::vector<double> x, y, z;
};

TargetCoords scaled_coords(const GridLayout& layout, const CorrelationLengths& l) {
  TargetCoords c;
  for (std::size_t cell : layout.target_cells()) {
    const auto p = layout.ijk(cell);
    c.x.push_back(p[0] / l.lx);
    c.y.push_back(p[1] / l.ly);
    c.z.push_back(p[2] / l.lz);
  }
  return c;
}

inline double entry(const TargetCoords& c, std::size_t a, std::size_t b) {
  const double hx = c.x[a] - c.x[b];
  const double hy = c.y[a] - c.y[b];
  const double hz = c.z[a] - c.z[b];
  return spherical_covariance(std::sqrt(hx * hx + hy * hy + hz * hz));
}

}  // namespace

namespace serial {

Eigen::MatrixXd build_covariance(const GridLayout& layout, const CorrelationLengths& lengths) {
  check_lengths(lengths);
  const auto c = scaled_coords(layout, lengths);
  const auto n = static_cast<Eigen::Index>(c.x.size());
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b <= a; ++b) {
      const double v = entry(c, a, b);
      cov(a, b) = v;
      cov(b, a) = v;
    }
  }
  return cov;
}

}  // namespace serial

Eigen::MatrixXd build_covariance(const GridLayout& layout, const CorrelationLengths& lengths) {
  check_lengths(lengths);
  const auto c = scaled_coords(layout, lengths);
  const auto n = static_cast<Eigen::Index>(c.x.size());
  Eigen::MatrixXd cov(n, n);
#pragma omp parallel for schedule(dynamic, 16)
  for (Eigen::Index b = 0; b < n; ++b) {
    for (Eigen::Index a = 0; a < n; ++a) cov(a, b) = entry(c, a, b);
  }
  return cov;
}

}  // namespace gcs::geomodel
