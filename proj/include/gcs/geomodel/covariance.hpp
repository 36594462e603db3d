#pragma once

#include <Eigen/Dense>

#include "gcs/geomodel/layout.hpp"

namespace gcs::geomodel {

struct CorrelationLengths {
  double lx = 10.0;  // cells
  double ly = 10.0;
  double lz = 3.0;
};

// Spherical covariance with unit sill at anisotropically scaled lag h (h = 1 at the range).
double spherical_covariance(double scaled_lag);

// Covariance over the target-aquifer cells, in layout.target_cells() order.
Eigen::MatrixXd build_covariance(const GridLayout& layout, const CorrelationLengths& lengths);

namespace serial {
Eigen::MatrixXd build_covariance(const GridLayout& layout, const CorrelationLengths& lengths);
}

}  // namespace gcs::geomodel
