#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gcs/flowsim/config.hpp"
#include "gcs/flowsim/series.hpp"
#include "gcs/geomodel/layout.hpp"
#include "gcs/geomodel/realization.hpp"

namespace gcs::metrics {

enum class LeakageUnit { volume_m3, mass_kg };

// Sum of S * phi * bulk volume over the region's cells at report index t; the mass variant multiplies by the
// CO2 density of the region's aquifer system.
double leakage_volume(const flowsim::FieldSeries& series, std::size_t t, const geomodel::GridLayout& layout,
                      std::span<const double> porosity, geomodel::Region region,
                      LeakageUnit unit = LeakageUnit::volume_m3, const flowsim::SimConfig& cfg = {});

// Mean over target-aquifer layers and along-fault cells of p(east) - p(west) at the final time, absolute value.
double fault_pressure_difference(const flowsim::FieldSeries& series, const geomodel::GridLayout& layout, int fault);

class EmpiricalCdf {
 public:
  explicit EmpiricalCdf(std::vector<double> samples);
  // Fraction of samples <= x.
  double operator()(double x) const;
  const std::vector<double>& sorted() const { return sorted_; }

 private:
  std::vector<double> sorted_;
};

struct MedoidConfig {
  int restarts = 20;
  int max_iterations = 300;
  std::uint64_t seed = 1;
};

// k-means on the rows, best of `restarts` by inertia, then per cluster the member with the least summed distance to
// its cluster. Returned row indices are sorted.
std::vector<int> representative_medoids(const Eigen::MatrixXd& rows, int k, const MedoidConfig& cfg = {});

}  // namespace gcs::metrics
