#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gcs/flowsim/series.hpp"
#include "gcs/geomodel/layout.hpp"

namespace gcs::sensitivity {

// Sobol low-discrepancy sequence from the Joe-Kuo direction numbers, Gray-code order. Enumeration starts at
// index 1, so the first point is 0.5 in every dimension. A nonzero `shift_seed` applies a random digital shift.
class SobolSequence {
 public:
  explicit SobolSequence(int dims, std::uint64_t shift_seed = 0);
  static int max_dims();

  int dims() const { return dims_; }
  std::vector<double> next();
  // Point with 1-based sequence index `n` (no state change).
  std::vector<double> point(std::uint64_t n) const;

 private:
  int dims_;
  std::vector<std::uint32_t> v_;  // dims x 32 direction numbers
  std::vector<std::uint32_t> shift_;
  std::vector<std::uint32_t> x_;
  std::uint64_t index_ = 0;
};

// Exact star discrepancy of a 2-D point set, evaluated on the grid spanned by the point coordinates.
double star_discrepancy_2d(const std::vector<std::array<double, 2>>& pts);

// Radial Saltelli design. Columns belong to variable groups; a group swaps as a block in A_B^i.
struct SaltelliDesign {
  int n_base = 0;
  std::vector<int> group_of_column;
  int n_groups = 0;
  Eigen::MatrixXd A, B;  // n_base x columns, values in (0, 1)

  int columns() const { return static_cast<int>(group_of_column.size()); }
  Eigen::MatrixXd radial(int group) const;
  std::size_t sample_count() const { return static_cast<std::size_t>(n_base) * (n_groups + 2); }
};

// `group_sizes[g]` columns per group, in order. A and B come from the first and second halves of one
// 2 * columns dimensional sequence, points 1..n_base.
SaltelliDesign sobol_design(int n_base, const std::vector<int>& group_sizes, std::uint64_t seed = 0);

// First-order indices of each group for every output column. fA, fB: n x T; fAB[g]: n x T.
// Outputs are centered by the pooled mean of fA and fB; variance is the pooled population variance.
Eigen::MatrixXd first_order_indices(const Eigen::MatrixXd& fA, const Eigen::MatrixXd& fB,
                                    const std::vector<Eigen::MatrixXd>& fAB);

struct SensitivityResult {
  std::vector<std::string> variables;
  std::vector<double> times;
  Eigen::MatrixXd z;  // T x groups
  int n_base = 0;
  std::size_t sample_count = 0;
  std::vector<int> history_n_base;
  std::vector<Eigen::MatrixXd> history;
  bool converged = false;
};

// Mean absolute index change over variables below `tol` at every time, between the last two estimates.
bool gsa_converged(const std::vector<Eigen::MatrixXd>& history, double tol = 0.01);

// Maps a batch of unit-cube points (rows) to outputs (rows of T values).
using BatchModel = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>;

struct GsaConfig {
  int n_start = 256;
  int n_max = 1024;
  double tol = 0.01;
  std::uint64_t seed = 0;
};

// Doubles n_base from n_start until the indices converge or n_max is reached; earlier evaluations are reused.
SensitivityResult run_gsa(const BatchModel& model, const std::vector<int>& group_sizes,
                          const std::vector<std::string>& names, const std::vector<double>& times,
                          const GsaConfig& cfg);

// Bulk volume of the bounding box of target-aquifer cells with S > threshold, over the bulk volume of the
// target-layer slab (target aquifer box plus surround). `snapshot` is one time of `series`.
double footprint_ratio(const flowsim::FieldSeries& series, std::size_t time_index, const geomodel::GridLayout& layout,
                       double threshold = 0.02);

}  // namespace gcs::sensitivity
