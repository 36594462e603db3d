#include "gcs/metrics/quantities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gcs/common/error.hpp"
#include "gcs/common/rng.hpp"

namespace gcs::metrics {

using geomodel::Region;

double leakage_volume(const flowsim::FieldSeries& series, std::size_t t, const geomodel::GridLayout& layout,
                      std::span<const double> porosity, Region region, LeakageUnit unit,
                      const flowsim::SimConfig& cfg) {
  if (t >= series.n_times()) throw ArgumentError("report index out of range");
  if (porosity.size() != layout.cell_count()) throw ShapeError("porosity must cover the full layout");
  const auto n = series.n_cells();
  double total = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    const auto g = series.global_cell(c, layout);
    if (layout.region(g) != region) continue;
    const double v = series.saturation[t * n + c] * porosity[g] * layout.bulk_volume(g);
    total += unit == LeakageUnit::mass_kg ? v * cfg.co2_density_in(layout.zone(layout.ijk(g)[2])) : v;
  }
  return total;
}

double fault_pressure_difference(const flowsim::FieldSeries& series, const geomodel::GridLayout& layout, int fault) {
  if (fault < 0 || fault > 1) throw ArgumentError("fault id must be 0 or 1");
  if (series.n_times() == 0) throw ArgumentError("series has no report times");
  const int x = layout.spec().fault_x[fault] - series.origin[0];
  const auto& d = series.dims;
  if (x - 1 < 0 || x + 1 >= d.nx) throw ArgumentError("fault column lies at the edge of the series grid");
  const auto& box = layout.target_box();
  const auto last = series.pressure_at(series.n_times() - 1);
  double sum = 0.0;
  std::size_t count = 0;
  for (int k : layout.layers_of(geomodel::Zone::target)) {
    const int kk = k - series.origin[2];
    if (kk < 0 || kk >= d.nz) continue;
    for (int j = box.j0; j < box.j1; ++j) {
      const int jj = j - series.origin[1];
      if (jj < 0 || jj >= d.ny) continue;
      const auto row = (static_cast<std::size_t>(kk) * d.ny + jj) * d.nx;
      sum += last[row + x + 1] - last[row + x - 1];
      ++count;
    }
  }
  if (count == 0) throw ArgumentError("series grid holds no target-aquifer fault cells");
  return std::abs(sum / static_cast<double>(count));
}

EmpiricalCdf::EmpiricalCdf(std::vector<double> samples) : sorted_(std::move(samples)) {
  if (sorted_.empty()) throw ArgumentError("empirical CDF of an empty sample");
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCdf::operator()(double x) const {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

namespace {

struct Clustering {
  std::vector<int> label;
  double inertia = std::numeric_limits<double>::infinity();
};

// k-means++ seeding then Lloyd iterations. An emptied cluster takes the point farthest from its center.
Clustering kmeans(const Eigen::MatrixXd& x, int k, int max_iterations, Rng& rng) {
  const int n = static_cast<int>(x.rows());
  Eigen::MatrixXd centers(k, x.cols());
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  centers.row(0) = x.row(static_cast<int>(rng.below(static_cast<std::uint64_t>(n))));
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (x.row(i) - centers.row(c - 1)).squaredNorm());
      total += d2[i];
    }
    int pick = n - 1;
    if (total > 0.0) {
      double u = rng.uniform() * total;
      for (int i = 0; i < n; ++i) {
        u -= d2[i];
        if (u < 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    }
    centers.row(c) = x.row(pick);
  }
  Clustering out;
  out.label.assign(n, -1);
  for (int it = 0; it < max_iterations; ++it) {
    bool changed = false;
    double inertia = 0.0;
    std::vector<double> best_d(n);
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (x.row(i) - centers.row(c)).squaredNorm();
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      if (out.label[i] != best) changed = true;
      out.label[i] = best;
      best_d[i] = bd;
      inertia += bd;
    }
    out.inertia = inertia;
    if (!changed && it > 0) break;
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, x.cols());
    std::vector<int> counts(k, 0);
    for (int i = 0; i < n; ++i) {
      sums.row(out.label[i]) += x.row(i);
      ++counts[out.label[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        centers.row(c) = sums.row(c) / counts[c];
      } else {
        const auto far = static_cast<int>(std::max_element(best_d.begin(), best_d.end()) - best_d.begin());
        centers.row(c) = x.row(far);
        best_d[far] = 0.0;
      }
    }
  }
  return out;
}

}  // namespace

std::vector<int> representative_medoids(const Eigen::MatrixXd& rows, int k, const MedoidConfig& cfg) {
  const int n = static_cast<int>(rows.rows());
  if (k < 1 || k > n) throw ArgumentError("medoid count must lie in [1, number of fields]");
  if (cfg.restarts < 1 || cfg.max_iterations < 1) throw ArgumentError("invalid k-means configuration");
  Clustering best;
  for (int r = 0; r < cfg.restarts; ++r) {
    Rng rng(derive_seed(cfg.seed, "kmeans-restart", static_cast<std::uint64_t>(r)));
    auto c = kmeans(rows, k, cfg.max_iterations, rng);
    if (c.inertia < best.inertia) best = std::move(c);
  }
  std::vector<int> medoids;
  for (int c = 0; c < k; ++c) {
    std::vector<int> members;
    for (int i = 0; i < n; ++i)
      if (best.label[i] == c) members.push_back(i);
    if (members.empty()) continue;
    int arg = members[0];
    double best_sum = std::numeric_limits<double>::infinity();
    for (int a : members) {
      double s = 0.0;
      for (int b : members) s += (rows.row(a) - rows.row(b)).norm();
      if (s < best_sum) {
        best_sum = s;
        arg = a;
      }
    }
    medoids.push_back(arg);
  }
  std::sort(medoids.begin(), medoids.end());
  return medoids;
}

}  // namespace gcs::metrics
