#include "gcs/sensitivity/sobol.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "gcs/common/error.hpp"
#include "gcs/common/rng.hpp"
#include "gcs/common/stats.hpp"
#include "sobol_directions.inc"

namespace gcs::sensitivity {

namespace {
constexpr int kBits = 32;
constexpr double kScale = 0x1.0p-32;
}  // namespace

int SobolSequence::max_dims() { return static_cast<int>(detail::kSobolMaxDims); }

SobolSequence::SobolSequence(int dims, std::uint64_t shift_seed) : dims_(dims) {
  if (dims < 1 || dims > max_dims()) {
    throw ArgumentError("Sobol dimension " + std::to_string(dims) + " outside [1, " + std::to_string(max_dims()) + "]");
  }
  v_.assign(static_cast<std::size_t>(dims) * kBits, 0);
  for (int d = 0; d < dims; ++d) {
    std::uint32_t* v = v_.data() + static_cast<std::size_t>(d) * kBits;
    const auto& e = detail::kDirectionTable[d];
    if (e.degree == 0) {
      for (int k = 0; k < kBits; ++k) v[k] = 1u << (kBits - 1 - k);
      continue;
    }
    const int s = static_cast<int>(e.degree);
    const std::uint32_t a = (e.poly >> 1) & ((1u << (s - 1)) - 1u);
    std::array<std::uint64_t, kBits> m{};
    for (int k = 0; k < s && k < kBits; ++k) m[k] = e.m[k];
    for (int k = s; k < kBits; ++k) {
      std::uint64_t mk = m[k - s] ^ (m[k - s] << s);
      for (int j = 1; j < s; ++j) {
        if ((a >> (s - 1 - j)) & 1u) mk ^= m[k - j] << j;
      }
      m[k] = mk;
    }
    for (int k = 0; k < kBits; ++k) v[k] = static_cast<std::uint32_t>(m[k] << (kBits - 1 - k));
  }
  shift_.assign(dims, 0);
  if (shift_seed != 0) {
    Rng rng(shift_seed, "sobol-shift");
    for (auto& s : shift_) s = static_cast<std::uint32_t>(rng.next_u64() >> 32);
  }
  x_.assign(dims, 0);
}

std::vector<double> SobolSequence::next() {
  // Gray code: flip the direction number of the lowest zero bit of the previous index.
  int c = 0;
  while ((index_ >> c) & 1u) ++c;
  if (c >= kBits) throw NumericalError("Sobol sequence exhausted");
  ++index_;
  std::vector<double> p(dims_);
  for (int d = 0; d < dims_; ++d) {
    x_[d] ^= v_[static_cast<std::size_t>(d) * kBits + c];
    p[d] = (x_[d] ^ shift_[d]) * kScale;
  }
  return p;
}

std::vector<double> SobolSequence::point(std::uint64_t n) const {
  if (n == 0 || n >= (1ull << kBits)) throw ArgumentError("Sobol index out of range");
  const std::uint64_t gray = n ^ (n >> 1);
  std::vector<double> p(dims_);
  for (int d = 0; d < dims_; ++d) {
    std::uint32_t x = 0;
    for (int k = 0; k < kBits; ++k) {
      if ((gray >> k) & 1u) x ^= v_[static_cast<std::size_t>(d) * kBits + k];
    }
    p[d] = (x ^ shift_[d]) * kScale;
  }
  return p;
}

double star_discrepancy_2d(const std::vector<std::array<double, 2>>& pts) {
  const int n = static_cast<int>(pts.size());
  if (n == 0) throw ArgumentError("empty point set");
  std::vector<double> xs, ys;
  for (const auto& p : pts) {
    xs.push_back(p[0]);
    ys.push_back(p[1]);
  }
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  xs.push_back(1.0);
  ys.push_back(1.0);
  // closed[i][j]: points with x <= xs[i] and y <= ys[j]; open: strict in both.
  const int m = n + 1;
  std::vector<int> closed(static_cast<std::size_t>(m) * m, 0), open(static_cast<std::size_t>(m) * m, 0);
  for (const auto& p : pts) {
    const int ic = static_cast<int>(std::lower_bound(xs.begin(), xs.end(), p[0]) - xs.begin());
    const int jc = static_cast<int>(std::lower_bound(ys.begin(), ys.end(), p[1]) - ys.begin());
    const int io = static_cast<int>(std::upper_bound(xs.begin(), xs.end(), p[0]) - xs.begin());
    const int jo = static_cast<int>(std::upper_bound(ys.begin(), ys.end(), p[1]) - ys.begin());
    ++closed[static_cast<std::size_t>(ic) * m + jc];
    if (io < m && jo < m) ++open[static_cast<std::size_t>(io) * m + jo];
  }
  for (auto* t : {&closed, &open}) {
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        int v = (*t)[static_cast<std::size_t>(i) * m + j];
        if (i > 0) v += (*t)[static_cast<std::size_t>(i - 1) * m + j];
        if (j > 0) v += (*t)[static_cast<std::size_t>(i) * m + j - 1];
        if (i > 0 && j > 0) v -= (*t)[static_cast<std::size_t>(i - 1) * m + j - 1];
        (*t)[static_cast<std::size_t>(i) * m + j] = v;
      }
    }
  }
  double d = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const double vol = xs[i] * ys[j];
      d = std::max(d, static_cast<double>(closed[static_cast<std::size_t>(i) * m + j]) / n - vol);
      d = std::max(d, vol - static_cast<double>(open[static_cast<std::size_t>(i) * m + j]) / n);
    }
  }
  return d;
}

Eigen::MatrixXd SaltelliDesign::radial(int group) const {
  if (group < 0 || group >= n_groups) throw ArgumentError("group index out of range");
  Eigen::MatrixXd m = A;
  for (int c = 0; c < columns(); ++c) {
    if (group_of_column[c] == group) m.col(c) = B.col(c);
  }
  return m;
}

SaltelliDesign sobol_design(int n_base, const std::vector<int>& group_sizes, std::uint64_t seed) {
  if (n_base < 2) throw ArgumentError("n_base must be at least 2");
  SaltelliDesign d;
  d.n_base = n_base;
  d.n_groups = static_cast<int>(group_sizes.size());
  for (int g = 0; g < d.n_groups; ++g) {
    if (group_sizes[g] < 1) throw ArgumentError("variable groups must be nonempty");
    for (int c = 0; c < group_sizes[g]; ++c) d.group_of_column.push_back(g);
  }
  const int k = d.columns();
  if (2 * k > SobolSequence::max_dims()) throw ArgumentError("design needs more Sobol dimensions than available");
  SobolSequence seq(2 * k, seed);
  d.A.resize(n_base, k);
  d.B.resize(n_base, k);
  for (int i = 0; i < n_base; ++i) {
    const auto p = seq.next();
    for (int c = 0; c < k; ++c) {
      d.A(i, c) = p[c];
      d.B(i, c) = p[k + c];
    }
  }
  return d;
}

Eigen::MatrixXd first_order_indices(const Eigen::MatrixXd& fA, const Eigen::MatrixXd& fB,
                                    const std::vector<Eigen::MatrixXd>& fAB) {
  const auto n = fA.rows();
  const auto T = fA.cols();
  if (n < 2 || fB.rows() != n || fB.cols() != T) throw ShapeError("fA and fB must be matching n x T matrices");
  for (const auto& m : fAB) {
    if (m.rows() != n || m.cols() != T) throw ShapeError("radial evaluations must match fA");
  }
  Eigen::MatrixXd z(T, static_cast<Eigen::Index>(fAB.size()));
  std::vector<double> buf(static_cast<std::size_t>(2 * n));
  for (Eigen::Index t = 0; t < T; ++t) {
    for (Eigen::Index j = 0; j < n; ++j) {
      buf[j] = fA(j, t);
      buf[n + j] = fB(j, t);
    }
    const double mean = stats::pairwise_sum(buf) / static_cast<double>(2 * n);
    for (auto& v : buf) v = (v - mean) * (v - mean);
    const double var = stats::pairwise_sum(buf) / static_cast<double>(2 * n);
    if (!(var > 0.0) || var <= 1e-28 * mean * mean) {
      throw NumericalError("output column " + std::to_string(t) + " has zero variance");
    }
    std::vector<double> terms(static_cast<std::size_t>(n));
    for (std::size_t g = 0; g < fAB.size(); ++g) {
      for (Eigen::Index j = 0; j < n; ++j) terms[j] = (fB(j, t) - mean) * (fAB[g](j, t) - fA(j, t));
      z(t, static_cast<Eigen::Index>(g)) = stats::pairwise_sum(terms) / static_cast<double>(n) / var;
    }
  }
  return z;
}

bool gsa_converged(const std::vector<Eigen::MatrixXd>& history, double tol) {
  if (history.size() < 2) return false;
  const auto& a = history[history.size() - 2];
  const auto& b = history.back();
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("index estimates differ in shape");
  for (Eigen::Index t = 0; t < a.rows(); ++t) {
    if (!((a.row(t) - b.row(t)).cwiseAbs().mean() < tol)) return false;
  }
  return true;
}

SensitivityResult run_gsa(const BatchModel& model, const std::vector<int>& group_sizes,
                          const std::vector<std::string>& names, const std::vector<double>& times,
                          const GsaConfig& cfg) {
  if (cfg.n_start < 2 || cfg.n_max < cfg.n_start) throw ArgumentError("invalid GSA sample sizes");
  if (names.size() != group_sizes.size()) throw ArgumentError("one name per variable group required");
  const SaltelliDesign full = sobol_design(cfg.n_max, group_sizes, cfg.seed);
  const int G = full.n_groups;
  // Evaluations grow by appending rows, so each refinement reuses the previous ones.
  Eigen::MatrixXd fA, fB;
  std::vector<Eigen::MatrixXd> fAB(G);
  auto append = [](Eigen::MatrixXd& dst, const Eigen::MatrixXd& rows) {
    if (dst.size() == 0) {
      dst = rows;
      return;
    }
    Eigen::MatrixXd m(dst.rows() + rows.rows(), dst.cols());
    m << dst, rows;
    dst = std::move(m);
  };
  auto evaluate = [&](const Eigen::MatrixXd& pts) {
    Eigen::MatrixXd y = model(pts);
    if (y.rows() != pts.rows() || static_cast<std::size_t>(y.cols()) != times.size()) {
      throw ShapeError("model output must have one row per point and one column per time");
    }
    return y;
  };
  SensitivityResult res;
  res.variables = names;
  res.times = times;
  int have = 0;
  for (int n = cfg.n_start;; n *= 2) {
    n = std::min(n, cfg.n_max);
    const int add = n - have;
    append(fA, evaluate(full.A.middleRows(have, add)));
    append(fB, evaluate(full.B.middleRows(have, add)));
    for (int g = 0; g < G; ++g) append(fAB[g], evaluate(full.radial(g).middleRows(have, add)));
    have = n;
    res.history.push_back(first_order_indices(fA, fB, fAB));
    res.history_n_base.push_back(n);
    res.converged = gsa_converged(res.history, cfg.tol);
    if (res.converged || n >= cfg.n_max) break;
  }
  res.z = res.history.back();
  res.n_base = have;
  res.sample_count = static_cast<std::size_t>(have) * (G + 2);
  return res;
}

double footprint_ratio(const flowsim::FieldSeries& series, std::size_t time_index, const geomodel::GridLayout& layout,
                       double threshold) {
  if (time_index >= series.n_times()) throw ArgumentError("time index out of range");
  const auto s = series.saturation_at(time_index);
  int i0 = std::numeric_limits<int>::max(), j0 = i0, k0 = i0, i1 = -1, j1 = -1, k1 = -1;
  for (std::size_t c = 0; c < s.size(); ++c) {
    if (!(s[c] > threshold)) continue;
    const std::size_t g = series.global_cell(c, layout);
    if (layout.region(g) != geomodel::Region::target) continue;
    const auto ijk = layout.ijk(g);
    i0 = std::min(i0, ijk[0]);
    i1 = std::max(i1, ijk[0]);
    j0 = std::min(j0, ijk[1]);
    j1 = std::max(j1, ijk[1]);
    k0 = std::min(k0, ijk[2]);
    k1 = std::max(k1, ijk[2]);
  }
  if (i1 < 0) return 0.0;
  const double column = layout.dx() * layout.dy();
  double box = 0.0;
  for (int k = k0; k <= k1; ++k) box += column * (i1 - i0 + 1) * (j1 - j0 + 1) * layout.dz(k);
  double slab = 0.0;
  for (int k : layout.layers_of(geomodel::Zone::target)) slab += column * layout.nx() * layout.ny() * layout.dz(k);
  return box / slab;
}

}  // namespace gcs::sensitivity
