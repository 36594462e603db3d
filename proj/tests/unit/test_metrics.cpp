#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "gcs/common/error.hpp"
#include "gcs/common/rng.hpp"
#include "gcs/common/stats.hpp"
#include "gcs/flowsim/simulator.hpp"
#include "gcs/geomodel/generator.hpp"
#include "gcs/metrics/errors.hpp"
#include "gcs/metrics/quantities.hpp"

using namespace gcs;
using namespace gcs::metrics;
using geomodel::Region;

namespace {

flowsim::FieldSeries flat_series(int nx, int ny, int nz, std::size_t n_t) {
  flowsim::FieldSeries s;
  s.dims = {nx, ny, nz};
  for (std::size_t t = 0; t < n_t; ++t) s.times_years.push_back(static_cast<double>(t + 1));
  s.pressure.assign(n_t * s.n_cells(), 0.0);
  s.saturation.assign(n_t * s.n_cells(), 0.0);
  return s;
}

const geomodel::GridLayout& tiny_layout() {
  static const geomodel::GridLayout layout(geomodel::LayoutSpec::tiny());
  return layout;
}

flowsim::FieldSeries layout_series(const geomodel::GridLayout& layout, std::size_t n_t) {
  return flat_series(layout.nx(), layout.ny(), layout.nz(), n_t);
}

}  // namespace

TEST_CASE("saturation MAE over the plume region") {
  auto sim = flat_series(2, 1, 1, 1);
  auto surr = sim;
  sim.saturation = {0.5, 0.0};
  surr.saturation = {0.3, 0.0};
  const auto m = saturation_mae(sim, surr);
  CHECK(m.count == 1);
  CHECK(m.value == doctest::Approx(0.2).epsilon(1e-14));
  CHECK_FALSE(m.empty_plume);
  CHECK(saturation_mae(sim, sim).value == 0.0);
  const auto empty = saturation_mae(flat_series(2, 1, 1, 1), flat_series(2, 1, 1, 1));
  CHECK(empty.empty_plume);
  CHECK(empty.value == 0.0);
  CHECK_THROWS_AS(saturation_mae(sim, flat_series(3, 1, 1, 1)), ShapeError);

  // Brute-force count and permutation invariance on random fields.
  Rng rng(3);
  auto a = flat_series(5, 4, 3, 3), b = a;
  for (auto& v : a.saturation) v = rng.uniform() < 0.6 ? 0.0 : rng.uniform();
  for (auto& v : b.saturation) v = rng.uniform() < 0.6 ? 0.0 : rng.uniform();
  std::size_t count = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < a.saturation.size(); ++i) {
    if (a.saturation[i] > 0.02 || b.saturation[i] > 0.02) {
      ++count;
      sum += std::abs(a.saturation[i] - b.saturation[i]);
    }
  }
  const auto r = saturation_mae(a, b);
  CHECK(r.count == count);
  CHECK(r.value == doctest::Approx(sum / count).epsilon(1e-13));
  std::vector<std::size_t> perm(a.n_cells());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = (i * 7) % perm.size();
  auto pa = a, pb = b;
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t c = 0; c < perm.size(); ++c) {
      pa.saturation[t * perm.size() + c] = a.saturation[t * perm.size() + perm[c]];
      pb.saturation[t * perm.size() + c] = b.saturation[t * perm.size() + perm[c]];
    }
  }
  CHECK(saturation_mae(pa, pb).value == doctest::Approx(r.value).epsilon(1e-13));
  CHECK(saturation_mae(pa, pb).count == r.count);
}

TEST_CASE("pressure relative error") {
  Rng rng(4);
  auto sim = flat_series(3, 1, 1, 2);
  for (auto& v : sim.pressure) v = 1e7 + 1e6 * rng.uniform();
  CHECK(pressure_relative_error(sim, sim) == 0.0);
  auto surr = sim;
  for (auto& v : surr.pressure) v += 1e6 * (rng.uniform() - 0.5);
  double brute = 0.0;
  for (std::size_t t = 0; t < 2; ++t) {
    double lo = 1e300, hi = -1e300;
    for (std::size_t c = 0; c < 3; ++c) {
      lo = std::min(lo, sim.pressure[t * 3 + c]);
      hi = std::max(hi, sim.pressure[t * 3 + c]);
    }
    for (std::size_t c = 0; c < 3; ++c) brute += std::abs(surr.pressure[t * 3 + c] - sim.pressure[t * 3 + c]) / (hi - lo);
  }
  brute /= 6.0;
  CHECK(std::abs(pressure_relative_error(sim, surr) - brute) < 1e-12);

  auto offset = sim;
  for (auto& v : offset.pressure) v += 5e4;
  double expect = 0.0;
  for (std::size_t t = 0; t < 2; ++t) {
    const auto p = sim.pressure_at(t);
    expect += 5e4 / (*std::max_element(p.begin(), p.end()) - *std::min_element(p.begin(), p.end()));
  }
  CHECK(pressure_relative_error(sim, offset) == doctest::Approx(expect / 2.0).epsilon(1e-12));

  auto shifted_sim = sim, shifted_surr = surr;
  for (auto& v : shifted_sim.pressure) v += 3e6;
  for (auto& v : shifted_surr.pressure) v += 3e6;
  CHECK(pressure_relative_error(shifted_sim, shifted_surr) == doctest::Approx(brute).epsilon(1e-9));

  auto constant = flat_series(3, 1, 1, 1);
  CHECK_THROWS_AS(pressure_relative_error(constant, constant), NumericalError);
}

TEST_CASE("aggregation masks drop caprock and filter regions") {
  const auto& layout = tiny_layout();
  const auto s = layout_series(layout, 1);
  const auto mask = aggregation_mask(s, layout);
  std::size_t kept = 0;
  for (std::size_t c = 0; c < s.n_cells(); ++c) {
    CHECK(static_cast<bool>(mask[c]) == (layout.region(c) != Region::caprock));
    kept += mask[c];
  }
  CHECK(kept < s.n_cells());
  const Region mid[1] = {Region::middle};
  const auto only = aggregation_mask(s, layout, mid);
  for (std::size_t c = 0; c < s.n_cells(); ++c) CHECK(static_cast<bool>(only[c]) == (layout.region(c) == Region::middle));

  // Region breakdown picks up only its own cells.
  auto sim = s, surr = s;
  for (std::size_t c = 0; c < s.n_cells(); ++c) {
    if (layout.region(c) == Region::middle) surr.saturation[c] = 0.5;
    if (layout.region(c) == Region::caprock) surr.saturation[c] = 0.9;
  }
  const Region regions[3] = {Region::target, Region::middle, Region::caprock};
  const auto parts = region_breakdown(sim, surr, layout, regions);
  CHECK(parts[0].mae.empty_plume);
  CHECK(parts[1].mae.value == doctest::Approx(0.5));
  CHECK(parts[2].mae.empty_plume);
  CHECK(saturation_mae(sim, surr, 0.02, aggregation_mask(s, layout)).value == doctest::Approx(0.5));
}

TEST_CASE("percentile summaries and error reports") {
  Rng rng(9);
  std::vector<double> v(777);
  for (auto& x : v) x = rng.uniform();
  auto sorted = v;
  std::sort(sorted.begin(), sorted.end());
  const auto s = percentile_summary(v);
  const auto rank = [&](double p) { return sorted[static_cast<std::size_t>(std::ceil(p / 100.0 * 777)) - 1]; };
  CHECK(s.p10 == rank(10));
  CHECK(s.p25 == rank(25));
  CHECK(s.p50 == rank(50));
  CHECK(s.p75 == rank(75));
  CHECK(s.p90 == rank(90));
  CHECK((s.p10 <= s.p25 && s.p25 <= s.p50 && s.p50 <= s.p75 && s.p75 <= s.p90));

  ErrorReport rep;
  rep.add({0.1, 4, false}, 0.01);
  rep.add({0.0, 0, true}, 0.02);
  rep.add({0.3, 2, false}, 0.03);
  rep.summarize();
  CHECK(rep.empty_plume_samples == 1);
  CHECK(rep.saturation_mae.size() == 2);
  REQUIRE(rep.pressure_summary);
  CHECK(rep.pressure_summary->p50 == 0.02);
  CHECK(rep.saturation_summary->p90 == 0.3);
}

TEST_CASE("leakage volume") {
  const auto& layout = tiny_layout();
  auto s = layout_series(layout, 1);
  std::vector<double> phi(layout.cell_count(), 0.3);
  CHECK(leakage_volume(s, 0, layout, phi, Region::middle) == 0.0);
  std::size_t mid = 0, up = 0;
  for (std::size_t c = 0; c < layout.cell_count(); ++c) {
    if (layout.region(c) == Region::middle && !mid) mid = c;
    if (layout.region(c) == Region::upper && !up) up = c;
  }
  s.saturation[mid] = 0.5;
  s.saturation[up] = 0.25;
  const double bulk = layout.bulk_volume(mid);
  CHECK(leakage_volume(s, 0, layout, phi, Region::middle) == doctest::Approx(0.5 * 0.3 * bulk).epsilon(1e-14));
  const flowsim::SimConfig cfg;
  CHECK(leakage_volume(s, 0, layout, phi, Region::middle, LeakageUnit::mass_kg, cfg) ==
        doctest::Approx(0.5 * 0.3 * bulk * cfg.co2_density_in(geomodel::Zone::middle)).epsilon(1e-14));

  // Additive over disjoint regions; domain sub-series gives the same totals.
  Rng rng(2);
  for (auto& v : s.saturation) v = rng.uniform();
  const double m = leakage_volume(s, 0, layout, phi, Region::middle);
  const double u = leakage_volume(s, 0, layout, phi, Region::upper);
  double both = 0.0;
  for (std::size_t c = 0; c < layout.cell_count(); ++c) {
    const auto r = layout.region(c);
    if (r == Region::middle || r == Region::upper) both += s.saturation[c] * phi[c] * layout.bulk_volume(c);
  }
  CHECK(m + u == doctest::Approx(both).epsilon(1e-12));
  const auto dom = flowsim::extract_domain(s, layout);
  const auto& box = layout.domain_box();
  double inside = 0.0;
  for (std::size_t c = 0; c < layout.cell_count(); ++c) {
    const auto ijk = layout.ijk(c);
    if (layout.region(c) == Region::middle && box.contains(ijk[0], ijk[1], ijk[2])) {
      inside += s.saturation[c] * phi[c] * layout.bulk_volume(c);
    }
  }
  CHECK(leakage_volume(dom, 0, layout, phi, Region::middle) == doctest::Approx(inside).epsilon(1e-12));
  CHECK_THROWS_AS(leakage_volume(s, 1, layout, phi, Region::middle), ArgumentError);
}

TEST_CASE("fault pressure difference") {
  const auto& layout = tiny_layout();
  auto s = layout_series(layout, 2);
  for (auto& v : s.pressure) v = 2e7;
  CHECK(fault_pressure_difference(s, layout, 0) == 0.0);
  const int fx = layout.spec().fault_x[0];
  const auto n = s.n_cells();
  for (std::size_t c = 0; c < n; ++c) {
    if (layout.ijk(c)[0] > fx) s.pressure[n + c] += 3e5;
  }
  CHECK(fault_pressure_difference(s, layout, 0) == doctest::Approx(3e5).epsilon(1e-12));
  CHECK_THROWS_AS(fault_pressure_difference(s, layout, 2), ArgumentError);
  geomodel::Box cut{fx, layout.nx(), 0, layout.ny(), 0, layout.nz()};
  CHECK_THROWS_AS(fault_pressure_difference(flowsim::restrict_to_box(s, cut), layout, 0), ArgumentError);
}

TEST_CASE("sealing faults: no leakage and a pressure step across the fault") {
  geomodel::GeneratorConfig gc;
  gc.n_construct = 100;
  const geomodel::Generator gen(geomodel::GridLayout(geomodel::LayoutSpec::tiny()),
                                geomodel::PriorSpec::table_default(), gc);
  flowsim::SimConfig cfg;
  cfg.rate_mt_per_year = 0.25;
  cfg.max_step_years = 1.0;
  cfg.boundary_pv_multiplier = 1000.0;
  auto real = gen.draw(21, 0);
  auto meta = real.meta;
  using geomodel::Param;
  for (Param p : {Param::log10_kf1_tm, Param::log10_kf1_mu, Param::log10_kf2_tm, Param::log10_kf2_mu}) meta[p] = -4.0;
  real = gen.realize(meta, real.xi);
  const auto model = flowsim::build_flow_model(real, gen.layout(), cfg);
  const auto series = flowsim::simulate(model, cfg);
  const auto last = series.n_times() - 1;
  const double injected = flowsim::injected_co2_mass(model, cfg, cfg.injection_years) /
                          cfg.co2_density_in(geomodel::Zone::target);
  const double leaked = leakage_volume(series, last, gen.layout(), real.phi, Region::middle) +
                        leakage_volume(series, last, gen.layout(), real.phi, Region::upper);
  CHECK(leaked < 1e-6 * injected);
  CHECK(fault_pressure_difference(series, gen.layout(), 0) > 0.0);
}

TEST_CASE("empirical CDF") {
  const EmpiricalCdf one({4.0});
  CHECK(one(3.999) == 0.0);
  CHECK(one(4.0) == 1.0);
  const EmpiricalCdf three({3.0, 1.0, 2.0});
  CHECK(three(2.0) == doctest::Approx(2.0 / 3.0));
  CHECK(three(0.5) == 0.0);
  CHECK(three(3.0) == 1.0);
  Rng rng(5);
  std::vector<double> v(200);
  for (auto& x : v) x = std::floor(rng.uniform() * 50.0);
  const EmpiricalCdf cdf(v);
  for (double x = -1.0; x < 52.0; x += 0.5) {
    const auto count = std::count_if(v.begin(), v.end(), [&](double s) { return s <= x; });
    CHECK(cdf(x) == static_cast<double>(count) / 200.0);
  }
  CHECK_THROWS_AS(EmpiricalCdf({}), ArgumentError);
}

TEST_CASE("representative medoids") {
  Rng rng(6);
  Eigen::MatrixXd pts(5, 3);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 3; ++j) pts(i, j) = rng.normal();
  CHECK(representative_medoids(pts, 5) == std::vector<int>{0, 1, 2, 3, 4});
  CHECK_THROWS_AS(representative_medoids(pts, 6), ArgumentError);

  Eigen::MatrixXd clouds(60, 2);
  for (int i = 0; i < 60; ++i) {
    const double cx = i < 30 ? -10.0 : 10.0;
    clouds(i, 0) = cx + rng.normal();
    clouds(i, 1) = rng.normal();
  }
  const auto med = representative_medoids(clouds, 2);
  REQUIRE(med.size() == 2);
  CHECK(med[0] < 30);
  CHECK(med[1] >= 30);
  CHECK(representative_medoids(clouds, 2) == med);

  Eigen::MatrixXd dup(9, 2);
  for (int i = 0; i < 9; ++i) dup.row(i) << 1.0, 2.0;
  dup.row(2) << 1.5, 2.5;
  dup.row(6) << 0.0, 2.0;
  const auto d = representative_medoids(dup, 1);
  REQUIRE(d.size() == 1);
  CHECK(dup(d[0], 0) == 1.0);
  CHECK(dup(d[0], 1) == 2.0);
}
