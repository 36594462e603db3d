#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "gcs/common/error.hpp"
#include "gcs/common/rng.hpp"
#include "gcs/geomodel/covariance.hpp"
#include "gcs/geomodel/generator.hpp"
#include "gcs/geomodel/geomech.hpp"
#include "gcs/geomodel/layout.hpp"
#include "gcs/geomodel/metaparameters.hpp"
#include "gcs/geomodel/pca.hpp"
#include "gcs/geomodel/realization.hpp"

using namespace gcs;
using namespace gcs::geomodel;

namespace {

// 1D row of target cells: nx x 1 target box, minimal seals around it.
LayoutSpec row_layout(int n_target) {
  LayoutSpec s;
  s.nx = n_target + 2;
  s.ny = 3;
  s.surround_margin = 1;
  s.layers = {{Zone::target, 1, 10.0}, {Zone::caprock_lower, 1, 10.0}, {Zone::middle, 1, 10.0},
              {Zone::caprock_upper, 1, 10.0}, {Zone::upper, 1, 10.0}};
  s.fault_x = {2, 3};
  s.injectors = {{"I1", 1, 1}};
  s.observers = {};
  return s;
}

GeneratorConfig small_config() {
  GeneratorConfig c;
  c.n_construct = 60;
  return c;
}

}  // namespace

TEST_CASE("spherical covariance values") {
  CHECK(spherical_covariance(0.0) == 1.0);
  CHECK(spherical_covariance(1.0) == 0.0);
  CHECK(spherical_covariance(2.5) == 0.0);
  CHECK(spherical_covariance(0.5) == doctest::Approx(0.3125).epsilon(1e-15));
}

TEST_CASE("covariance on a short row with range two cells") {
  LayoutSpec s = row_layout(6);
  s.fault_x = {2, 5};
  GridLayout layout(s);
  // target row keeps x = 1, 3, 4, 6 after the two fault columns
  REQUIRE(layout.target_cells().size() == 4);
  auto cov = build_covariance(layout, {2.0, 1.0, 1.0});
  CHECK(cov(0, 0) == 1.0);
  CHECK(cov(1, 2) == doctest::Approx(0.3125).epsilon(1e-15));
  CHECK(cov(0, 1) == 0.0);
  CHECK(cov(2, 1) == cov(1, 2));
  CHECK_THROWS_AS(build_covariance(layout, {0.0, 1.0, 1.0}), ArgumentError);
}

TEST_CASE("parallel covariance matches the serial reference") {
  GridLayout layout(LayoutSpec::tiny());
  auto par = build_covariance(layout, {});
  auto ser = serial::build_covariance(layout, {});
  CHECK((par - ser).cwiseAbs().maxCoeff() == 0.0);
  CHECK((par - par.transpose()).cwiseAbs().maxCoeff() == 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(par);
  CHECK(eig.eigenvalues().minCoeff() > -1e-8);
}

TEST_CASE("layouts carry consistent regions") {
  for (auto spec : {LayoutSpec::tiny(), LayoutSpec::desk_default()}) {
    GridLayout layout(spec);
    CHECK(layout.cell_count() == static_cast<std::size_t>(layout.nx() * layout.ny() * layout.nz()));
    const Box& tb = layout.target_box();
    std::size_t n_target = 0;
    for (std::size_t c = 0; c < layout.cell_count(); ++c) {
      auto [i, j, k] = layout.ijk(c);
      CHECK(layout.index(i, j, k) == c);
      if (layout.region(c) == Region::target) {
        ++n_target;
        CHECK(tb.contains(i, j, k));
      }
    }
    // faults remove one column each from the target box
    CHECK(n_target == tb.count() - 2 * static_cast<std::size_t>(tb.ny() * tb.nz()));
    CHECK(n_target == layout.target_cells().size());
    // fault columns span all aquifer and caprock layers inside the box
    for (int f = 0; f < 2; ++f) {
      const int x = spec.fault_x[f];
      for (int k = layout.domain_box().k0; k < layout.domain_box().k1; ++k) {
        CHECK(is_fault(layout.region(layout.index(x, tb.j0, k))));
      }
    }
    CHECK(layout.domain_box().nx() % 8 == 0);
    CHECK(layout.domain_box().nz() % 8 == 0);
  }
}

TEST_CASE("pca basis is orthonormal and reproduces the mean") {
  GridLayout layout(LayoutSpec::tiny());
  auto cov = build_covariance(layout, {});
  auto basis = build_pca_basis(cov, 60, 20, 5);
  CHECK(basis.n_modes() == 20);
  const Eigen::MatrixXd gram = basis.left_vectors.transpose() * basis.left_vectors;
  CHECK((gram - Eigen::MatrixXd::Identity(20, 20)).cwiseAbs().maxCoeff() < 1e-8);
  std::vector<double> zero(20, 0.0);
  CHECK((reconstruct_field(basis, zero) - basis.mean).cwiseAbs().maxCoeff() == 0.0);
  std::vector<double> e1(20, 0.0);
  e1[0] = 1.0;
  CHECK((reconstruct_field(basis, e1) - basis.mean - basis.phi.col(0)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK_THROWS_AS(reconstruct_field(basis, std::vector<double>(19, 0.0)), ShapeError);
  CHECK_THROWS_AS(build_pca_basis(cov, 20, 20, 5), ArgumentError);
}

TEST_CASE("reconstruction is affine in the latent vector") {
  GridLayout layout(LayoutSpec::tiny());
  auto basis = build_pca_basis(build_covariance(layout, {}), 80, 30, 9);
  Rng rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> x1(30), x2(30), mix(30);
    for (auto& v : x1) v = rng.normal();
    for (auto& v : x2) v = rng.normal();
    const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
    for (int i = 0; i < 30; ++i) mix[i] = a * x1[i] + b * x2[i];
    const Eigen::VectorXd lhs = reconstruct_field(basis, mix);
    const Eigen::VectorXd rhs =
        a * reconstruct_field(basis, x1) + b * reconstruct_field(basis, x2) - (a + b - 1.0) * basis.mean;
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("full-rank pca reconstructs every construction realization") {
  GridLayout layout(LayoutSpec::tiny());
  auto cov = build_covariance(layout, {});
  const int nc = 40;
  auto basis = build_pca_basis(cov, nc, nc - 1, 17);
  const Eigen::MatrixXd samples = construction_realizations(cov, nc, 17);
  for (int j = 0; j < nc; ++j) {
    const Eigen::VectorXd y = samples.col(j);
    const auto xi = project_field(basis, std::span<const double>(y.data(), y.size()));
    const Eigen::VectorXd back = reconstruct_field(basis, xi);
    const Eigen::VectorXd centered = y - basis.mean;
    CHECK((back - y).norm() / centered.norm() < 1e-6);
  }
}

TEST_CASE("latent sampling reproduces the construction covariance") {
  GridLayout layout(LayoutSpec::tiny());
  auto cov = build_covariance(layout, {});
  const int nc = 100;
  auto basis = build_pca_basis(cov, nc, 30, 23);
  const Eigen::MatrixXd samples = construction_realizations(cov, nc, 23);
  const Eigen::MatrixXd centered = samples.colwise() - samples.rowwise().mean();
  // Covariance of the truncated construction set is the oracle for the kept modes.
  const Eigen::MatrixXd target = basis.phi * basis.phi.transpose();
  const Eigen::MatrixXd full = centered * centered.transpose() / (nc - 1);
  CHECK((target - full).cwiseAbs().maxCoeff() < full.cwiseAbs().maxCoeff());

  Rng rng(99);
  const int n = 10000;
  const Eigen::Index nd = basis.n_cells();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(nd, nd);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(nd);
  std::vector<double> xi(30);
  Eigen::MatrixXd block(nd, 500);
  for (int b = 0; b < n / 500; ++b) {
    for (int s = 0; s < 500; ++s) {
      for (auto& v : xi) v = rng.normal();
      block.col(s) = reconstruct_field(basis, xi);
    }
    sum += block.rowwise().sum();
    acc.noalias() += block * block.transpose();
  }
  const Eigen::VectorXd m = sum / n;
  const Eigen::MatrixXd sample_cov = (acc - n * m * m.transpose()) / (n - 1);
  CHECK((sample_cov - target).cwiseAbs().maxCoeff() < 0.05 * target.cwiseAbs().maxCoeff());
}

TEST_CASE("energy rule picks the smallest sufficient mode count") {
  Eigen::VectorXd s(4);
  s << 3.0, 2.0, 1.0, 1.0;  // energies 9, 4, 1, 1 of 15
  CHECK(modes_for_energy(s, 0.5) == 1);
  CHECK(modes_for_energy(s, 0.8) == 2);
  CHECK(modes_for_energy(s, 0.9) == 3);
  CHECK(modes_for_energy(s, 1.0) == 4);
}

TEST_CASE("metaparameter sampling respects the prior") {
  const PriorSpec prior = PriorSpec::table_default();
  CHECK(prior[Param::log10_kf1_tm].lower == -1.0);
  CHECK(prior[Param::log10_kf1_tm].upper == 2.5);
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    const auto m = sample_metaparameters(prior, seed);
    REQUIRE(prior.contains(m));
  }
  Rng rng(1);
  double sum = 0, lo = 10, hi = 0;
  for (int i = 0; i < 10000; ++i) {
    const double v = sample_metaparameters(prior, rng)[Param::mu_logk];
    sum += v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(sum / 10000 > 4.97);
  CHECK(sum / 10000 < 5.03);
  CHECK(lo >= 4.0);
  CHECK(hi <= 6.0);
  CHECK(sample_metaparameters(prior, 77) == sample_metaparameters(prior, 77));
}

TEST_CASE("degenerate prior interval returns the bound") {
  PriorSpec prior = PriorSpec::table_default();
  prior.entries[static_cast<std::size_t>(Param::mu_logk)] = {5.0, 5.0, Scale::linear};
  for (std::uint64_t seed = 0; seed < 100; ++seed) CHECK(sample_metaparameters(prior, seed)[Param::mu_logk] == 5.0);
  prior.entries[0] = {6.0, 5.0, Scale::linear};
  CHECK_THROWS_AS(prior.validate(), ArgumentError);
}

TEST_CASE("assembly maps the Gaussian field to rock properties") {
  GridLayout layout(LayoutSpec::tiny());
  Metaparameters m = sample_metaparameters(PriorSpec::table_default(), 3);
  m[Param::mu_logk] = 4.0;
  m[Param::sigma_logk] = 0.5;
  m[Param::d] = 0.03;
  m[Param::e] = 0.07;
  std::vector<double> y(layout.target_cells().size(), 0.0);
  auto r = assemble_realization(m, y, layout);
  const std::size_t t0 = layout.target_cells()[0];
  CHECK(r.kx[t0] == doctest::Approx(std::exp(4.0)).epsilon(1e-15));
  CHECK(r.kz[t0] == doctest::Approx(m.anisotropy_ratio() * std::exp(4.0)).epsilon(1e-14));
  CHECK(r.phi[t0] == doctest::Approx(0.03 * 4.0 + 0.07).epsilon(1e-14));

  m[Param::mu_logk] = 5.0;
  m[Param::sigma_logk] = 0.0;
  Rng rng(8);
  for (auto& v : y) v = rng.normal();
  r = assemble_realization(m, y, layout);
  for (std::size_t c : layout.target_cells()) {
    CHECK(r.kx[c] == doctest::Approx(std::exp(5.0)).epsilon(1e-15));
    CHECK(r.phi[c] == doctest::Approx(0.22).epsilon(1e-14));
  }

  const FixedRockProperties fixed;
  for (std::size_t c = 0; c < layout.cell_count(); ++c) {
    const Region reg = layout.region(c);
    CHECK(r.phi[c] > 0.0);
    CHECK(r.phi[c] < 1.0);
    if (is_fault(reg)) {
      CHECK(r.kx[c] == r.kz[c]);
      CHECK(r.phi[c] == fixed.fault_porosity);
    }
    if (reg == Region::caprock || reg == Region::overburden || reg == Region::underburden) {
      CHECK(r.kx[c] == 1e-4);
      CHECK(r.phi[c] == 0.01);
    }
    if (reg == Region::surround) {
      CHECK(r.kx[c] == 5.0);
      CHECK(r.phi[c] == 0.05);
    }
    if (reg == Region::middle) {
      CHECK(r.kx[c] == m[Param::k_m]);
      CHECK(r.kz[c] == doctest::Approx(0.1 * m[Param::k_m]));
      CHECK(r.phi[c] == 0.3);
    }
  }
  const std::size_t f1 = layout.index(layout.spec().fault_x[0], layout.target_box().j0, layout.target_box().k0);
  CHECK(r.kx[f1] == doctest::Approx(std::pow(10.0, m[Param::log10_kf1_tm])));
}

TEST_CASE("porosity outside the unit interval is an error") {
  GridLayout layout(LayoutSpec::tiny());
  Metaparameters m = sample_metaparameters(PriorSpec::table_default(), 3);
  m[Param::d] = 0.03;
  m[Param::e] = -0.5;
  std::vector<double> y(layout.target_cells().size(), 0.0);
  CHECK_THROWS_AS(assemble_realization(m, y, layout), ArgumentError);
  CHECK_THROWS_AS(assemble_realization(m, std::vector<double>(3, 0.0), layout), ShapeError);
}

TEST_CASE("porosity increases with log-permeability and the mean shifts log k uniformly") {
  GridLayout layout(LayoutSpec::tiny());
  Generator gen(layout, PriorSpec::table_default(), small_config());
  Rng rng(12);
  std::vector<double> xi(gen.basis().n_modes());
  for (auto& v : xi) v = rng.normal();
  Metaparameters m = sample_metaparameters(gen.prior(), 5);
  m[Param::d] = 0.03;
  m[Param::e] = 0.05;
  m[Param::mu_logk] = 4.5;
  auto a = gen.realize(m, xi);
  m[Param::mu_logk] = 5.25;
  auto b = gen.realize(m, xi);
  for (std::size_t c : layout.target_cells()) {
    CHECK(std::log(b.kx[c]) - std::log(a.kx[c]) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(b.phi[c] > a.phi[c]);
  }
}

TEST_CASE("generator draws are deterministic") {
  GridLayout layout(LayoutSpec::tiny());
  Generator gen(layout, PriorSpec::table_default(), small_config());
  auto a = gen.draw(5, 2), b = gen.draw(5, 2), c = gen.draw(5, 3);
  CHECK(a.kx == b.kx);
  CHECK(a.phi == b.phi);
  CHECK(a.xi == b.xi);
  CHECK(a.meta == b.meta);
  CHECK(a.kx != c.kx);
}

TEST_CASE("mirrored realization matches the mirrored layout") {
  GridLayout layout(LayoutSpec::tiny());
  GridLayout mirrored = layout.mirrored_x();
  Generator gen(layout, PriorSpec::table_default(), small_config());
  auto r = gen.draw(1, 0);
  auto rm = mirror_x(r, layout);
  for (std::size_t c = 0; c < layout.cell_count(); ++c) {
    auto [i, j, k] = layout.ijk(c);
    const std::size_t cm = layout.index(layout.nx() - 1 - i, j, k);
    CHECK(rm.kx[cm] == r.kx[c]);
    CHECK(mirrored.region(cm) == layout.region(c));
  }
}

TEST_CASE("effective compressibility") {
  const GeomechConstants g;
  const double c = effective_compressibility(g);
  CHECK(c == doctest::Approx(5.87e-10).epsilon(0.005));
  CHECK(c * kPascalPerPsi == doctest::Approx(4e-6).epsilon(0.05));
  const double v = g.poisson;
  CHECK(c == doctest::Approx((1 - 2 * v) * (1 + v) / (g.phi_bar * g.youngs_pa * (1 - v))).epsilon(1e-14));
  GeomechConstants h = g;
  h.poisson = 0.5;
  CHECK(effective_compressibility(h) == 0.0);
  h.biot = 0.8;
  h.poisson = 0.3;
  const double expected = (1 - 0.6) / (0.19 * 7.74e9) * (0.64 * 1.3 / 0.7 + 3 * (0.8 - 0.19) * 0.2);
  CHECK(effective_compressibility(h) == doctest::Approx(expected).epsilon(1e-14));
  h.youngs_pa = -1;
  CHECK_THROWS_AS(effective_compressibility(h), ArgumentError);
}
