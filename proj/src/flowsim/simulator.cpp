#include "gcs/flowsim/simulator.hpp"

#include <Eigen/Sparse>
#include <Eigen/UmfPackSupport>
#include <algorithm>
#include <cmath>
#include <string>

#include "gcs/common/error.hpp"
#include "gcs/common/stats.hpp"

namespace gcs::flowsim {

namespace {

double corey_pow(double x, double n) { return n == 2.0 ? x * x : std::pow(x, n); }

struct Mobility {
  CoreyParams corey;
  double inv_mu_w, inv_mu_n, span;

  Mobility(const SimConfig& cfg)
      : corey(cfg.corey),
        inv_mu_w(1.0 / cfg.brine_viscosity),
        inv_mu_n(1.0 / cfg.co2_viscosity),
        span(1.0 - cfg.corey.s_wr - cfg.corey.s_nr) {}

  double brine(double s) const {
    const double se = std::clamp((1.0 - s - corey.s_wr) / span, 0.0, 1.0);
    return corey.krw_max * corey_pow(se, corey.n_w) * inv_mu_w;
  }
  double co2(double s) const {
    const double se = std::clamp((s - corey.s_nr) / span, 0.0, 1.0);
    return corey.krn_max * corey_pow(se, corey.n_n) * inv_mu_n;
  }
  double frac(double s) const {
    const double ln = co2(s), lt = ln + brine(s);
    return lt > 0.0 ? ln / lt : 0.0;
  }
};

// Lipschitz bounds of the viscous and gravity flux functions in saturation.
struct FluxBounds {
  double viscous = 0.0;
  double gravity = 0.0;
};

FluxBounds flux_bounds(const Mobility& mob) {
  constexpr int kSamples = 400;
  FluxBounds b;
  const double h = 1.0 / kSamples;
  for (int i = 0; i < kSamples; ++i) {
    b.viscous = std::max(b.viscous, std::abs(mob.frac((i + 1) * h) - mob.frac(i * h)) / h);
  }
  auto g = [&](double sl, double su) {
    const double ln = mob.co2(sl), lw = mob.brine(su);
    return ln + lw > 0.0 ? ln * lw / (ln + lw) : 0.0;
  };
  constexpr int kGrid = 100;
  const double hg = 1.0 / kGrid;
  for (int i = 0; i <= kGrid; ++i) {
    for (int j = 0; j < kGrid; ++j) {
      b.gravity = std::max(b.gravity, std::abs(g(i * hg, (j + 1) * hg) - g(i * hg, j * hg)) / hg);
      b.gravity = std::max(b.gravity, std::abs(g((j + 1) * hg, i * hg) - g(j * hg, i * hg)) / hg);
    }
  }
  b.viscous *= 1.1;
  b.gravity *= 1.1;
  return b;
}

class Simulator {
 public:
  Simulator(const FlowModel& model, const SimConfig& cfg)
      : m_(model), cfg_(cfg), mob_(cfg), bounds_(flux_bounds(mob_)), g_(cfg.gravity ? cfg.gravity_accel : 0.0) {
    state_ = init_state(model, cfg);
    const std::size_t n = m_.n_cells(), nf = m_.connections.size();
    lw_.resize(n);
    ln_.resize(n);
    pv_old_.resize(n);
    pv_new_.resize(n);
    ut_.resize(nf);
    grav_.resize(nf);
    mass_flux_.resize(nf);
    frac_.resize(n);
    well_rate_.assign(n, 0.0);
    const double rate = cfg.rate_mt_per_year * 1e9 / kSecondsPerYear;
    for (const auto& w : m_.wells) {
      for (std::size_t c = 0; c < w.cells.size(); ++c) well_rate_[w.cells[c]] += rate * w.fractions[c];
    }
    build_pattern();
  }

  FieldSeries run(SimStats* stats) {
    FieldSeries out;
    out.dims = m_.dims;
    out.times_years = cfg_.report_times_years;
    const std::size_t n = m_.n_cells();
    out.pressure.reserve(out.times_years.size() * n);
    out.saturation.reserve(out.times_years.size() * n);
    double t_prev = 0.0;
    for (double t_report : cfg_.report_times_years) {
      const double interval = t_report - t_prev;
      const auto n_steps = static_cast<std::size_t>(std::ceil(interval / cfg_.max_step_years - 1e-12));
      double t0 = t_prev;
      for (std::size_t s = 0; s < n_steps; ++s) {
        const double t1 = s + 1 == n_steps ? t_report : t_prev + interval * static_cast<double>(s + 1) / n_steps;
        step((t1 - t0) * kSecondsPerYear, t0 < cfg_.injection_years);
        t0 = t1;
      }
      out.pressure.insert(out.pressure.end(), state_.pressure.begin(), state_.pressure.end());
      out.saturation.insert(out.saturation.end(), state_.saturation.begin(), state_.saturation.end());
      t_prev = t_report;
    }
    if (stats) *stats = stats_;
    return out;
  }

 private:
  void build_pattern() {
    const auto n = static_cast<Eigen::Index>(m_.n_cells());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(m_.n_cells() + 4 * m_.connections.size());
    for (Eigen::Index i = 0; i < n; ++i) trip.emplace_back(i, i, 1.0);
    for (const auto& c : m_.connections) {
      trip.emplace_back(c.a, c.b, 1.0);
      trip.emplace_back(c.b, c.a, 1.0);
    }
    A_.resize(n, n);
    A_.setFromTriplets(trip.begin(), trip.end());
    A_.makeCompressed();
    // Position of each connection's (a,b), (b,a) entries and of every diagonal in the value array.
    diag_pos_.resize(m_.n_cells());
    ab_pos_.resize(m_.connections.size());
    ba_pos_.resize(m_.connections.size());
    auto find = [&](Eigen::Index row, Eigen::Index col) {
      const auto* outer = A_.outerIndexPtr();
      const auto* inner = A_.innerIndexPtr();
      for (auto p = outer[col]; p < outer[col + 1]; ++p) {
        if (inner[p] == row) return static_cast<std::size_t>(p);
      }
      throw NumericalError("sparsity pattern entry missing");
    };
    for (Eigen::Index i = 0; i < n; ++i) diag_pos_[i] = find(i, i);
    for (std::size_t f = 0; f < m_.connections.size(); ++f) {
      ab_pos_[f] = find(m_.connections[f].a, m_.connections[f].b);
      ba_pos_[f] = find(m_.connections[f].b, m_.connections[f].a);
    }
    lu_.analyzePattern(A_);
    if (lu_.info() != Eigen::Success) throw NumericalError("pressure matrix analysis failed");
  }

  void update_mobilities() {
    for (std::size_t c = 0; c < m_.n_cells(); ++c) {
      lw_[c] = mob_.brine(state_.saturation[c]);
      ln_[c] = mob_.co2(state_.saturation[c]);
    }
  }

  // Sum of per-face contributions in a fixed slot order, so mirrored grids add identically.
  template <class F>
  double gather(std::size_t cell, F&& contribution) const {
    const auto& slots = m_.cell_connections[cell];
    double v[6];
    for (int s = 0; s < 6; ++s) v[s] = slots[s] < 0 ? 0.0 : contribution(static_cast<std::size_t>(slots[s]), s & 1);
    return ((v[0] + v[1]) + (v[2] + v[3])) + (v[4] + v[5]);
  }

  void solve_pressure(double dt, bool injecting) {
    const std::size_t n = m_.n_cells(), nf = m_.connections.size();
    const auto& p = state_.pressure;
    const double rho_w = cfg_.brine_density;
    std::vector<double> alpha_a(nf), alpha_b(nf), flux_a(nf), flux_b(nf);
    coef_w_.resize(nf);
    coef_n_.resize(nf);
    for (std::size_t f = 0; f < nf; ++f) {
      const auto& c = m_.connections[f];
      const double dp = p[c.a] - p[c.b];
      const double rho_nf = 0.5 * (m_.co2_density[c.a] + m_.co2_density[c.b]);
      const double grav_w = rho_w * g_ * c.depth_diff;
      const double grav_n = rho_nf * g_ * c.depth_diff;
      const double lam_w = (dp - grav_w) >= 0.0 ? lw_[c.a] : lw_[c.b];
      const bool n_from_a = (dp - grav_n) >= 0.0;
      const double lam_n = n_from_a ? ln_[c.a] : ln_[c.b];
      const double rho_up = n_from_a ? m_.co2_density[c.a] : m_.co2_density[c.b];
      const double ra = rho_up / m_.co2_density[c.a];
      const double rb = rho_up / m_.co2_density[c.b];
      const double tw = c.trans * lam_w, tn = c.trans * lam_n;
      coef_w_[f] = tw;
      coef_n_[f] = tn;
      const double fw = tw * (dp - grav_w), fn = tn * (dp - grav_n);
      alpha_a[f] = tw + ra * tn;
      alpha_b[f] = tw + rb * tn;
      flux_a[f] = fw + ra * fn;
      flux_b[f] = fw + rb * fn;
    }
    double* values = A_.valuePtr();
    std::fill(values, values + A_.nonZeros(), 0.0);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const double acc = m_.pore_volume[i] * cfg_.compressibility / dt;
      values[diag_pos_[i]] = acc + gather(i, [&](std::size_t f, int plus) { return plus ? alpha_a[f] : alpha_b[f]; });
      const double out = gather(i, [&](std::size_t f, int plus) { return plus ? flux_a[f] : -flux_b[f]; });
      const double q = injecting ? well_rate_[i] / m_.co2_density[i] : 0.0;
      rhs[static_cast<Eigen::Index>(i)] = q - out;
    }
    for (std::size_t f = 0; f < nf; ++f) {
      values[ab_pos_[f]] = -alpha_a[f];
      values[ba_pos_[f]] = -alpha_b[f];
    }
    lu_.factorize(A_);
    if (lu_.info() != Eigen::Success) throw NumericalError("pressure factorization failed");
    const Eigen::VectorXd delta = lu_.solve(rhs);
    if (lu_.info() != Eigen::Success) throw NumericalError("pressure solve failed");
    for (std::size_t i = 0; i < n; ++i) {
      const double pn = p[i] + delta[static_cast<Eigen::Index>(i)];
      if (!std::isfinite(pn) || pn <= 0.0) throw NumericalError("pressure solve produced a non-physical pressure");
      state_.pressure[i] = pn;
    }
  }

  void step(double dt, bool injecting) {
    const std::size_t n = m_.n_cells(), nf = m_.connections.size();
    const double c = cfg_.compressibility;
    update_mobilities();
    for (std::size_t i = 0; i < n; ++i) pv_old_[i] = m_.pore_volume_at(i, state_.pressure[i], c);
    solve_pressure(dt, injecting);
    for (std::size_t i = 0; i < n; ++i) pv_new_[i] = m_.pore_volume_at(i, state_.pressure[i], c);

    // Total flux at the new pressure with the lagged mobilities; buoyancy coefficient per face.
    const auto& p = state_.pressure;
    for (std::size_t f = 0; f < nf; ++f) {
      const auto& cn = m_.connections[f];
      const double dp = p[cn.a] - p[cn.b];
      const double rho_nf = 0.5 * (m_.co2_density[cn.a] + m_.co2_density[cn.b]);
      ut_[f] = coef_w_[f] * (dp - cfg_.brine_density * g_ * cn.depth_diff) + coef_n_[f] * (dp - rho_nf * g_ * cn.depth_diff);
      grav_[f] = cn.trans * (cfg_.brine_density - rho_nf) * g_ * cn.depth_diff;
    }

    // Explicit CO2 transport, sub-stepped to the CFL limit.
    double rate_max = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double rho_i = m_.co2_density[i];
      const double speed = gather(i, [&](std::size_t f, int) {
        const auto& cn = m_.connections[f];
        const double r = std::max(m_.co2_density[cn.a], m_.co2_density[cn.b]) / rho_i;
        return r * (std::abs(ut_[f]) * bounds_.viscous + std::abs(grav_[f]) * bounds_.gravity);
      });
      rate_max = std::max(rate_max, speed / std::min(pv_old_[i], pv_new_[i]));
    }
    std::size_t n_sub = 1;
    if (rate_max > 0.0) {
      const double sub = std::ceil(dt * rate_max / cfg_.max_cfl);
      if (!(sub <= static_cast<double>(cfg_.max_substeps))) {
        throw NumericalError("CFL sub-step count " + std::to_string(sub) + " exceeds the configured cap");
      }
      n_sub = std::max<std::size_t>(1, static_cast<std::size_t>(sub));
    }
    const double dts = dt / static_cast<double>(n_sub);
    auto& mass = state_.co2_mass;
    auto& S = state_.saturation;
    for (std::size_t s = 0; s < n_sub; ++s) {
      for (std::size_t i = 0; i < n; ++i) {
        lw_[i] = mob_.brine(S[i]);
        ln_[i] = mob_.co2(S[i]);
        const double lt = lw_[i] + ln_[i];
        frac_[i] = lt > 0.0 ? ln_[i] / lt : 0.0;
      }
      for (std::size_t f = 0; f < nf; ++f) {
        const auto& cn = m_.connections[f];
        const double u = ut_[f];
        double fn = (u >= 0.0 ? frac_[cn.a] : frac_[cn.b]) * u;
        const double gr = grav_[f];
        if (gr != 0.0) {
          // Light phase rises from the lower cell: CO2 mobility from below, brine mobility from above.
          const bool a_lower = gr > 0.0;
          const double lnl = a_lower ? ln_[cn.a] : ln_[cn.b];
          const double lwu = a_lower ? lw_[cn.b] : lw_[cn.a];
          if (lnl + lwu > 0.0) fn += gr * lnl * lwu / (lnl + lwu);
        }
        mass_flux_[f] = fn * (fn >= 0.0 ? m_.co2_density[cn.a] : m_.co2_density[cn.b]);
      }
      const double theta = static_cast<double>(s + 1) / static_cast<double>(n_sub);
      for (std::size_t i = 0; i < n; ++i) {
        const double out = gather(i, [&](std::size_t f, int plus) { return plus ? mass_flux_[f] : -mass_flux_[f]; });
        const double q = injecting ? well_rate_[i] : 0.0;
        mass[i] += dts * (q - out);
        const double pv = pv_old_[i] + theta * (pv_new_[i] - pv_old_[i]);
        const double sat = mass[i] / (m_.co2_density[i] * pv);
        if (!(sat >= -1e-12 && sat <= 1.0 + 1e-12)) {
          throw NumericalError("saturation " + std::to_string(sat) + " left [0, 1] in cell " + std::to_string(i));
        }
        S[i] = sat;
      }
    }
    if (injecting) {
      const double rate = cfg_.rate_mt_per_year * 1e9 / kSecondsPerYear;
      for (auto& w : state_.injected_kg) w += rate * dt;
    }
    state_.elapsed_s += dt;
    stats_.pressure_steps += 1;
    stats_.substeps += n_sub;
  }

  const FlowModel& m_;
  const SimConfig& cfg_;
  Mobility mob_;
  FluxBounds bounds_;
  double g_;
  SimState state_;
  SimStats stats_;
  std::vector<double> lw_, ln_, pv_old_, pv_new_, ut_, grav_, mass_flux_, frac_, well_rate_, coef_w_, coef_n_;
  Eigen::SparseMatrix<double> A_;
  std::vector<std::size_t> diag_pos_, ab_pos_, ba_pos_;
  Eigen::UmfPackLU<Eigen::SparseMatrix<double>> lu_;
};

}  // namespace

FieldSeries simulate(const FlowModel& model, const SimConfig& cfg, SimStats* stats) {
  cfg.validate();
  if (model.cell_connections.size() != model.n_cells()) throw ShapeError("flow model connections are not indexed");
  Simulator sim(model, cfg);
  return sim.run(stats);
}

FieldSeries simulate(const geomodel::Realization& real, const geomodel::GridLayout& layout, const SimConfig& cfg,
                     SimStats* stats) {
  return simulate(build_flow_model(real, layout, cfg), cfg, stats);
}

double injected_co2_mass(const FlowModel& model, const SimConfig& cfg, double t_years) {
  const double t = std::min(t_years, cfg.injection_years) * kSecondsPerYear;
  const double rate = cfg.rate_mt_per_year * 1e9 / kSecondsPerYear;
  return static_cast<double>(model.wells.size()) * rate * t;
}

std::vector<double> stored_co2_mass(const FieldSeries& series, const FlowModel& model, const SimConfig& cfg) {
  if (series.n_cells() != model.n_cells()) throw ShapeError("series does not cover the flow model grid");
  std::vector<double> out;
  std::vector<double> cell_mass(model.n_cells());
  for (std::size_t t = 0; t < series.n_times(); ++t) {
    const auto p = series.pressure_at(t);
    const auto s = series.saturation_at(t);
    for (std::size_t c = 0; c < model.n_cells(); ++c) {
      cell_mass[c] = s[c] * model.co2_density[c] * model.pore_volume_at(c, p[c], cfg.compressibility);
    }
    out.push_back(stats::pairwise_sum(cell_mass));
  }
  return out;
}

std::vector<double> mass_balance(const FieldSeries& series, const FlowModel& model, const SimConfig& cfg) {
  const auto stored = stored_co2_mass(series, model, cfg);
  std::vector<double> err(stored.size());
  for (std::size_t t = 0; t < stored.size(); ++t) {
    const double injected = injected_co2_mass(model, cfg, series.times_years[t]);
    err[t] = injected == 0.0 ? (stored[t] == 0.0 ? 0.0 : 1.0) : std::abs(stored[t] - injected) / injected;
  }
  return err;
}

}  // namespace gcs::flowsim
