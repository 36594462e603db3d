#include "gcs/workflow/stages.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>

#include "gcs/assimilate/likelihood.hpp"
#include "gcs/assimilate/mcmc.hpp"
#include "gcs/assimilate/observations.hpp"
#include "gcs/common/error.hpp"
#include "gcs/common/fileio.hpp"
#include "gcs/common/hash.hpp"
#include "gcs/common/stats.hpp"
#include "gcs/flowsim/simulator.hpp"
#include "gcs/io/archive.hpp"
#include "gcs/io/csv.hpp"
#include "gcs/metrics/errors.hpp"
#include "gcs/metrics/quantities.hpp"
#include "gcs/sensitivity/sobol.hpp"
#include "gcs/surrogate/checkpoint.hpp"
#include "gcs/surrogate/data.hpp"
#include "gcs/surrogate/train.hpp"

namespace gcs::workflow {

namespace fs = std::filesystem;
using nlohmann::json;
using geomodel::kMetaCount;

std::string_view stage_name(Stage s) {
  switch (s) {
    case Stage::generate: return "generate";
    case Stage::simulate: return "simulate";
    case Stage::train: return "train";
    case Stage::evaluate: return "evaluate";
    case Stage::gsa: return "gsa";
    case Stage::assimilate: return "assimilate";
    case Stage::report: return "report";
  }
  return "unknown";
}

const std::vector<Stage>& all_stages() {
  static const std::vector<Stage> stages{Stage::generate, Stage::simulate,   Stage::train, Stage::evaluate,
                                         Stage::gsa,      Stage::assimilate, Stage::report};
  return stages;
}

Stage stage_from_name(std::string_view name) {
  for (auto s : all_stages()) {
    if (stage_name(s) == name) return s;
  }
  throw ArgumentError("unknown stage '" + std::string(name) + "'");
}

StageError::StageError(Stage stage, const std::string& what)
    : std::runtime_error("stage " + std::string(stage_name(stage)) + ": " + what), stage_(stage) {}

geomodel::Generator make_generator(const RunConfig& cfg) {
  auto g = cfg.generator;
  g.pca_seed = cfg.stream("pca");
  return geomodel::Generator(geomodel::GridLayout(cfg.layout_spec()), cfg.prior, g);
}

namespace {

// ---- paths and small helpers ----

fs::path realization_path(const fs::path& out, int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "r%04d.gcsr", index);
  return out / "generate" / "realizations" / buf;
}

fs::path run_stem(const fs::path& out, const char* dir, int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "r%04d", index);
  return out / dir / buf;
}

void write_json(const fs::path& path, const json& j) { atomic_write_file(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("missing artifact " + path.string());
  return json::parse(read_file(path));
}

json meta_json(const geomodel::Metaparameters& m) {
  json j = json::object();
  for (std::size_t i = 0; i < kMetaCount; ++i) j[std::string(geomodel::param_name(i))] = m.values[i];
  return j;
}

std::vector<std::string> meta_columns() {
  std::vector<std::string> c;
  for (std::size_t i = 0; i < kMetaCount; ++i) c.emplace_back(geomodel::param_name(i));
  return c;
}

json summary_json(const metrics::PercentileSummary& s) {
  return {{"p10", s.p10}, {"p25", s.p25}, {"p50", s.p50}, {"p75", s.p75}, {"p90", s.p90}, {"iqr", s.p75 - s.p25}};
}

struct Entry {
  int index = 0;
  bool train = true;
};

std::vector<Entry> read_manifest(const fs::path& out) {
  const auto m = read_json(out / "generate" / "manifest.json");
  std::vector<Entry> entries;
  for (const auto& e : m.at("entries")) entries.push_back({e.at("index").get<int>(), e.at("split") == "train"});
  return entries;
}

std::vector<Entry> split_entries(const std::vector<Entry>& all, bool train) {
  std::vector<Entry> out;
  for (const auto& e : all)
    if (e.train == train) out.push_back(e);
  return out;
}

// Runs fn(i) for i in [0, n) over OpenMP threads and rethrows the lowest-index failure.
template <class F>
void parallel_for_each(int n, F&& fn) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < n; ++i) {
    try {
      fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ---- generate ----

void stage_generate(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  const auto gen = make_generator(cfg);
  const int n = cfg.n_train + cfg.n_test;
  json entries = json::array();
  const auto seed = cfg.stream("ensemble");
  for (int i = 0; i < n; ++i) {
    const auto real = gen.draw(seed, static_cast<std::uint64_t>(i));
    if (!cfg.prior.contains(real.meta)) throw NumericalError("generated metaparameters left the prior");
    io::write_realization(realization_path(out, i), real);
    entries.push_back({{"index", i},
                       {"split", i < cfg.n_train ? "train" : "test"},
                       {"file", realization_path(out, i).lexically_relative(out).generic_string()},
                       {"meta", meta_json(real.meta)}});
  }
  fs::create_directories(out / "generate");
  write_json(out / "generate" / "manifest.json",
             {{"count", n},
              {"n_train", cfg.n_train},
              {"n_test", cfg.n_test},
              {"latent_dim", gen.basis().n_modes()},
              {"entries", entries}});
  log << "generate: " << n << " realizations, " << gen.basis().n_modes() << " latent modes\n";
}

// ---- simulate ----

void stage_simulate(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  const auto entries = read_manifest(out);
  const geomodel::GridLayout layout(cfg.layout_spec());
  const int n = static_cast<int>(entries.size());
  std::vector<double> balance(n);
  std::vector<flowsim::SimStats> st(n);
  fs::create_directories(out / "simulate");
  parallel_for_each(n, [&](int i) {
    const auto real = io::read_realization(realization_path(out, entries[i].index));
    const auto model = flowsim::build_flow_model(real, layout, cfg.simulator);
    const auto full = flowsim::simulate(model, cfg.simulator, &st[i]);
    const auto mb = flowsim::mass_balance(full, model, cfg.simulator);
    balance[i] = mb.empty() ? 0.0 : *std::max_element(mb.begin(), mb.end());
    io::write_series(run_stem(out, "simulate", entries[i].index), flowsim::extract_domain(full, layout));
  });
  io::CsvTable t({"index", "max_mass_balance_error", "pressure_steps", "substeps"});
  for (int i = 0; i < n; ++i) t.row().cell(entries[i].index).cell(balance[i]).cell(st[i].pressure_steps).cell(st[i].substeps);
  t.write(out / "simulate" / "summary.csv");
  log << "simulate: " << n << " runs\n";
}

// ---- train ----

struct Loaded {
  std::vector<geomodel::Realization> reals;
  std::vector<flowsim::FieldSeries> series;
};

Loaded load_runs(const fs::path& out, const std::vector<Entry>& entries) {
  Loaded l;
  for (const auto& e : entries) {
    l.reals.push_back(io::read_realization(realization_path(out, e.index)));
    l.series.push_back(io::read_series(run_stem(out, "simulate", e.index)));
  }
  return l;
}

void stage_train(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  const auto train_entries = split_entries(read_manifest(out), true);
  if (train_entries.empty()) throw ArgumentError("no training runs in the manifest");
  const geomodel::GridLayout layout(cfg.layout_spec());
  const auto data = load_runs(out, train_entries);
  std::vector<nn::Tensor> channels;
  for (const auto& r : data.reals) channels.push_back(surrogate::domain_channels(r, layout));
  const auto scale = surrogate::fit_input_scale(channels);
  const auto inputs = surrogate::stack_inputs(channels, scale);
  fs::create_directories(out / "train");
  io::CsvTable hist({"network", "epoch", "loss", "learning_rate"});
  for (auto kind : {surrogate::TargetKind::saturation, surrogate::TargetKind::pressure}) {
    surrogate::SurrogateNet net(cfg.net_spec(kind, layout));
    net.input_scale = scale;
    net.output_times = cfg.simulator.report_times_years;
    std::optional<surrogate::NormStats> norm;
    if (kind == surrogate::TargetKind::pressure) norm = surrogate::normalize_pressure(data.series).stats;
    net.pressure_norm = norm;
    surrogate::Dataset ds{inputs, surrogate::stack_targets(data.series, kind, norm ? &*norm : nullptr)};
    auto tc = kind == surrogate::TargetKind::pressure ? cfg.surrogate.pressure : cfg.surrogate.saturation;
    tc.seed = cfg.stream("train", static_cast<std::uint64_t>(kind));
    const auto name = std::string(surrogate::target_name(kind));
    const auto res = surrogate::train(net, ds, tc, [&](int epoch, double loss) {
      if (epoch % 10 == 0 || epoch + 1 == tc.epochs) log << "train " << name << ": epoch " << epoch << " loss " << loss << "\n";
    });
    for (std::size_t e = 0; e < res.loss_history.size(); ++e) {
      hist.row().cell(name).cell(e).cell(res.loss_history[e]).cell(res.rate_history[e]);
    }
    surrogate::save_checkpoint(net, out / "train" / (name + ".ckpt"));
  }
  hist.write(out / "train" / "history.csv");
}

}  // namespace

surrogate::Surrogate load_surrogate(const fs::path& out) {
  auto p = surrogate::load_checkpoint(out / "train" / "pressure.ckpt");
  auto s = surrogate::load_checkpoint(out / "train" / "saturation.ckpt");
  if (p.spec().target != surrogate::TargetKind::pressure || s.spec().target != surrogate::TargetKind::saturation) {
    throw IoError("checkpoints hold the wrong network kinds");
  }
  return {std::move(p), std::move(s)};
}

namespace {

// ---- evaluate ----

void stage_evaluate(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  const auto test_entries = split_entries(read_manifest(out), false);
  if (test_entries.empty()) throw ArgumentError("no test runs in the manifest");
  const geomodel::GridLayout layout(cfg.layout_spec());
  const auto sur = load_surrogate(out);
  const auto data = load_runs(out, test_entries);
  const auto pred = sur.predict(data.reals, layout, cfg.surrogate.predict_batch);
  metrics::ErrorReport report;
  io::CsvTable errs({"index", "saturation_mae", "plume_pairs", "empty_plume", "pressure_relative_error"});
  io::CsvTable regions({"index", "region", "saturation_mae", "plume_pairs", "empty_plume"});
  const geomodel::Region region_list[3] = {geomodel::Region::target, geomodel::Region::middle,
                                           geomodel::Region::upper};
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const auto& sim = data.series[i];
    if (sim.times_years != pred[i].times_years) throw ArgumentError("surrogate output times differ from the simulation");
    const auto mask = metrics::aggregation_mask(sim, layout);
    const auto s = metrics::saturation_mae(sim, pred[i], 0.02, mask);
    const double p = metrics::pressure_relative_error(sim, pred[i], mask);
    report.add(s, p);
    errs.row().cell(test_entries[i].index).cell(s.value).cell(s.count).cell(s.empty_plume ? 1 : 0).cell(p);
    for (const auto& r : metrics::region_breakdown(sim, pred[i], layout, region_list)) {
      regions.row()
          .cell(test_entries[i].index)
          .cell(std::string(geomodel::region_name(r.region)))
          .cell(r.mae.value)
          .cell(r.mae.count)
          .cell(r.mae.empty_plume ? 1 : 0);
    }
  }
  report.summarize();
  fs::create_directories(out / "evaluate");
  errs.write(out / "evaluate" / "errors.csv");
  regions.write(out / "evaluate" / "regions.csv");
  json summary = {{"samples", pred.size()}, {"empty_plume_samples", report.empty_plume_samples}};
  summary["saturation_mae"] = report.saturation_summary ? summary_json(*report.saturation_summary) : json(nullptr);
  summary["pressure_relative_error"] = report.pressure_summary ? summary_json(*report.pressure_summary) : json(nullptr);
  write_json(out / "evaluate" / "summary.json", summary);
  log << "evaluate: median saturation MAE "
      << (report.saturation_summary ? report.saturation_summary->p50 : 0.0) << ", median pressure error "
      << (report.pressure_summary ? report.pressure_summary->p50 : 0.0) << "\n";
}

// ---- gsa ----

// Maps a unit-cube point to (meta, xi): metaparameters uniform over the prior, xi by inverse-normal transform.
// An inadmissible draw (porosity outside (0, 1)) is pulled toward the prior mean of xi until it is admissible.
geomodel::Realization unit_point_realization(const geomodel::Generator& gen, const Eigen::RowVectorXd& u) {
  geomodel::Metaparameters m;
  for (std::size_t i = 0; i < kMetaCount; ++i) {
    const auto& e = gen.prior().entries[i];
    m.values[i] = e.lower + u(static_cast<Eigen::Index>(i)) * e.range();
  }
  std::vector<double> xi(static_cast<std::size_t>(u.size()) - kMetaCount);
  for (std::size_t k = 0; k < xi.size(); ++k) {
    const double p = std::clamp(u(static_cast<Eigen::Index>(kMetaCount + k)), 1e-12, 1.0 - 1e-12);
    xi[k] = stats::normal_quantile(p);
  }
  for (int attempt = 0; attempt < 200; ++attempt) {
    try {
      return gen.realize(m, xi);
    } catch (const ArgumentError&) {
      for (auto& v : xi) v *= 0.9;
    }
  }
  return gen.realize(m, std::vector<double>(xi.size(), 0.0));
}

void stage_gsa(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  const auto gen = make_generator(cfg);
  const auto& layout = gen.layout();
  const auto sur = load_surrogate(out);
  const int n_xi = gen.basis().n_modes();
  std::vector<int> groups(kMetaCount, 1);
  groups.push_back(n_xi);
  auto names = meta_columns();
  names.emplace_back("xi");
  const auto& times = sur.saturation.output_times;
  long evaluations = 0;
  const sensitivity::BatchModel model = [&](const Eigen::MatrixXd& pts) {
    std::vector<geomodel::Realization> reals;
    for (Eigen::Index r = 0; r < pts.rows(); ++r) reals.push_back(unit_point_realization(gen, pts.row(r)));
    const auto pred = sur.predict(reals, layout, cfg.surrogate.predict_batch);
    Eigen::MatrixXd y(pts.rows(), static_cast<Eigen::Index>(times.size()));
    for (Eigen::Index r = 0; r < pts.rows(); ++r) {
      for (std::size_t t = 0; t < times.size(); ++t) {
        y(r, static_cast<Eigen::Index>(t)) =
            sensitivity::footprint_ratio(pred[r], t, layout, cfg.gsa.footprint_threshold);
      }
    }
    evaluations += pts.rows();
    return y;
  };
  const auto res = sensitivity::run_gsa(model, groups, names, times, cfg.gsa.gsa);
  fs::create_directories(out / "gsa");
  io::CsvTable hist({"n_base", "time_years", "variable", "first_order_index"});
  for (std::size_t h = 0; h < res.history.size(); ++h) {
    for (std::size_t t = 0; t < times.size(); ++t) {
      for (std::size_t g = 0; g < names.size(); ++g) {
        hist.row().cell(res.history_n_base[h]).cell(times[t]).cell(names[g]).cell(res.history[h](t, g));
      }
    }
  }
  hist.write(out / "gsa" / "history.csv");
  json z = json::object();
  for (std::size_t g = 0; g < names.size(); ++g) {
    std::vector<double> col;
    for (std::size_t t = 0; t < times.size(); ++t) col.push_back(res.z(t, g));
    z[names[g]] = col;
  }
  write_json(out / "gsa" / "summary.json", {{"variables", names},
                                            {"times_years", times},
                                            {"n_base", res.n_base},
                                            {"sample_count", res.sample_count},
                                            {"evaluations", evaluations},
                                            {"converged", res.converged},
                                            {"first_order_index", z}});
  log << "gsa: " << evaluations << " surrogate evaluations, converged " << res.converged << "\n";
}

// ---- assimilate ----

struct Truth {
  geomodel::Realization real;
  flowsim::FieldSeries domain;
};

Truth make_truth(const RunConfig& cfg, const geomodel::Generator& gen) {
  auto real = gen.draw(cfg.stream("truth"), cfg.assimilation.truth_index);
  auto meta = real.meta;
  for (const auto& [name, value] : cfg.assimilation.truth_overrides) {
    for (std::size_t i = 0; i < kMetaCount; ++i)
      if (geomodel::param_name(i) == name) meta.values[i] = value;
  }
  real = gen.realize(meta, real.xi);
  const auto full = flowsim::simulate(real, gen.layout(), cfg.simulator);
  return {std::move(real), flowsim::extract_domain(full, gen.layout())};
}

const char* kind_name(assimilate::DataKind k) { return k == assimilate::DataKind::pressure ? "pressure" : "saturation"; }

void stage_assimilate(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  const auto gen = make_generator(cfg);
  const auto& layout = gen.layout();
  const auto sur = load_surrogate(out);
  const auto truth = make_truth(cfg, gen);
  const auto& times = sur.saturation.output_times;
  const auto strategy = assimilate::MonitoringStrategy::make(cfg.assimilation.strategy, layout, times);
  const auto obs = assimilate::make_observations(truth.domain, layout, strategy, cfg.assimilation.noise,
                                                 cfg.stream("observation-noise"));
  const auto d_true = assimilate::extract(truth.domain, layout, strategy);

  // Model error from the test set: surrogate minus simulator at the observation points.
  const auto test_entries = split_entries(read_manifest(out), false);
  const auto n_obs = static_cast<Eigen::Index>(obs.size());
  Eigen::MatrixXd c_surr = Eigen::MatrixXd::Zero(n_obs, n_obs);
  if (test_entries.size() >= 2) {
    const auto data = load_runs(out, test_entries);
    const auto pred = sur.predict(data.reals, layout, cfg.surrogate.predict_batch);
    Eigen::MatrixXd res(static_cast<Eigen::Index>(pred.size()), n_obs);
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const auto a = assimilate::extract(pred[i], layout, strategy);
      const auto b = assimilate::extract(data.series[i], layout, strategy);
      for (Eigen::Index k = 0; k < n_obs; ++k) res(static_cast<Eigen::Index>(i), k) = a[k] - b[k];
    }
    c_surr = assimilate::estimate_model_error_cov(res);
  }
  const assimilate::ErrorCovariance cov(obs.noise_std, c_surr);

  const assimilate::LogLikelihoodFn loglike = [&](const geomodel::Metaparameters& m, std::span<const double> xi) {
    geomodel::Realization r;
    try {
      r = gen.realize(m, xi);
    } catch (const ArgumentError&) {
      return -std::numeric_limits<double>::infinity();
    }
    const auto pred = sur.predict(r, layout);
    const auto v = assimilate::extract(pred, layout, strategy);
    return assimilate::log_likelihood(v, obs, cov);
  };
  auto pc = cfg.assimilation.proposal;
  pc.seed = cfg.stream("mcmc");
  const auto res = assimilate::run_chains(gen.prior(), gen.basis().n_modes(), loglike, pc);

  const fs::path dir = out / "assimilate";
  fs::create_directories(dir);
  io::write_realization(dir / "truth.gcsr", truth.real);
  io::write_series(dir / "truth", truth.domain);
  io::write_matrix(dir / "c_surr.gcsm", {std::vector<std::string>(static_cast<std::size_t>(n_obs), "obs"), c_surr});

  io::CsvTable ot({"entry", "kind", "time_years", "well", "layer", "observed", "true_value", "noise_std"});
  for (std::size_t e = 0; e < obs.size(); ++e) {
    const auto& ix = obs.index[e];
    ot.row()
        .cell(e)
        .cell(kind_name(ix.kind))
        .cell(strategy.times[ix.time])
        .cell(strategy.wells[ix.well].name)
        .cell(ix.layer)
        .cell(obs.values[e])
        .cell(d_true[e])
        .cell(obs.noise_std[e]);
  }
  ot.write(dir / "observations.csv");

  std::vector<std::string> trace_cols{"iteration", "chain"};
  for (const auto& c : meta_columns()) trace_cols.push_back(c);
  for (const auto* c : {"loglike", "accepted_meta", "accepted_latent"}) trace_cols.emplace_back(c);
  io::CsvTable trace(trace_cols);
  for (std::size_t c = 0; c < res.chains.size(); ++c) {
    const auto& recs = res.chains[c].records;
    for (std::size_t i = 0; i < recs.size(); ++i) {
      trace.row().cell(i + 1).cell(c);
      for (double v : recs[i].meta.values) trace.cell(v);
      trace.cell(recs[i].loglike).cell(recs[i].accepted_meta ? 1 : 0).cell(recs[i].accepted_latent ? 1 : 0);
    }
  }
  trace.write(dir / "chain_trace.csv");

  std::vector<std::string> rh_cols{"iteration"};
  for (const auto& c : meta_columns()) rh_cols.push_back(c);
  io::CsvTable rh(rh_cols);
  for (const auto& p : res.rhat_trace) {
    rh.row().cell(p.iteration);
    for (double v : p.rhat) rh.cell(v);
  }
  rh.write(dir / "rhat.csv");

  // Stored posterior states: metaparameters and latent vectors at the thinned iterations.
  std::vector<std::string> pcols{"chain", "iteration"};
  for (const auto& c : meta_columns()) pcols.push_back(c);
  pcols.emplace_back("loglike");
  std::vector<std::string> lcols{"chain", "iteration"};
  for (int k = 0; k < gen.basis().n_modes(); ++k) lcols.push_back("xi" + std::to_string(k));
  std::size_t stored = 0;
  for (const auto& c : res.chains) stored += c.latents.size();
  Eigen::MatrixXd pm(static_cast<Eigen::Index>(stored), static_cast<Eigen::Index>(pcols.size()));
  Eigen::MatrixXd lm(static_cast<Eigen::Index>(stored), static_cast<Eigen::Index>(lcols.size()));
  Eigen::Index row = 0;
  for (std::size_t c = 0; c < res.chains.size(); ++c) {
    const auto& ch = res.chains[c];
    for (std::size_t s = 0; s < ch.latents.size(); ++s, ++row) {
      const int it = ch.latent_iterations[s];
      const auto& rec = ch.records[static_cast<std::size_t>(it - 1)];
      pm(row, 0) = lm(row, 0) = static_cast<double>(c);
      pm(row, 1) = lm(row, 1) = it;
      for (std::size_t k = 0; k < kMetaCount; ++k) pm(row, static_cast<Eigen::Index>(2 + k)) = rec.meta.values[k];
      pm(row, static_cast<Eigen::Index>(2 + kMetaCount)) = rec.loglike;
      for (std::size_t k = 0; k < ch.latents[s].size(); ++k) lm(row, static_cast<Eigen::Index>(2 + k)) = ch.latents[s][k];
    }
  }
  io::write_matrix(dir / "posterior_meta.gcsm", {pcols, pm});
  io::write_matrix(dir / "posterior_latent.gcsm", {lcols, lm});

  json acc = json::array();
  for (const auto& c : res.chains) acc.push_back({{"meta", c.meta_acceptance()}, {"latent", c.latent_acceptance()}});
  write_json(dir / "summary.json", {{"strategy", std::string(assimilate::strategy_name(strategy.kind))},
                                    {"observations", obs.size()},
                                    {"iterations", res.iterations},
                                    {"burn_in", res.burn_in},
                                    {"converged", res.converged},
                                    {"stored_states", stored},
                                    {"acceptance", acc},
                                    {"truth_meta", meta_json(truth.real.meta)}});
  log << "assimilate: " << res.iterations << " iterations, converged " << res.converged << ", " << stored
      << " stored states\n";
}

// ---- report ----

void stage_report(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  const auto gen = make_generator(cfg);
  const auto& layout = gen.layout();
  const auto entries = read_manifest(out);
  const fs::path dir = out / "report";
  const fs::path adir = out / "assimilate";
  fs::create_directories(dir);
  const auto pm = io::read_matrix(adir / "posterior_meta.gcsm");
  const auto lm = io::read_matrix(adir / "posterior_latent.gcsm");
  if (pm.values.rows() == 0) throw ArgumentError("no stored posterior states");
  const auto truth_real = io::read_realization(adir / "truth.gcsr");
  const auto truth = io::read_series(adir / "truth");

  struct Sample {
    std::string set;
    int id = 0;
    geomodel::Realization real;
    flowsim::FieldSeries series;
  };
  std::vector<Sample> samples;
  for (const auto& e : entries) {
    samples.push_back({"prior", e.index, io::read_realization(realization_path(out, e.index)),
                       io::read_series(run_stem(out, "simulate", e.index))});
  }
  // Posterior states evenly spaced over the pooled stored states, re-simulated with the simulator.
  const auto n_post = std::min<Eigen::Index>(cfg.assimilation.posterior_resimulations, pm.values.rows());
  std::vector<Sample> post(static_cast<std::size_t>(n_post));
  const auto n_xi = lm.values.cols() - 2;
  parallel_for_each(static_cast<int>(n_post), [&](int s) {
    const auto row = static_cast<Eigen::Index>(s) * pm.values.rows() / n_post;
    geomodel::Metaparameters m;
    for (std::size_t k = 0; k < kMetaCount; ++k) m.values[k] = pm.values(row, static_cast<Eigen::Index>(2 + k));
    std::vector<double> xi(static_cast<std::size_t>(n_xi));
    for (Eigen::Index k = 0; k < n_xi; ++k) xi[static_cast<std::size_t>(k)] = lm.values(row, 2 + k);
    auto real = gen.realize(m, xi);
    auto full = flowsim::simulate(real, layout, cfg.simulator);
    post[static_cast<std::size_t>(s)] = {"posterior", static_cast<int>(row), std::move(real),
                                         flowsim::extract_domain(full, layout)};
  });
  for (auto& s : post) samples.push_back(std::move(s));
  samples.push_back({"truth", 0, truth_real, truth});

  io::CsvTable leak({"set", "id", "middle_volume_m3", "upper_volume_m3", "middle_mass_kg", "upper_mass_kg"});
  io::CsvTable foot({"set", "id", "time_years", "footprint_ratio"});
  std::vector<double> prior_mid, post_mid;
  double truth_mid = 0.0;
  for (const auto& s : samples) {
    const auto last = s.series.n_times() - 1;
    using metrics::LeakageUnit;
    const double mv = metrics::leakage_volume(s.series, last, layout, s.real.phi, geomodel::Region::middle);
    const double uv = metrics::leakage_volume(s.series, last, layout, s.real.phi, geomodel::Region::upper);
    const double mm = metrics::leakage_volume(s.series, last, layout, s.real.phi, geomodel::Region::middle,
                                              LeakageUnit::mass_kg, cfg.simulator);
    const double um = metrics::leakage_volume(s.series, last, layout, s.real.phi, geomodel::Region::upper,
                                              LeakageUnit::mass_kg, cfg.simulator);
    leak.row().cell(s.set).cell(s.id).cell(mv).cell(uv).cell(mm).cell(um);
    for (std::size_t t = 0; t < s.series.n_times(); ++t) {
      foot.row().cell(s.set).cell(s.id).cell(s.series.times_years[t]).cell(
          sensitivity::footprint_ratio(s.series, t, layout, cfg.gsa.footprint_threshold));
    }
    if (s.set == "prior") prior_mid.push_back(mv);
    if (s.set == "posterior") post_mid.push_back(mv);
    if (s.set == "truth") truth_mid = mv;
  }
  leak.write(dir / "leakage.csv");
  foot.write(dir / "footprint.csv");

  io::CsvTable cdf({"set", "middle_volume_m3", "cdf"});
  for (const auto* set : {"prior", "posterior"}) {
    const auto& v = std::string(set) == "prior" ? prior_mid : post_mid;
    if (v.empty()) continue;
    const metrics::EmpiricalCdf f(v);
    for (double x : f.sorted()) cdf.row().cell(set).cell(x).cell(f(x));
  }
  cdf.write(dir / "leakage_cdf.csv");

  json summary = {{"truth_middle_volume_m3", truth_mid}, {"posterior_samples", post_mid.size()}};
  if (!prior_mid.empty()) summary["prior"] = summary_json(metrics::percentile_summary(prior_mid));
  const auto ps = metrics::percentile_summary(post_mid);
  summary["posterior"] = summary_json(ps);
  if (!prior_mid.empty()) {
    const auto pr = metrics::percentile_summary(prior_mid);
    const double prior_iqr = pr.p75 - pr.p25;
    summary["iqr_ratio"] = prior_iqr > 0.0 ? json((ps.p75 - ps.p25) / prior_iqr) : json(nullptr);
  }
  summary["truth_in_posterior_p10_p90"] = truth_mid >= ps.p10 && truth_mid <= ps.p90;
  write_json(dir / "leakage_summary.json", summary);

  // Representative posterior members: medoids of the final-time saturation fields.
  const int k = std::min<int>(cfg.assimilation.medoids, static_cast<int>(n_post));
  const auto& first = samples[entries.size()].series;
  const auto cells = static_cast<Eigen::Index>(first.n_cells());
  Eigen::MatrixXd fields(n_post, cells);
  for (Eigen::Index s = 0; s < n_post; ++s) {
    const auto& ser = samples[entries.size() + static_cast<std::size_t>(s)].series;
    const auto sat = ser.saturation_at(ser.n_times() - 1);
    for (Eigen::Index c = 0; c < cells; ++c) fields(s, c) = sat[static_cast<std::size_t>(c)];
  }
  metrics::MedoidConfig mc;
  mc.seed = cfg.stream("medoids");
  const auto med = metrics::representative_medoids(fields, k, mc);
  json mj = json::array();
  for (int m : med) mj.push_back({{"posterior_row", samples[entries.size() + static_cast<std::size_t>(m)].id}});
  write_json(dir / "medoids.json", {{"k", k}, {"medoids", mj}});
  log << "report: truth middle leakage " << truth_mid << " m3, posterior P50 " << ps.p50 << "\n";
}

}  // namespace

json artifact_checksums(const fs::path& out) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(out)) {
    if (!e.is_regular_file()) continue;
    const auto rel = e.path().lexically_relative(out);
    if (rel == "checksums.json" || e.path().extension() == ".tmp") continue;
    files.push_back(rel);
  }
  std::sort(files.begin(), files.end());
  json j = json::object();
  for (const auto& f : files) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(read_file(out / f))));
    j[f.generic_string()] = buf;
  }
  return j;
}

void run_stage(Stage stage, const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  try {
    fs::create_directories(out);
    write_json(out / "config.json", to_json(cfg));
    switch (stage) {
      case Stage::generate: stage_generate(cfg, out, log); break;
      case Stage::simulate: stage_simulate(cfg, out, log); break;
      case Stage::train: stage_train(cfg, out, log); break;
      case Stage::evaluate: stage_evaluate(cfg, out, log); break;
      case Stage::gsa: stage_gsa(cfg, out, log); break;
      case Stage::assimilate: stage_assimilate(cfg, out, log); break;
      case Stage::report: stage_report(cfg, out, log); break;
    }
    write_json(out / "checksums.json", artifact_checksums(out));
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

void run_pipeline(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  for (auto s : all_stages()) run_stage(s, cfg, out, log);
}

}  // namespace gcs::workflow
