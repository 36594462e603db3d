#include "gcs/workflow/config.hpp"

#include <algorithm>

#include "gcs/common/error.hpp"
#include "gcs/common/fileio.hpp"
#include "gcs/common/hash.hpp"

namespace gcs::workflow {

using nlohmann::json;

namespace {

json train_json(const surrogate::TrainConfig& t) {
  return {{"learning_rate", t.learning_rate}, {"patience", t.patience}, {"decay_factor", t.decay_factor},
          {"min_rate", t.min_rate},           {"batch_size", t.batch_size}, {"epochs", t.epochs},
          {"beta1", t.beta1},       {"beta2", t.beta2},
          {"adam_eps", t.adam_eps},       {"target_loss", t.target_loss}};
}

template <class T>
void opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

surrogate::TrainConfig train_from(const json& j, surrogate::TrainConfig t) {
  opt(j, "learning_rate", t.learning_rate);
  opt(j, "patience", t.patience);
  opt(j, "decay_factor", t.decay_factor);
  opt(j, "min_rate", t.min_rate);
  opt(j, "batch_size", t.batch_size);
  opt(j, "epochs", t.epochs);
  opt(j, "beta1", t.beta1);
  opt(j, "beta2", t.beta2);
  opt(j, "adam_eps", t.adam_eps);
  opt(j, "target_loss", t.target_loss);
  return t;
}

const char* pcn_form_name(assimilate::PcnForm f) { return f == assimilate::PcnForm::standard ? "standard" : "printed"; }

const std::vector<std::string> kKnownSections = {"name", "seed", "layout", "prior", "generator", "simulator",
                                                 "ensemble", "surrogate", "gsa", "assimilation"};

}  // namespace

geomodel::LayoutSpec RunConfig::layout_spec() const {
  if (layout == "desk") return geomodel::LayoutSpec::desk_default();
  if (layout == "tiny") return geomodel::LayoutSpec::tiny();
  throw ArgumentError("unknown layout '" + layout + "' (expected desk or tiny)");
}

std::uint64_t RunConfig::stream(std::string_view component, std::uint64_t index) const {
  return derive_seed(seed, component, index);
}

surrogate::NetSpec RunConfig::net_spec(surrogate::TargetKind kind, const geomodel::GridLayout& layout) const {
  const auto& box = layout.domain_box();
  const int n_t = static_cast<int>(simulator.report_times_years.size());
  surrogate::NetSpec s;
  if (surrogate.profile == "reduced") {
    s = surrogate::NetSpec::reduced(kind, box.nx(), box.ny(), box.nz(), n_t);
  } else {
    s.target = kind;
    s.nx = box.nx();
    s.ny = box.ny();
    s.nz = box.nz();
    s.n_t = n_t;
    if (surrogate.profile == "custom") {
      s.widths = surrogate.widths;
      s.lstm_width = surrogate.lstm_width;
    } else if (surrogate.profile != "full") {
      throw ArgumentError("unknown surrogate profile '" + surrogate.profile + "'");
    }
  }
  s.seed = stream("surrogate-init", static_cast<std::uint64_t>(kind));
  s.validate();
  return s;
}

void RunConfig::validate() const {
  (void)layout_spec();
  prior.validate();
  simulator.validate();
  if (n_train < 0 || n_test < 0) throw ArgumentError("ensemble sizes must be nonnegative");
  surrogate.saturation.validate();
  surrogate.pressure.validate();
  if (surrogate.predict_batch < 1) throw ArgumentError("predict batch must be positive");
  assimilation.proposal.validate();
  if (assimilation.posterior_resimulations < 1 || assimilation.medoids < 1) {
    throw ArgumentError("posterior re-simulation and medoid counts must be positive");
  }
  for (const auto& [name, value] : assimilation.truth_overrides) {
    bool found = false;
    for (std::size_t i = 0; i < geomodel::kMetaCount; ++i) found = found || geomodel::param_name(i) == name;
    if (!found) throw ArgumentError("unknown truth override '" + name + "'");
    (void)value;
  }
  if (gsa.gsa.n_start < 1 || gsa.gsa.n_max < gsa.gsa.n_start) throw ArgumentError("invalid GSA sample sizes");
}

json to_json(const RunConfig& c) {
  json prior = json::object();
  for (std::size_t i = 0; i < geomodel::kMetaCount; ++i) {
    const auto& e = c.prior.entries[i];
    prior[std::string(geomodel::param_name(i))] = {e.lower, e.upper};
  }
  const auto& g = c.generator;
  const auto& f = g.fixed;
  const auto& s = c.simulator;
  const auto& a = c.assimilation;
  const auto& p = a.proposal;
  return {
      {"name", c.name},
      {"seed", c.seed},
      {"layout", c.layout},
      {"prior", prior},
      {"generator",
       {{"correlation_lengths", {g.lengths.lx, g.lengths.ly, g.lengths.lz}},
        {"n_construct", g.n_construct},
        {"energy_fraction", g.energy_fraction},
        {"n_modes", g.n_modes},
        {"max_redraws", g.max_redraws},
        {"fixed",
         {{"seal_permeability_md", f.seal_permeability_md},
          {"seal_porosity", f.seal_porosity},
          {"seal_anisotropy", f.seal_anisotropy},
          {"aquifer_porosity", f.aquifer_porosity},
          {"aquifer_anisotropy", f.aquifer_anisotropy},
          {"surround_permeability_md", f.surround_permeability_md},
          {"surround_porosity", f.surround_porosity},
          {"surround_anisotropy", f.surround_anisotropy},
          {"fault_porosity", f.fault_porosity}}}}},
      {"simulator",
       {{"report_times_years", s.report_times_years},
        {"injection_years", s.injection_years},
        {"rate_mt_per_year", s.rate_mt_per_year},
        {"brine_density", s.brine_density},
        {"co2_density", s.co2_density},
        {"brine_viscosity", s.brine_viscosity},
        {"co2_viscosity", s.co2_viscosity},
        {"corey",
         {{"s_wr", s.corey.s_wr}, {"s_nr", s.corey.s_nr}, {"n_w", s.corey.n_w}, {"n_n", s.corey.n_n},
          {"krw_max", s.corey.krw_max}, {"krn_max", s.corey.krn_max}}},
        {"compressibility", s.compressibility},
        {"gravity", s.gravity},
        {"gravity_accel", s.gravity_accel},
        {"max_cfl", s.max_cfl},
        {"datum_pressure_pa", s.datum_pressure_pa},
        {"datum_depth_m", s.datum_depth_m},
        {"max_step_years", s.max_step_years},
        {"max_substeps", s.max_substeps},
        {"boundary_pv_multiplier", s.boundary_pv_multiplier}}},
      {"ensemble", {{"n_train", c.n_train}, {"n_test", c.n_test}}},
      {"surrogate",
       {{"profile", c.surrogate.profile},
        {"widths", c.surrogate.widths},
        {"lstm_width", c.surrogate.lstm_width},
        {"predict_batch", c.surrogate.predict_batch},
        {"saturation_training", train_json(c.surrogate.saturation)},
        {"pressure_training", train_json(c.surrogate.pressure)}}},
      {"gsa",
       {{"n_start", c.gsa.gsa.n_start},
        {"n_max", c.gsa.gsa.n_max},
        {"tol", c.gsa.gsa.tol},
        {"shift_seed", c.gsa.gsa.seed},
        {"footprint_threshold", c.gsa.footprint_threshold}}},
      {"assimilation",
       {{"strategy", std::string(assimilate::strategy_name(a.strategy))},
        {"saturation_noise_std", a.noise.saturation_std},
        {"pressure_noise_std_pa", a.noise.pressure_std_pa},
        {"beta", p.beta},
        {"sigma_divisor", p.sigma_divisor},
        {"burn_in", p.burn_in},
        {"chains", p.chains},
        {"rhat_threshold", p.rhat_threshold},
        {"rhat_every", p.rhat_every},
        {"max_iterations", p.max_iterations},
        {"latent_store_every", p.latent_store_every},
        {"pcn_form", pcn_form_name(p.pcn_form)},
        {"truth_index", a.truth_index},
        {"truth_overrides", a.truth_overrides},
        {"posterior_resimulations", a.posterior_resimulations},
        {"medoids", a.medoids}}},
  };
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ArgumentError("configuration must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(kKnownSections.begin(), kKnownSections.end(), key) == kKnownSections.end()) {
      throw ArgumentError("unknown configuration key '" + key + "'");
    }
    (void)value;
  }
  RunConfig c;
  if (!j.contains("seed")) throw ArgumentError("configuration must set an explicit seed");
  try {
    opt(j, "name", c.name);
    c.seed = j.at("seed").get<std::uint64_t>();
    opt(j, "layout", c.layout);
    if (j.contains("prior")) {
      for (const auto& [name, range] : j.at("prior").items()) {
        bool found = false;
        for (std::size_t i = 0; i < geomodel::kMetaCount; ++i) {
          if (geomodel::param_name(i) == name) {
            c.prior.entries[i].lower = range.at(0).get<double>();
            c.prior.entries[i].upper = range.at(1).get<double>();
            found = true;
          }
        }
        if (!found) throw ArgumentError("unknown prior entry '" + name + "'");
      }
    }
    if (j.contains("generator")) {
      const auto& g = j.at("generator");
      if (g.contains("correlation_lengths")) {
        const auto l = g.at("correlation_lengths").get<std::array<double, 3>>();
        c.generator.lengths = {l[0], l[1], l[2]};
      }
      opt(g, "n_construct", c.generator.n_construct);
      opt(g, "energy_fraction", c.generator.energy_fraction);
      opt(g, "n_modes", c.generator.n_modes);
      opt(g, "max_redraws", c.generator.max_redraws);
      if (g.contains("fixed")) {
        const auto& f = g.at("fixed");
        auto& x = c.generator.fixed;
        opt(f, "seal_permeability_md", x.seal_permeability_md);
        opt(f, "seal_porosity", x.seal_porosity);
        opt(f, "seal_anisotropy", x.seal_anisotropy);
        opt(f, "aquifer_porosity", x.aquifer_porosity);
        opt(f, "aquifer_anisotropy", x.aquifer_anisotropy);
        opt(f, "surround_permeability_md", x.surround_permeability_md);
        opt(f, "surround_porosity", x.surround_porosity);
        opt(f, "surround_anisotropy", x.surround_anisotropy);
        opt(f, "fault_porosity", x.fault_porosity);
      }
    }
    if (j.contains("simulator")) {
      const auto& s = j.at("simulator");
      auto& x = c.simulator;
      opt(s, "report_times_years", x.report_times_years);
      opt(s, "injection_years", x.injection_years);
      opt(s, "rate_mt_per_year", x.rate_mt_per_year);
      opt(s, "brine_density", x.brine_density);
      opt(s, "co2_density", x.co2_density);
      opt(s, "brine_viscosity", x.brine_viscosity);
      opt(s, "co2_viscosity", x.co2_viscosity);
      if (s.contains("corey")) {
        const auto& k = s.at("corey");
        opt(k, "s_wr", x.corey.s_wr);
        opt(k, "s_nr", x.corey.s_nr);
        opt(k, "n_w", x.corey.n_w);
        opt(k, "n_n", x.corey.n_n);
        opt(k, "krw_max", x.corey.krw_max);
        opt(k, "krn_max", x.corey.krn_max);
      }
      opt(s, "compressibility", x.compressibility);
      opt(s, "gravity", x.gravity);
      opt(s, "gravity_accel", x.gravity_accel);
      opt(s, "max_cfl", x.max_cfl);
      opt(s, "datum_pressure_pa", x.datum_pressure_pa);
      opt(s, "datum_depth_m", x.datum_depth_m);
      opt(s, "max_step_years", x.max_step_years);
      opt(s, "max_substeps", x.max_substeps);
      opt(s, "boundary_pv_multiplier", x.boundary_pv_multiplier);
    }
    if (j.contains("ensemble")) {
      opt(j.at("ensemble"), "n_train", c.n_train);
      opt(j.at("ensemble"), "n_test", c.n_test);
    }
    if (j.contains("surrogate")) {
      const auto& s = j.at("surrogate");
      opt(s, "profile", c.surrogate.profile);
      opt(s, "widths", c.surrogate.widths);
      opt(s, "lstm_width", c.surrogate.lstm_width);
      opt(s, "predict_batch", c.surrogate.predict_batch);
      if (s.contains("saturation_training")) c.surrogate.saturation = train_from(s.at("saturation_training"), c.surrogate.saturation);
      if (s.contains("pressure_training")) c.surrogate.pressure = train_from(s.at("pressure_training"), c.surrogate.pressure);
    }
    if (j.contains("gsa")) {
      const auto& g = j.at("gsa");
      opt(g, "n_start", c.gsa.gsa.n_start);
      opt(g, "n_max", c.gsa.gsa.n_max);
      opt(g, "tol", c.gsa.gsa.tol);
      opt(g, "shift_seed", c.gsa.gsa.seed);
      opt(g, "footprint_threshold", c.gsa.footprint_threshold);
    }
    if (j.contains("assimilation")) {
      const auto& a = j.at("assimilation");
      auto& x = c.assimilation;
      if (a.contains("strategy")) x.strategy = assimilate::strategy_from_name(a.at("strategy").get<std::string>());
      opt(a, "saturation_noise_std", x.noise.saturation_std);
      opt(a, "pressure_noise_std_pa", x.noise.pressure_std_pa);
      auto& p = x.proposal;
      opt(a, "beta", p.beta);
      opt(a, "sigma_divisor", p.sigma_divisor);
      opt(a, "burn_in", p.burn_in);
      opt(a, "chains", p.chains);
      opt(a, "rhat_threshold", p.rhat_threshold);
      opt(a, "rhat_every", p.rhat_every);
      opt(a, "max_iterations", p.max_iterations);
      opt(a, "latent_store_every", p.latent_store_every);
      if (a.contains("pcn_form")) {
        const auto form = a.at("pcn_form").get<std::string>();
        if (form == "standard") {
          p.pcn_form = assimilate::PcnForm::standard;
        } else if (form == "printed") {
          p.pcn_form = assimilate::PcnForm::printed;
        } else {
          throw ArgumentError("unknown pcn_form '" + form + "'");
        }
      }
      opt(a, "truth_index", x.truth_index);
      opt(a, "truth_overrides", x.truth_overrides);
      opt(a, "posterior_resimulations", x.posterior_resimulations);
      opt(a, "medoids", x.medoids);
    }
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("malformed configuration: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ArgumentError("cannot parse " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace gcs::workflow
