#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gcs/assimilate/mcmc.hpp"
#include "gcs/assimilate/observations.hpp"
#include "gcs/flowsim/config.hpp"
#include "gcs/geomodel/generator.hpp"
#include "gcs/sensitivity/sobol.hpp"
#include "gcs/surrogate/net.hpp"
#include "gcs/surrogate/train.hpp"

namespace gcs::workflow {

struct SurrogateSection {
  // "reduced", "full", or "custom" with explicit widths.
  std::string profile = "reduced";
  std::array<int, 4> widths{4, 8, 8, 16};
  int lstm_width = 16;
  surrogate::TrainConfig saturation = surrogate::TrainConfig::for_target(surrogate::TargetKind::saturation);
  surrogate::TrainConfig pressure = surrogate::TrainConfig::for_target(surrogate::TargetKind::pressure);
  int predict_batch = 8;
};

struct GsaSection {
  sensitivity::GsaConfig gsa;
  double footprint_threshold = 0.02;
};

struct AssimilationSection {
  assimilate::StrategyKind strategy = assimilate::StrategyKind::full_sp;
  assimilate::NoiseConfig noise;
  assimilate::ProposalConfig proposal;
  // Truth: prior draw `truth_index` of the truth stream, with these metaparameters overridden.
  std::uint64_t truth_index = 0;
  std::map<std::string, double> truth_overrides;
  // Posterior states re-simulated by the report stage.
  int posterior_resimulations = 40;
  int medoids = 3;
};

struct RunConfig {
  std::string name = "run";
  std::uint64_t seed = 1;
  // "desk" or "tiny".
  std::string layout = "tiny";
  geomodel::PriorSpec prior = geomodel::PriorSpec::table_default();
  geomodel::GeneratorConfig generator;
  flowsim::SimConfig simulator;
  int n_train = 100;
  int n_test = 20;
  SurrogateSection surrogate;
  GsaSection gsa;
  AssimilationSection assimilation;

  geomodel::LayoutSpec layout_spec() const;
  // Derived seed for a named pipeline component.
  std::uint64_t stream(std::string_view component, std::uint64_t index = 0) const;
  surrogate::NetSpec net_spec(surrogate::TargetKind kind, const geomodel::GridLayout& layout) const;
  void validate() const;
};

nlohmann::json to_json(const RunConfig& c);
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace gcs::workflow
