#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "gcs/common/error.hpp"
#include "gcs/common/fileio.hpp"
#include "gcs/io/archive.hpp"
#include "gcs/workflow/config.hpp"
#include "gcs/workflow/stages.hpp"

using namespace gcs;
using namespace gcs::workflow;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch_dir(const char* name) {
  auto d = fs::temp_directory_path() / ("gcs_test_workflow_" + std::string(name));
  fs::remove_all(d);
  return d;
}

RunConfig small_config(int n_train, int n_test) {
  RunConfig c = config_from_json(json{{"seed", 77}, {"layout", "tiny"}, {"generator", {{"n_construct", 40}}}});
  c.n_train = n_train;
  c.n_test = n_test;
  return c;
}

}  // namespace

TEST_CASE("config round trip is a fixed point") {
  json in = {{"seed", 5},
             {"name", "rt"},
             {"prior", {{"mu_logk", {4.5, 5.5}}}},
             {"simulator", {{"rate_mt_per_year", 0.5}, {"corey", {{"n_w", 3.0}}}}},
             {"surrogate", {{"profile", "custom"}, {"widths", {4, 4, 8, 8}}, {"lstm_width", 8}}},
             {"assimilation", {{"strategy", "partial_p"}, {"beta", 0.1}, {"truth_overrides", {{"log10_kf1_tm", 2.0}}}}}};
  const auto c = config_from_json(in);
  CHECK(c.prior.entries[0].lower == 4.5);
  CHECK(c.simulator.corey.n_w == 3.0);
  CHECK(c.assimilation.strategy == assimilate::StrategyKind::partial_p);
  const auto j1 = to_json(c);
  const auto j2 = to_json(config_from_json(j1));
  CHECK(j1 == j2);
  CHECK(j1.dump() == to_json(config_from_json(json::parse(j1.dump()))).dump());
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(config_from_json(json{{"layout", "tiny"}}), ArgumentError);
  CHECK_THROWS_AS(config_from_json(json{{"seed", 1}, {"unknown", 2}}), ArgumentError);
  CHECK_THROWS_AS(config_from_json(json{{"seed", 1}, {"layout", "huge"}}), ArgumentError);
  CHECK_THROWS_AS(config_from_json(json{{"seed", 1}, {"prior", {{"mu_logk", {6.0, 4.0}}}}}), ArgumentError);
  CHECK_THROWS_AS(config_from_json(json{{"seed", 1}, {"prior", {{"nope", {0.0, 1.0}}}}}), ArgumentError);
  CHECK_THROWS_AS(config_from_json(json{{"seed", 1}, {"assimilation", {{"strategy", "most"}}}}), ArgumentError);
  CHECK_THROWS_AS(config_from_json(json{{"seed", 1}, {"assimilation", {{"beta", 1.5}}}}), ArgumentError);
  CHECK_THROWS_AS(config_from_json(json{{"seed", "one"}}), ArgumentError);
  CHECK_THROWS_AS(config_from_json(json::array()), ArgumentError);
}

TEST_CASE("bundled configurations load") {
  for (const char* name : {"tiny.json", "default.json"}) {
    const auto c = load_config(fs::path(GCS_CONFIG_DIR) / name);
    CHECK(to_json(config_from_json(to_json(c))) == to_json(c));
  }
}

TEST_CASE("seed streams depend on component, index and seed") {
  auto a = small_config(0, 0);
  auto b = a;
  b.seed = a.seed + 1;
  CHECK(a.stream("mcmc") == a.stream("mcmc"));
  CHECK(a.stream("mcmc") != a.stream("pca"));
  CHECK(a.stream("train", 0) != a.stream("train", 1));
  CHECK(a.stream("mcmc") != b.stream("mcmc"));
}

TEST_CASE("stage names") {
  for (auto s : all_stages()) CHECK(stage_from_name(stage_name(s)) == s);
  CHECK_THROWS_AS(stage_from_name("deploy"), ArgumentError);
}

TEST_CASE("generate with no samples writes an empty manifest") {
  const auto dir = scratch_dir("empty");
  std::ostringstream log;
  run_stage(Stage::generate, small_config(0, 0), dir, log);
  const auto m = json::parse(read_file(dir / "generate" / "manifest.json"));
  CHECK(m.at("count") == 0);
  CHECK(m.at("entries").empty());
  CHECK(fs::exists(dir / "checksums.json"));
  CHECK(fs::exists(dir / "config.json"));
}

TEST_CASE("generate is deterministic and bounded by the prior") {
  const auto cfg = small_config(2, 1);
  const auto d1 = scratch_dir("gen1");
  const auto d2 = scratch_dir("gen2");
  std::ostringstream log;
  run_stage(Stage::generate, cfg, d1, log);
  run_stage(Stage::generate, cfg, d2, log);
  CHECK(read_file(d1 / "checksums.json") == read_file(d2 / "checksums.json"));
  const auto m = json::parse(read_file(d1 / "generate" / "manifest.json"));
  REQUIRE(m.at("entries").size() == 3);
  CHECK(m.at("entries")[2].at("split") == "test");
  for (const auto& e : m.at("entries")) {
    const auto r = io::read_realization(d1 / e.at("file").get<std::string>());
    CHECK(cfg.prior.contains(r.meta));
    for (std::size_t i = 0; i < geomodel::kMetaCount; ++i) {
      const auto name = std::string(geomodel::param_name(i));
      CHECK(e.at("meta").at(name).get<double>() == r.meta.values[i]);
      CHECK(r.meta.values[i] >= cfg.prior.entries[i].lower);
      CHECK(r.meta.values[i] <= cfg.prior.entries[i].upper);
    }
  }
  auto other = cfg;
  other.seed += 1;
  const auto d3 = scratch_dir("gen3");
  run_stage(Stage::generate, other, d3, log);
  CHECK(read_file(d1 / "generate" / "realizations" / "r0000.gcsr") !=
        read_file(d3 / "generate" / "realizations" / "r0000.gcsr"));
}

TEST_CASE("stages report missing upstream artifacts with stage context") {
  const auto dir = scratch_dir("missing");
  std::ostringstream log;
  try {
    run_stage(Stage::evaluate, small_config(1, 1), dir, log);
    FAIL("expected a stage error");
  } catch (const StageError& e) {
    CHECK(e.stage() == Stage::evaluate);
    CHECK(std::string(e.what()).find("evaluate") != std::string::npos);
  }
}

TEST_CASE("checksums cover every artifact") {
  const auto dir = scratch_dir("sums");
  std::ostringstream log;
  run_stage(Stage::generate, small_config(1, 0), dir, log);
  const auto sums = artifact_checksums(dir);
  CHECK(sums.contains("config.json"));
  CHECK(sums.contains("generate/manifest.json"));
  CHECK(sums.contains("generate/realizations/r0000.gcsr"));
  CHECK_FALSE(sums.contains("checksums.json"));
}
