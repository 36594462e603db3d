// gcs: runs the pipeline stages for one configuration.
//
//   gcs --config configs/tiny.json --stage all --out runs/tiny
//   gcs --config configs/tiny.json --stage evaluate --out runs/tiny
//
// Exit codes: 0 success, 1 usage or configuration error, 2 stage failure.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "gcs/workflow/config.hpp"
#include "gcs/workflow/stages.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Geologic carbon storage surrogate and history-matching pipeline"};
  std::string config_path;
  std::string stage = "all";
  std::string out_dir;
  std::optional<std::uint64_t> seed_override;
  int threads = 0;
  app.add_option("--config", config_path, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--stage", stage, "generate, simulate, train, evaluate, gsa, assimilate, report, or all");
  app.add_option("--out", out_dir, "Output directory")->required();
  app.add_option("--seed-override", seed_override, "Replace the master seed of the configuration");
  app.add_option("--threads", threads, "OpenMP worker threads (0 keeps the runtime default)")->check(CLI::NonNegativeNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  gcs::workflow::RunConfig cfg;
  std::vector<gcs::workflow::Stage> stages;
  try {
    cfg = gcs::workflow::load_config(config_path);
    if (seed_override) cfg.seed = *seed_override;
    if (stage == "all") {
      stages = gcs::workflow::all_stages();
    } else {
      stages.push_back(gcs::workflow::stage_from_name(stage));
    }
  } catch (const std::exception& e) {
    std::cerr << "gcs: " << e.what() << "\n";
    return 1;
  }
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif

  try {
    for (auto s : stages) gcs::workflow::run_stage(s, cfg, out_dir, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "gcs: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
