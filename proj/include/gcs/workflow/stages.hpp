#pragma once

#include <filesystem>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gcs/geomodel/generator.hpp"
#include "gcs/surrogate/predictor.hpp"
#include "gcs/workflow/config.hpp"

namespace gcs::workflow {

enum class Stage { generate, simulate, train, evaluate, gsa, assimilate, report };

std::string_view stage_name(Stage s);
Stage stage_from_name(std::string_view name);
const std::vector<Stage>& all_stages();

// A stage failed; the message carries the stage name.
class StageError : public std::runtime_error {
 public:
  StageError(Stage stage, const std::string& what);
  Stage stage() const { return stage_; }

 private:
  Stage stage_;
};

// Runs one stage into `out`, reading upstream artifacts from the same directory, then refreshes
// out/checksums.json. Progress goes to `log`; nothing time-dependent reaches the artifacts.
void run_stage(Stage stage, const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log);
void run_pipeline(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log);

geomodel::Generator make_generator(const RunConfig& cfg);
surrogate::Surrogate load_surrogate(const std::filesystem::path& out);

// Relative path -> FNV-1a hex digest for every artifact file under `out` except checksums.json.
nlohmann::json artifact_checksums(const std::filesystem::path& out);

}  // namespace gcs::workflow
