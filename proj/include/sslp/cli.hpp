#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "sslp/core/image.hpp"
#include "sslp/datasets.hpp"
#include "sslp/train.hpp"

namespace sslp::cli {

// exit codes
inline constexpr int kOk = 0;
inline constexpr int kConfigError = 2;
inline constexpr int kRuntimeError = 3;
inline constexpr int kAssertionFailure = 4;

struct Command {
  std::string verb;  // pretrain probe eval attack make-data sweep report
  std::string config_path;
  std::string output_dir;
  std::vector<std::string> overrides;  // dotted key=value
  std::string checkpoint;              // model checkpoint (eval verbs)
  std::string probe;                   // probe head file (eval/attack)
  std::string resume;                  // checkpoint to resume from (pretrain)
  bool force_resume = false;
};

// Dispatches to the train/eval/datasets operations, staging outputs and
// quarantining partial results under failed/ on error.
int run_command(const Command& cmd);

// ---- config machinery (exposed for tests) ----

// default (schema) document for a verb's config file
nlohmann::json default_config(const std::string& verb);
// overlay user config onto the defaults; unknown keys are errors
nlohmann::json merge_config(const nlohmann::json& defaults, const nlohmann::json& user,
                            const std::string& path = "");
// apply dotted-key overrides; keys must already exist
void apply_override(nlohmann::json& config, const std::string& assignment);
// fully resolved pretrain config -> RunConfig (+ lambda/feature_dim fixups)
train::RunConfig resolve_run_config(const nlohmann::json& merged);

// dataset spec ("source": synth | cifar_binary | image_folder |
// attribute_csv_folder) -> loaded dataset
data::LabeledDataset dataset_from_spec(const nlohmann::json& spec);

// ---- plotting ----

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

void render_line_plot(const std::string& path, const std::vector<Series>& series,
                      const std::string& title, const std::string& x_label,
                      const std::string& y_label);

struct BarGroup {
  std::string name;                  // category on the x axis
  std::vector<double> values;        // one per series
};

void render_grouped_bars(const std::string& path, const std::vector<std::string>& series_labels,
                         const std::vector<BarGroup>& groups, const std::string& title,
                         const std::string& y_label);

}  // namespace sslp::cli
