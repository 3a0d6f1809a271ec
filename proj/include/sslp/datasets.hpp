#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "sslp/core/image.hpp"
#include "sslp/core/rng.hpp"

namespace sslp::data {

struct LabeledDataset {
  std::vector<Image> images;
  std::vector<int> labels;
  // per-sample attribute columns (binary in the CSV format; small ints in
  // memory, e.g. the synthetic generator's texture index)
  std::map<std::string, std::vector<int>> attributes;

  std::string name;
  int class_count = 0;
  std::string split;  // "train" / "test" / ...

  std::size_t size() const { return images.size(); }
  void validate() const;
};

enum class SourceFormat { cifar_binary, image_folder, attribute_csv_folder };
SourceFormat source_format_from_string(const std::string& s);

// cifar_binary: 3073-byte records (label + 3x32x32 RGB planes); a path
// may be one .bin file or a directory of them (sorted).
// image_folder: <root>/<class_name>/<file>.png|ppm
// attribute_csv_folder: <root>/attributes.csv ("file,attr1,...") plus the
// listed image files; label_attr picks the attribute used as the label.
LabeledDataset load_dataset(const std::string& path, SourceFormat format,
                            const std::string& label_attr = "");

// ---- synthetic shapes-vs-textures generator ----
// Each class is a geometric shape; the fill texture is the spurious cue
// (texture index == class with probability spurious_strength, else
// uniform over all textures). Labels are the shape class; the texture
// index is recorded in attributes["texture"].
struct SynthConfig {
  int n_per_class = 100;
  int classes = 5;
  int size = 64;
  double spurious_strength = 0.95;
  std::uint64_t seed = 0;
  double texture_amplitude = 0.5;  // oscillation strength of the fill
};

int synth_shape_template_count();
LabeledDataset synth_shapes_textures(const SynthConfig& cfg);

// ---- evaluation-dataset builders ----

// (1-alpha)*img + alpha*tint[class], clipped. alpha == 0 degenerates to
// the identity (with a warning to stderr).
LabeledDataset build_tinted(const LabeledDataset& ds,
                            const std::vector<std::array<float, 3>>& tint_table, double alpha);

std::vector<std::array<float, 3>> default_tint_palette();  // 10 fixed colors

// keep rule: conjunction of (attribute, required value) pairs; a sample
// stays when any rule matches.
struct KeepRule {
  std::vector<std::pair<std::string, int>> require;
};

struct SkewedResult {
  LabeledDataset train;                             // filtered
  LabeledDataset eval;                              // untouched copy, all combinations
  std::map<std::string, std::size_t> combo_counts;  // eval split, "a=0,b=1" keys
};

SkewedResult build_skewed(const LabeledDataset& train_ds, const LabeledDataset& eval_ds,
                          const std::vector<KeepRule>& keep_rules);

// ---- corruptions ----

enum class CorruptionGroup { noise, blur, weather, digital };

struct CorruptionSpec {
  std::string kind;
  int severity = 1;  // 1..5
};

const std::vector<std::string>& implemented_corruptions();
CorruptionGroup corruption_group(const std::string& kind);
const char* to_string(CorruptionGroup g);
// severity-indexed parameter table (embedded copy of
// share/corruption_severities.json)
const nlohmann::json& corruption_severity_table();

Image corrupt_image(const Image& img, const CorruptionSpec& spec, Rng& rng);
LabeledDataset corrupt(const LabeledDataset& ds, const CorruptionSpec& spec, std::uint64_t seed);

// ---- subsampling ----
LabeledDataset subsample(const LabeledDataset& ds, double fraction, std::uint64_t seed,
                         bool stratified);

// ---- materialization ----
// Writes an image_folder layout (attribute_csv_folder when attributes are
// present) plus a manifest.json recording builder provenance.
void materialize(const LabeledDataset& ds, const std::string& dir, const std::string& builder,
                 const nlohmann::json& params, std::uint64_t seed);

}  // namespace sslp::data
