#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sslp/datasets.hpp"
#include "sslp/models.hpp"

namespace sslp::eval {

// §-standard linear evaluation: 100 epochs, zero weight decay, frozen
// encoder.
struct ProbeConfig {
  int epochs = 100;
  double weight_decay = 0.0;
  double lr = 3e-3;
  int batch_size = 256;
  std::uint64_t seed = 0;

  void validate() const;
};

// Frozen-encoder features for a whole dataset (evaluation mode).
Tensor encode_features(nn::ModelBundle& bundle, const data::LabeledDataset& ds,
                       int batch_size = 256);

// Single affine classifier trained with cross-entropy on frozen
// features. The encoder is untouched (checksum-identical).
nn::Linear linear_probe(nn::ModelBundle& bundle, const data::LabeledDataset& train_ds,
                        const ProbeConfig& cfg);

// probe on precomputed features (same training loop)
nn::Linear probe_on_features(const Tensor& features, const std::vector<int>& labels,
                             int classes, const ProbeConfig& cfg);

struct GroupAccuracy {
  std::string key;
  std::size_t count = 0;
  std::size_t correct = 0;
  double pct() const { return count == 0 ? 0.0 : 100.0 * static_cast<double>(correct) / count; }
};

struct AccuracyReport {
  double overall_pct = 0.0;
  std::size_t total = 0, correct = 0;
  std::vector<GroupAccuracy> per_class;
  std::vector<GroupAccuracy> per_combo;  // attribute combinations, when present
  nlohmann::json to_json() const;
};

// Top-1 accuracy overall, per class, and per attribute combination.
// label_map, when given, translates dataset class ids to probe class ids
// (OOD evaluation).
AccuracyReport eval_accuracy(nn::ModelBundle& bundle, const nn::Linear& head,
                             const data::LabeledDataset& ds,
                             const std::map<int, int>* label_map = nullptr);

AccuracyReport accuracy_on_features(const Tensor& features, const nn::Linear& head,
                                    const data::LabeledDataset& ds,
                                    const std::map<int, int>* label_map = nullptr);

// ---------------- PGD ----------------

struct AttackConfig {
  double epsilon = 8.0 / 255.0;  // L-inf budget in pixel units
  double alpha = -1.0;           // step size; negative = 2.5 * eps / steps
  int steps = 10;
  bool random_start = true;
  std::uint64_t seed = 0;

  void validate() const;
  double resolved_alpha() const { return alpha > 0.0 ? alpha : 2.5 * epsilon / steps; }
};

// Iterative L-inf ascent on cross-entropy, projected onto the epsilon
// ball and [0,1]. epsilon == 0 returns the input bitwise.
ImageBatch pgd_attack(nn::ModelBundle& bundle, const nn::Linear& head, const ImageBatch& batch,
                      const std::vector<int>& labels, const AttackConfig& cfg);

struct PgdRow {
  double epsilon = 0.0;
  double accuracy_pct = 0.0;
};
struct PgdReport {
  std::vector<PgdRow> rows;
  std::size_t samples = 0;
  nlohmann::json to_json() const;
};

PgdReport pgd_report(nn::ModelBundle& bundle, const nn::Linear& head,
                     const data::LabeledDataset& ds, const std::vector<double>& epsilons,
                     const AttackConfig& base_cfg, int batch_size = 64);

// ---------------- corruption robustness ----------------

struct CorruptionRow {
  std::string kind;
  int severity = 0;
  double accuracy_pct = 0.0;
};
struct CorruptionReport {
  double clean_pct = 0.0;
  std::vector<CorruptionRow> rows;
  std::map<std::string, double> group_mean_pct;
  nlohmann::json to_json() const;
};

CorruptionReport robustness_report(nn::ModelBundle& bundle, const nn::Linear& head,
                                   const data::LabeledDataset& clean_ds,
                                   const std::vector<std::string>& kinds, std::uint64_t seed);

// ---------------- data scarcity ----------------

struct ScarcityRow {
  double fraction = 0.0;
  double accuracy_pct = 0.0;
};
struct ScarcityReport {
  std::vector<ScarcityRow> rows;
  nlohmann::json to_json() const;
};

ScarcityReport scarcity_sweep(nn::ModelBundle& bundle, const data::LabeledDataset& train_ds,
                              const data::LabeledDataset& test_ds,
                              const std::vector<double>& fractions, const ProbeConfig& cfg);

// ---------------- report files ----------------

// CSV with a label column so several models can be merged into one plot.
void write_accuracy_csv(const std::string& path, const std::string& label,
                        const AccuracyReport& r);
void write_pgd_csv(const std::string& path, const std::string& label, const PgdReport& r);
void write_corruption_csv(const std::string& path, const std::string& label,
                          const CorruptionReport& r);
void write_scarcity_csv(const std::string& path, const std::string& label,
                        const ScarcityReport& r);
void write_json(const std::string& path, const nlohmann::json& j);

}  // namespace sslp::eval
