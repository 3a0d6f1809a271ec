#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "sslp/augment.hpp"
#include "sslp/checkpoint.hpp"
#include "sslp/datasets.hpp"
#include "sslp/losses.hpp"
#include "sslp/models.hpp"
#include "sslp/priors.hpp"

namespace sslp::train {

enum class PriorMode { none, sobel, prewitt, canny, color_distortion_network, shape_as_augmentation };
PriorMode prior_mode_from_string(const std::string& s);
const char* to_string(PriorMode m);
bool uses_prior_network(PriorMode m);

struct OptimizerConfig {
  double lr = 3e-4;
  double weight_decay = 1e-6;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
};

struct PriorOptions {
  PriorMode mode = PriorMode::none;
  priors::PriorConfig filter;         // sobel / prewitt / canny settings
  bool filter_then_augment = false;   // literal Prior(x_in)-then-augment order
  bool stop_prior_side = false;       // one-way distillation
  bool prior_ssl_off = false;         // drop the prior branch's SSL objective
  bool kl_symmetric = false;
  double kl_temperature = 1.0;
  bool kl_average_alignments = false;  // average KL over both view alignments
  double shape_aug_probability = 0.5;  // shape_as_augmentation substitution rate
};

struct RunConfig {
  nn::Method method = nn::Method::vicreg;
  PriorOptions prior;
  augment::Preset preset = augment::Preset::basic;
  int out_h = 64, out_w = 64;

  double lambda = 2.0;  // loss balancing factor
  double nt_xent_temperature = 0.5;
  losses::VicregParams vicreg;

  nn::EncoderConfig encoder;
  nn::HeadConfig head;

  OptimizerConfig optimizer;
  int epochs = 100;
  int batch_size = 256;
  std::uint64_t seed = 0;
  bool deterministic = true;  // metrics CSV is then bitwise reproducible

  int log_interval = 1;             // steps between metric rows
  int checkpoint_interval = 0;      // epochs between checkpoints; 0 = final only

  void validate() const;
  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
};

// hash of the canonical config serialization; checkpoints refuse to
// resume across different hashes unless overridden
std::uint64_t config_hash(const RunConfig& cfg);

// Per-method Table-style lambda defaults (simclr 0.5, simsiam 1.0,
// vicreg 2.0); used when the config omits losses.lambda.
double default_lambda(nn::Method method);

// ---------------- optimizer ----------------

struct Adam {
  OptimizerConfig cfg;
  std::int64_t t = 0;
  std::vector<Tensor> m, v;

  void init(const std::vector<nn::Param*>& params);
  void step(const std::vector<nn::Param*>& params, double lr);
};

double cosine_lr(double peak, std::int64_t step, std::int64_t total_steps);

// ---------------- deterministic data order ----------------

// Seeded permutation of [0, n) for one epoch.
std::vector<int> epoch_order(std::uint64_t seed, int epoch, int n);
// Base stream for one sample's augmentations; two_views derives the two
// view substreams from it, the prior branch uses further substreams.
Rng sample_rng(std::uint64_t seed, int epoch, int sample_index);

// ---------------- training ----------------

struct MetricsRow {
  std::int64_t step = 0;
  int epoch = 0;
  double lr = 0, total = 0, ssl_main = 0, ssl_prior = 0, pk = 0;
  double wallclock_s = 0;
};

std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsRow& r);

struct TrainState {
  RunConfig config;
  nn::ModelBundle bundle;
  Adam opt;
  std::int64_t step = 0;
  std::int64_t total_steps = 0;  // cosine-schedule horizon; 0 = constant lr
  int epoch = 0;
  double last_lr = 0.0;
  std::vector<MetricsRow> history;
};

// captured intermediate values for the functional-recomputation oracle
struct StepDebug {
  ImageBatch view1, view2, prior_view1, prior_view2;
  losses::EmbeddingBatch z1, z2, y1, y2;     // main branch
  losses::EmbeddingBatch zp1, zp2, yp1, yp2; // prior branch
};

TrainState init_train_state(const RunConfig& cfg);

// One optimization step: augment, filter, forward both networks, combine
// losses, single backward + Adam update of all parameters.
losses::LossValue pretrain_step(TrainState& state, const ImageBatch& raw_batch,
                                const std::vector<Rng>& sample_rngs,
                                StepDebug* debug = nullptr);

// Full seeded run over the dataset; writes metrics.csv (+ periodic
// checkpoints) into out_dir when non-empty, returns the final state.
// state.epoch counts completed epochs, so a state restored from a
// checkpoint resumes exactly where it stopped.
TrainState pretrain_run(const RunConfig& cfg, const data::LabeledDataset& ds,
                        const std::string& out_dir);
TrainState resume_run(TrainState state, const data::LabeledDataset& ds,
                      const std::string& out_dir);

// ---------------- checkpoint io ----------------

nn::CheckpointData state_to_checkpoint(TrainState& state);
void save_state(const TrainState& state, const std::string& path);
TrainState state_from_checkpoint(const nn::CheckpointData& ck, bool override_config_check = false);
TrainState load_state(const std::string& path, bool override_config_check = false);

// load just the model bundle of a pretraining checkpoint (for eval)
nn::ModelBundle bundle_from_checkpoint_file(const std::string& path);

}  // namespace sslp::train
