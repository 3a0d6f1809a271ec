#include <algorithm>
#include <cmath>

#include "sslp/eval.hpp"

namespace sslp::eval {

void AttackConfig::validate() const {
  SSLP_CHECK(epsilon >= 0.0, "epsilon must be non-negative, got ", epsilon);
  SSLP_CHECK(steps >= 1, "steps must be >= 1");
  SSLP_CHECK(resolved_alpha() > 0.0 || epsilon == 0.0, "alpha must be positive");
}

ImageBatch pgd_attack(nn::ModelBundle& bundle, const nn::Linear& head, const ImageBatch& batch,
                      const std::vector<int>& labels, const AttackConfig& cfg) {
  cfg.validate();
  SSLP_CHECK(labels.size() == static_cast<std::size_t>(batch.n), "one label per sample required");
  if (cfg.epsilon == 0.0) return batch;  // bitwise identity

  const double eps = cfg.epsilon;
  const double alpha = cfg.resolved_alpha();
  const std::size_t numel = batch.v.size();

  ImageBatch adv = batch;
  if (cfg.random_start) {
    Rng rng(Rng::mix(Rng::combine(cfg.seed, 0x70676400ull)));
    for (std::size_t i = 0; i < numel; ++i) {
      const double d = rng.uniform(-eps, eps);
      adv.v[i] = static_cast<float>(
          std::min(1.0, std::max(0.0, static_cast<double>(batch.v[i]) + d)));
    }
  }

  nn::SslNetwork& net = bundle.main;
  for (int it = 0; it < cfg.steps; ++it) {
    // forward in evaluation mode with caches, to get d(loss)/d(input)
    auto enc_cache = net.encoder->new_cache();
    const Tensor x = nn::batch_to_tensor(adv);
    const Tensor h = net.encoder->forward(x, enc_cache.get(), false);
    nn::Linear::Cache head_cache;
    const Tensor logits = head.forward(h, &head_cache);

    const int c = logits.dim(1);
    Tensor dlogits({batch.n, c});
    for (int i = 0; i < batch.n; ++i) {
      const float* row = logits.data() + static_cast<std::size_t>(i) * c;
      float mx = row[0];
      for (int j = 1; j < c; ++j) mx = std::max(mx, row[j]);
      double denom = 0.0;
      for (int j = 0; j < c; ++j) denom += std::exp(static_cast<double>(row[j]) - mx);
      float* drow = dlogits.data() + static_cast<std::size_t>(i) * c;
      const int y = labels[static_cast<std::size_t>(i)];
      for (int j = 0; j < c; ++j) {
        const double p = std::exp(static_cast<double>(row[j]) - mx) / denom;
        drow[j] = static_cast<float>(p - (j == y ? 1.0 : 0.0));
      }
    }

    nn::Linear head_copy = head;  // keep the probe's grads untouched
    const Tensor dh = head_copy.backward(dlogits, head_cache, true);
    const Tensor dx = net.encoder->backward(dh, *enc_cache, true);

    for (std::size_t i = 0; i < numel; ++i) {
      double v = static_cast<double>(adv.v[i]) +
                 alpha * (dx.v[i] > 0.0f ? 1.0 : dx.v[i] < 0.0f ? -1.0 : 0.0);
      const double lo = std::max(0.0, static_cast<double>(batch.v[i]) - eps);
      const double hi = std::min(1.0, static_cast<double>(batch.v[i]) + eps);
      adv.v[i] = static_cast<float>(std::min(hi, std::max(lo, v)));
    }
  }
  return adv;
}

PgdReport pgd_report(nn::ModelBundle& bundle, const nn::Linear& head,
                     const data::LabeledDataset& ds, const std::vector<double>& epsilons,
                     const AttackConfig& base_cfg, int batch_size) {
  SSLP_CHECK(!ds.images.empty(), "cannot attack an empty dataset");
  PgdReport report;
  report.samples = ds.size();
  const Image& first = ds.images[0];
  const int n = static_cast<int>(ds.size());

  for (double eps : epsilons) {
    AttackConfig cfg = base_cfg;
    cfg.epsilon = eps;
    cfg.alpha = -1.0;  // keep alpha scaled with epsilon
    std::size_t correct = 0;
    for (int start = 0; start < n; start += batch_size) {
      const int b = std::min(batch_size, n - start);
      ImageBatch batch(b, first.channels, first.height, first.width);
      std::vector<int> labels(static_cast<std::size_t>(b));
      for (int i = 0; i < b; ++i) {
        batch.set_sample(i, ds.images[static_cast<std::size_t>(start + i)]);
        labels[static_cast<std::size_t>(i)] = ds.labels[static_cast<std::size_t>(start + i)];
      }
      AttackConfig batch_cfg = cfg;
      batch_cfg.seed = Rng::combine(cfg.seed, static_cast<std::uint64_t>(start));
      const ImageBatch adv = pgd_attack(bundle, head, batch, labels, batch_cfg);

      const Tensor h = bundle.main.encoder->forward(nn::batch_to_tensor(adv), nullptr, false);
      const Tensor logits = head.forward(h, nullptr);
      const int c = logits.dim(1);
      for (int i = 0; i < b; ++i) {
        const float* row = logits.data() + static_cast<std::size_t>(i) * c;
        int arg = 0;
        for (int j = 1; j < c; ++j)
          if (row[j] > row[arg]) arg = j;
        if (arg == labels[static_cast<std::size_t>(i)]) ++correct;
      }
    }
    report.rows.push_back({eps, 100.0 * static_cast<double>(correct) / n});
  }
  return report;
}

nlohmann::json PgdReport::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const PgdRow& r : rows)
    rows_json.push_back({{"epsilon", r.epsilon}, {"accuracy_pct", r.accuracy_pct}});
  return {{"samples", samples}, {"rows", rows_json}};
}

CorruptionReport robustness_report(nn::ModelBundle& bundle, const nn::Linear& head,
                                   const data::LabeledDataset& clean_ds,
                                   const std::vector<std::string>& kinds, std::uint64_t seed) {
  CorruptionReport report;
  report.clean_pct = eval_accuracy(bundle, head, clean_ds, nullptr).overall_pct;

  std::map<std::string, std::pair<double, int>> group_acc;
  for (const std::string& kind : kinds) {
    for (int severity = 1; severity <= 5; ++severity) {
      const data::LabeledDataset corrupted =
          data::corrupt(clean_ds, {kind, severity}, Rng::combine(seed, severity));
      const double acc = eval_accuracy(bundle, head, corrupted, nullptr).overall_pct;
      report.rows.push_back({kind, severity, acc});
      auto& [sum, count] = group_acc[data::to_string(data::corruption_group(kind))];
      sum += acc;
      ++count;
    }
  }
  for (const auto& [group, sc] : group_acc)
    report.group_mean_pct[group] = sc.first / sc.second;
  return report;
}

nlohmann::json CorruptionReport::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const CorruptionRow& r : rows)
    rows_json.push_back(
        {{"kind", r.kind}, {"severity", r.severity}, {"accuracy_pct", r.accuracy_pct}});
  return {{"clean_pct", clean_pct}, {"rows", rows_json}, {"group_mean_pct", group_mean_pct}};
}

}  // namespace sslp::eval
