#include <cmath>

#include "sslp/core/parallel.hpp"
#include "sslp/eval.hpp"
#include "sslp/train.hpp"

namespace sslp::eval {

void ProbeConfig::validate() const {
  SSLP_CHECK(epochs >= 1, "probe epochs must be >= 1");
  SSLP_CHECK(weight_decay == 0.0, "the linear evaluation protocol fixes weight decay to 0");
  SSLP_CHECK(lr > 0.0 && batch_size >= 1, "probe lr/batch_size invalid");
}

Tensor encode_features(nn::ModelBundle& bundle, const data::LabeledDataset& ds, int batch_size) {
  SSLP_CHECK(!ds.images.empty(), "cannot encode an empty dataset");
  const Image& first = ds.images[0];
  const int n = static_cast<int>(ds.size());
  Tensor features({n, bundle.main.encoder->feature_dim()});
  for (int start = 0; start < n; start += batch_size) {
    const int b = std::min(batch_size, n - start);
    ImageBatch batch(b, first.channels, first.height, first.width);
    for (int i = 0; i < b; ++i) batch.set_sample(i, ds.images[static_cast<std::size_t>(start + i)]);
    const nn::ForwardOut out = nn::forward_ssl(bundle, batch, nn::Branch::main, false);
    std::copy(out.h.v.begin(), out.h.v.end(),
              features.v.begin() + static_cast<std::size_t>(start) * features.dim(1));
  }
  return features;
}

namespace {

// softmax cross-entropy over logits [n, c]; fills dlogits (mean-reduced)
// and returns (loss, correct_count)
std::pair<double, std::size_t> softmax_ce(const Tensor& logits, const std::vector<int>& labels,
                                          Tensor* dlogits) {
  const int n = logits.dim(0), c = logits.dim(1);
  double loss = 0.0;
  std::size_t correct = 0;
  if (dlogits) *dlogits = Tensor({n, c});
  for (int i = 0; i < n; ++i) {
    const float* row = logits.data() + static_cast<std::size_t>(i) * c;
    int arg = 0;
    float mx = row[0];
    for (int j = 1; j < c; ++j)
      if (row[j] > mx) {
        mx = row[j];
        arg = j;
      }
    if (arg == labels[static_cast<std::size_t>(i)]) ++correct;
    double denom = 0.0;
    for (int j = 0; j < c; ++j) denom += std::exp(static_cast<double>(row[j]) - mx);
    const int y = labels[static_cast<std::size_t>(i)];
    loss += -(static_cast<double>(row[y]) - mx - std::log(denom));
    if (dlogits) {
      float* drow = dlogits->data() + static_cast<std::size_t>(i) * c;
      for (int j = 0; j < c; ++j) {
        const double p = std::exp(static_cast<double>(row[j]) - mx) / denom;
        drow[j] = static_cast<float>((p - (j == y ? 1.0 : 0.0)) / n);
      }
    }
  }
  return {loss / n, correct};
}

}  // namespace

nn::Linear probe_on_features(const Tensor& features, const std::vector<int>& labels, int classes,
                             const ProbeConfig& cfg) {
  cfg.validate();
  const int n = features.dim(0), f = features.dim(1);
  nn::Linear head;
  head.build("probe.linear.0", f, classes);
  Rng init_rng(Rng::mix(Rng::combine(cfg.seed, 0x70726F62ull)));
  head.init(init_rng);

  std::vector<nn::Param*> params = {&head.weight, &head.bias};
  train::Adam opt;
  opt.cfg.lr = cfg.lr;
  opt.cfg.weight_decay = cfg.weight_decay;
  opt.init(params);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::vector<int> order = train::epoch_order(cfg.seed, epoch, n);
    for (int bstart = 0; bstart < n; bstart += cfg.batch_size) {
      const int b = std::min(cfg.batch_size, n - bstart);
      Tensor x({b, f});
      std::vector<int> y(static_cast<std::size_t>(b));
      for (int i = 0; i < b; ++i) {
        const int idx = order[static_cast<std::size_t>(bstart + i)];
        std::copy(features.data() + static_cast<std::size_t>(idx) * f,
                  features.data() + static_cast<std::size_t>(idx + 1) * f,
                  x.data() + static_cast<std::size_t>(i) * f);
        y[static_cast<std::size_t>(i)] = labels[static_cast<std::size_t>(idx)];
      }
      nn::Linear::Cache cache;
      const Tensor logits = head.forward(x, &cache);
      Tensor dlogits;
      softmax_ce(logits, y, &dlogits);
      head.weight.grad.zero();
      head.bias.grad.zero();
      head.backward(dlogits, cache, false);
      opt.step(params, cfg.lr);
    }
  }
  return head;
}

nn::Linear linear_probe(nn::ModelBundle& bundle, const data::LabeledDataset& train_ds,
                        const ProbeConfig& cfg) {
  train_ds.validate();
  const Tensor features = encode_features(bundle, train_ds);
  return probe_on_features(features, train_ds.labels, train_ds.class_count, cfg);
}

nlohmann::json AccuracyReport::to_json() const {
  nlohmann::json per_class_json = nlohmann::json::array();
  for (const GroupAccuracy& g : per_class)
    per_class_json.push_back(
        {{"key", g.key}, {"count", g.count}, {"correct", g.correct}, {"accuracy_pct", g.pct()}});
  nlohmann::json per_combo_json = nlohmann::json::array();
  for (const GroupAccuracy& g : per_combo)
    per_combo_json.push_back(
        {{"key", g.key}, {"count", g.count}, {"correct", g.correct}, {"accuracy_pct", g.pct()}});
  return {{"overall_pct", overall_pct},
          {"total", total},
          {"correct", correct},
          {"per_class", per_class_json},
          {"per_combo", per_combo_json}};
}

AccuracyReport accuracy_on_features(const Tensor& features, const nn::Linear& head,
                                    const data::LabeledDataset& ds,
                                    const std::map<int, int>* label_map) {
  SSLP_CHECK(ds.size() > 0, "cannot evaluate an empty dataset");
  const int n = features.dim(0);
  const Tensor logits = head.forward(features, nullptr);
  const int c = logits.dim(1);

  AccuracyReport report;
  report.total = static_cast<std::size_t>(n);
  std::map<int, GroupAccuracy> per_class;
  std::map<std::string, GroupAccuracy> per_combo;

  std::vector<std::string> attrs;
  for (const auto& [attr, column] : ds.attributes) attrs.push_back(attr);

  for (int i = 0; i < n; ++i) {
    int target = ds.labels[static_cast<std::size_t>(i)];
    if (label_map) {
      auto it = label_map->find(target);
      SSLP_CHECK(it != label_map->end(), "label map lacks dataset class ", target);
      target = it->second;
    }
    const float* row = logits.data() + static_cast<std::size_t>(i) * c;
    int arg = 0;
    for (int j = 1; j < c; ++j)
      if (row[j] > row[arg]) arg = j;
    const bool ok = arg == target;
    if (ok) ++report.correct;

    GroupAccuracy& cls = per_class[ds.labels[static_cast<std::size_t>(i)]];
    cls.key = "class_" + std::to_string(ds.labels[static_cast<std::size_t>(i)]);
    ++cls.count;
    if (ok) ++cls.correct;

    if (!attrs.empty()) {
      std::string key;
      for (std::size_t a = 0; a < attrs.size(); ++a) {
        if (a) key += ",";
        key += attrs[a] + "=" +
               std::to_string(ds.attributes.at(attrs[a])[static_cast<std::size_t>(i)]);
      }
      GroupAccuracy& combo = per_combo[key];
      combo.key = key;
      ++combo.count;
      if (ok) ++combo.correct;
    }
  }

  report.overall_pct = 100.0 * static_cast<double>(report.correct) / report.total;
  for (auto& [k, g] : per_class) report.per_class.push_back(g);
  for (auto& [k, g] : per_combo) report.per_combo.push_back(g);
  return report;
}

AccuracyReport eval_accuracy(nn::ModelBundle& bundle, const nn::Linear& head,
                             const data::LabeledDataset& ds, const std::map<int, int>* label_map) {
  const Tensor features = encode_features(bundle, ds);
  return accuracy_on_features(features, head, ds, label_map);
}

ScarcityReport scarcity_sweep(nn::ModelBundle& bundle, const data::LabeledDataset& train_ds,
                              const data::LabeledDataset& test_ds,
                              const std::vector<double>& fractions, const ProbeConfig& cfg) {
  SSLP_CHECK(!fractions.empty(), "scarcity sweep needs at least one fraction");
  const Tensor train_features = encode_features(bundle, train_ds);
  const Tensor test_features = encode_features(bundle, test_ds);

  ScarcityReport report;
  for (double fraction : fractions) {
    SSLP_CHECK(fraction > 0.0 && fraction <= 1.0, "fraction must lie in (0,1], got ", fraction);
    // stratified subsample on a shared seed, then a fresh probe
    const data::LabeledDataset sub = data::subsample(train_ds, fraction, cfg.seed, true);
    const Tensor sub_features = encode_features(bundle, sub);
    const nn::Linear head = probe_on_features(sub_features, sub.labels, sub.class_count, cfg);
    const AccuracyReport acc = accuracy_on_features(test_features, head, test_ds, nullptr);
    report.rows.push_back({fraction, acc.overall_pct});
  }
  return report;
}

nlohmann::json ScarcityReport::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const ScarcityRow& r : rows)
    rows_json.push_back({{"fraction", r.fraction}, {"accuracy_pct", r.accuracy_pct}});
  return {{"rows", rows_json}};
}

}  // namespace sslp::eval
