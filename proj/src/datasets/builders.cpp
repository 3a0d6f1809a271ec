#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "sslp/datasets.hpp"

namespace fs = std::filesystem;

namespace sslp::data {

std::vector<std::array<float, 3>> default_tint_palette() {
  return {{{0.90f, 0.10f, 0.10f},
           {0.10f, 0.80f, 0.10f},
           {0.10f, 0.25f, 0.90f},
           {0.90f, 0.85f, 0.10f},
           {0.80f, 0.15f, 0.80f},
           {0.10f, 0.80f, 0.80f},
           {0.95f, 0.55f, 0.10f},
           {0.55f, 0.30f, 0.10f},
           {0.50f, 0.50f, 0.95f},
           {0.40f, 0.90f, 0.55f}}};
}

LabeledDataset build_tinted(const LabeledDataset& ds,
                            const std::vector<std::array<float, 3>>& tint_table, double alpha) {
  SSLP_CHECK(alpha >= 0.0 && alpha <= 1.0, "tint alpha must lie in [0,1]");
  SSLP_CHECK(static_cast<int>(tint_table.size()) >= ds.class_count,
             "tint table covers ", tint_table.size(), " classes, dataset has ", ds.class_count);
  if (alpha == 0.0)
    std::cerr << "[build_tinted] warning: alpha=0 produces an untinted copy\n";

  LabeledDataset out = ds;
  out.name = ds.name + "_tinted";
  const float a = static_cast<float>(alpha);
  for (std::size_t i = 0; i < out.images.size(); ++i) {
    Image& img = out.images[i];
    const auto& tint = tint_table[static_cast<std::size_t>(out.labels[i])];
    SSLP_CHECK(img.channels == 3, "build_tinted expects RGB images");
    for (int c = 0; c < 3; ++c) {
      float* plane = img.plane(c);
      for (std::size_t p = 0; p < img.pixels(); ++p) {
        const float v = (1.0f - a) * plane[p] + a * tint[static_cast<std::size_t>(c)];
        plane[p] = std::min(1.0f, std::max(0.0f, v));
      }
    }
  }
  return out;
}

namespace {

bool matches(const LabeledDataset& ds, std::size_t i, const KeepRule& rule) {
  for (const auto& [attr, value] : rule.require) {
    auto it = ds.attributes.find(attr);
    SSLP_CHECK(it != ds.attributes.end(), "keep rule references missing attribute '", attr, "'");
    if (it->second[i] != value) return false;
  }
  return true;
}

std::string combo_key(const LabeledDataset& ds, std::size_t i,
                      const std::vector<std::string>& attrs) {
  std::ostringstream os;
  for (std::size_t a = 0; a < attrs.size(); ++a) {
    if (a) os << ",";
    os << attrs[a] << "=" << ds.attributes.at(attrs[a])[i];
  }
  return os.str();
}

}  // namespace

SkewedResult build_skewed(const LabeledDataset& train_ds, const LabeledDataset& eval_ds,
                          const std::vector<KeepRule>& keep_rules) {
  SSLP_CHECK(!keep_rules.empty(), "build_skewed: empty rule list");
  for (const KeepRule& r : keep_rules) SSLP_CHECK(!r.require.empty(), "empty keep rule");

  // attributes referenced anywhere in the rules define the combinations
  std::vector<std::string> attrs;
  for (const KeepRule& r : keep_rules)
    for (const auto& [attr, value] : r.require)
      if (std::find(attrs.begin(), attrs.end(), attr) == attrs.end()) attrs.push_back(attr);
  std::sort(attrs.begin(), attrs.end());
  for (const std::string& a : attrs) {
    SSLP_CHECK(train_ds.attributes.count(a), "training split lacks attribute '", a, "'");
    SSLP_CHECK(eval_ds.attributes.count(a), "evaluation split lacks attribute '", a, "'");
  }

  SkewedResult result;
  result.train = train_ds;
  result.train.name = train_ds.name + "_skewed";
  result.train.images.clear();
  result.train.labels.clear();
  for (auto& [attr, column] : result.train.attributes) column.clear();

  for (std::size_t i = 0; i < train_ds.size(); ++i) {
    bool keep = false;
    for (const KeepRule& r : keep_rules)
      if (matches(train_ds, i, r)) {
        keep = true;
        break;
      }
    if (!keep) continue;
    result.train.images.push_back(train_ds.images[i]);
    result.train.labels.push_back(train_ds.labels[i]);
    for (auto& [attr, column] : result.train.attributes)
      column.push_back(train_ds.attributes.at(attr)[i]);
  }
  result.train.validate();

  result.eval = eval_ds;
  for (std::size_t i = 0; i < eval_ds.size(); ++i) ++result.combo_counts[combo_key(eval_ds, i, attrs)];
  return result;
}

LabeledDataset subsample(const LabeledDataset& ds, double fraction, std::uint64_t seed,
                         bool stratified) {
  SSLP_CHECK(fraction > 0.0 && fraction <= 1.0, "fraction must lie in (0,1], got ", fraction);
  if (fraction == 1.0) return ds;

  std::vector<std::size_t> picked;
  Rng rng(Rng::mix(Rng::combine(seed, 0x73756273ull)));

  if (stratified) {
    SSLP_CHECK(fraction * static_cast<double>(ds.size()) >= ds.class_count,
               "fraction ", fraction, " leaves fewer samples than classes");
    for (int c = 0; c < ds.class_count; ++c) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < ds.size(); ++i)
        if (ds.labels[i] == c) members.push_back(i);
      const std::size_t take =
          static_cast<std::size_t>(std::lround(fraction * static_cast<double>(members.size())));
      // deterministic partial Fisher-Yates
      for (std::size_t i = 0; i < take && i < members.size(); ++i) {
        const std::size_t j =
            i + static_cast<std::size_t>(rng.uniform_index(members.size() - i));
        std::swap(members[i], members[j]);
        picked.push_back(members[i]);
      }
    }
  } else {
    std::vector<std::size_t> all(ds.size());
    std::iota(all.begin(), all.end(), 0);
    const std::size_t take =
        static_cast<std::size_t>(std::lround(fraction * static_cast<double>(all.size())));
    for (std::size_t i = 0; i < take && i < all.size(); ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(all.size() - i));
      std::swap(all[i], all[j]);
      picked.push_back(all[i]);
    }
  }
  std::sort(picked.begin(), picked.end());

  LabeledDataset out;
  out.name = ds.name + "_sub";
  out.class_count = ds.class_count;
  out.split = ds.split;
  for (const auto& [attr, column] : ds.attributes) out.attributes[attr] = {};
  for (std::size_t i : picked) {
    out.images.push_back(ds.images[i]);
    out.labels.push_back(ds.labels[i]);
    for (auto& [attr, column] : out.attributes) column.push_back(ds.attributes.at(attr)[i]);
  }
  out.validate();
  return out;
}

void materialize(const LabeledDataset& ds, const std::string& dir, const std::string& builder,
                 const nlohmann::json& params, std::uint64_t seed) {
  ds.validate();
  fs::create_directories(dir);

  std::map<int, std::size_t> per_class;
  const bool with_attrs = !ds.attributes.empty();

  std::ofstream csv;
  if (with_attrs) {
    csv.open(fs::path(dir) / "attributes.csv");
    csv << "file";
    for (const auto& [attr, column] : ds.attributes) csv << "," << attr;
    csv << "\n";
  }

  for (std::size_t i = 0; i < ds.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "%06zu.png", i);
    std::string rel;
    if (with_attrs) {
      rel = name;
    } else {
      const std::string cls = "class_" + std::to_string(ds.labels[i]);
      fs::create_directories(fs::path(dir) / cls);
      rel = cls + "/" + name;
    }
    write_png((fs::path(dir) / rel).string(), ds.images[i]);
    if (with_attrs) {
      csv << rel;
      for (const auto& [attr, column] : ds.attributes) csv << "," << column[i];
      csv << "\n";
    }
    ++per_class[ds.labels[i]];
  }

  nlohmann::json counts = nlohmann::json::object();
  for (const auto& [cls, count] : per_class) counts[std::to_string(cls)] = count;
  const nlohmann::json manifest = {
      {"name", ds.name},          {"builder", builder}, {"parameters", params},
      {"seed", seed},             {"split", ds.split},  {"class_count", ds.class_count},
      {"per_class_counts", counts},
  };
  std::ofstream mf(fs::path(dir) / "manifest.json");
  mf << manifest.dump(2) << "\n";
}

}  // namespace sslp::data
