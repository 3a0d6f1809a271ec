#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "sslp/datasets.hpp"

using namespace sslp;
using namespace sslp::data;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

LabeledDataset toy_attribute_dataset(int n, std::uint64_t seed) {
  Rng rng(seed);
  LabeledDataset ds;
  ds.name = "toy_attrs";
  ds.class_count = 2;
  ds.attributes["blond"] = {};
  ds.attributes["male"] = {};
  for (int i = 0; i < n; ++i) {
    const int blond = rng.uniform() < 0.5 ? 1 : 0;
    const int male = rng.uniform() < 0.5 ? 1 : 0;
    Image img(3, 8, 8, static_cast<float>(rng.uniform()));
    ds.images.push_back(std::move(img));
    ds.labels.push_back(male);
    ds.attributes["blond"].push_back(blond);
    ds.attributes["male"].push_back(male);
  }
  return ds;
}

}  // namespace

TEST_SUITE_BEGIN("datasets");

TEST_CASE("cifar_binary loader handles records, offsets and bad labels") {
  TempDir dir("sslp_cifar");
  const fs::path file = dir.path / "batch.bin";
  {
    std::ofstream out(file, std::ios::binary);
    std::vector<unsigned char> record(3073, 0);
    for (int r = 0; r < 4; ++r) {
      record[0] = static_cast<unsigned char>(r % 10);
      record[1] = static_cast<unsigned char>(255);
      out.write(reinterpret_cast<const char*>(record.data()), 3073);
    }
  }
  const LabeledDataset ds = load_dataset(file.string(), SourceFormat::cifar_binary);
  CHECK(ds.size() == 4);
  CHECK(ds.class_count == 10);
  CHECK(ds.images[0].channels == 3);
  CHECK(ds.images[0].height == 32);
  CHECK(ds.images[0].v[0] == doctest::Approx(1.0));

  // truncated file: the error names the byte offset
  {
    std::ofstream out(file, std::ios::binary | std::ios::app);
    out.write("xx", 2);
  }
  try {
    load_dataset(file.string(), SourceFormat::cifar_binary);
    FAIL("expected an error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("byte offset 12292") != std::string::npos);
  }

  // bad label
  const fs::path file2 = dir.path / "bad.bin";
  {
    std::ofstream out(file2, std::ios::binary);
    std::vector<unsigned char> record(3073, 0);
    record[0] = 10;
    out.write(reinterpret_cast<const char*>(record.data()), 3073);
  }
  CHECK_THROWS(load_dataset(file2.string(), SourceFormat::cifar_binary));
}

TEST_CASE("image_folder loader sorts deterministically, rejects empties") {
  TempDir dir("sslp_folder");
  fs::create_directories(dir.path / "cat");
  fs::create_directories(dir.path / "dog");
  write_image((dir.path / "cat" / "b.png").string(), Image(3, 4, 4, 0.5f));
  write_image((dir.path / "cat" / "a.png").string(), Image(3, 4, 4, 0.25f));
  write_image((dir.path / "dog" / "x.ppm").string(), Image(3, 4, 4, 0.75f));

  const LabeledDataset ds = load_dataset(dir.path.string(), SourceFormat::image_folder);
  CHECK(ds.size() == 3);
  CHECK(ds.class_count == 2);
  CHECK(ds.labels == std::vector<int>{0, 0, 1});
  CHECK(ds.images[0].v[0] == doctest::Approx(0.25).epsilon(0.01));  // a.png first

  TempDir empty("sslp_empty_folder");
  try {
    load_dataset(empty.path.string(), SourceFormat::image_folder);
    FAIL("expected an error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("no samples found") != std::string::npos);
  }
}

TEST_CASE("attribute_csv_folder: labels from attribute, missing file named") {
  TempDir dir("sslp_attrs");
  write_image((dir.path / "i0.png").string(), Image(3, 4, 4, 0.2f));
  write_image((dir.path / "i1.png").string(), Image(3, 4, 4, 0.8f));
  {
    std::ofstream csv(dir.path / "attributes.csv");
    csv << "file,blond,male\n";
    csv << "i0.png,1,0\n";
    csv << "i1.png,0,1\n";
  }
  const LabeledDataset ds =
      load_dataset(dir.path.string(), SourceFormat::attribute_csv_folder, "male");
  CHECK(ds.size() == 2);
  CHECK(ds.labels == std::vector<int>{0, 1});
  CHECK(ds.attributes.at("blond") == std::vector<int>{1, 0});

  {
    std::ofstream csv(dir.path / "attributes.csv", std::ios::app);
    csv << "missing.png,1,1\n";
  }
  try {
    load_dataset(dir.path.string(), SourceFormat::attribute_csv_folder, "male");
    FAIL("expected an error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("missing.png") != std::string::npos);
  }
}

TEST_CASE("synthetic generator: spurious strength semantics") {
  SynthConfig cfg;
  cfg.n_per_class = 40;
  cfg.classes = 5;
  cfg.size = 24;
  cfg.seed = 7;

  cfg.spurious_strength = 1.0;
  const LabeledDataset aligned = synth_shapes_textures(cfg);
  for (std::size_t i = 0; i < aligned.size(); ++i)
    CHECK(aligned.attributes.at("texture")[i] == aligned.labels[i]);

  // same seed -> bitwise identical
  const LabeledDataset again = synth_shapes_textures(cfg);
  for (std::size_t i = 0; i < aligned.size(); ++i)
    CHECK(aligned.images[i].v == again.images[i].v);

  for (float v : aligned.images[0].v) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
  }
  CHECK_THROWS((synth_shapes_textures(SynthConfig{10, 100, 24, 0.5, 1, 0.5})));
}

TEST_CASE("synthetic generator: zero spurious strength decorrelates texture") {
  SynthConfig cfg;
  cfg.n_per_class = 1000;  // 5000 samples
  cfg.classes = 5;
  cfg.size = 16;
  cfg.spurious_strength = 0.0;
  cfg.seed = 11;
  const LabeledDataset ds = synth_shapes_textures(cfg);

  // chi-square contingency test, df = 16, alpha 0.001 -> 39.25
  double table[5][5] = {};
  for (std::size_t i = 0; i < ds.size(); ++i)
    table[ds.labels[i]][ds.attributes.at("texture")[i]] += 1.0;
  const double row = 1000.0, n = 5000.0;
  double chi2 = 0.0;
  std::vector<double> col(5, 0.0);
  for (int t = 0; t < 5; ++t)
    for (int c = 0; c < 5; ++c) col[static_cast<std::size_t>(t)] += table[c][t];
  for (int c = 0; c < 5; ++c)
    for (int t = 0; t < 5; ++t) {
      const double expected = row * col[static_cast<std::size_t>(t)] / n;
      chi2 += (table[c][t] - expected) * (table[c][t] - expected) / expected;
    }
  CHECK(chi2 < 39.25);
}

TEST_CASE("build_tinted semantics") {
  SynthConfig cfg;
  cfg.n_per_class = 4;
  cfg.classes = 3;
  cfg.size = 16;
  cfg.seed = 3;
  const LabeledDataset ds = synth_shapes_textures(cfg);
  const auto palette = default_tint_palette();

  // alpha 1: every class-c image equals the tint color
  const LabeledDataset full = build_tinted(ds, palette, 1.0);
  for (std::size_t i = 0; i < full.size(); ++i) {
    const auto& tint = palette[static_cast<std::size_t>(full.labels[i])];
    for (int c = 0; c < 3; ++c)
      for (std::size_t p = 0; p < full.images[i].pixels(); ++p)
        CHECK(full.images[i].plane(c)[p] == doctest::Approx(tint[static_cast<std::size_t>(c)]));
  }
  CHECK(full.labels == ds.labels);

  // alpha 0 degenerates to the identity (with a warning)
  const LabeledDataset none = build_tinted(ds, palette, 0.0);
  for (std::size_t i = 0; i < none.size(); ++i) CHECK(none.images[i].v == ds.images[i].v);

  // same class, same tint: two class-0 samples move toward the same color
  const LabeledDataset half = build_tinted(ds, palette, 0.5);
  CHECK(half.size() == ds.size());

  CHECK_THROWS(build_tinted(ds, {{{1.0f, 0.0f, 0.0f}}}, 0.5));  // table too small
}

TEST_CASE("build_skewed filters training and counts eval combinations") {
  const LabeledDataset train = toy_attribute_dataset(200, 1);
  const LabeledDataset eval = toy_attribute_dataset(120, 2);

  // keep blond-females and non-blond-males
  std::vector<KeepRule> rules(2);
  rules[0].require = {{"blond", 1}, {"male", 0}};
  rules[1].require = {{"blond", 0}, {"male", 1}};
  const SkewedResult result = build_skewed(train, eval, rules);

  for (std::size_t i = 0; i < result.train.size(); ++i) {
    const int blond = result.train.attributes.at("blond")[i];
    const int male = result.train.attributes.at("male")[i];
    CHECK(((blond == 1 && male == 0) || (blond == 0 && male == 1)));
  }
  CHECK(result.train.size() < train.size());

  // 2x2 combinations counted over the full eval split
  CHECK(result.combo_counts.size() == 4);
  std::size_t total = 0;
  for (const auto& [key, count] : result.combo_counts) total += count;
  CHECK(total == eval.size());

  CHECK_THROWS(build_skewed(train, eval, {}));
  std::vector<KeepRule> bad(1);
  bad[0].require = {{"hat", 1}};
  CHECK_THROWS(build_skewed(train, eval, bad));
}

TEST_CASE("corruptions: monotone severity, range, determinism, errors") {
  SynthConfig cfg;
  cfg.n_per_class = 3;
  cfg.classes = 4;
  cfg.size = 32;
  cfg.seed = 13;
  const LabeledDataset ds = synth_shapes_textures(cfg);

  for (const std::string& kind : implemented_corruptions()) {
    double last = -1.0;
    for (int severity = 1; severity <= 5; ++severity) {
      const LabeledDataset out = corrupt(ds, {kind, severity}, 99);
      CHECK(out.labels == ds.labels);
      double dev = 0.0;
      std::size_t count = 0;
      for (std::size_t i = 0; i < ds.size(); ++i) {
        for (std::size_t p = 0; p < ds.images[i].v.size(); ++p) {
          const float v = out.images[i].v[p];
          CHECK(v >= 0.0f);
          CHECK(v <= 1.0f);
          dev += std::abs(static_cast<double>(v) - ds.images[i].v[p]);
        }
        count += ds.images[i].v.size();
      }
      dev /= static_cast<double>(count);
      CHECK(dev >= last - 1e-9);  // non-decreasing distortion energy
      last = dev;
    }
    const LabeledDataset a = corrupt(ds, {kind, 3}, 5);
    const LabeledDataset b = corrupt(ds, {kind, 3}, 5);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.images[i].v == b.images[i].v);
  }

  CHECK_THROWS(corrupt(ds, {"gaussian_noise", 0}, 1));
  CHECK_THROWS(corrupt(ds, {"gaussian_noise", 6}, 1));
  try {
    corrupt(ds, {"motion_blur", 3}, 1);
    FAIL("expected an error");
  } catch (const std::exception& e) {
    const std::string msg = e.what();
    CHECK(msg.find("out of scope") != std::string::npos);
    CHECK(msg.find("gaussian_noise") != std::string::npos);  // lists implemented kinds
  }
}

TEST_CASE("fog stays in range") {
  SynthConfig cfg;
  cfg.n_per_class = 2;
  cfg.classes = 2;
  cfg.size = 24;
  const LabeledDataset ds = synth_shapes_textures(cfg);
  const LabeledDataset foggy = corrupt(ds, {"fog", 5}, 3);
  for (const Image& img : foggy.images)
    for (float v : img.v) {
      CHECK(v >= 0.0f);
      CHECK(v <= 1.0f);
    }
}

TEST_CASE("subsample: identity, stratified arithmetic, determinism") {
  // balanced 10-class 5000-sample dataset
  LabeledDataset ds;
  ds.name = "balanced10";
  ds.class_count = 10;
  Rng rng(17);
  for (int i = 0; i < 5000; ++i) {
    ds.images.emplace_back(1, 4, 4, static_cast<float>(rng.uniform()));
    ds.labels.push_back(i % 10);
  }

  const LabeledDataset all = subsample(ds, 1.0, 1, true);
  CHECK(all.size() == ds.size());

  const LabeledDataset tenth = subsample(ds, 0.1, 1, true);
  CHECK(tenth.size() == 500);
  std::vector<int> per_class(10, 0);
  for (int label : tenth.labels) ++per_class[static_cast<std::size_t>(label)];
  for (int count : per_class) CHECK(count == 50);

  const LabeledDataset again = subsample(ds, 0.1, 1, true);
  CHECK(tenth.labels == again.labels);
  for (std::size_t i = 0; i < tenth.size(); ++i) CHECK(tenth.images[i].v == again.images[i].v);

  CHECK_THROWS(subsample(ds, 0.0, 1, true));
  CHECK_THROWS(subsample(ds, 1.5, 1, true));
  CHECK_THROWS(subsample(ds, 0.001, 1, true));  // fewer samples than classes
}

TEST_CASE("materialize writes a reloadable folder with a manifest") {
  SynthConfig cfg;
  cfg.n_per_class = 3;
  cfg.classes = 2;
  cfg.size = 16;
  cfg.seed = 19;
  LabeledDataset ds = synth_shapes_textures(cfg);
  ds.attributes.clear();  // image_folder layout

  TempDir dir("sslp_materialize");
  const std::string out = (dir.path / "ds").string();
  materialize(ds, out, "synth", {{"note", "test"}}, 19);

  CHECK(fs::exists(fs::path(out) / "manifest.json"));
  const LabeledDataset back = load_dataset(out, SourceFormat::image_folder);
  CHECK(back.size() == ds.size());
  CHECK(back.class_count == ds.class_count);

  std::ifstream mf(fs::path(out) / "manifest.json");
  nlohmann::json manifest = nlohmann::json::parse(mf);
  CHECK(manifest.at("builder") == "synth");
  CHECK(manifest.at("per_class_counts").at("0").get<int>() == 3);
}

TEST_SUITE_END();
