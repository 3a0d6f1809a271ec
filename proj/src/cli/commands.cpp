#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "sslp/cli.hpp"
#include "sslp/core/version.hpp"
#include "sslp/eval.hpp"

namespace fs = std::filesystem;

namespace sslp::cli {

using nlohmann::json;

namespace {

json read_config_file(const std::string& path) {
  std::ifstream in(path);
  SSLP_CONFIG_CHECK(in, "cannot open config file: ", path);
  json j = json::parse(in, nullptr, false);
  SSLP_CONFIG_CHECK(!j.is_discarded(), "config file is not valid JSON: ", path);
  return j;
}

void save_probe_head(const std::string& path, const nn::Linear& head, int classes,
                     const std::string& encoder_hash) {
  nn::CheckpointData ck;
  ck.manifest = {{"kind", "probe"},
                 {"classes", classes},
                 {"feature_dim", head.in_dim},
                 {"encoder_checkpoint_hash", encoder_hash}};
  ck.tensors.push_back({head.weight.name, head.weight.value.shape, head.weight.value.v});
  ck.tensors.push_back({head.bias.name, head.bias.value.shape, head.bias.value.v});
  nn::save_checkpoint(path, ck);
}

nn::Linear load_probe_head(const std::string& path) {
  const nn::CheckpointData ck = nn::load_checkpoint(path);
  SSLP_CHECK(ck.manifest.at("kind") == "probe", "not a probe head file: ", path);
  nn::Linear head;
  head.build("probe.linear.0", ck.manifest.at("feature_dim").get<int>(),
             ck.manifest.at("classes").get<int>());
  const nn::NamedTensor* w = ck.find("probe.linear.0.weight");
  const nn::NamedTensor* b = ck.find("probe.linear.0.bias");
  SSLP_CHECK(w && b, "probe head file is missing tensors: ", path);
  SSLP_CHECK(w->shape == head.weight.value.shape, "probe head shape mismatch in ", path);
  head.weight.value.v = w->data;
  head.bias.value.v = b->data;
  return head;
}

std::string dataset_tag(const data::LabeledDataset& ds) {
  std::string tag;
  for (char c : ds.name)
    tag += (std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  return tag.empty() ? "dataset" : tag;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    SSLP_CHECK(false, "CSV lacks column '", name, "'");
    return -1;
  }
};

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  SSLP_CHECK(in, "cannot open CSV: ", path);
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma == std::string::npos ? comma : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (!fields.empty() && !fields.back().empty() && fields.back().back() == '\r')
      fields.back().pop_back();
    if (first) {
      t.header = fields;
      first = false;
    } else {
      t.rows.push_back(fields);
    }
  }
  return t;
}

// ---------------- verb implementations (write into stage dir) ----------------

std::vector<std::string> do_pretrain(const Command& cmd, const json& cfg_json,
                                     const std::string& stage) {
  const train::RunConfig cfg = resolve_run_config(cfg_json);
  const data::LabeledDataset ds = dataset_from_spec(cfg_json.at("data"));

  if (!cmd.resume.empty()) {
    train::TrainState state = train::load_state(cmd.resume, cmd.force_resume);
    const std::uint64_t want = train::config_hash(cfg);
    const std::uint64_t have = train::config_hash(state.config);
    SSLP_CHECK(cmd.force_resume || want == have,
               "resume config hash mismatch (checkpoint ", nn::hash_hex(have, 16),
               " vs config ", nn::hash_hex(want, 16), "); pass --force-resume to override");
    train::resume_run(std::move(state), ds, stage);
  } else {
    train::pretrain_run(cfg, ds, stage);
  }
  return {"checkpoint.sslck", "metrics.csv"};
}

std::vector<std::string> do_probe(const Command& cmd, const json& cfg_json,
                                  const std::string& stage) {
  SSLP_CONFIG_CHECK(!cmd.checkpoint.empty(), "probe needs --checkpoint");
  nn::ModelBundle bundle = train::bundle_from_checkpoint_file(cmd.checkpoint);
  const std::string enc_hash = nn::hash_hex(nn::file_hash(cmd.checkpoint));

  const data::LabeledDataset train_ds = dataset_from_spec(cfg_json.at("data").at("train"));
  const data::LabeledDataset test_ds = dataset_from_spec(cfg_json.at("data").at("test"));

  eval::ProbeConfig pc;
  const json& p = cfg_json.at("probe");
  pc.epochs = p.at("epochs").get<int>();
  pc.weight_decay = p.at("weight_decay").get<double>();
  pc.lr = p.at("lr").get<double>();
  pc.batch_size = p.at("batch_size").get<int>();
  pc.seed = p.at("seed").get<std::uint64_t>();

  const nn::Linear head = eval::linear_probe(bundle, train_ds, pc);
  save_probe_head(stage + "/probe.sslck", head, train_ds.class_count, enc_hash);

  const eval::AccuracyReport report = eval::eval_accuracy(bundle, head, test_ds, nullptr);
  const std::string base = "report_accuracy_" + dataset_tag(test_ds) + "_" + enc_hash;
  eval::write_accuracy_csv(stage + "/" + base + ".csv", "probe", report);
  eval::write_json(stage + "/" + base + ".json", report.to_json());
  std::cout << "probe: test accuracy " << report.overall_pct << "% on " << report.total
            << " samples\n";
  return {"probe.sslck", base + ".csv", base + ".json"};
}

std::vector<std::string> do_eval(const Command& cmd, const json& cfg_json,
                                 const std::string& stage) {
  SSLP_CONFIG_CHECK(!cmd.checkpoint.empty() && !cmd.probe.empty(),
                    "eval needs --checkpoint and --probe");
  nn::ModelBundle bundle = train::bundle_from_checkpoint_file(cmd.checkpoint);
  const nn::Linear head = load_probe_head(cmd.probe);
  const data::LabeledDataset ds = dataset_from_spec(cfg_json.at("data").at("test"));

  std::map<int, int> label_map;
  for (const auto& [key, value] : cfg_json.at("eval").at("label_map").items())
    label_map[std::stoi(key)] = value.get<int>();

  const eval::AccuracyReport report =
      eval::eval_accuracy(bundle, head, ds, label_map.empty() ? nullptr : &label_map);
  const std::string enc_hash = nn::hash_hex(nn::file_hash(cmd.checkpoint));
  const std::string base = "report_accuracy_" + dataset_tag(ds) + "_" + enc_hash;
  eval::write_accuracy_csv(stage + "/" + base + ".csv", "eval", report);
  eval::write_json(stage + "/" + base + ".json", report.to_json());
  std::cout << "eval: accuracy " << report.overall_pct << "%\n";
  return {base + ".csv", base + ".json"};
}

std::vector<std::string> do_attack(const Command& cmd, const json& cfg_json,
                                   const std::string& stage) {
  SSLP_CONFIG_CHECK(!cmd.checkpoint.empty() && !cmd.probe.empty(),
                    "attack needs --checkpoint and --probe");
  nn::ModelBundle bundle = train::bundle_from_checkpoint_file(cmd.checkpoint);
  const nn::Linear head = load_probe_head(cmd.probe);
  data::LabeledDataset ds = dataset_from_spec(cfg_json.at("data").at("test"));

  const json& a = cfg_json.at("attack");
  const int samples = a.at("samples").get<int>();
  if (samples > 0 && static_cast<std::size_t>(samples) < ds.size())
    ds = data::subsample(ds, static_cast<double>(samples) / ds.size(),
                         a.at("seed").get<std::uint64_t>(), true);

  eval::AttackConfig base_cfg;
  base_cfg.steps = a.at("steps").get<int>();
  base_cfg.random_start = a.at("random_start").get<bool>();
  base_cfg.seed = a.at("seed").get<std::uint64_t>();
  std::vector<double> epsilons;
  for (const auto& e : a.at("epsilons")) epsilons.push_back(e.get<double>());

  const eval::PgdReport report =
      eval::pgd_report(bundle, head, ds, epsilons, base_cfg, a.at("batch_size").get<int>());
  const std::string enc_hash = nn::hash_hex(nn::file_hash(cmd.checkpoint));
  const std::string base = "report_pgd_" + dataset_tag(ds) + "_" + enc_hash;
  eval::write_pgd_csv(stage + "/" + base + ".csv", "pgd", report);
  eval::write_json(stage + "/" + base + ".json", report.to_json());
  return {base + ".csv", base + ".json"};
}

std::vector<std::string> do_sweep(const Command& cmd, const json& cfg_json,
                                  const std::string& stage) {
  SSLP_CONFIG_CHECK(!cmd.checkpoint.empty(), "sweep needs --checkpoint");
  nn::ModelBundle bundle = train::bundle_from_checkpoint_file(cmd.checkpoint);
  const data::LabeledDataset train_ds = dataset_from_spec(cfg_json.at("data").at("train"));
  const data::LabeledDataset test_ds = dataset_from_spec(cfg_json.at("data").at("test"));

  eval::ProbeConfig pc;
  const json& p = cfg_json.at("probe");
  pc.epochs = p.at("epochs").get<int>();
  pc.weight_decay = p.at("weight_decay").get<double>();
  pc.lr = p.at("lr").get<double>();
  pc.batch_size = p.at("batch_size").get<int>();
  pc.seed = p.at("seed").get<std::uint64_t>();

  std::vector<double> fractions;
  for (const auto& f : cfg_json.at("sweep").at("fractions")) fractions.push_back(f.get<double>());

  const eval::ScarcityReport report =
      eval::scarcity_sweep(bundle, train_ds, test_ds, fractions, pc);
  const std::string enc_hash = nn::hash_hex(nn::file_hash(cmd.checkpoint));
  const std::string base = "report_scarcity_" + dataset_tag(test_ds) + "_" + enc_hash;
  eval::write_scarcity_csv(stage + "/" + base + ".csv", "sweep", report);
  eval::write_json(stage + "/" + base + ".json", report.to_json());
  return {base + ".csv", base + ".json"};
}

std::vector<std::string> do_make_data(const Command&, const json& cfg_json,
                                      const std::string& stage) {
  const json& md = cfg_json.at("make_data");
  const std::string builder = md.at("builder").get<std::string>();
  const std::string out_name = md.at("out").get<std::string>();
  const std::uint64_t seed = md.at("seed").get<std::uint64_t>();
  const std::string out_dir = stage + "/" + out_name;

  if (builder == "synth") {
    json spec = {{"source", "synth"}, {"synth", md.at("synth")}};
    data::LabeledDataset ds = dataset_from_spec(spec);
    data::materialize(ds, out_dir, builder, md.at("synth"), seed);
  } else if (builder == "tinted") {
    const data::LabeledDataset src = dataset_from_spec(md.at("source"));
    std::vector<std::array<float, 3>> palette = data::default_tint_palette();
    const json& tint = md.at("tint");
    if (!tint.at("palette").empty()) {
      palette.clear();
      for (const auto& color : tint.at("palette"))
        palette.push_back({color.at(0).get<float>(), color.at(1).get<float>(),
                           color.at(2).get<float>()});
    }
    data::LabeledDataset ds = data::build_tinted(src, palette, tint.at("alpha").get<double>());
    data::materialize(ds, out_dir, builder, tint, seed);
  } else if (builder == "skewed") {
    const data::LabeledDataset src = dataset_from_spec(md.at("source"));
    const data::LabeledDataset eval_src = dataset_from_spec(md.at("eval_source"));
    std::vector<data::KeepRule> rules;
    for (const auto& rule_json : md.at("keep_rules")) {
      data::KeepRule rule;
      for (const auto& [attr, value] : rule_json.items())
        rule.require.emplace_back(attr, value.get<int>());
      rules.push_back(rule);
    }
    const data::SkewedResult result = data::build_skewed(src, eval_src, rules);
    data::materialize(result.train, out_dir + "_train", builder, md.at("keep_rules"), seed);
    json combo = json::object();
    for (const auto& [key, count] : result.combo_counts) combo[key] = count;
    data::materialize(result.eval, out_dir + "_eval", builder,
                      json{{"keep_rules", md.at("keep_rules")}, {"combo_counts", combo}}, seed);
    return {out_name + "_train", out_name + "_eval"};
  } else if (builder == "corrupt") {
    const data::LabeledDataset src = dataset_from_spec(md.at("source"));
    const json& c = md.at("corruption");
    data::CorruptionSpec spec{c.at("kind").get<std::string>(), c.at("severity").get<int>()};
    data::LabeledDataset ds = data::corrupt(src, spec, seed);
    data::materialize(ds, out_dir, builder, c, seed);
  } else if (builder == "subsample") {
    const data::LabeledDataset src = dataset_from_spec(md.at("source"));
    const json& s = md.at("subsample");
    data::LabeledDataset ds =
        data::subsample(src, s.at("fraction").get<double>(), seed, s.at("stratified").get<bool>());
    data::materialize(ds, out_dir, builder, s, seed);
  } else {
    SSLP_CONFIG_CHECK(false, "unknown builder: ", builder);
  }
  return {out_name};
}

std::vector<std::string> do_report(const Command&, const json& cfg_json,
                                   const std::string& stage) {
  const json& r = cfg_json.at("report");
  const std::string kind = r.at("kind").get<std::string>();
  const std::string out = r.at("out").get<std::string>();
  std::string title = r.at("title").get<std::string>();
  if (title.empty()) title = kind;
  SSLP_CONFIG_CHECK(!r.at("inputs").empty(), "report needs at least one input CSV");

  if (kind == "pgd" || kind == "scarcity") {
    std::vector<Series> series;
    for (const auto& input : r.at("inputs")) {
      const CsvTable t = read_csv(input.get<std::string>());
      const int label_col = t.column("label");
      const int x_col = t.column(kind == "pgd" ? "epsilon" : "fraction");
      const int y_col = t.column("accuracy_pct");
      std::map<std::string, Series> by_label;
      for (const auto& row : t.rows) {
        Series& s = by_label[row[label_col]];
        s.label = row[label_col];
        double x = std::stod(row[x_col]);
        if (kind == "pgd") x *= 255.0;
        else x *= 100.0;
        s.points.emplace_back(x, std::stod(row[y_col]));
      }
      for (auto& [label, s] : by_label) series.push_back(std::move(s));
    }
    render_line_plot(stage + "/" + out, series, title,
                     kind == "pgd" ? "EPSILON (/255)" : "TRAIN DATA (%)", "ACCURACY (%)");
  } else if (kind == "corruption") {
    // one bar per input label within each corruption group
    std::vector<std::string> labels;
    std::map<std::string, std::map<std::string, std::pair<double, int>>> acc;  // group -> label
    for (const auto& input : r.at("inputs")) {
      const CsvTable t = read_csv(input.get<std::string>());
      const int label_col = t.column("label");
      const int group_col = t.column("group");
      const int y_col = t.column("accuracy_pct");
      for (const auto& row : t.rows) {
        if (row[group_col] == "clean") continue;
        if (std::find(labels.begin(), labels.end(), row[label_col]) == labels.end())
          labels.push_back(row[label_col]);
        auto& [sum, count] = acc[row[group_col]][row[label_col]];
        sum += std::stod(row[y_col]);
        ++count;
      }
    }
    std::vector<BarGroup> groups;
    for (const char* g : {"noise", "blur", "weather", "digital"}) {
      if (!acc.count(g)) continue;
      BarGroup bg;
      bg.name = g;
      for (const std::string& label : labels) {
        const auto& [sum, count] = acc[g][label];
        bg.values.push_back(count ? sum / count : 0.0);
      }
      groups.push_back(std::move(bg));
    }
    render_grouped_bars(stage + "/" + out, labels, groups, title, "ACCURACY (%)");
  } else {
    SSLP_CONFIG_CHECK(false, "unknown report kind: ", kind);
  }
  return {out};
}

}  // namespace

int run_command(const Command& cmd) {
  const auto t0 = std::chrono::steady_clock::now();
  json merged;
  try {
    const json user = read_config_file(cmd.config_path);
    merged = merge_config(default_config(cmd.verb), user);
    for (const std::string& o : cmd.overrides) apply_override(merged, o);
    if (cmd.verb == "pretrain") resolve_run_config(merged);  // validate before any IO
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  fs::create_directories(cmd.output_dir);
  const std::string nonce = nn::hash_hex(
      Rng::mix(static_cast<std::uint64_t>(
          std::chrono::steady_clock::now().time_since_epoch().count())),
      8);
  const fs::path stage = fs::path(cmd.output_dir) / (".stage-" + nonce);
  fs::create_directories(stage);

  std::vector<std::string> outputs;
  try {
    if (cmd.verb == "pretrain") outputs = do_pretrain(cmd, merged, stage.string());
    else if (cmd.verb == "probe") outputs = do_probe(cmd, merged, stage.string());
    else if (cmd.verb == "eval") outputs = do_eval(cmd, merged, stage.string());
    else if (cmd.verb == "attack") outputs = do_attack(cmd, merged, stage.string());
    else if (cmd.verb == "sweep") outputs = do_sweep(cmd, merged, stage.string());
    else if (cmd.verb == "make-data") outputs = do_make_data(cmd, merged, stage.string());
    else if (cmd.verb == "report") outputs = do_report(cmd, merged, stage.string());
    else SSLP_CONFIG_CHECK(false, "unknown verb: ", cmd.verb);

    json manifest = {
        {"command", cmd.verb},
        {"config_path", cmd.config_path},
        {"resolved_config", merged},
        {"overrides", cmd.overrides},
        {"checkpoint", cmd.checkpoint},
        {"probe", cmd.probe},
        {"version", kVersion},
        {"wallclock_s", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()},
        {"outputs", outputs},
    };
    std::ofstream mf(stage / "manifest.json");
    mf << manifest.dump(2) << "\n";
    mf.close();

    // promote staged artifacts into the output directory
    for (const auto& entry : fs::directory_iterator(stage))
      fs::rename(entry.path(), fs::path(cmd.output_dir) / entry.path().filename());
    fs::remove_all(stage);
    return kOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    fs::remove_all(stage);
    return kConfigError;
  } catch (const AssertionFailure& e) {
    std::cerr << "assertion failure: " << e.what() << "\n";
    const fs::path quarantine = fs::path(cmd.output_dir) / "failed" / nonce;
    fs::create_directories(quarantine.parent_path());
    fs::rename(stage, quarantine);
    return kAssertionFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    const fs::path quarantine = fs::path(cmd.output_dir) / "failed" / nonce;
    fs::create_directories(quarantine.parent_path());
    fs::rename(stage, quarantine);
    return kRuntimeError;
  }
}

}  // namespace sslp::cli
