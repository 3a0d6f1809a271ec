#include <fstream>

#include "sslp/cli.hpp"

namespace sslp::cli {

using nlohmann::json;

json default_config(const std::string& verb) {
  const json dataset_spec = {
      {"source", "synth"},
      {"path", ""},
      {"label_attr", ""},
      {"synth",
       {{"n_per_class", 100},
        {"classes", 5},
        {"size", 64},
        {"spurious_strength", 0.95},
        {"seed", 0},
        {"texture_amplitude", 0.5}}},
  };
  const json probe_section = {
      {"epochs", 100}, {"weight_decay", 0.0}, {"lr", 3e-3}, {"batch_size", 256}, {"seed", 0}};

  if (verb == "pretrain") {
    train::RunConfig defaults;
    defaults.encoder.feature_dim = defaults.encoder.derived_feature_dim();
    json j = defaults.to_json();
    j["losses"]["lambda"] = -1.0;      // negative = per-method default
    j["model"]["feature_dim"] = -1;    // negative = derived from arch/width
    j["data"] = dataset_spec;
    return j;
  }
  if (verb == "probe") {
    return {{"probe", probe_section},
            {"data", {{"train", dataset_spec}, {"test", dataset_spec}}}};
  }
  if (verb == "eval") {
    return {{"eval", {{"label_map", json::object()}}}, {"data", {{"test", dataset_spec}}}};
  }
  if (verb == "attack") {
    return {{"attack",
             {{"epsilons", json::array({0.0, 1.0 / 255, 2.0 / 255, 4.0 / 255, 8.0 / 255})},
              {"steps", 10},
              {"random_start", true},
              {"seed", 0},
              {"samples", 0},  // 0 = whole dataset
              {"batch_size", 64}}},
            {"data", {{"test", dataset_spec}}}};
  }
  if (verb == "sweep") {
    return {{"sweep", {{"fractions", json::array({0.1, 0.25, 0.5, 0.75, 1.0})}}},
            {"probe", probe_section},
            {"data", {{"train", dataset_spec}, {"test", dataset_spec}}}};
  }
  if (verb == "make-data") {
    return {{"make_data",
             {{"builder", "synth"},
              {"out", "dataset"},
              {"seed", 0},
              {"synth", dataset_spec.at("synth")},
              {"source", dataset_spec},
              {"eval_source", dataset_spec},
              {"tint", {{"alpha", 0.3}, {"palette", json::array()}}},
              {"keep_rules", json::array()},
              {"corruption", {{"kind", "gaussian_noise"}, {"severity", 1}}},
              {"subsample", {{"fraction", 1.0}, {"stratified", true}}}}}};
  }
  if (verb == "report") {
    return {{"report",
             {{"kind", "pgd"},
              {"inputs", json::array()},
              {"out", "plot.png"},
              {"title", ""}}}};
  }
  SSLP_CONFIG_CHECK(false, "unknown verb: ", verb);
  return {};
}

json merge_config(const json& defaults, const json& user, const std::string& path) {
  SSLP_CONFIG_CHECK(user.is_object(), "config section '", path.empty() ? "<root>" : path,
                    "' must be an object");
  json out = defaults;
  for (const auto& [key, value] : user.items()) {
    const std::string key_path = path.empty() ? key : path + "." + key;
    SSLP_CONFIG_CHECK(defaults.contains(key), "unknown config key: ", key_path);
    const json& dv = defaults.at(key);
    if (dv.is_object() && !dv.empty()) {
      out[key] = merge_config(dv, value, key_path);
    } else {
      // scalar / array / free-form object leaf: type-check loosely
      SSLP_CONFIG_CHECK(
          value.is_primitive() == dv.is_primitive() || dv.is_object() || dv.is_array(),
          "config key ", key_path, " has the wrong shape");
      out[key] = value;
    }
  }
  return out;
}

void apply_override(json& config, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  SSLP_CONFIG_CHECK(eq != std::string::npos, "override must look like key.path=value, got '",
                    assignment, "'");
  const std::string key_path = assignment.substr(0, eq);
  const std::string value_str = assignment.substr(eq + 1);

  json* node = &config;
  std::size_t start = 0;
  std::vector<std::string> parts;
  while (true) {
    const std::size_t dot = key_path.find('.', start);
    parts.push_back(key_path.substr(start, dot == std::string::npos ? dot : dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    SSLP_CONFIG_CHECK(node->is_object() && node->contains(parts[i]),
                      "override references unknown config key: ", key_path);
    node = &(*node)[parts[i]];
  }
  const std::string& leaf = parts.back();
  SSLP_CONFIG_CHECK(node->is_object() && node->contains(leaf),
                    "override references unknown config key: ", key_path);

  json parsed = json::parse(value_str, nullptr, false);
  if (parsed.is_discarded()) parsed = value_str;  // bare string value
  (*node)[leaf] = parsed;
}

train::RunConfig resolve_run_config(const json& merged) {
  json j = merged;
  j.erase("data");
  try {
    const nn::Method method = nn::method_from_string(j.at("method").get<std::string>());
    if (j.at("losses").at("lambda").get<double>() < 0.0)
      j["losses"]["lambda"] = train::default_lambda(method);
    if (j.at("model").at("feature_dim").get<int>() < 0) {
      nn::EncoderConfig enc;
      enc.arch = nn::arch_from_string(j.at("model").at("arch").get<std::string>());
      enc.width = j.at("model").at("width").get<double>();
      j["model"]["feature_dim"] = enc.derived_feature_dim();
    }
    return train::RunConfig::from_json(j);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid pretrain config: ") + e.what());
  }
}

data::LabeledDataset dataset_from_spec(const json& spec) {
  const std::string source = spec.at("source").get<std::string>();
  if (source == "synth") {
    const json& s = spec.at("synth");
    data::SynthConfig cfg;
    cfg.n_per_class = s.at("n_per_class").get<int>();
    cfg.classes = s.at("classes").get<int>();
    cfg.size = s.at("size").get<int>();
    cfg.spurious_strength = s.at("spurious_strength").get<double>();
    cfg.seed = s.at("seed").get<std::uint64_t>();
    cfg.texture_amplitude = s.at("texture_amplitude").get<double>();
    return data::synth_shapes_textures(cfg);
  }
  const std::string path = spec.at("path").get<std::string>();
  SSLP_CONFIG_CHECK(!path.empty(), "dataset spec with source '", source, "' needs a path");
  return data::load_dataset(path, data::source_format_from_string(source),
                            spec.value("label_attr", ""));
}

}  // namespace sslp::cli
