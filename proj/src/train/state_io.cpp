#include "sslp/train.hpp"

namespace sslp::train {

nn::CheckpointData state_to_checkpoint(TrainState& state) {
  nn::CheckpointData ck;
  ck.tensors = nn::bundle_tensors(state.bundle);

  std::vector<nn::Param*> params;
  state.bundle.collect_params(params);
  SSLP_CHECK(params.size() == state.opt.m.size(), "optimizer state out of sync");
  for (std::size_t i = 0; i < params.size(); ++i) {
    ck.tensors.push_back({"opt.m." + params[i]->name, state.opt.m[i].shape, state.opt.m[i].v});
    ck.tensors.push_back({"opt.v." + params[i]->name, state.opt.v[i].shape, state.opt.v[i].v});
  }

  nlohmann::json manifest = nn::bundle_manifest(state.bundle);
  nlohmann::json history = nlohmann::json::array();
  for (const MetricsRow& r : state.history)
    history.push_back({{"step", r.step},
                       {"epoch", r.epoch},
                       {"lr", r.lr},
                       {"total", r.total},
                       {"ssl_main", r.ssl_main},
                       {"ssl_prior", r.ssl_prior},
                       {"pk", r.pk},
                       {"wallclock_s", r.wallclock_s}});
  manifest["train"] = {
      {"step", state.step},           {"total_steps", state.total_steps},
      {"epoch", state.epoch},         {"adam_t", state.opt.t},
      {"config", state.config.to_json()},
      {"config_hash", nn::hash_hex(config_hash(state.config), 16)},
  };
  manifest["metric_history"] = std::move(history);
  ck.manifest = std::move(manifest);
  return ck;
}

void save_state(const TrainState& state, const std::string& path) {
  nn::CheckpointData ck = state_to_checkpoint(const_cast<TrainState&>(state));
  nn::save_checkpoint(path, ck);
}

TrainState state_from_checkpoint(const nn::CheckpointData& ck, bool override_config_check) {
  const nlohmann::json& tr = ck.manifest.at("train");
  const RunConfig cfg = RunConfig::from_json(tr.at("config"));
  if (!override_config_check) {
    const std::string stored = tr.at("config_hash").get<std::string>();
    const std::string computed = nn::hash_hex(config_hash(cfg), 16);
    SSLP_CHECK(stored == computed, "checkpoint config hash ", stored,
               " does not match its embedded config (", computed,
               "); pass the override flag to resume anyway");
  }

  TrainState state = init_train_state(cfg);
  nn::load_bundle_tensors(state.bundle, ck);

  std::vector<nn::Param*> params;
  state.bundle.collect_params(params);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const nn::NamedTensor* m = ck.find("opt.m." + params[i]->name);
    const nn::NamedTensor* v = ck.find("opt.v." + params[i]->name);
    SSLP_CHECK(m && v, "checkpoint is missing optimizer moments for ", params[i]->name);
    SSLP_CHECK(m->shape == state.opt.m[i].shape && v->shape == state.opt.v[i].shape,
               "optimizer moment shape mismatch for ", params[i]->name);
    state.opt.m[i].v = m->data;
    state.opt.v[i].v = v->data;
  }
  state.opt.t = tr.at("adam_t").get<std::int64_t>();
  state.step = tr.at("step").get<std::int64_t>();
  state.total_steps = tr.at("total_steps").get<std::int64_t>();
  state.epoch = tr.at("epoch").get<int>();
  for (const auto& r : ck.manifest.at("metric_history")) {
    MetricsRow row;
    row.step = r.at("step").get<std::int64_t>();
    row.epoch = r.at("epoch").get<int>();
    row.lr = r.at("lr").get<double>();
    row.total = r.at("total").get<double>();
    row.ssl_main = r.at("ssl_main").get<double>();
    row.ssl_prior = r.at("ssl_prior").get<double>();
    row.pk = r.at("pk").get<double>();
    row.wallclock_s = r.at("wallclock_s").get<double>();
    state.history.push_back(row);
  }
  return state;
}

TrainState load_state(const std::string& path, bool override_config_check) {
  return state_from_checkpoint(nn::load_checkpoint(path), override_config_check);
}

nn::ModelBundle bundle_from_checkpoint_file(const std::string& path) {
  const nn::CheckpointData ck = nn::load_checkpoint(path);
  nn::ModelBundle bundle = nn::bundle_from_manifest(ck.manifest);
  nn::load_bundle_tensors(bundle, ck);
  return bundle;
}

}  // namespace sslp::train
