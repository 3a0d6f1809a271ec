#include "sslp/train.hpp"

namespace sslp::train {

PriorMode prior_mode_from_string(const std::string& s) {
  if (s == "none") return PriorMode::none;
  if (s == "sobel") return PriorMode::sobel;
  if (s == "prewitt") return PriorMode::prewitt;
  if (s == "canny") return PriorMode::canny;
  if (s == "color_distortion_network") return PriorMode::color_distortion_network;
  if (s == "shape_as_augmentation") return PriorMode::shape_as_augmentation;
  SSLP_CHECK(false, "unknown prior mode: ", s);
  return PriorMode::none;
}

const char* to_string(PriorMode m) {
  switch (m) {
    case PriorMode::none: return "none";
    case PriorMode::sobel: return "sobel";
    case PriorMode::prewitt: return "prewitt";
    case PriorMode::canny: return "canny";
    case PriorMode::color_distortion_network: return "color_distortion_network";
    case PriorMode::shape_as_augmentation: return "shape_as_augmentation";
  }
  return "?";
}

bool uses_prior_network(PriorMode m) {
  return m == PriorMode::sobel || m == PriorMode::prewitt || m == PriorMode::canny ||
         m == PriorMode::color_distortion_network;
}

double default_lambda(nn::Method method) {
  switch (method) {
    case nn::Method::simclr: return 0.5;
    case nn::Method::simsiam: return 1.0;
    case nn::Method::vicreg: return 2.0;
  }
  return 1.0;
}

void RunConfig::validate() const {
  SSLP_CHECK(lambda >= 0.0, "lambda must be non-negative");
  SSLP_CHECK(epochs >= 0, "epochs must be non-negative");
  SSLP_CHECK(batch_size >= 2, "batch_size must be at least 2");
  if (method == nn::Method::vicreg)
    SSLP_CHECK(batch_size >= 2, "vicreg needs batch_size >= 2");
  SSLP_CHECK(out_h > 0 && out_w > 0, "augment out size must be positive");
  SSLP_CHECK(nt_xent_temperature > 0.0, "nt_xent temperature must be positive");
  SSLP_CHECK(optimizer.lr > 0.0, "learning rate must be positive");
  SSLP_CHECK(optimizer.weight_decay >= 0.0, "weight decay must be non-negative");
  SSLP_CHECK(log_interval >= 1, "log_interval must be >= 1");
  SSLP_CHECK(checkpoint_interval >= 0, "checkpoint_interval must be >= 0");
  SSLP_CHECK(prior.kl_temperature > 0.0, "kl temperature must be positive");
  SSLP_CHECK(prior.shape_aug_probability >= 0.0 && prior.shape_aug_probability <= 1.0,
             "shape augmentation probability must lie in [0,1]");
  encoder.validate();
  head.validate(method);
  if (uses_prior_network(prior.mode) && prior.mode != PriorMode::color_distortion_network) {
    priors::PriorConfig f = prior.filter;
    f.kind = prior.mode == PriorMode::sobel    ? priors::FilterKind::sobel
             : prior.mode == PriorMode::prewitt ? priors::FilterKind::prewitt
                                                : priors::FilterKind::canny;
    f.validate();
  }
}

nlohmann::json RunConfig::to_json() const {
  return nlohmann::json{
      {"method", nn::to_string(method)},
      {"prior",
       {{"kind", to_string(prior.mode)},
        {"upsample_factor", prior.filter.upsample_factor},
        {"gaussian_sigma", prior.filter.gaussian_sigma},
        {"gaussian_kernel_size", prior.filter.gaussian_kernel_size},
        {"canny_low", prior.filter.canny_low},
        {"canny_high", prior.filter.canny_high},
        {"filter_then_augment", prior.filter_then_augment},
        {"stop_prior_side", prior.stop_prior_side},
        {"prior_ssl_off", prior.prior_ssl_off},
        {"kl_symmetric", prior.kl_symmetric},
        {"kl_temperature", prior.kl_temperature},
        {"kl_average_alignments", prior.kl_average_alignments},
        {"shape_aug_probability", prior.shape_aug_probability}}},
      {"augment",
       {{"preset", preset == augment::Preset::basic ? "basic" : "strong"},
        {"out_size", {out_h, out_w}}}},
      {"losses",
       {{"lambda", lambda},
        {"nt_xent_temperature", nt_xent_temperature},
        {"vicreg",
         {{"gamma", vicreg.gamma},
          {"weight_var", vicreg.weight_var},
          {"weight_inv", vicreg.weight_inv},
          {"weight_cov", vicreg.weight_cov},
          {"epsilon", vicreg.epsilon},
          {"unweighted", vicreg.unweighted}}}}},
      {"model",
       {{"arch", nn::to_string(encoder.arch)},
        {"width", encoder.width},
        {"feature_dim", encoder.feature_dim},
        {"projector_hidden", head.projector_hidden},
        {"projector_out", head.projector_out},
        {"predictor_hidden", head.predictor_hidden}}},
      {"optimizer",
       {{"lr", optimizer.lr},
        {"weight_decay", optimizer.weight_decay},
        {"beta1", optimizer.beta1},
        {"beta2", optimizer.beta2},
        {"eps", optimizer.eps}}},
      {"train",
       {{"epochs", epochs},
        {"batch_size", batch_size},
        {"seed", seed},
        {"deterministic", deterministic}}},
      {"logging", {{"interval", log_interval}, {"checkpoint_interval", checkpoint_interval}}},
  };
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig cfg;
  cfg.method = nn::method_from_string(j.at("method").get<std::string>());

  const auto& p = j.at("prior");
  cfg.prior.mode = prior_mode_from_string(p.at("kind").get<std::string>());
  cfg.prior.filter.upsample_factor = p.at("upsample_factor").get<int>();
  cfg.prior.filter.gaussian_sigma = p.at("gaussian_sigma").get<double>();
  cfg.prior.filter.gaussian_kernel_size = p.at("gaussian_kernel_size").get<int>();
  cfg.prior.filter.canny_low = p.at("canny_low").get<double>();
  cfg.prior.filter.canny_high = p.at("canny_high").get<double>();
  cfg.prior.filter_then_augment = p.at("filter_then_augment").get<bool>();
  cfg.prior.stop_prior_side = p.at("stop_prior_side").get<bool>();
  cfg.prior.prior_ssl_off = p.at("prior_ssl_off").get<bool>();
  cfg.prior.kl_symmetric = p.at("kl_symmetric").get<bool>();
  cfg.prior.kl_temperature = p.at("kl_temperature").get<double>();
  cfg.prior.kl_average_alignments = p.at("kl_average_alignments").get<bool>();
  cfg.prior.shape_aug_probability = p.at("shape_aug_probability").get<double>();

  const auto& a = j.at("augment");
  cfg.preset = augment::preset_from_string(a.at("preset").get<std::string>());
  cfg.out_h = a.at("out_size").at(0).get<int>();
  cfg.out_w = a.at("out_size").at(1).get<int>();

  const auto& l = j.at("losses");
  cfg.lambda = l.at("lambda").get<double>();
  cfg.nt_xent_temperature = l.at("nt_xent_temperature").get<double>();
  const auto& vr = l.at("vicreg");
  cfg.vicreg.gamma = vr.at("gamma").get<double>();
  cfg.vicreg.weight_var = vr.at("weight_var").get<double>();
  cfg.vicreg.weight_inv = vr.at("weight_inv").get<double>();
  cfg.vicreg.weight_cov = vr.at("weight_cov").get<double>();
  cfg.vicreg.epsilon = vr.at("epsilon").get<double>();
  cfg.vicreg.unweighted = vr.at("unweighted").get<bool>();

  const auto& m = j.at("model");
  cfg.encoder.arch = nn::arch_from_string(m.at("arch").get<std::string>());
  cfg.encoder.width = m.at("width").get<double>();
  cfg.encoder.feature_dim = m.at("feature_dim").get<int>();
  cfg.head.projector_hidden = m.at("projector_hidden").get<int>();
  cfg.head.projector_out = m.at("projector_out").get<int>();
  cfg.head.predictor_hidden = m.at("predictor_hidden").get<int>();
  cfg.head.use_predictor = cfg.method == nn::Method::simsiam;

  const auto& o = j.at("optimizer");
  cfg.optimizer.lr = o.at("lr").get<double>();
  cfg.optimizer.weight_decay = o.at("weight_decay").get<double>();
  cfg.optimizer.beta1 = o.at("beta1").get<double>();
  cfg.optimizer.beta2 = o.at("beta2").get<double>();
  cfg.optimizer.eps = o.at("eps").get<double>();

  const auto& t = j.at("train");
  cfg.epochs = t.at("epochs").get<int>();
  cfg.batch_size = t.at("batch_size").get<int>();
  cfg.seed = t.at("seed").get<std::uint64_t>();
  cfg.deterministic = t.at("deterministic").get<bool>();

  const auto& lg = j.at("logging");
  cfg.log_interval = lg.at("interval").get<int>();
  cfg.checkpoint_interval = lg.at("checkpoint_interval").get<int>();

  cfg.validate();
  return cfg;
}

std::uint64_t config_hash(const RunConfig& cfg) {
  const std::string s = cfg.to_json().dump();
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

}  // namespace sslp::train
