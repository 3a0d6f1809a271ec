#include "sslp/models.hpp"

namespace sslp::nn {

void HeadConfig::validate(Method method) const {
  SSLP_CHECK(projector_hidden > 0 && projector_out > 0, "projector dims must be positive");
  SSLP_CHECK(use_predictor == (method == Method::simsiam),
             "predictor must be present exactly when method is simsiam");
  if (use_predictor) SSLP_CHECK(predictor_hidden > 0, "predictor_hidden must be positive");
}

// ---------------- Mlp ----------------

void Mlp::build(const std::string& prefix, int in, int hidden, int out) {
  l1.build(prefix + ".linear.0", in, hidden);
  bn.build(prefix + ".bn.0", hidden);
  l2.build(prefix + ".linear.1", hidden, out);
}

void Mlp::init(Rng& rng) {
  l1.init(rng);
  l2.init(rng);
}

Tensor Mlp::forward(const Tensor& x, Cache* cache, bool train) {
  Tensor t = l1.forward(x, cache ? &cache->l1c : nullptr);
  t = bn.forward(t, cache ? &cache->bnc : nullptr, train);
  t = relu(t);
  if (cache) cache->relu_out = t;
  return l2.forward(t, cache ? &cache->l2c : nullptr);
}

Tensor Mlp::backward(const Tensor& dy, const Cache& cache) {
  Tensor d = l2.backward(dy, cache.l2c, true);
  d = relu_backward(d, cache.relu_out);
  d = bn.backward(d, cache.bnc);
  return l1.backward(d, cache.l1c, true);
}

void Mlp::collect_params(std::vector<Param*>& out) {
  out.push_back(&l1.weight);
  out.push_back(&l1.bias);
  out.push_back(&bn.gamma);
  out.push_back(&bn.beta);
  out.push_back(&l2.weight);
  out.push_back(&l2.bias);
}

void Mlp::collect_state(std::vector<std::pair<std::string, Tensor*>>& out) {
  const std::string stem = bn.gamma.name.substr(0, bn.gamma.name.size() - 6);
  out.emplace_back(stem + ".running_mean", &bn.running_mean);
  out.emplace_back(stem + ".running_var", &bn.running_var);
}

// ---------------- SslNetwork ----------------

ForwardOut SslNetwork::forward(const Tensor& batch, Cache* cache, bool train) {
  ForwardOut out;
  out.h = encoder->forward(batch, cache ? cache->enc.get() : nullptr, train);
  out.z = projector.forward(out.h, cache ? &cache->proj : nullptr, train);
  if (predictor) out.y = predictor->forward(out.z, cache ? &cache->pred : nullptr, train);
  return out;
}

Tensor SslNetwork::backward(const Tensor& dz, const Tensor* dy, const Cache& cache,
                            bool need_dx) {
  Tensor dz_total = dz;
  if (dy) {
    SSLP_CHECK(predictor.has_value(), "predictor gradient supplied without a predictor");
    Tensor dz_from_pred = predictor->backward(*dy, cache.pred);
    for (std::int64_t i = 0; i < dz_total.numel(); ++i) dz_total.v[i] += dz_from_pred.v[i];
  }
  Tensor dh = projector.backward(dz_total, cache.proj);
  return encoder->backward(dh, *cache.enc, need_dx);
}

void SslNetwork::collect_params(std::vector<Param*>& out) {
  encoder->collect_params(out);
  projector.collect_params(out);
  if (predictor) predictor->collect_params(out);
}

void SslNetwork::collect_state(std::vector<std::pair<std::string, Tensor*>>& out) {
  encoder->collect_state(out);
  projector.collect_state(out);
  if (predictor) predictor->collect_state(out);
}

// ---------------- ModelBundle ----------------

SslNetwork& ModelBundle::branch(Branch b) {
  if (b == Branch::main) return main;
  SSLP_CHECK(prior != nullptr, "bundle has no prior network");
  return *prior;
}

void ModelBundle::collect_params(std::vector<Param*>& out) {
  main.collect_params(out);
  if (prior) prior->collect_params(out);
}

void ModelBundle::collect_state(std::vector<std::pair<std::string, Tensor*>>& out) {
  main.collect_state(out);
  if (prior) prior->collect_state(out);
}

std::int64_t ModelBundle::param_count() const {
  std::int64_t count = 0;
  std::vector<Param*> params;
  const_cast<ModelBundle*>(this)->collect_params(params);
  for (const Param* p : params) count += p->value.numel();
  return count;
}

void ModelBundle::zero_grads() {
  std::vector<Param*> params;
  collect_params(params);
  for (Param* p : params) p->grad.zero();
}

namespace {
std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t bytes) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ull;
  }
  return h;
}
}  // namespace

std::uint64_t ModelBundle::checksum() const {
  std::uint64_t h = 0xCBF29CE484222325ull;
  std::vector<Param*> params;
  const_cast<ModelBundle*>(this)->collect_params(params);
  for (const Param* p : params)
    h = fnv1a(h, p->value.v.data(), p->value.v.size() * sizeof(float));
  std::vector<std::pair<std::string, Tensor*>> state;
  const_cast<ModelBundle*>(this)->collect_state(state);
  for (const auto& [name, t] : state) h = fnv1a(h, t->v.data(), t->v.size() * sizeof(float));
  return h;
}

namespace {

SslNetwork build_network(const EncoderConfig& enc_cfg, const HeadConfig& head_cfg,
                         const std::string& prefix, Rng rng) {
  SslNetwork net;
  net.encoder = make_encoder(enc_cfg, prefix + "encoder");
  net.projector.build(prefix + "projector", enc_cfg.feature_dim, head_cfg.projector_hidden,
                      head_cfg.projector_out);
  if (head_cfg.use_predictor) {
    net.predictor.emplace();
    net.predictor->build(prefix + "predictor", head_cfg.projector_out,
                         head_cfg.predictor_hidden, head_cfg.projector_out);
  }
  net.encoder->init(rng);
  net.projector.init(rng);
  if (net.predictor) net.predictor->init(rng);
  return net;
}

}  // namespace

ModelBundle init_models(const EncoderConfig& encoder_cfg, const HeadConfig& head_cfg,
                        Method method, bool with_prior, std::uint64_t seed) {
  encoder_cfg.validate();
  head_cfg.validate(method);

  ModelBundle bundle;
  bundle.encoder_cfg = encoder_cfg;
  bundle.head_cfg = head_cfg;
  bundle.method = method;
  bundle.seed = seed;

  Rng root(Rng::mix(seed));
  bundle.main = build_network(encoder_cfg, head_cfg, "", root.substream({0x6D61696Eull}));
  if (with_prior) {
    bundle.prior = std::make_unique<SslNetwork>(
        build_network(encoder_cfg, head_cfg, "prior_", root.substream({0x7072696Full})));
  }
  return bundle;
}

Tensor batch_to_tensor(const ImageBatch& batch) {
  Tensor t({batch.n, batch.channels, batch.height, batch.width});
  std::copy(batch.v.begin(), batch.v.end(), t.v.begin());
  return t;
}

ForwardOut forward_ssl(ModelBundle& bundle, const ImageBatch& batch, Branch branch, bool train) {
  Tensor x = batch_to_tensor(batch);
  SslNetwork& net = bundle.branch(branch);
  if (!train) return net.forward(x, nullptr, false);
  SslNetwork::Cache cache;
  cache.enc = net.encoder->new_cache();
  return net.forward(x, &cache, true);
}

}  // namespace sslp::nn
