#include <cmath>

#include "sslp/train.hpp"

namespace sslp::train {

void Adam::init(const std::vector<nn::Param*>& params) {
  t = 0;
  m.clear();
  v.clear();
  for (const nn::Param* p : params) {
    m.emplace_back(p->value.shape);
    v.emplace_back(p->value.shape);
  }
}

void Adam::step(const std::vector<nn::Param*>& params, double lr) {
  SSLP_CHECK(params.size() == m.size(), "optimizer state does not match parameter list");
  ++t;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    nn::Param& p = *params[pi];
    float* w = p.value.data();
    const float* g0 = p.grad.data();
    float* mm = m[pi].data();
    float* vv = v[pi].data();
    const std::int64_t n = p.value.numel();
    for (std::int64_t i = 0; i < n; ++i) {
      const double g = static_cast<double>(g0[i]) + cfg.weight_decay * w[i];
      const double mi = cfg.beta1 * mm[i] + (1.0 - cfg.beta1) * g;
      const double vi = cfg.beta2 * vv[i] + (1.0 - cfg.beta2) * g * g;
      mm[i] = static_cast<float>(mi);
      vv[i] = static_cast<float>(vi);
      const double mhat = mi / bc1;
      const double vhat = vi / bc2;
      w[i] = static_cast<float>(w[i] - lr * mhat / (std::sqrt(vhat) + cfg.eps));
    }
  }
}

double cosine_lr(double peak, std::int64_t step, std::int64_t total_steps) {
  SSLP_CHECK(total_steps > 0, "cosine schedule needs total_steps > 0");
  const double t = static_cast<double>(step) / static_cast<double>(total_steps);
  return peak * (1.0 + std::cos(3.14159265358979323846 * t)) / 2.0;
}

std::vector<int> epoch_order(std::uint64_t seed, int epoch, int n) {
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  Rng rng = Rng(Rng::mix(seed)).substream({0x73687566ull, static_cast<std::uint64_t>(epoch)});
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(i) + 1));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  return order;
}

Rng sample_rng(std::uint64_t seed, int epoch, int sample_index) {
  return Rng(Rng::mix(seed)).substream({0x61756773ull, static_cast<std::uint64_t>(epoch),
                                        static_cast<std::uint64_t>(sample_index)});
}

}  // namespace sslp::train
