#pragma once

#include <string>
#include <vector>

#include "sslp/core/check.hpp"

namespace sslp::losses {

// N x D double matrix of projector/predictor outputs. Losses run in
// double regardless of the network precision so gradient checks hold at
// float64.
struct EmbeddingBatch {
  int n = 0, d = 0;
  std::vector<double> v;

  EmbeddingBatch() = default;
  EmbeddingBatch(int n_, int d_) : n(n_), d(d_), v(static_cast<std::size_t>(n_) * d_, 0.0) {}

  double& at(int i, int j) { return v[static_cast<std::size_t>(i) * d + j]; }
  double at(int i, int j) const { return v[static_cast<std::size_t>(i) * d + j]; }
  const double* row(int i) const { return v.data() + static_cast<std::size_t>(i) * d; }
  double* row(int i) { return v.data() + static_cast<std::size_t>(i) * d; }
  bool same_shape(const EmbeddingBatch& o) const { return n == o.n && d == o.d; }
};

struct LossTerm {
  std::string name;
  double value = 0.0;
  double weight = 1.0;
};

struct LossValue {
  double scalar = 0.0;
  std::vector<LossTerm> terms;

  double term(const std::string& name) const;
  bool has_term(const std::string& name) const;
  // scalar must equal sum(value * weight) of the breakdown
  double breakdown_sum() const;
};

struct VicregParams {
  double gamma = 1.0;
  double weight_var = 25.0, weight_inv = 25.0, weight_cov = 1.0;
  double epsilon = 1e-4;
  bool unweighted = false;  // match the printed equation: all weights 1

  double wv() const { return unweighted ? 1.0 : weight_var; }
  double wi() const { return unweighted ? 1.0 : weight_inv; }
  double wc() const { return unweighted ? 1.0 : weight_cov; }
};

// Normalized-temperature cross entropy over 2N anchors. Embeddings are
// L2-normalized internally; the denominator runs over all 2N-1 non-self
// similarities including the positive.
LossValue nt_xent(const EmbeddingBatch& z, const EmbeddingBatch& z_prime, double temperature,
                  EmbeddingBatch* dz = nullptr, EmbeddingBatch* dz_prime = nullptr);

// 0.5*D(y, stopgrad(z')) + 0.5*D(y', stopgrad(z)) with D the negative
// cosine similarity. dz/dz_prime come back as exact zero matrices.
LossValue simsiam_loss(const EmbeddingBatch& y, const EmbeddingBatch& y_prime,
                       const EmbeddingBatch& z, const EmbeddingBatch& z_prime,
                       EmbeddingBatch* dy = nullptr, EmbeddingBatch* dy_prime = nullptr,
                       EmbeddingBatch* dz = nullptr, EmbeddingBatch* dz_prime = nullptr);

// Variance / invariance / covariance loss; var and cov are computed for
// both branches and averaged.
LossValue vicreg_loss(const EmbeddingBatch& z, const EmbeddingBatch& z_prime,
                      const VicregParams& params, EmbeddingBatch* dz = nullptr,
                      EmbeddingBatch* dz_prime = nullptr);

// Row-wise KL(softmax(z_ssl/t) || softmax(z_prior/t)), averaged over rows.
// symmetric averages both directions.
LossValue prior_kl(const EmbeddingBatch& z_ssl, const EmbeddingBatch& z_prior,
                   double temperature, bool symmetric = false,
                   EmbeddingBatch* dz_ssl = nullptr, EmbeddingBatch* dz_prior = nullptr);

// total = ssl_main + ssl_prior + lambda * pk
LossValue total_loss(const LossValue& ssl_main, const LossValue& ssl_prior, const LossValue& pk,
                     double lambda);

// baseline (no prior network): total = ssl_main
LossValue total_loss_baseline(const LossValue& ssl_main);

}  // namespace sslp::losses
