#include "sslp/losses.hpp"

#include <algorithm>
#include <cmath>

namespace sslp::losses {

namespace {

void check_batch(const EmbeddingBatch& e, const char* what) {
  SSLP_CHECK(e.n >= 1 && e.d >= 1, what, ": batch must be at least 1x1, got ", e.n, "x", e.d);
  for (double x : e.v) SSLP_CHECK(std::isfinite(x), what, ": non-finite embedding entry");
}

double row_norm(const EmbeddingBatch& e, int i) {
  double s = 0.0;
  for (int j = 0; j < e.d; ++j) s += e.at(i, j) * e.at(i, j);
  return std::sqrt(s);
}

void softmax_row(const double* x, int d, double inv_t, std::vector<double>& out) {
  out.resize(static_cast<std::size_t>(d));
  double mx = -1e300;
  for (int j = 0; j < d; ++j) mx = std::max(mx, x[j] * inv_t);
  double sum = 0.0;
  for (int j = 0; j < d; ++j) {
    out[j] = std::exp(x[j] * inv_t - mx);
    sum += out[j];
  }
  for (int j = 0; j < d; ++j) out[j] /= sum;
}

}  // namespace

double LossValue::term(const std::string& name) const {
  for (const LossTerm& t : terms)
    if (t.name == name) return t.value;
  SSLP_CHECK(false, "loss breakdown has no term '", name, "'");
  return 0.0;
}

bool LossValue::has_term(const std::string& name) const {
  for (const LossTerm& t : terms)
    if (t.name == name) return true;
  return false;
}

double LossValue::breakdown_sum() const {
  double s = 0.0;
  for (const LossTerm& t : terms) s += t.value * t.weight;
  return s;
}

LossValue nt_xent(const EmbeddingBatch& z, const EmbeddingBatch& z_prime, double temperature,
                  EmbeddingBatch* dz, EmbeddingBatch* dz_prime) {
  check_batch(z, "nt_xent(z)");
  check_batch(z_prime, "nt_xent(z')");
  SSLP_CHECK(z.same_shape(z_prime), "nt_xent: shape mismatch");
  SSLP_CHECK(temperature > 0.0, "nt_xent: temperature must be positive");

  const int n = z.n, d = z.d, m = 2 * n;

  // normalized rows, stacked [z; z']
  std::vector<double> v(static_cast<std::size_t>(m) * d);
  for (int k = 0; k < m; ++k) {
    const EmbeddingBatch& src = k < n ? z : z_prime;
    const int i = k < n ? k : k - n;
    const double nrm = row_norm(src, i);
    SSLP_CHECK(nrm > 0.0, "nt_xent: zero-norm embedding row ", i, k < n ? " in z" : " in z'");
    for (int j = 0; j < d; ++j) v[static_cast<std::size_t>(k) * d + j] = src.at(i, j) / nrm;
  }

  auto sim = [&](int a, int b) {
    double s = 0.0;
    const double* pa = v.data() + static_cast<std::size_t>(a) * d;
    const double* pb = v.data() + static_cast<std::size_t>(b) * d;
    for (int j = 0; j < d; ++j) s += pa[j] * pb[j];
    return s / temperature;
  };

  std::vector<double> s(static_cast<std::size_t>(m) * m, 0.0);
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) {
      const double x = sim(a, b);
      s[static_cast<std::size_t>(a) * m + b] = x;
      s[static_cast<std::size_t>(b) * m + a] = x;
    }

  // row-wise log-sum-exp over the 2N-1 non-self entries
  double loss = 0.0;
  std::vector<double> g;  // dL/ds, lower+upper
  if (dz || dz_prime) g.assign(static_cast<std::size_t>(m) * m, 0.0);
  for (int a = 0; a < m; ++a) {
    const int pos = a < n ? a + n : a - n;
    double mx = -1e300;
    for (int b = 0; b < m; ++b)
      if (b != a) mx = std::max(mx, s[static_cast<std::size_t>(a) * m + b]);
    double denom = 0.0;
    for (int b = 0; b < m; ++b)
      if (b != a) denom += std::exp(s[static_cast<std::size_t>(a) * m + b] - mx);
    loss += -s[static_cast<std::size_t>(a) * m + pos] + mx + std::log(denom);
    if (!g.empty()) {
      for (int b = 0; b < m; ++b) {
        if (b == a) continue;
        const double p = std::exp(s[static_cast<std::size_t>(a) * m + b] - mx) / denom;
        g[static_cast<std::size_t>(a) * m + b] = (p - (b == pos ? 1.0 : 0.0)) / m;
      }
    }
  }
  loss /= m;

  if (dz || dz_prime) {
    // dL/dv_k = sum_l (g_kl + g_lk) v_l / t, then back through the
    // normalization of u_k.
    std::vector<double> dv(static_cast<std::size_t>(m) * d, 0.0);
    for (int k = 0; k < m; ++k) {
      double* out = dv.data() + static_cast<std::size_t>(k) * d;
      for (int l = 0; l < m; ++l) {
        if (l == k) continue;
        const double w = (g[static_cast<std::size_t>(k) * m + l] +
                          g[static_cast<std::size_t>(l) * m + k]) /
                         temperature;
        const double* vl = v.data() + static_cast<std::size_t>(l) * d;
        for (int j = 0; j < d; ++j) out[j] += w * vl[j];
      }
    }
    if (dz) *dz = EmbeddingBatch(n, d);
    if (dz_prime) *dz_prime = EmbeddingBatch(n, d);
    for (int k = 0; k < m; ++k) {
      const EmbeddingBatch& src = k < n ? z : z_prime;
      EmbeddingBatch* dst = k < n ? dz : dz_prime;
      if (!dst) continue;
      const int i = k < n ? k : k - n;
      const double nrm = row_norm(src, i);
      const double* vk = v.data() + static_cast<std::size_t>(k) * d;
      const double* dvk = dv.data() + static_cast<std::size_t>(k) * d;
      double dot = 0.0;
      for (int j = 0; j < d; ++j) dot += vk[j] * dvk[j];
      for (int j = 0; j < d; ++j) dst->at(i, j) = (dvk[j] - dot * vk[j]) / nrm;
    }
  }

  LossValue out;
  out.scalar = loss;
  out.terms = {{"nt_xent", loss, 1.0}};
  return out;
}

namespace {

// negative cosine similarity of one row pair plus gradient wrt a
double neg_cosine(const double* a, const double* b, int d, double* da) {
  double na = 0.0, nb = 0.0, dot = 0.0;
  for (int j = 0; j < d; ++j) {
    na += a[j] * a[j];
    nb += b[j] * b[j];
    dot += a[j] * b[j];
  }
  na = std::sqrt(na);
  nb = std::sqrt(nb);
  SSLP_CHECK(na > 0.0 && nb > 0.0, "simsiam_loss: zero-norm embedding row");
  const double c = dot / (na * nb);
  if (da) {
    for (int j = 0; j < d; ++j) da[j] = -(b[j] / (na * nb) - c * a[j] / (na * na));
  }
  return -c;
}

}  // namespace

LossValue simsiam_loss(const EmbeddingBatch& y, const EmbeddingBatch& y_prime,
                       const EmbeddingBatch& z, const EmbeddingBatch& z_prime,
                       EmbeddingBatch* dy, EmbeddingBatch* dy_prime, EmbeddingBatch* dz,
                       EmbeddingBatch* dz_prime) {
  check_batch(y, "simsiam_loss(y)");
  check_batch(y_prime, "simsiam_loss(y')");
  check_batch(z, "simsiam_loss(z)");
  check_batch(z_prime, "simsiam_loss(z')");
  SSLP_CHECK(y.same_shape(y_prime) && y.same_shape(z) && y.same_shape(z_prime),
             "simsiam_loss: shape mismatch");

  const int n = y.n, d = y.d;
  if (dy) *dy = EmbeddingBatch(n, d);
  if (dy_prime) *dy_prime = EmbeddingBatch(n, d);
  if (dz) *dz = EmbeddingBatch(n, d);              // stop-gradient: exact zeros
  if (dz_prime) *dz_prime = EmbeddingBatch(n, d);  // stop-gradient: exact zeros

  std::vector<double> da(static_cast<std::size_t>(d));
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += 0.5 * neg_cosine(y.row(i), z_prime.row(i), d, dy ? da.data() : nullptr);
    if (dy)
      for (int j = 0; j < d; ++j) dy->at(i, j) = 0.5 * da[j] / n;
    acc += 0.5 * neg_cosine(y_prime.row(i), z.row(i), d, dy_prime ? da.data() : nullptr);
    if (dy_prime)
      for (int j = 0; j < d; ++j) dy_prime->at(i, j) = 0.5 * da[j] / n;
  }
  const double loss = acc / n;

  LossValue out;
  out.scalar = loss;
  out.terms = {{"simsiam", loss, 1.0}};
  return out;
}

LossValue vicreg_loss(const EmbeddingBatch& z, const EmbeddingBatch& z_prime,
                      const VicregParams& params, EmbeddingBatch* dz,
                      EmbeddingBatch* dz_prime) {
  check_batch(z, "vicreg_loss(z)");
  check_batch(z_prime, "vicreg_loss(z')");
  SSLP_CHECK(z.same_shape(z_prime), "vicreg_loss: shape mismatch");
  SSLP_CHECK(z.n >= 2, "vicreg_loss: needs at least 2 samples, got ", z.n);
  SSLP_CHECK(params.gamma > 0.0 && params.epsilon > 0.0, "vicreg_loss: gamma, epsilon must be positive");

  const int n = z.n, d = z.d;
  if (dz) *dz = EmbeddingBatch(n, d);
  if (dz_prime) *dz_prime = EmbeddingBatch(n, d);

  // invariance
  double inv = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) {
      const double diff = z.at(i, j) - z_prime.at(i, j);
      inv += diff * diff;
    }
  inv /= n;
  if (dz) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) {
        const double g = 2.0 / n * (z.at(i, j) - z_prime.at(i, j)) * params.wi();
        dz->at(i, j) += g;
        dz_prime->at(i, j) -= g;
      }
  }

  // variance + covariance per branch, averaged
  double var_total = 0.0, cov_total = 0.0;
  for (int branch = 0; branch < 2; ++branch) {
    const EmbeddingBatch& e = branch == 0 ? z : z_prime;
    EmbeddingBatch* de = branch == 0 ? dz : dz_prime;

    std::vector<double> mu(static_cast<std::size_t>(d), 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) mu[j] += e.at(i, j);
    for (double& m : mu) m /= n;

    std::vector<double> x(static_cast<std::size_t>(n) * d);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) x[static_cast<std::size_t>(i) * d + j] = e.at(i, j) - mu[j];

    // variance hinge
    std::vector<double> sd(static_cast<std::size_t>(d));
    double var = 0.0;
    for (int j = 0; j < d; ++j) {
      double s2 = 0.0;
      for (int i = 0; i < n; ++i) {
        const double c = x[static_cast<std::size_t>(i) * d + j];
        s2 += c * c;
      }
      s2 /= (n - 1);
      sd[j] = std::sqrt(s2 + params.epsilon);
      var += std::max(0.0, params.gamma - sd[j]);
    }
    var /= d;
    var_total += 0.5 * var;

    // covariance: sum of squared off-diagonals of C = X^T X / (N-1)
    std::vector<double> c(static_cast<std::size_t>(d) * d, 0.0);
    for (int i = 0; i < n; ++i) {
      const double* xi = x.data() + static_cast<std::size_t>(i) * d;
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) c[static_cast<std::size_t>(a) * d + b] += xi[a] * xi[b];
    }
    for (double& cc : c) cc /= (n - 1);
    double cov = 0.0;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        if (a != b) cov += c[static_cast<std::size_t>(a) * d + b] * c[static_cast<std::size_t>(a) * d + b];
    cov /= d;
    cov_total += 0.5 * cov;

    if (de) {
      // dG/dX for both terms, then subtract column means (centering)
      std::vector<double> gx(static_cast<std::size_t>(n) * d, 0.0);
      for (int j = 0; j < d; ++j) {
        if (params.gamma > sd[j]) {
          const double coef =
              -0.5 * params.wv() / (d * sd[j] * (n - 1));  // 0.5 branch avg
          for (int i = 0; i < n; ++i)
            gx[static_cast<std::size_t>(i) * d + j] += coef * x[static_cast<std::size_t>(i) * d + j];
        }
      }
      // cov: dG/dX = 0.5 * wc * (4/(D(N-1))) X Ctilde
      const double ccoef = 0.5 * params.wc() * 4.0 / (static_cast<double>(d) * (n - 1));
      for (int i = 0; i < n; ++i) {
        const double* xi = x.data() + static_cast<std::size_t>(i) * d;
        double* gi = gx.data() + static_cast<std::size_t>(i) * d;
        for (int b = 0; b < d; ++b) {
          double acc = 0.0;
          for (int a = 0; a < d; ++a)
            if (a != b) acc += xi[a] * c[static_cast<std::size_t>(a) * d + b];
          gi[b] += ccoef * acc;
        }
      }
      // centering: dL/dz = G - colmean(G)
      std::vector<double> colmean(static_cast<std::size_t>(d), 0.0);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) colmean[j] += gx[static_cast<std::size_t>(i) * d + j];
      for (double& m : colmean) m /= n;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j)
          de->at(i, j) += gx[static_cast<std::size_t>(i) * d + j] - colmean[j];
    }
  }

  LossValue out;
  out.terms = {{"variance", var_total, params.wv()},
               {"invariance", inv, params.wi()},
               {"covariance", cov_total, params.wc()}};
  out.scalar = out.breakdown_sum();
  return out;
}

LossValue prior_kl(const EmbeddingBatch& z_ssl, const EmbeddingBatch& z_prior,
                   double temperature, bool symmetric, EmbeddingBatch* dz_ssl,
                   EmbeddingBatch* dz_prior) {
  check_batch(z_ssl, "prior_kl(z_ssl)");
  check_batch(z_prior, "prior_kl(z_prior)");
  SSLP_CHECK(z_ssl.same_shape(z_prior), "prior_kl: shape mismatch");
  SSLP_CHECK(temperature > 0.0, "prior_kl: temperature must be positive");

  const int n = z_ssl.n, d = z_ssl.d;
  const double inv_t = 1.0 / temperature;
  if (dz_ssl) *dz_ssl = EmbeddingBatch(n, d);
  if (dz_prior) *dz_prior = EmbeddingBatch(n, d);

  auto one_direction = [&](const EmbeddingBatch& zp_side, const EmbeddingBatch& zq_side,
                           EmbeddingBatch* dp_side, EmbeddingBatch* dq_side, double scale) {
    std::vector<double> p, q;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      softmax_row(zp_side.row(i), d, inv_t, p);
      softmax_row(zq_side.row(i), d, inv_t, q);
      double kl = 0.0;
      for (int j = 0; j < d; ++j) kl += p[j] * (std::log(p[j]) - std::log(q[j]));
      total += kl;
      if (dp_side) {
        for (int j = 0; j < d; ++j)
          dp_side->at(i, j) +=
              scale * inv_t / n * p[j] * ((std::log(p[j]) - std::log(q[j])) - kl);
      }
      if (dq_side) {
        for (int j = 0; j < d; ++j) dq_side->at(i, j) += scale * inv_t / n * (q[j] - p[j]);
      }
    }
    return total / n;
  };

  double loss;
  if (!symmetric) {
    loss = one_direction(z_ssl, z_prior, dz_ssl, dz_prior, 1.0);
  } else {
    const double fwd = one_direction(z_ssl, z_prior, dz_ssl, dz_prior, 0.5);
    const double bwd = one_direction(z_prior, z_ssl, dz_prior, dz_ssl, 0.5);
    loss = 0.5 * (fwd + bwd);
  }

  LossValue out;
  out.scalar = loss;
  out.terms = {{"prior_kl", loss, 1.0}};
  return out;
}

LossValue total_loss(const LossValue& ssl_main, const LossValue& ssl_prior, const LossValue& pk,
                     double lambda) {
  SSLP_CHECK(lambda >= 0.0, "total_loss: lambda must be non-negative, got ", lambda);
  SSLP_CHECK(std::isfinite(ssl_main.scalar) && std::isfinite(ssl_prior.scalar) &&
                 std::isfinite(pk.scalar),
             "total_loss: non-finite input");
  LossValue out;
  out.terms = {{"ssl_main", ssl_main.scalar, 1.0},
               {"ssl_prior", ssl_prior.scalar, 1.0},
               {"pk", pk.scalar, lambda}};
  out.scalar = out.breakdown_sum();
  return out;
}

LossValue total_loss_baseline(const LossValue& ssl_main) {
  LossValue out;
  out.terms = {{"ssl_main", ssl_main.scalar, 1.0}};
  out.scalar = ssl_main.scalar;
  return out;
}

}  // namespace sslp::losses
