#pragma once

// Brute-force loss oracles, written as straight-line double loops with no
// code shared with the library implementations.

#include <cmath>
#include <functional>
#include <vector>

#include "sslp/core/rng.hpp"
#include "sslp/losses.hpp"

namespace sslp::oracles {

using losses::EmbeddingBatch;

inline EmbeddingBatch random_embedding(int n, int d, Rng& rng, double lo = -2.0,
                                       double hi = 2.0) {
  EmbeddingBatch e(n, d);
  for (double& v : e.v) v = rng.uniform(lo, hi);
  return e;
}

inline double nt_xent_bf(const EmbeddingBatch& z, const EmbeddingBatch& zp, double tau) {
  const int n = z.n, d = z.d, m = 2 * n;
  std::vector<std::vector<double>> u(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    const EmbeddingBatch& src = k < n ? z : zp;
    const int i = k < n ? k : k - n;
    double norm = 0.0;
    for (int j = 0; j < d; ++j) norm += src.at(i, j) * src.at(i, j);
    norm = std::sqrt(norm);
    u[static_cast<std::size_t>(k)].resize(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) u[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] = src.at(i, j) / norm;
  }
  double total = 0.0;
  for (int a = 0; a < m; ++a) {
    const int pos = a < n ? a + n : a - n;
    double num = 0.0;
    for (int j = 0; j < d; ++j)
      num += u[static_cast<std::size_t>(a)][static_cast<std::size_t>(j)] *
             u[static_cast<std::size_t>(pos)][static_cast<std::size_t>(j)];
    num = std::exp(num / tau);
    double den = 0.0;
    for (int b = 0; b < m; ++b) {
      if (b == a) continue;
      double s = 0.0;
      for (int j = 0; j < d; ++j)
        s += u[static_cast<std::size_t>(a)][static_cast<std::size_t>(j)] *
             u[static_cast<std::size_t>(b)][static_cast<std::size_t>(j)];
      den += std::exp(s / tau);
    }
    total += -std::log(num / den);
  }
  return total / m;
}

inline double simsiam_bf(const EmbeddingBatch& y, const EmbeddingBatch& yp,
                         const EmbeddingBatch& z, const EmbeddingBatch& zp) {
  const int n = y.n, d = y.d;
  auto neg_cos = [&](const EmbeddingBatch& a, int i, const EmbeddingBatch& b, int j) {
    double na = 0.0, nb = 0.0, dot = 0.0;
    for (int k = 0; k < d; ++k) {
      na += a.at(i, k) * a.at(i, k);
      nb += b.at(j, k) * b.at(j, k);
      dot += a.at(i, k) * b.at(j, k);
    }
    return -dot / (std::sqrt(na) * std::sqrt(nb));
  };
  double d1 = 0.0, d2 = 0.0;
  for (int i = 0; i < n; ++i) {
    d1 += neg_cos(y, i, zp, i);
    d2 += neg_cos(yp, i, z, i);
  }
  return 0.5 * d1 / n + 0.5 * d2 / n;
}

inline double vicreg_bf(const EmbeddingBatch& z, const EmbeddingBatch& zp,
                        const losses::VicregParams& p) {
  const int n = z.n, d = z.d;
  double inv = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) {
      const double diff = z.at(i, j) - zp.at(i, j);
      inv += diff * diff;
    }
  inv /= n;

  auto branch_var = [&](const EmbeddingBatch& e) {
    double acc = 0.0;
    for (int j = 0; j < d; ++j) {
      double mean = 0.0;
      for (int i = 0; i < n; ++i) mean += e.at(i, j);
      mean /= n;
      double var = 0.0;
      for (int i = 0; i < n; ++i) var += (e.at(i, j) - mean) * (e.at(i, j) - mean);
      var /= (n - 1);
      const double sd = std::sqrt(var + p.epsilon);
      if (p.gamma > sd) acc += p.gamma - sd;
    }
    return acc / d;
  };
  auto branch_cov = [&](const EmbeddingBatch& e) {
    std::vector<double> mean(static_cast<std::size_t>(d), 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) mean[static_cast<std::size_t>(j)] += e.at(i, j);
    for (double& m : mean) m /= n;
    double acc = 0.0;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        if (a == b) continue;
        double c = 0.0;
        for (int i = 0; i < n; ++i)
          c += (e.at(i, a) - mean[static_cast<std::size_t>(a)]) *
               (e.at(i, b) - mean[static_cast<std::size_t>(b)]);
        c /= (n - 1);
        acc += c * c;
      }
    return acc / d;
  };

  const double var = 0.5 * (branch_var(z) + branch_var(zp));
  const double cov = 0.5 * (branch_cov(z) + branch_cov(zp));
  return p.wv() * var + p.wi() * inv + p.wc() * cov;
}

inline double prior_kl_bf(const EmbeddingBatch& a, const EmbeddingBatch& b, double tau) {
  const int n = a.n, d = a.d;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    std::vector<double> p(static_cast<std::size_t>(d)), q(static_cast<std::size_t>(d));
    double sp = 0.0, sq = 0.0;
    for (int j = 0; j < d; ++j) {
      p[static_cast<std::size_t>(j)] = std::exp(a.at(i, j) / tau);
      q[static_cast<std::size_t>(j)] = std::exp(b.at(i, j) / tau);
      sp += p[static_cast<std::size_t>(j)];
      sq += q[static_cast<std::size_t>(j)];
    }
    for (int j = 0; j < d; ++j)
      total += p[static_cast<std::size_t>(j)] / sp *
               std::log((p[static_cast<std::size_t>(j)] / sp) / (q[static_cast<std::size_t>(j)] / sq));
  }
  return total / n;
}

// central finite differences of a scalar function of one embedding input
inline EmbeddingBatch finite_diff(const std::function<double(const EmbeddingBatch&)>& f,
                                  const EmbeddingBatch& x, double h = 1e-6) {
  EmbeddingBatch g(x.n, x.d);
  for (std::size_t i = 0; i < x.v.size(); ++i) {
    EmbeddingBatch xp = x, xm = x;
    xp.v[i] += h;
    xm.v[i] -= h;
    g.v[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

inline double max_rel_error(const EmbeddingBatch& got, const EmbeddingBatch& want) {
  double worst = 0.0;
  for (std::size_t i = 0; i < got.v.size(); ++i) {
    const double scale = std::max({std::abs(got.v[i]), std::abs(want.v[i]), 1e-4});
    worst = std::max(worst, std::abs(got.v[i] - want.v[i]) / scale);
  }
  return worst;
}

}  // namespace sslp::oracles
