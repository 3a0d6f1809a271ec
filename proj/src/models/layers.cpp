#include <cmath>
#include <cstring>

#include "sslp/core/parallel.hpp"
#include "sslp/models.hpp"
#include "sslp/nn/kernels.hpp"

namespace sslp::nn {

Method method_from_string(const std::string& s) {
  if (s == "simclr") return Method::simclr;
  if (s == "simsiam") return Method::simsiam;
  if (s == "vicreg") return Method::vicreg;
  SSLP_CHECK(false, "unknown method: ", s);
  return Method::simclr;
}

const char* to_string(Method m) {
  switch (m) {
    case Method::simclr: return "simclr";
    case Method::simsiam: return "simsiam";
    case Method::vicreg: return "vicreg";
  }
  return "?";
}

// ---------------- Conv2d ----------------

void Conv2d::build(const std::string& name, int in, int out, int k, int s, int p) {
  in_ch = in;
  out_ch = out;
  ksize = k;
  stride = s;
  pad = p;
  weight.setup(name + ".weight", {out, in, k, k});
  bias.setup(name + ".bias", {out});
}

void Conv2d::init(Rng& rng) {
  // He-normal, fan_in
  const double std = std::sqrt(2.0 / (static_cast<double>(in_ch) * ksize * ksize));
  for (float& w : weight.value.v) w = static_cast<float>(rng.normal() * std);
  weight.grad.zero();
  bias.value.zero();
  bias.grad.zero();
}

Tensor Conv2d::forward(const Tensor& x, Cache* cache) const {
  Tensor y;
  if (cache) {
    cache->x_shape = x.shape;
    conv2d_forward(x, weight.value, bias.value, stride, pad, y, &cache->cols);
  } else {
    conv2d_forward(x, weight.value, bias.value, stride, pad, y, nullptr);
  }
  return y;
}

Tensor Conv2d::backward(const Tensor& dy, const Cache& cache, bool need_dx) {
  Tensor dx;
  conv2d_backward(dy, weight.value, cache.cols, cache.x_shape, stride, pad, weight.grad,
                  bias.grad, need_dx ? &dx : nullptr);
  return dx;
}

// ---------------- BatchNorm ----------------

void BatchNorm::build(const std::string& name, int c) {
  channels = c;
  gamma.setup(name + ".gamma", {c});
  beta.setup(name + ".beta", {c});
  for (float& g : gamma.value.v) g = 1.0f;
  running_mean = Tensor({c});
  running_var = Tensor({c});
  for (float& v : running_var.v) v = 1.0f;
}

Tensor BatchNorm::forward(const Tensor& x, Cache* cache, bool train) {
  const int n = x.dim(0);
  const int c = x.dim(1);
  SSLP_CHECK(c == channels, "batchnorm channel mismatch: ", c, " vs ", channels);
  const int s = static_cast<int>(x.numel() / (static_cast<std::int64_t>(n) * c));
  const std::int64_t count = static_cast<std::int64_t>(n) * s;

  Tensor y(x.shape);
  if (cache) {
    cache->xhat = Tensor(x.shape);
    cache->invstd.assign(static_cast<std::size_t>(c), 0.0f);
    cache->train = train;
  }

  par::parallel_for(c, [&](std::int64_t ch) {
    float mean, invstd;
    if (train) {
      double sum = 0.0;
      for (int i = 0; i < n; ++i) {
        const float* xp = x.data() + (static_cast<std::int64_t>(i) * c + ch) * s;
        for (int j = 0; j < s; ++j) sum += xp[j];
      }
      mean = static_cast<float>(sum / static_cast<double>(count));
      double var = 0.0;
      for (int i = 0; i < n; ++i) {
        const float* xp = x.data() + (static_cast<std::int64_t>(i) * c + ch) * s;
        for (int j = 0; j < s; ++j) {
          const double d = xp[j] - mean;
          var += d * d;
        }
      }
      const float biased = static_cast<float>(var / static_cast<double>(count));
      invstd = 1.0f / std::sqrt(biased + eps);
      const float unbiased =
          count > 1 ? static_cast<float>(var / static_cast<double>(count - 1)) : biased;
      running_mean.v[ch] = (1.0f - momentum) * running_mean.v[ch] + momentum * mean;
      running_var.v[ch] = (1.0f - momentum) * running_var.v[ch] + momentum * unbiased;
    } else {
      mean = running_mean.v[ch];
      invstd = 1.0f / std::sqrt(running_var.v[ch] + eps);
    }
    const float g = gamma.value.v[ch], b = beta.value.v[ch];
    for (int i = 0; i < n; ++i) {
      const float* xp = x.data() + (static_cast<std::int64_t>(i) * c + ch) * s;
      float* yp = y.data() + (static_cast<std::int64_t>(i) * c + ch) * s;
      float* hp = cache ? cache->xhat.data() + (static_cast<std::int64_t>(i) * c + ch) * s
                        : nullptr;
      for (int j = 0; j < s; ++j) {
        const float xh = (xp[j] - mean) * invstd;
        if (hp) hp[j] = xh;
        yp[j] = g * xh + b;
      }
    }
    if (cache) cache->invstd[static_cast<std::size_t>(ch)] = invstd;
  });
  return y;
}

Tensor BatchNorm::backward(const Tensor& dy, const Cache& cache) {
  const int n = dy.dim(0);
  const int c = dy.dim(1);
  const int s = static_cast<int>(dy.numel() / (static_cast<std::int64_t>(n) * c));
  const double count = static_cast<double>(n) * s;

  Tensor dx(dy.shape);
  par::parallel_for(c, [&](std::int64_t ch) {
    const float g = gamma.value.v[ch];
    const float invstd = cache.invstd[static_cast<std::size_t>(ch)];
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (int i = 0; i < n; ++i) {
      const float* dp = dy.data() + (static_cast<std::int64_t>(i) * c + ch) * s;
      const float* hp = cache.xhat.data() + (static_cast<std::int64_t>(i) * c + ch) * s;
      for (int j = 0; j < s; ++j) {
        sum_dy += dp[j];
        sum_dy_xhat += static_cast<double>(dp[j]) * hp[j];
      }
    }
    gamma.grad.v[ch] += static_cast<float>(sum_dy_xhat);
    beta.grad.v[ch] += static_cast<float>(sum_dy);

    if (cache.train) {
      const float mean_dy = static_cast<float>(sum_dy / count);
      const float mean_dy_xhat = static_cast<float>(sum_dy_xhat / count);
      for (int i = 0; i < n; ++i) {
        const float* dp = dy.data() + (static_cast<std::int64_t>(i) * c + ch) * s;
        const float* hp = cache.xhat.data() + (static_cast<std::int64_t>(i) * c + ch) * s;
        float* op = dx.data() + (static_cast<std::int64_t>(i) * c + ch) * s;
        for (int j = 0; j < s; ++j)
          op[j] = g * invstd * (dp[j] - mean_dy - hp[j] * mean_dy_xhat);
      }
    } else {
      // frozen statistics: the transform is affine in x
      for (int i = 0; i < n; ++i) {
        const float* dp = dy.data() + (static_cast<std::int64_t>(i) * c + ch) * s;
        float* op = dx.data() + (static_cast<std::int64_t>(i) * c + ch) * s;
        for (int j = 0; j < s; ++j) op[j] = g * invstd * dp[j];
      }
    }
  });
  return dx;
}

// ---------------- Linear ----------------

void Linear::build(const std::string& name, int in, int out) {
  in_dim = in;
  out_dim = out;
  weight.setup(name + ".weight", {out, in});
  bias.setup(name + ".bias", {out});
}

void Linear::init(Rng& rng) {
  const double std = std::sqrt(2.0 / static_cast<double>(in_dim));
  for (float& w : weight.value.v) w = static_cast<float>(rng.normal() * std);
  weight.grad.zero();
  bias.value.zero();
  bias.grad.zero();
}

Tensor Linear::forward(const Tensor& x, Cache* cache) const {
  const int n = x.dim(0);
  SSLP_CHECK(x.dim(1) == in_dim, "linear input dim ", x.dim(1), " != ", in_dim);
  if (cache) cache->input = x;
  Tensor y({n, out_dim});
  gemm_nt(x.data(), weight.value.data(), y.data(), n, in_dim, out_dim);
  par::parallel_for(n, [&](std::int64_t i) {
    float* yp = y.data() + i * out_dim;
    for (int o = 0; o < out_dim; ++o) yp[o] += bias.value.v[static_cast<std::size_t>(o)];
  });
  return y;
}

Tensor Linear::backward(const Tensor& dy, const Cache& cache, bool need_dx) {
  const int n = dy.dim(0);
  // dW[o,i] = sum_n dy[n,o] * x[n,i]; parallel over o, serial over n
  par::parallel_for(out_dim, [&](std::int64_t o) {
    float* dwrow = weight.grad.data() + o * in_dim;
    double db = 0.0;
    for (int i = 0; i < n; ++i) {
      const float d = dy.data()[static_cast<std::size_t>(i) * out_dim + o];
      const float* xp = cache.input.data() + static_cast<std::size_t>(i) * in_dim;
      for (int j = 0; j < in_dim; ++j) dwrow[j] += d * xp[j];
      db += d;
    }
    bias.grad.v[static_cast<std::size_t>(o)] += static_cast<float>(db);
  });
  Tensor dx;
  if (need_dx) {
    dx = Tensor({n, in_dim});
    gemm_nn(dy.data(), weight.value.data(), dx.data(), n, out_dim, in_dim);
  }
  return dx;
}

// ---------------- elementwise ----------------

Tensor relu(const Tensor& x) {
  Tensor y(x.shape);
  for (std::int64_t i = 0; i < x.numel(); ++i) y.v[i] = x.v[i] > 0.0f ? x.v[i] : 0.0f;
  return y;
}

Tensor relu_backward(const Tensor& dy, const Tensor& y) {
  Tensor dx(dy.shape);
  for (std::int64_t i = 0; i < dy.numel(); ++i) dx.v[i] = y.v[i] > 0.0f ? dy.v[i] : 0.0f;
  return dx;
}

Tensor global_avg_pool(const Tensor& x) {
  const int n = x.dim(0), c = x.dim(1), s = x.dim(2) * x.dim(3);
  Tensor y({n, c});
  par::parallel_for(static_cast<std::int64_t>(n) * c, [&](std::int64_t t) {
    const float* xp = x.data() + t * s;
    double acc = 0.0;
    for (int j = 0; j < s; ++j) acc += xp[j];
    y.v[t] = static_cast<float>(acc / s);
  });
  return y;
}

Tensor global_avg_pool_backward(const Tensor& dy, int h, int w) {
  const int n = dy.dim(0), c = dy.dim(1), s = h * w;
  Tensor dx({n, c, h, w});
  par::parallel_for(static_cast<std::int64_t>(n) * c, [&](std::int64_t t) {
    const float g = dy.v[t] / static_cast<float>(s);
    float* xp = dx.data() + t * s;
    for (int j = 0; j < s; ++j) xp[j] = g;
  });
  return dx;
}

}  // namespace sslp::nn
