#include "sslp/nn/kernels.hpp"

#include <cstring>

#include "sslp/core/parallel.hpp"

namespace sslp::nn {

void gemm_nn(const float* a, const float* b, float* c, int m, int k, int n, bool accumulate) {
  par::parallel_for(m, [&](std::int64_t i) {
    float* ci = c + i * n;
    if (!accumulate) std::memset(ci, 0, sizeof(float) * static_cast<std::size_t>(n));
    const float* ai = a + i * k;
    for (int p = 0; p < k; ++p) {
      const float ap = ai[p];
      const float* bp = b + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) ci[j] += ap * bp[j];
    }
  });
}

void gemm_nt(const float* a, const float* b, float* c, int m, int k, int n, bool accumulate) {
  par::parallel_for(m, [&](std::int64_t i) {
    const float* ai = a + i * k;
    float* ci = c + i * n;
    for (int j = 0; j < n; ++j) {
      const float* bj = b + static_cast<std::size_t>(j) * k;
      float acc = 0.0f;
      for (int p = 0; p < k; ++p) acc += ai[p] * bj[p];
      ci[j] = accumulate ? ci[j] + acc : acc;
    }
  });
}

void gemm_tn(const float* a, const float* b, float* c, int m, int k, int n, bool accumulate) {
  par::parallel_for(m, [&](std::int64_t i) {
    float* ci = c + i * n;
    if (!accumulate) std::memset(ci, 0, sizeof(float) * static_cast<std::size_t>(n));
    for (int p = 0; p < k; ++p) {
      const float ap = a[static_cast<std::size_t>(p) * m + i];
      const float* bp = b + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) ci[j] += ap * bp[j];
    }
  });
}

int conv_out_dim(int in, int ksize, int stride, int pad) {
  return (in + 2 * pad - ksize) / stride + 1;
}

void im2col(const float* x, int c, int h, int w, int ksize, int stride, int pad, float* col,
            int oh, int ow) {
  const int l = oh * ow;
  for (int ic = 0; ic < c; ++ic) {
    for (int ky = 0; ky < ksize; ++ky) {
      for (int kx = 0; kx < ksize; ++kx) {
        float* dst = col + (static_cast<std::size_t>(ic) * ksize * ksize +
                            static_cast<std::size_t>(ky) * ksize + kx) *
                               l;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride + ky - pad;
          if (iy < 0 || iy >= h) {
            std::memset(dst + static_cast<std::size_t>(oy) * ow, 0, sizeof(float) * ow);
            continue;
          }
          const float* src = x + (static_cast<std::size_t>(ic) * h + iy) * w;
          float* d = dst + static_cast<std::size_t>(oy) * ow;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride + kx - pad;
            d[ox] = (ix < 0 || ix >= w) ? 0.0f : src[ix];
          }
        }
      }
    }
  }
}

void col2im(const float* col, int c, int h, int w, int ksize, int stride, int pad, float* x,
            int oh, int ow) {
  const int l = oh * ow;
  std::memset(x, 0, sizeof(float) * static_cast<std::size_t>(c) * h * w);
  for (int ic = 0; ic < c; ++ic) {
    for (int ky = 0; ky < ksize; ++ky) {
      for (int kx = 0; kx < ksize; ++kx) {
        const float* src = col + (static_cast<std::size_t>(ic) * ksize * ksize +
                                  static_cast<std::size_t>(ky) * ksize + kx) *
                                     l;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride + ky - pad;
          if (iy < 0 || iy >= h) continue;
          float* dst = x + (static_cast<std::size_t>(ic) * h + iy) * w;
          const float* s = src + static_cast<std::size_t>(oy) * ow;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride + kx - pad;
            if (ix >= 0 && ix < w) dst[ix] += s[ox];
          }
        }
      }
    }
  }
}

void conv2d_forward(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride,
                    int pad, Tensor& y, Tensor* cols) {
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const int oc = weight.dim(0), ksize = weight.dim(2);
  SSLP_CHECK(weight.dim(1) == c, "conv2d: channel mismatch, input ", c, " vs weight ",
             weight.dim(1));
  const int oh = conv_out_dim(h, ksize, stride, pad);
  const int ow = conv_out_dim(w, ksize, stride, pad);
  SSLP_CHECK(oh > 0 && ow > 0, "conv2d: spatial size ", h, "x", w, " too small for kernel");
  const int k = c * ksize * ksize, l = oh * ow;

  y = Tensor({n, oc, oh, ow});
  if (cols) *cols = Tensor({n, k, l});

  par::parallel_for(n, [&](std::int64_t i) {
    std::vector<float> scratch;
    float* col;
    if (cols) {
      col = cols->data() + i * static_cast<std::int64_t>(k) * l;
    } else {
      scratch.resize(static_cast<std::size_t>(k) * l);
      col = scratch.data();
    }
    im2col(x.data() + i * static_cast<std::int64_t>(c) * h * w, c, h, w, ksize, stride, pad,
           col, oh, ow);
    float* yi = y.data() + i * static_cast<std::int64_t>(oc) * l;
    // serial GEMM per sample; samples are the parallel axis
    for (int o = 0; o < oc; ++o) {
      float* dst = yi + static_cast<std::size_t>(o) * l;
      const float bo = bias.numel() > 0 ? bias.v[static_cast<std::size_t>(o)] : 0.0f;
      for (int j = 0; j < l; ++j) dst[j] = bo;
      const float* wrow = weight.data() + static_cast<std::size_t>(o) * k;
      for (int p = 0; p < k; ++p) {
        const float wp = wrow[p];
        const float* cp = col + static_cast<std::size_t>(p) * l;
        for (int j = 0; j < l; ++j) dst[j] += wp * cp[j];
      }
    }
  });
}

void conv2d_backward(const Tensor& dy, const Tensor& weight, const Tensor& cols,
                     const std::vector<int>& x_shape, int stride, int pad, Tensor& dweight,
                     Tensor& dbias, Tensor* dx) {
  const int n = dy.dim(0), oc = dy.dim(1), oh = dy.dim(2), ow = dy.dim(3);
  const int c = x_shape[1], h = x_shape[2], w = x_shape[3];
  const int ksize = weight.dim(2);
  const int k = c * ksize * ksize, l = oh * ow;

  // dW[oc,k] — parallel over output channels, serial over samples
  par::parallel_for(oc, [&](std::int64_t o) {
    float* dwrow = dweight.data() + o * k;
    double db = 0.0;
    for (int i = 0; i < n; ++i) {
      const float* dyo = dy.data() + (i * static_cast<std::int64_t>(oc) + o) * l;
      const float* col = cols.data() + i * static_cast<std::int64_t>(k) * l;
      for (int p = 0; p < k; ++p) {
        const float* cp = col + static_cast<std::size_t>(p) * l;
        float acc = 0.0f;
        for (int j = 0; j < l; ++j) acc += dyo[j] * cp[j];
        dwrow[p] += acc;
      }
      for (int j = 0; j < l; ++j) db += dyo[j];
    }
    if (dbias.numel() > 0) dbias.v[static_cast<std::size_t>(o)] += static_cast<float>(db);
  });

  if (dx) {
    *dx = Tensor(x_shape);
    par::parallel_for(n, [&](std::int64_t i) {
      std::vector<float> dcol(static_cast<std::size_t>(k) * l, 0.0f);
      const float* dyi = dy.data() + i * static_cast<std::int64_t>(oc) * l;
      // dcol[k,l] = W^T[k,oc] * dy[oc,l]
      for (int o = 0; o < oc; ++o) {
        const float* wrow = weight.data() + static_cast<std::size_t>(o) * k;
        const float* dyo = dyi + static_cast<std::size_t>(o) * l;
        for (int p = 0; p < k; ++p) {
          const float wp = wrow[p];
          float* dcp = dcol.data() + static_cast<std::size_t>(p) * l;
          for (int j = 0; j < l; ++j) dcp[j] += wp * dyo[j];
        }
      }
      col2im(dcol.data(), c, h, w, ksize, stride, pad,
             dx->data() + i * static_cast<std::int64_t>(c) * h * w, oh, ow);
    });
  }
}

}  // namespace sslp::nn
