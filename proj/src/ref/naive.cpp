#include "sslp/ref/naive.hpp"

namespace sslp::ref {

namespace {
int reflect101(int i, int n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return i;
}
}  // namespace

std::vector<double> conv2d_reflect(const std::vector<double>& img, int h, int w,
                                   const std::vector<double>& kernel, int kh, int kw) {
  std::vector<double> out(static_cast<std::size_t>(h) * w, 0.0);
  const int ry = kh / 2, rx = kw / 2;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int ky = 0; ky < kh; ++ky) {
        for (int kx = 0; kx < kw; ++kx) {
          const int iy = reflect101(y + ky - ry, h);
          const int ix = reflect101(x + kx - rx, w);
          acc += kernel[static_cast<std::size_t>(ky) * kw + kx] *
                 img[static_cast<std::size_t>(iy) * w + ix];
        }
      }
      out[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  return out;
}

void gemm_naive(const float* a, const float* b, float* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      float acc = 0.0f;
      for (int p = 0; p < k; ++p) acc += a[i * k + p] * b[p * n + j];
      c[i * n + j] = acc;
    }
  }
}

void conv2d_nchw_naive(const float* x, int n, int c, int h, int w, const float* weight,
                       const float* bias, int oc, int ksize, int stride, int pad, float* y,
                       int oh, int ow) {
  for (int img = 0; img < n; ++img) {
    for (int o = 0; o < oc; ++o) {
      for (int yy = 0; yy < oh; ++yy) {
        for (int xx = 0; xx < ow; ++xx) {
          float acc = bias ? bias[o] : 0.0f;
          for (int ic = 0; ic < c; ++ic) {
            for (int ky = 0; ky < ksize; ++ky) {
              const int iy = yy * stride + ky - pad;
              if (iy < 0 || iy >= h) continue;
              for (int kx = 0; kx < ksize; ++kx) {
                const int ix = xx * stride + kx - pad;
                if (ix < 0 || ix >= w) continue;
                acc += weight[((static_cast<std::size_t>(o) * c + ic) * ksize + ky) * ksize + kx] *
                       x[((static_cast<std::size_t>(img) * c + ic) * h + iy) * w + ix];
              }
            }
          }
          y[((static_cast<std::size_t>(img) * oc + o) * oh + yy) * ow + xx] = acc;
        }
      }
    }
  }
}

}  // namespace sslp::ref
