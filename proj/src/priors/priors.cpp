#include "sslp/priors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>
#include <vector>

#include "sslp/core/parallel.hpp"

namespace sslp::priors {

namespace {

// reflect-101: the border pixel itself is not repeated.
inline int reflect(int i, int n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return i;
}

struct PlaneD {
  int h = 0, w = 0;
  std::vector<double> v;
  PlaneD() = default;
  PlaneD(int h_, int w_) : h(h_), w(w_), v(static_cast<std::size_t>(h_) * w_, 0.0) {}
  double& at(int y, int x) { return v[static_cast<std::size_t>(y) * w + x]; }
  double at(int y, int x) const { return v[static_cast<std::size_t>(y) * w + x]; }
};

PlaneD to_plane(const Image& img) {
  Image lum = to_luminance(img);
  PlaneD p(lum.height, lum.width);
  for (std::size_t i = 0; i < lum.v.size(); ++i) p.v[i] = lum.v[i];
  return p;
}

Image to_image(const PlaneD& p) {
  Image img(1, p.h, p.w);
  for (std::size_t i = 0; i < p.v.size(); ++i)
    img.v[i] = static_cast<float>(p.v[i]);
  return img;
}

std::vector<double> gaussian_taps(double sigma, int ksize) {
  const int r = ksize / 2;
  std::vector<double> w(static_cast<std::size_t>(r) + 1);
  double sum = 0.0;
  for (int d = 0; d <= r; ++d) {
    w[d] = std::exp(-0.5 * (static_cast<double>(d) * d) / (sigma * sigma));
    sum += d == 0 ? w[d] : 2.0 * w[d];
  }
  for (double& x : w) x /= sum;
  return w;
}

// Separable smoothing. Taps are paired symmetrically (left+right before
// weighting) so the result is bitwise equal under horizontal mirroring.
PlaneD smooth_plane(const PlaneD& in, double sigma, int ksize) {
  const int r = ksize / 2;
  const std::vector<double> w = gaussian_taps(sigma, ksize);
  PlaneD mid(in.h, in.w), out(in.h, in.w);
  par::parallel_for(in.h, [&](std::int64_t y) {
    for (int x = 0; x < in.w; ++x) {
      double acc = w[0] * in.at(static_cast<int>(y), x);
      for (int d = 1; d <= r; ++d)
        acc += w[d] * (in.at(static_cast<int>(y), reflect(x - d, in.w)) +
                       in.at(static_cast<int>(y), reflect(x + d, in.w)));
      mid.at(static_cast<int>(y), x) = acc;
    }
  });
  par::parallel_for(in.h, [&](std::int64_t y) {
    for (int x = 0; x < in.w; ++x) {
      double acc = w[0] * mid.at(static_cast<int>(y), x);
      for (int d = 1; d <= r; ++d)
        acc += w[d] * (mid.at(reflect(static_cast<int>(y) - d, in.h), x) +
                       mid.at(reflect(static_cast<int>(y) + d, in.h), x));
      out.at(static_cast<int>(y), x) = acc;
    }
  });
  return out;
}

// 3x3 gradient pair with center weight a (2 = Sobel, 1 = Prewitt).
// gx is a difference of two mirrored column sums and gy pairs left+right
// taps first, which makes hflip(grad(img)) bitwise equal to grad(hflip).
void gradients(const PlaneD& p, double a, PlaneD& gx, PlaneD& gy) {
  gx = PlaneD(p.h, p.w);
  gy = PlaneD(p.h, p.w);
  par::parallel_for(p.h, [&](std::int64_t yy) {
    const int y = static_cast<int>(yy);
    const int ym = reflect(y - 1, p.h), yp = reflect(y + 1, p.h);
    for (int x = 0; x < p.w; ++x) {
      const int xm = reflect(x - 1, p.w), xp = reflect(x + 1, p.w);
      const double right = (p.at(ym, xp) + p.at(yp, xp)) + a * p.at(y, xp);
      const double left = (p.at(ym, xm) + p.at(yp, xm)) + a * p.at(y, xm);
      gx.at(y, x) = right - left;
      const double bottom = (p.at(yp, xm) + p.at(yp, xp)) + a * p.at(yp, x);
      const double top = (p.at(ym, xm) + p.at(ym, xp)) + a * p.at(ym, x);
      gy.at(y, x) = bottom - top;
    }
  });
}

PlaneD resize_plane(const PlaneD& p, int oh, int ow) {
  Image tmp = to_image(p);
  Image r = resize_bilinear(tmp, oh, ow);
  PlaneD out(oh, ow);
  for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] = r.v[i];
  return out;
}

void check_size_for_kernels(const PriorConfig& cfg, int up_h, int up_w) {
  int need = 3;
  if (cfg.gaussian_sigma > 0.0) need = std::max(need, cfg.gaussian_kernel_size);
  SSLP_CHECK(up_h >= need && up_w >= need, "image of size ", up_h, "x", up_w,
             " after upsampling is smaller than the ", need, "x", need, " kernel");
}

Image magnitude_prior(const Image& img, const PriorConfig& cfg, double center_weight,
                      double max_mag) {
  cfg.validate();
  PlaneD p = to_plane(img);
  const int oh = p.h, ow = p.w;
  const int up_h = oh * cfg.upsample_factor, up_w = ow * cfg.upsample_factor;
  check_size_for_kernels(cfg, up_h, up_w);
  if (cfg.upsample_factor > 1) p = resize_plane(p, up_h, up_w);
  if (cfg.gaussian_sigma > 0.0)
    p = smooth_plane(p, cfg.gaussian_sigma, cfg.gaussian_kernel_size);

  PlaneD gx, gy;
  gradients(p, center_weight, gx, gy);
  PlaneD mag(p.h, p.w);
  for (std::size_t i = 0; i < mag.v.size(); ++i)
    mag.v[i] = std::sqrt(gx.v[i] * gx.v[i] + gy.v[i] * gy.v[i]) / max_mag;

  if (cfg.upsample_factor > 1) mag = resize_plane(mag, oh, ow);
  Image out = to_image(mag);
  clamp01(out);
  return replicate_channels(out, img.channels);
}

}  // namespace

void PriorConfig::validate() const {
  SSLP_CHECK(upsample_factor >= 1, "upsample_factor must be >= 1");
  SSLP_CHECK(gaussian_sigma >= 0.0, "gaussian_sigma must be non-negative");
  SSLP_CHECK(gaussian_kernel_size > 0 && gaussian_kernel_size % 2 == 1,
             "gaussian_kernel_size must be odd and positive, got ", gaussian_kernel_size);
  if (kind == FilterKind::canny) {
    SSLP_CHECK(canny_low >= 0.0 && canny_high <= 1.0, "canny thresholds must lie in [0,1]");
    SSLP_CHECK(canny_low < canny_high, "canny_low (", canny_low,
               ") must be strictly below canny_high (", canny_high, ")");
  }
}

FilterKind filter_kind_from_string(const std::string& s) {
  if (s == "sobel") return FilterKind::sobel;
  if (s == "prewitt") return FilterKind::prewitt;
  if (s == "canny") return FilterKind::canny;
  SSLP_CHECK(false, "unknown filter kind: ", s);
  return FilterKind::sobel;
}

const char* to_string(FilterKind k) {
  switch (k) {
    case FilterKind::sobel: return "sobel";
    case FilterKind::prewitt: return "prewitt";
    case FilterKind::canny: return "canny";
  }
  return "?";
}

double max_gradient_magnitude(FilterKind k) {
  const double positive_taps = k == FilterKind::prewitt ? 3.0 : 4.0;
  return std::sqrt(2.0) * positive_taps;
}

Image gaussian_smooth(const Image& img, double sigma, int ksize) {
  SSLP_CHECK(sigma > 0.0, "sigma must be positive, got ", sigma);
  SSLP_CHECK(ksize > 0 && ksize % 2 == 1, "kernel size must be odd and positive, got ", ksize);
  SSLP_CHECK(img.height >= ksize && img.width >= ksize, "image of size ", img.height, "x",
             img.width, " is smaller than the ", ksize, "x", ksize, " kernel");
  Image out(img.channels, img.height, img.width);
  for (int c = 0; c < img.channels; ++c) {
    PlaneD p(img.height, img.width);
    const float* src = img.plane(c);
    for (std::size_t i = 0; i < p.v.size(); ++i) p.v[i] = src[i];
    p = smooth_plane(p, sigma, ksize);
    float* dst = out.plane(c);
    for (std::size_t i = 0; i < p.v.size(); ++i)
      dst[i] = std::min(1.0f, std::max(0.0f, static_cast<float>(p.v[i])));
  }
  return out;
}

Image sobel_prior(const Image& img, const PriorConfig& cfg) {
  SSLP_CHECK(cfg.kind == FilterKind::sobel, "sobel_prior called with kind=", to_string(cfg.kind));
  return magnitude_prior(img, cfg, 2.0, max_gradient_magnitude(FilterKind::sobel));
}

Image prewitt_prior(const Image& img, const PriorConfig& cfg) {
  SSLP_CHECK(cfg.kind == FilterKind::prewitt,
             "prewitt_prior called with kind=", to_string(cfg.kind));
  return magnitude_prior(img, cfg, 1.0, max_gradient_magnitude(FilterKind::prewitt));
}

Image canny_prior(const Image& img, const PriorConfig& cfg) {
  SSLP_CHECK(cfg.kind == FilterKind::canny, "canny_prior called with kind=", to_string(cfg.kind));
  cfg.validate();

  PlaneD p = to_plane(img);
  const int oh = p.h, ow = p.w;
  const int up_h = oh * cfg.upsample_factor, up_w = ow * cfg.upsample_factor;
  check_size_for_kernels(cfg, up_h, up_w);
  if (cfg.upsample_factor > 1) p = resize_plane(p, up_h, up_w);
  if (cfg.gaussian_sigma > 0.0)
    p = smooth_plane(p, cfg.gaussian_sigma, cfg.gaussian_kernel_size);

  PlaneD gx, gy;
  gradients(p, 2.0, gx, gy);
  const double max_mag = max_gradient_magnitude(FilterKind::canny);
  PlaneD mag(p.h, p.w);
  for (std::size_t i = 0; i < mag.v.size(); ++i)
    mag.v[i] = std::sqrt(gx.v[i] * gx.v[i] + gy.v[i] * gy.v[i]) / max_mag;

  // Non-maximum suppression along the quantized gradient direction.
  // A pixel survives when it is >= both neighbours and > at least one;
  // interior plateau pixels drop out and the rule is mirror-symmetric.
  static const int kDx[4] = {1, 1, 0, -1};
  static const int kDy[4] = {0, 1, 1, 1};
  PlaneD thin(p.h, p.w);
  par::parallel_for(p.h, [&](std::int64_t yy) {
    const int y = static_cast<int>(yy);
    for (int x = 0; x < p.w; ++x) {
      const double m = mag.at(y, x);
      if (m <= 0.0) continue;
      double ang = std::atan2(gy.at(y, x), gx.at(y, x));
      if (ang < 0.0) ang += 3.14159265358979323846;  // fold to [0, pi)
      int bin = static_cast<int>(std::lround(ang / (3.14159265358979323846 / 4.0))) % 4;
      const double n1 = mag.at(reflect(y + kDy[bin], p.h), reflect(x + kDx[bin], p.w));
      const double n2 = mag.at(reflect(y - kDy[bin], p.h), reflect(x - kDx[bin], p.w));
      const bool keep = (m >= n1 && m > n2) || (m > n1 && m >= n2);
      if (keep) thin.at(y, x) = m;
    }
  });

  // Double threshold + hysteresis: weak pixels survive only when
  // 8-connected to a strong pixel.
  std::vector<std::uint8_t> cls(thin.v.size(), 0);  // 0 none, 1 weak, 2 strong
  std::deque<int> frontier;
  for (int i = 0; i < static_cast<int>(thin.v.size()); ++i) {
    if (thin.v[i] >= cfg.canny_high) {
      cls[i] = 2;
      frontier.push_back(i);
    } else if (thin.v[i] >= cfg.canny_low) {
      cls[i] = 1;
    }
  }
  while (!frontier.empty()) {
    const int i = frontier.front();
    frontier.pop_front();
    const int y = i / p.w, x = i % p.w;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const int ny = y + dy, nx = x + dx;
        if (ny < 0 || ny >= p.h || nx < 0 || nx >= p.w) continue;
        const int j = ny * p.w + nx;
        if (cls[j] == 1) {
          cls[j] = 2;
          frontier.push_back(j);
        }
      }
  }

  PlaneD edges(p.h, p.w);
  for (std::size_t i = 0; i < edges.v.size(); ++i) edges.v[i] = cls[i] == 2 ? 1.0 : 0.0;

  // Block-max downsampling keeps the map binary and mirror-symmetric.
  Image out(1, oh, ow);
  if (cfg.upsample_factor > 1) {
    const int f = cfg.upsample_factor;
    for (int y = 0; y < oh; ++y)
      for (int x = 0; x < ow; ++x) {
        double m = 0.0;
        for (int dy = 0; dy < f; ++dy)
          for (int dx = 0; dx < f; ++dx) m = std::max(m, edges.at(y * f + dy, x * f + dx));
        out.at(0, y, x) = static_cast<float>(m);
      }
  } else {
    out = to_image(edges);
  }
  return replicate_channels(out, img.channels);
}

Image apply_prior(const Image& img, const PriorConfig& cfg) {
  switch (cfg.kind) {
    case FilterKind::sobel: return sobel_prior(img, cfg);
    case FilterKind::prewitt: return prewitt_prior(img, cfg);
    case FilterKind::canny: return canny_prior(img, cfg);
  }
  SSLP_CHECK(false, "unhandled filter kind");
  return {};
}

}  // namespace sslp::priors
