#include "sslp/core/image.hpp"

#include <algorithm>
#include <cmath>

#include "sslp/core/parallel.hpp"

namespace sslp {

Image to_luminance(const Image& img) {
  if (img.channels == 1) return img;
  SSLP_CHECK(img.channels == 3, "luminance conversion expects 1 or 3 channels, got ",
             img.channels);
  Image out(1, img.height, img.width);
  const float* r = img.plane(0);
  const float* g = img.plane(1);
  const float* b = img.plane(2);
  for (std::size_t i = 0; i < img.pixels(); ++i)
    out.v[i] = kLumaR * r[i] + kLumaG * g[i] + kLumaB * b[i];
  return out;
}

Image replicate_channels(const Image& gray, int channels) {
  SSLP_CHECK(gray.channels == 1, "replicate_channels expects a single-channel image");
  Image out(channels, gray.height, gray.width);
  for (int c = 0; c < channels; ++c)
    std::copy(gray.v.begin(), gray.v.end(), out.plane(c));
  return out;
}

Image hflip(const Image& img) {
  Image out(img.channels, img.height, img.width);
  for (int c = 0; c < img.channels; ++c)
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        out.at(c, y, x) = img.at(c, y, img.width - 1 - x);
  return out;
}

void clamp01(Image& img) {
  for (float& p : img.v) p = std::min(1.0f, std::max(0.0f, p));
}

Image resize_bilinear(const Image& img, int out_h, int out_w) {
  SSLP_CHECK(out_h > 0 && out_w > 0, "resize target must be positive");
  if (out_h == img.height && out_w == img.width) return img;
  Image out(img.channels, out_h, out_w);
  const double sy = static_cast<double>(img.height) / out_h;
  const double sx = static_cast<double>(img.width) / out_w;
  par::parallel_for(static_cast<std::int64_t>(img.channels) * out_h, [&](std::int64_t t) {
    const int c = static_cast<int>(t / out_h);
    const int oy = static_cast<int>(t % out_h);
    const double fy = (oy + 0.5) * sy - 0.5;
    int y0 = static_cast<int>(std::floor(fy));
    double wy = fy - y0;
    int y1 = std::min(y0 + 1, img.height - 1);
    y0 = std::max(y0, 0);
    const float* src = img.plane(c);
    float* dst = out.plane(c) + static_cast<std::size_t>(oy) * out_w;
    for (int ox = 0; ox < out_w; ++ox) {
      const double fx = (ox + 0.5) * sx - 0.5;
      int x0 = static_cast<int>(std::floor(fx));
      double wx = fx - x0;
      int x1 = std::min(x0 + 1, img.width - 1);
      x0 = std::max(x0, 0);
      // symmetric pairing keeps the result exact under horizontal mirroring
      const double top = (1.0 - wx) * src[y0 * img.width + x0] + wx * src[y0 * img.width + x1];
      const double bot = (1.0 - wx) * src[y1 * img.width + x0] + wx * src[y1 * img.width + x1];
      dst[ox] = static_cast<float>((1.0 - wy) * top + wy * bot);
    }
  });
  return out;
}

Image resize_nearest(const Image& img, int out_h, int out_w) {
  SSLP_CHECK(out_h > 0 && out_w > 0, "resize target must be positive");
  Image out(img.channels, out_h, out_w);
  const double sy = static_cast<double>(img.height) / out_h;
  const double sx = static_cast<double>(img.width) / out_w;
  for (int c = 0; c < img.channels; ++c) {
    const float* src = img.plane(c);
    float* dst = out.plane(c);
    for (int oy = 0; oy < out_h; ++oy) {
      int iy = std::min(static_cast<int>((oy + 0.5) * sy), img.height - 1);
      for (int ox = 0; ox < out_w; ++ox) {
        int ix = std::min(static_cast<int>((ox + 0.5) * sx), img.width - 1);
        dst[oy * out_w + ox] = src[iy * img.width + ix];
      }
    }
  }
  return out;
}

}  // namespace sslp
