#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sslp/core/check.hpp"

namespace sslp {

// CHW float image with pixel values in [0, 1]. channels is 1 or 3.
struct Image {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> v;

  Image() = default;
  Image(int c, int h, int w, float fill = 0.0f)
      : channels(c), height(h), width(w),
        v(static_cast<std::size_t>(c) * h * w, fill) {}

  float& at(int c, int y, int x) {
    return v[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  float at(int c, int y, int x) const {
    return v[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  float* plane(int c) { return v.data() + static_cast<std::size_t>(c) * height * width; }
  const float* plane(int c) const {
    return v.data() + static_cast<std::size_t>(c) * height * width;
  }
  std::size_t pixels() const { return static_cast<std::size_t>(height) * width; }
  bool same_shape(const Image& o) const {
    return channels == o.channels && height == o.height && width == o.width;
  }
};

// NCHW float batch.
struct ImageBatch {
  int n = 0, channels = 0, height = 0, width = 0;
  std::vector<float> v;

  ImageBatch() = default;
  ImageBatch(int n_, int c, int h, int w)
      : n(n_), channels(c), height(h), width(w),
        v(static_cast<std::size_t>(n_) * c * h * w, 0.0f) {}

  float* sample(int i) {
    return v.data() + static_cast<std::size_t>(i) * channels * height * width;
  }
  const float* sample(int i) const {
    return v.data() + static_cast<std::size_t>(i) * channels * height * width;
  }
  void set_sample(int i, const Image& img) {
    SSLP_CHECK(img.channels == channels && img.height == height && img.width == width,
               "batch/sample shape mismatch");
    std::copy(img.v.begin(), img.v.end(), sample(i));
  }
  Image get_sample(int i) const {
    Image img(channels, height, width);
    std::copy(sample(i), sample(i) + img.v.size(), img.v.begin());
    return img;
  }
};

// ITU-R BT.601 luminance weights, shared by grayscale augmentation and the
// edge filters.
inline constexpr float kLumaR = 0.299f, kLumaG = 0.587f, kLumaB = 0.114f;

Image to_luminance(const Image& img);
Image replicate_channels(const Image& gray, int channels);
Image hflip(const Image& img);
void clamp01(Image& img);

// Bilinear resize, half-pixel-center convention. Exact under horizontal
// mirroring for power-of-two scale factors.
Image resize_bilinear(const Image& img, int out_h, int out_w);
Image resize_nearest(const Image& img, int out_h, int out_w);

// --- file IO (8-bit PNG / binary PPM-PGM) ---
Image read_image(const std::string& path);
void write_image(const std::string& path, const Image& img);  // by extension
Image read_png(const std::string& path);
void write_png(const std::string& path, const Image& img);
Image read_pnm(const std::string& path);
void write_pnm(const std::string& path, const Image& img);

}  // namespace sslp
