#include "sslp/augment.hpp"

#include <algorithm>
#include <cmath>

#include "sslp/priors.hpp"

namespace sslp::augment {

namespace {

Image crop_resize(const Image& img, int top, int left, int h, int w, int out_h, int out_w) {
  Image patch(img.channels, h, w);
  for (int c = 0; c < img.channels; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) patch.at(c, y, x) = img.at(c, top + y, left + x);
  return resize_bilinear(patch, out_h, out_w);
}

Image random_resized_crop(const AugmentationSpec& s, const Image& img, Rng& rng) {
  const int H = img.height, W = img.width;
  const double area = static_cast<double>(H) * W;
  for (int attempt = 0; attempt < 10; ++attempt) {
    const double target = area * rng.uniform(s.crop_scale_lo, s.crop_scale_hi);
    const double ratio =
        std::exp(rng.uniform(std::log(s.crop_ratio_lo), std::log(s.crop_ratio_hi)));
    const int w = static_cast<int>(std::lround(std::sqrt(target * ratio)));
    const int h = static_cast<int>(std::lround(std::sqrt(target / ratio)));
    if (w < 1 || h < 1 || w > W || h > H) continue;
    const int top = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(H - h + 1)));
    const int left = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(W - w + 1)));
    return crop_resize(img, top, left, h, w, s.out_h, s.out_w);
  }
  // center-crop fallback
  const int side = std::min(H, W);
  return crop_resize(img, (H - side) / 2, (W - side) / 2, side, side, s.out_h, s.out_w);
}

Image grayscale(const Image& img) {
  if (img.channels == 1) return img;
  return replicate_channels(to_luminance(img), img.channels);
}

void adjust_brightness(Image& img, float f) {
  for (float& p : img.v) p = std::min(1.0f, std::max(0.0f, p * f));
}

void adjust_contrast(Image& img, float f) {
  const Image lum = to_luminance(img);
  double mean = 0.0;
  for (float p : lum.v) mean += p;
  const float m = static_cast<float>(mean / lum.v.size());
  for (float& p : img.v) p = std::min(1.0f, std::max(0.0f, f * p + (1.0f - f) * m));
}

void adjust_saturation(Image& img, float f) {
  if (img.channels == 1) return;
  const Image lum = to_luminance(img);
  for (int c = 0; c < img.channels; ++c) {
    float* plane = img.plane(c);
    for (std::size_t i = 0; i < lum.v.size(); ++i)
      plane[i] = std::min(1.0f, std::max(0.0f, f * plane[i] + (1.0f - f) * lum.v[i]));
  }
}

void adjust_hue(Image& img, float delta) {
  if (img.channels == 1 || delta == 0.0f) return;
  float* R = img.plane(0);
  float* G = img.plane(1);
  float* B = img.plane(2);
  for (std::size_t i = 0; i < img.pixels(); ++i) {
    const float r = R[i], g = G[i], b = B[i];
    const float mx = std::max({r, g, b}), mn = std::min({r, g, b});
    const float v = mx, d = mx - mn;
    float h = 0.0f;
    if (d > 0.0f) {
      if (mx == r) h = std::fmod((g - b) / d, 6.0f);
      else if (mx == g) h = (b - r) / d + 2.0f;
      else h = (r - g) / d + 4.0f;
      h /= 6.0f;
      if (h < 0.0f) h += 1.0f;
    }
    const float sat = mx > 0.0f ? d / mx : 0.0f;
    h = h + delta;
    h -= std::floor(h);
    const float hh = h * 6.0f;
    const int sector = std::min(5, static_cast<int>(hh));
    const float frac = hh - sector;
    const float p = v * (1.0f - sat);
    const float q = v * (1.0f - sat * frac);
    const float t = v * (1.0f - sat * (1.0f - frac));
    float nr = v, ng = t, nb = p;
    switch (sector) {
      case 0: nr = v; ng = t; nb = p; break;
      case 1: nr = q; ng = v; nb = p; break;
      case 2: nr = p; ng = v; nb = t; break;
      case 3: nr = p; ng = q; nb = v; break;
      case 4: nr = t; ng = p; nb = v; break;
      case 5: nr = v; ng = p; nb = q; break;
    }
    R[i] = nr;
    G[i] = ng;
    B[i] = nb;
  }
}

Image color_jitter(const AugmentationSpec& s, const Image& img, Rng& rng) {
  const float fb = static_cast<float>(
      rng.uniform(std::max(0.0, 1.0 - s.jitter_brightness), 1.0 + s.jitter_brightness));
  const float fc = static_cast<float>(
      rng.uniform(std::max(0.0, 1.0 - s.jitter_contrast), 1.0 + s.jitter_contrast));
  const float fs = static_cast<float>(
      rng.uniform(std::max(0.0, 1.0 - s.jitter_saturation), 1.0 + s.jitter_saturation));
  const float fh = static_cast<float>(rng.uniform(-s.jitter_hue, s.jitter_hue));

  int order[4] = {0, 1, 2, 3};
  for (int i = 3; i > 0; --i)
    std::swap(order[i], order[rng.uniform_int(0, i)]);

  Image out = img;
  for (int op : order) {
    switch (op) {
      case 0: adjust_brightness(out, fb); break;
      case 1: adjust_contrast(out, fc); break;
      case 2: adjust_saturation(out, fs); break;
      case 3: adjust_hue(out, fh); break;
    }
  }
  return out;
}

Image gaussian_blur(const AugmentationSpec& s, const Image& img, Rng& rng) {
  const double sigma = rng.uniform(s.blur_sigma_lo, s.blur_sigma_hi);
  int ksize = std::min(s.blur_ksize, std::min(img.height, img.width));
  if (ksize % 2 == 0) --ksize;
  if (ksize < 3) return img;
  return priors::gaussian_smooth(img, sigma, ksize);
}

Image solarize(const AugmentationSpec& s, const Image& img) {
  Image out = img;
  const float t = static_cast<float>(s.solarize_threshold);
  for (float& p : out.v)
    if (p >= t) p = 1.0f - p;
  return out;
}

}  // namespace

const char* to_string(TransformKind k) {
  switch (k) {
    case TransformKind::random_resized_crop: return "random_resized_crop";
    case TransformKind::random_horizontal_flip: return "random_horizontal_flip";
    case TransformKind::random_grayscale: return "random_grayscale";
    case TransformKind::color_jitter: return "color_jitter";
    case TransformKind::gaussian_blur: return "gaussian_blur";
    case TransformKind::solarization: return "solarization";
  }
  return "?";
}

TransformKind transform_kind_from_string(const std::string& s) {
  for (TransformKind k :
       {TransformKind::random_resized_crop, TransformKind::random_horizontal_flip,
        TransformKind::random_grayscale, TransformKind::color_jitter,
        TransformKind::gaussian_blur, TransformKind::solarization})
    if (s == to_string(k)) return k;
  SSLP_CHECK(false, "unknown transform: ", s);
  return TransformKind::random_horizontal_flip;
}

Preset preset_from_string(const std::string& s) {
  if (s == "basic") return Preset::basic;
  if (s == "strong") return Preset::strong;
  SSLP_CHECK(false, "unknown augmentation preset: ", s);
  return Preset::basic;
}

void AugmentationSpec::validate() const {
  SSLP_CHECK(probability >= 0.0 && probability <= 1.0, "probability must lie in [0,1]");
  if (name == TransformKind::random_resized_crop) {
    SSLP_CHECK(crop_scale_lo > 0.0 && crop_scale_hi <= 1.0 && crop_scale_lo <= crop_scale_hi,
               "crop scale range must satisfy 0 < lo <= hi <= 1");
    SSLP_CHECK(out_h > 0 && out_w > 0, "crop out size must be positive");
  }
}

Pipeline make_pipeline(Preset preset, int out_h, int out_w) {
  SSLP_CHECK(out_h > 0 && out_w > 0, "pipeline out size must be positive");
  Pipeline p;
  p.out_h = out_h;
  p.out_w = out_w;

  AugmentationSpec crop;
  crop.name = TransformKind::random_resized_crop;
  crop.probability = 1.0;
  crop.out_h = out_h;
  crop.out_w = out_w;
  p.specs.push_back(crop);

  AugmentationSpec flip;
  flip.name = TransformKind::random_horizontal_flip;
  flip.probability = 0.5;
  p.specs.push_back(flip);

  if (preset == Preset::strong) {
    AugmentationSpec gray;
    gray.name = TransformKind::random_grayscale;
    gray.probability = 0.2;
    p.specs.push_back(gray);

    AugmentationSpec jitter;
    jitter.name = TransformKind::color_jitter;
    jitter.probability = 0.8;
    p.specs.push_back(jitter);

    AugmentationSpec blur;
    blur.name = TransformKind::gaussian_blur;
    blur.probability = 0.5;
    // kernel spans 10% of the image side, rounded up to odd
    int k = (std::min(out_h, out_w) + 9) / 10;
    if (k % 2 == 0) ++k;
    blur.blur_ksize = std::max(3, k);
    p.specs.push_back(blur);

    AugmentationSpec sol;
    sol.name = TransformKind::solarization;
    sol.probability = 0.2;
    p.specs.push_back(sol);
  }
  return p;
}

Image apply_augmentation(const AugmentationSpec& spec, const Image& img, Rng& rng) {
  spec.validate();
  const bool fire = rng.uniform() < spec.probability;
  if (!fire) return img;
  switch (spec.name) {
    case TransformKind::random_resized_crop: return random_resized_crop(spec, img, rng);
    case TransformKind::random_horizontal_flip: return hflip(img);
    case TransformKind::random_grayscale: return grayscale(img);
    case TransformKind::color_jitter: return color_jitter(spec, img, rng);
    case TransformKind::gaussian_blur: return gaussian_blur(spec, img, rng);
    case TransformKind::solarization: return solarize(spec, img);
  }
  SSLP_CHECK(false, "unhandled transform");
  return img;
}

Image apply_pipeline(const Pipeline& pipeline, const Image& img, Rng& rng) {
  Image out = img;
  for (const AugmentationSpec& spec : pipeline.specs)
    out = apply_augmentation(spec, out, rng);
  return out;
}

std::pair<Image, Image> two_views(const Image& img, const Pipeline& pipeline, const Rng& rng) {
  Rng r1 = rng.substream({1});
  Rng r2 = rng.substream({2});
  return {apply_pipeline(pipeline, img, r1), apply_pipeline(pipeline, img, r2)};
}

}  // namespace sslp::augment
