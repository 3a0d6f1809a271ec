#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sslp/core/image.hpp"
#include "sslp/core/rng.hpp"

namespace sslp::augment {

enum class TransformKind {
  random_resized_crop,
  random_horizontal_flip,
  random_grayscale,
  color_jitter,
  gaussian_blur,
  solarization,
};

const char* to_string(TransformKind k);
TransformKind transform_kind_from_string(const std::string& s);

struct AugmentationSpec {
  TransformKind name = TransformKind::random_horizontal_flip;
  double probability = 1.0;

  // name-specific parameters (only the relevant subset is read)
  double crop_scale_lo = 0.2, crop_scale_hi = 1.0;
  double crop_ratio_lo = 3.0 / 4.0, crop_ratio_hi = 4.0 / 3.0;
  int out_h = 0, out_w = 0;  // crop target, filled by make_pipeline
  double jitter_brightness = 0.4, jitter_contrast = 0.4;
  double jitter_saturation = 0.4, jitter_hue = 0.1;
  double blur_sigma_lo = 0.1, blur_sigma_hi = 2.0;
  int blur_ksize = 7;
  double solarize_threshold = 0.5;

  void validate() const;
};

enum class Preset { basic, strong };
Preset preset_from_string(const std::string& s);

struct Pipeline {
  std::vector<AugmentationSpec> specs;
  int out_h = 0, out_w = 0;
};

// basic = {crop, hflip}; strong appends {grayscale, jitter, blur,
// solarization}, keeping the order fixed.
Pipeline make_pipeline(Preset preset, int out_h, int out_w);

// Applies one transform. It fires with spec.probability using draws from
// rng only; a non-firing call still consumes the gate draw so streams
// stay aligned.
Image apply_augmentation(const AugmentationSpec& spec, const Image& img, Rng& rng);

Image apply_pipeline(const Pipeline& pipeline, const Image& img, Rng& rng);

// Two independent stochastic applications of the pipeline on derived
// substreams. Pure in (img, pipeline, rng key).
std::pair<Image, Image> two_views(const Image& img, const Pipeline& pipeline, const Rng& rng);

}  // namespace sslp::augment
