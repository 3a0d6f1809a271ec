#pragma once

#include "sslp/core/image.hpp"

namespace sslp::priors {

enum class FilterKind { sobel, prewitt, canny };

struct PriorConfig {
  FilterKind kind = FilterKind::sobel;
  int upsample_factor = 2;
  // gaussian_sigma == 0 disables the smoothing stage (used by the
  // convolution-oracle tests); otherwise it must be positive.
  double gaussian_sigma = 1.0;
  int gaussian_kernel_size = 5;
  double canny_low = 0.1;
  double canny_high = 0.2;

  void validate() const;
};

FilterKind filter_kind_from_string(const std::string& s);
const char* to_string(FilterKind k);

// Gaussian smoothing with a normalized ksize x ksize kernel, reflect
// border handling, output clipped to [0, 1].
Image gaussian_smooth(const Image& img, double sigma, int ksize);

// Edge-magnitude priors: upsample -> smooth -> gradient kernels ->
// magnitude -> downsample, rescaled so outputs land in [0, 1].
Image sobel_prior(const Image& img, const PriorConfig& cfg);
Image prewitt_prior(const Image& img, const PriorConfig& cfg);

// Full Canny: Sobel magnitude/direction, non-maximum suppression over 4
// direction bins, double-threshold hysteresis with 8-connectivity.
// Output is binary {0, 1}.
Image canny_prior(const Image& img, const PriorConfig& cfg);

Image apply_prior(const Image& img, const PriorConfig& cfg);

// Largest gradient magnitude achievable on [0,1] inputs; used to rescale
// edge maps into [0,1]. sqrt(2) * (sum of positive kernel taps).
double max_gradient_magnitude(FilterKind k);

}  // namespace sslp::priors
