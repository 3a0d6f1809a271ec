#include <doctest.h>

#include <cmath>

#include "sslp/core/rng.hpp"
#include "sslp/priors.hpp"
#include "sslp/ref/naive.hpp"

using namespace sslp;

namespace {

Image random_image(int c, int h, int w, Rng& rng) {
  Image img(c, h, w);
  for (float& v : img.v) v = static_cast<float>(rng.uniform());
  return img;
}

// oracle pipeline for upsample=1, smoothing disabled: dense double-loop
// convolution, magnitude, shared normalization
Image magnitude_oracle(const Image& gray, double center_weight, double max_mag) {
  std::vector<double> plane(gray.v.begin(), gray.v.end());
  const double a = center_weight;
  const std::vector<double> kx = {-1, 0, 1, -a, 0, a, -1, 0, 1};
  const std::vector<double> ky = {-1, -a, -1, 0, 0, 0, 1, a, 1};
  const auto gx = ref::conv2d_reflect(plane, gray.height, gray.width, kx, 3, 3);
  const auto gy = ref::conv2d_reflect(plane, gray.height, gray.width, ky, 3, 3);
  Image out(1, gray.height, gray.width);
  for (std::size_t i = 0; i < out.v.size(); ++i)
    out.v[i] = static_cast<float>(std::sqrt(gx[i] * gx[i] + gy[i] * gy[i]) / max_mag);
  return out;
}

priors::PriorConfig raw_config(priors::FilterKind kind) {
  priors::PriorConfig cfg;
  cfg.kind = kind;
  cfg.upsample_factor = 1;
  cfg.gaussian_sigma = 0.0;  // smoothing disabled
  return cfg;
}

}  // namespace

TEST_SUITE_BEGIN("priors");

TEST_CASE("gaussian_smooth preserves constants") {
  const Image img(3, 8, 8, 0.5f);
  const Image out = priors::gaussian_smooth(img, 1.0, 5);
  for (float v : out.v) CHECK(v == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("gaussian_smooth impulse matches the explicit kernel") {
  Image img(1, 5, 5);
  img.at(0, 2, 2) = 1.0f;
  const Image out = priors::gaussian_smooth(img, 1.0, 3);

  // explicit 3x3 kernel evaluation + direct convolution
  double k1d[3] = {std::exp(-0.5), 1.0, std::exp(-0.5)};
  const double norm = k1d[0] + k1d[1] + k1d[2];
  for (double& v : k1d) v /= norm;
  std::vector<double> kernel(9);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 3; ++x) kernel[static_cast<std::size_t>(y) * 3 + x] = k1d[y] * k1d[x];
  std::vector<double> plane(img.v.begin(), img.v.end());
  const auto expected = ref::conv2d_reflect(plane, 5, 5, kernel, 3, 3);

  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x)
      CHECK(out.at(0, y, x) ==
            doctest::Approx(expected[static_cast<std::size_t>(y) * 5 + x]).epsilon(1e-6));
  CHECK(out.at(0, 2, 2) == doctest::Approx(k1d[1] * k1d[1]).epsilon(1e-6));
}

TEST_CASE("gaussian_smooth with tiny sigma approaches the identity") {
  Rng rng(2);
  const Image img = random_image(3, 7, 7, rng);
  const Image out = priors::gaussian_smooth(img, 1e-3, 3);
  for (std::size_t i = 0; i < img.v.size(); ++i) CHECK(std::abs(out.v[i] - img.v[i]) < 1e-4f);
}

TEST_CASE("gaussian_smooth rejects bad arguments") {
  const Image img(1, 5, 5, 0.5f);
  CHECK_THROWS(priors::gaussian_smooth(img, 1.0, 4));   // even kernel
  CHECK_THROWS(priors::gaussian_smooth(img, 0.0, 3));   // non-positive sigma
  CHECK_THROWS(priors::gaussian_smooth(img, -1.0, 3));
  CHECK_THROWS(priors::gaussian_smooth(Image(1, 3, 3, 0.5f), 1.0, 5));  // too small
}

TEST_CASE("sobel: constant image gives a zero edge map") {
  const Image img(3, 6, 6, 0.7f);
  priors::PriorConfig cfg;  // defaults: upsample 2, sigma 1, ksize 5
  const Image out = priors::sobel_prior(img, cfg);
  CHECK(out.channels == 3);
  for (float v : out.v) CHECK(v == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("sobel: vertical step matches the dense convolution oracle") {
  Image img(1, 5, 5);
  for (int y = 0; y < 5; ++y)
    for (int x = 2; x < 5; ++x) img.at(0, y, x) = 1.0f;
  const Image out = priors::sobel_prior(img, raw_config(priors::FilterKind::sobel));
  const Image expected =
      magnitude_oracle(img, 2.0, priors::max_gradient_magnitude(priors::FilterKind::sobel));
  for (std::size_t i = 0; i < expected.v.size(); ++i)
    CHECK(out.v[i] == doctest::Approx(expected.v[i]).epsilon(1e-6));
}

TEST_CASE("prewitt: vertical step matches the dense convolution oracle") {
  Image img(1, 5, 5);
  for (int y = 0; y < 5; ++y)
    for (int x = 2; x < 5; ++x) img.at(0, y, x) = 1.0f;
  const Image out = priors::prewitt_prior(img, raw_config(priors::FilterKind::prewitt));
  const Image expected =
      magnitude_oracle(img, 1.0, priors::max_gradient_magnitude(priors::FilterKind::prewitt));
  for (std::size_t i = 0; i < expected.v.size(); ++i)
    CHECK(out.v[i] == doctest::Approx(expected.v[i]).epsilon(1e-6));
}

TEST_CASE("oracle equivalence on random small images, smoothing disabled") {
  Rng rng(33);
  for (int trial = 0; trial < 25; ++trial) {
    const int h = 3 + static_cast<int>(rng.uniform_index(6));
    const int w = 3 + static_cast<int>(rng.uniform_index(6));
    const Image img = random_image(1, h, w, rng);
    {
      const Image out = priors::sobel_prior(img, raw_config(priors::FilterKind::sobel));
      const Image expected =
          magnitude_oracle(img, 2.0, priors::max_gradient_magnitude(priors::FilterKind::sobel));
      for (std::size_t i = 0; i < expected.v.size(); ++i)
        CHECK(std::abs(out.v[i] - expected.v[i]) < 1e-6f);
    }
    {
      const Image out = priors::prewitt_prior(img, raw_config(priors::FilterKind::prewitt));
      const Image expected = magnitude_oracle(
          img, 1.0, priors::max_gradient_magnitude(priors::FilterKind::prewitt));
      for (std::size_t i = 0; i < expected.v.size(); ++i)
        CHECK(std::abs(out.v[i] - expected.v[i]) < 1e-6f);
    }
  }
}

TEST_CASE("negation invariance for sobel and prewitt") {
  Rng rng(44);
  for (int trial = 0; trial < 10; ++trial) {
    const Image img = random_image(3, 12, 10, rng);
    Image negated = img;
    for (float& v : negated.v) v = 1.0f - v;
    priors::PriorConfig cfg;  // default smoothing + upsampling
    cfg.kind = priors::FilterKind::sobel;
    const Image a = priors::sobel_prior(img, cfg);
    const Image b = priors::sobel_prior(negated, cfg);
    for (std::size_t i = 0; i < a.v.size(); ++i) CHECK(std::abs(a.v[i] - b.v[i]) < 1e-6f);

    cfg.kind = priors::FilterKind::prewitt;
    const Image c = priors::prewitt_prior(img, cfg);
    const Image d = priors::prewitt_prior(negated, cfg);
    for (std::size_t i = 0; i < c.v.size(); ++i) CHECK(std::abs(c.v[i] - d.v[i]) < 1e-6f);
  }
}

TEST_CASE("flip equivariance holds exactly for every filter kind") {
  Rng rng(55);
  for (int trial = 0; trial < 8; ++trial) {
    const Image img = random_image(3, 12, 14, rng);
    for (priors::FilterKind kind :
         {priors::FilterKind::sobel, priors::FilterKind::prewitt, priors::FilterKind::canny}) {
      priors::PriorConfig cfg;  // defaults, upsample 2
      cfg.kind = kind;
      const Image a = priors::apply_prior(hflip(img), cfg);
      const Image b = hflip(priors::apply_prior(img, cfg));
      CHECK(a.v == b.v);  // bitwise

      cfg.upsample_factor = 1;
      const Image c = priors::apply_prior(hflip(img), cfg);
      const Image d = hflip(priors::apply_prior(img, cfg));
      CHECK(c.v == d.v);
    }
  }
}

TEST_CASE("outputs stay in range and preserve shape for all upsample factors") {
  Rng rng(66);
  const Image img = random_image(3, 10, 8, rng);
  for (priors::FilterKind kind :
       {priors::FilterKind::sobel, priors::FilterKind::prewitt, priors::FilterKind::canny}) {
    for (int factor : {1, 2, 3}) {
      priors::PriorConfig cfg;
      cfg.kind = kind;
      cfg.upsample_factor = factor;
      const Image out = priors::apply_prior(img, cfg);
      CHECK(out.channels == img.channels);
      CHECK(out.height == img.height);
      CHECK(out.width == img.width);
      for (float v : out.v) {
        CHECK(v >= 0.0f);
        CHECK(v <= 1.0f);
        if (kind == priors::FilterKind::canny) CHECK((v == 0.0f || v == 1.0f));
      }
    }
  }
}

TEST_CASE("canny: constant image gives a zero map") {
  const Image img(3, 8, 8, 0.3f);
  priors::PriorConfig cfg;
  cfg.kind = priors::FilterKind::canny;
  const Image out = priors::canny_prior(img, cfg);
  for (float v : out.v) CHECK(v == 0.0f);
}

TEST_CASE("canny: ideal ramp step yields a one-pixel-wide line") {
  // column profile 0,0,0,0.5,1,1,1,1: the gradient peaks uniquely at the
  // ramp center, so non-maximum suppression leaves a single column.
  Image img(1, 8, 8);
  for (int y = 0; y < 8; ++y) {
    img.at(0, y, 3) = 0.5f;
    for (int x = 4; x < 8; ++x) img.at(0, y, x) = 1.0f;
  }
  priors::PriorConfig cfg = raw_config(priors::FilterKind::canny);
  cfg.kind = priors::FilterKind::canny;
  // thresholds straddle the peak magnitude 4/(4*sqrt(2)) = 0.7071
  cfg.canny_low = 0.2;
  cfg.canny_high = 0.5;
  const Image out = priors::canny_prior(img, cfg);

  // manual trace: gx = 4*(p[x+1]-p[x-1]) per column -> magnitudes
  // (0,0,.354,.707,.354,0,0,0); column 3 survives NMS, both neighbours
  // fall below it; hysteresis keeps it as a strong edge.
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) CHECK(out.at(0, y, x) == (x == 3 ? 1.0f : 0.0f));
}

TEST_CASE("canny rejects inverted thresholds") {
  const Image img(1, 8, 8, 0.5f);
  priors::PriorConfig cfg;
  cfg.kind = priors::FilterKind::canny;
  cfg.canny_low = 0.6;
  cfg.canny_high = 0.4;
  CHECK_THROWS(priors::canny_prior(img, cfg));
}

TEST_CASE("images smaller than the kernel after upsampling are rejected") {
  const Image img(1, 2, 2, 0.5f);
  CHECK_THROWS(priors::sobel_prior(img, raw_config(priors::FilterKind::sobel)));
}

TEST_SUITE_END();
