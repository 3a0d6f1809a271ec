#include <doctest.h>

#include <cmath>

#include "sslp/augment.hpp"

using namespace sslp;
using namespace sslp::augment;

namespace {

Image textured_image(int h, int w, std::uint64_t seed) {
  Rng rng(seed);
  Image img(3, h, w);
  for (float& v : img.v) v = static_cast<float>(rng.uniform());
  return img;
}

}  // namespace

TEST_SUITE_BEGIN("augment");

TEST_CASE("preset construction follows the fixed order") {
  const Pipeline basic = make_pipeline(Preset::basic, 32, 32);
  REQUIRE(basic.specs.size() == 2);
  CHECK(basic.specs[0].name == TransformKind::random_resized_crop);
  CHECK(basic.specs[1].name == TransformKind::random_horizontal_flip);

  const Pipeline strong = make_pipeline(Preset::strong, 32, 32);
  REQUIRE(strong.specs.size() == 6);
  CHECK(strong.specs[2].name == TransformKind::random_grayscale);
  CHECK(strong.specs[3].name == TransformKind::color_jitter);
  CHECK(strong.specs[4].name == TransformKind::gaussian_blur);
  CHECK(strong.specs[5].name == TransformKind::solarization);

  // strong extends basic: first two specs identical
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(strong.specs[i].name == basic.specs[i].name);
    CHECK(strong.specs[i].probability == basic.specs[i].probability);
  }
  CHECK_THROWS(preset_from_string("extreme"));
}

TEST_CASE("horizontal flip with probability 1 is an involution") {
  const Image img = textured_image(12, 10, 1);
  AugmentationSpec flip;
  flip.name = TransformKind::random_horizontal_flip;
  flip.probability = 1.0;
  Rng r1(9), r2(10);
  const Image once = apply_augmentation(flip, img, r1);
  const Image twice = apply_augmentation(flip, once, r2);
  CHECK(twice.v == img.v);
}

TEST_CASE("solarization with threshold 0 inverts everything") {
  const Image img = textured_image(8, 8, 2);
  AugmentationSpec sol;
  sol.name = TransformKind::solarization;
  sol.probability = 1.0;
  sol.solarize_threshold = 0.0;
  Rng rng(5);
  const Image out = apply_augmentation(sol, img, rng);
  for (std::size_t i = 0; i < img.v.size(); ++i)
    CHECK(out.v[i] == doctest::Approx(1.0f - img.v[i]).epsilon(1e-7));
}

TEST_CASE("zero-strength color jitter is the identity") {
  const Image img = textured_image(8, 8, 3);
  AugmentationSpec jitter;
  jitter.name = TransformKind::color_jitter;
  jitter.probability = 1.0;
  jitter.jitter_brightness = 0.0;
  jitter.jitter_contrast = 0.0;
  jitter.jitter_saturation = 0.0;
  jitter.jitter_hue = 0.0;
  Rng rng(6);
  const Image out = apply_augmentation(jitter, img, rng);
  for (std::size_t i = 0; i < img.v.size(); ++i) CHECK(std::abs(out.v[i] - img.v[i]) < 1e-6f);
}

TEST_CASE("two_views is deterministic and the views differ") {
  const Image img = textured_image(24, 24, 4);
  const Pipeline pipeline = make_pipeline(Preset::strong, 16, 16);
  const Rng rng(Rng::mix(77));

  auto [a1, a2] = two_views(img, pipeline, rng);
  auto [b1, b2] = two_views(img, pipeline, rng);
  CHECK(a1.v == b1.v);  // bitwise determinism
  CHECK(a2.v == b2.v);
  CHECK(a1.v != a2.v);  // independent substreams on a textured image
}

TEST_CASE("empty pipeline returns the input unchanged") {
  const Image img = textured_image(10, 10, 5);
  Pipeline empty;
  empty.out_h = empty.out_w = 10;
  const Rng rng(1);
  auto [v1, v2] = two_views(img, empty, rng);
  CHECK(v1.v == img.v);
  CHECK(v2.v == img.v);
}

TEST_CASE("crop output matches the requested size and range for any input") {
  Rng rng(8);
  const Pipeline pipeline = make_pipeline(Preset::strong, 20, 16);
  for (int trial = 0; trial < 20; ++trial) {
    const Image img = textured_image(20 + static_cast<int>(rng.uniform_index(20)),
                                     16 + static_cast<int>(rng.uniform_index(20)),
                                     rng.next_u64());
    Rng stream(rng.next_u64());
    const Image out = apply_pipeline(pipeline, img, stream);
    CHECK(out.height == 20);
    CHECK(out.width == 16);
    for (float v : out.v) {
      CHECK(v >= 0.0f);
      CHECK(v <= 1.0f);
    }
  }
}

TEST_CASE("transform fires with the configured probability") {
  // solarization flips any pixel >= 0 so firing is observable
  AugmentationSpec sol;
  sol.name = TransformKind::solarization;
  sol.probability = 0.3;
  sol.solarize_threshold = 0.0;
  const Image img(3, 4, 4, 0.25f);

  const int n = 10000;
  int fired = 0;
  Rng rng(99);
  for (int i = 0; i < n; ++i) {
    Rng stream(rng.next_u64());
    const Image out = apply_augmentation(sol, img, stream);
    if (out.v != img.v) ++fired;
  }
  const double sigma = std::sqrt(n * 0.3 * 0.7);
  CHECK(std::abs(fired - n * 0.3) < 3.0 * sigma);
}

TEST_CASE("grayscale equalizes channels") {
  const Image img = textured_image(6, 6, 12);
  AugmentationSpec gray;
  gray.name = TransformKind::random_grayscale;
  gray.probability = 1.0;
  Rng rng(13);
  const Image out = apply_augmentation(gray, img, rng);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 6; ++x) {
      CHECK(out.at(0, y, x) == out.at(1, y, x));
      CHECK(out.at(1, y, x) == out.at(2, y, x));
    }
}

TEST_CASE("invalid spec parameters are rejected") {
  AugmentationSpec crop;
  crop.name = TransformKind::random_resized_crop;
  crop.probability = 1.0;
  crop.out_h = crop.out_w = 8;
  crop.crop_scale_lo = 0.0;  // must be > 0
  const Image img = textured_image(8, 8, 14);
  Rng rng(15);
  CHECK_THROWS(apply_augmentation(crop, img, rng));
}

TEST_SUITE_END();
