#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "sslp/core/image.hpp"
#include "sslp/core/parallel.hpp"
#include "sslp/core/rng.hpp"

using namespace sslp;

TEST_SUITE_BEGIN("core");

TEST_CASE("rng determinism and substream independence") {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  // substreams do not depend on parent draw position
  Rng parent(7);
  const Rng s1 = parent.substream({1, 2});
  parent.next_u64();
  const Rng s2 = parent.substream({1, 2});
  CHECK(s1.key() == s2.key());
  CHECK(parent.substream({1, 2}).key() != parent.substream({1, 3}).key());
  CHECK(parent.substream({1, 2}).key() != parent.substream({2, 1}).key());
}

TEST_CASE("rng uniform and normal ranges") {
  Rng rng(5);
  double sum = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / 10000 - 0.5) < 0.02);

  double nsum = 0.0, nsq = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double z = rng.normal();
    nsum += z;
    nsq += z * z;
  }
  CHECK(std::abs(nsum / 10000) < 0.05);
  CHECK(std::abs(nsq / 10000 - 1.0) < 0.1);
}

TEST_CASE("parallel_for covers the range once") {
  std::vector<int> hits(1000, 0);
  par::parallel_for(1000, [&](std::int64_t i) { hits[static_cast<std::size_t>(i)]++; });
  for (int h : hits) CHECK(h == 1);
}

TEST_CASE("bilinear resize identity and mirror symmetry") {
  Rng rng(11);
  Image img(3, 16, 12);
  for (float& v : img.v) v = static_cast<float>(rng.uniform());

  const Image same = resize_bilinear(img, 16, 12);
  CHECK(same.v == img.v);

  // power-of-two scaling commutes with horizontal mirroring bitwise
  const Image up_flip = resize_bilinear(hflip(img), 32, 24);
  const Image flip_up = hflip(resize_bilinear(img, 32, 24));
  CHECK(up_flip.v == flip_up.v);
  const Image down_flip = resize_bilinear(hflip(img), 8, 6);
  const Image flip_down = hflip(resize_bilinear(img, 8, 6));
  CHECK(down_flip.v == flip_down.v);
}

TEST_CASE("image io roundtrip") {
  Rng rng(3);
  Image img(3, 9, 7);
  for (float& v : img.v) v = static_cast<float>(rng.uniform());

  const std::string dir =
      (std::filesystem::temp_directory_path() / "sslp_core_io").string();
  std::filesystem::create_directories(dir);
  for (const char* name : {"t.png", "t.ppm"}) {
    const std::string path = dir + "/" + name;
    write_image(path, img);
    const Image back = read_image(path);
    REQUIRE(back.same_shape(img));
    for (std::size_t i = 0; i < img.v.size(); ++i)
      CHECK(std::abs(back.v[i] - img.v[i]) <= 0.5f / 255.0f + 1e-6f);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("luminance and flip helpers") {
  Image img(3, 2, 2);
  img.at(0, 0, 0) = 1.0f;  // red pixel top-left
  const Image lum = to_luminance(img);
  CHECK(lum.at(0, 0, 0) == doctest::Approx(0.299).epsilon(1e-6));

  const Image flipped = hflip(img);
  CHECK(flipped.at(0, 0, 1) == 1.0f);
  CHECK(hflip(flipped).v == img.v);
}

TEST_SUITE_END();
