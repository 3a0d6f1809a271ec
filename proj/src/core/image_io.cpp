#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

#include "sslp/core/image.hpp"

namespace sslp {

namespace {

std::uint8_t to_byte(float v) {
  float x = std::min(1.0f, std::max(0.0f, v));
  return static_cast<std::uint8_t>(std::lround(x * 255.0f));
}

float from_byte(std::uint8_t b) { return static_cast<float>(b) / 255.0f; }

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

Image read_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  SSLP_CHECK(fp, "cannot open PNG file: ", path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  SSLP_CHECK(png, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    SSLP_CHECK(false, "png_create_info_struct failed");
  }
  std::vector<png_bytep> row_ptrs;
  std::vector<std::uint8_t> raw;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("failed to decode PNG: " + path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  png_uint_32 w = png_get_image_width(png, info);
  png_uint_32 h = png_get_image_height(png, info);
  png_byte color = png_get_color_type(png, info);
  png_byte depth = png_get_bit_depth(png, info);

  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const int channels = png_get_channels(png, info);
  SSLP_CHECK(channels == 1 || channels == 3, "unsupported PNG channel count ", channels,
             " in ", path);
  raw.resize(static_cast<std::size_t>(h) * w * channels);
  row_ptrs.resize(h);
  for (png_uint_32 y = 0; y < h; ++y)
    row_ptrs[y] = raw.data() + static_cast<std::size_t>(y) * w * channels;
  png_read_image(png, row_ptrs.data());
  png_destroy_read_struct(&png, &info, nullptr);

  Image img(channels, static_cast<int>(h), static_cast<int>(w));
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < channels; ++c)
        img.at(c, y, x) = from_byte(raw[(static_cast<std::size_t>(y) * w + x) * channels + c]);
  return img;
}

void write_png(const std::string& path, const Image& img) {
  SSLP_CHECK(img.channels == 1 || img.channels == 3, "PNG writer expects 1 or 3 channels");
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  SSLP_CHECK(fp, "cannot open for writing: ", path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  SSLP_CHECK(png, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    SSLP_CHECK(false, "png_create_info_struct failed");
  }
  std::vector<std::uint8_t> raw(static_cast<std::size_t>(img.height) * img.width * img.channels);
  std::vector<png_bytep> row_ptrs(img.height);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("failed to encode PNG: " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, img.width, img.height, 8,
               img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < img.channels; ++c)
        raw[(static_cast<std::size_t>(y) * img.width + x) * img.channels + c] =
            to_byte(img.at(c, y, x));
    row_ptrs[y] = raw.data() + static_cast<std::size_t>(y) * img.width * img.channels;
  }
  png_write_image(png, row_ptrs.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Image read_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  SSLP_CHECK(in, "cannot open PNM file: ", path);
  std::string magic;
  in >> magic;
  SSLP_CHECK(magic == "P6" || magic == "P5", "unsupported PNM magic '", magic, "' in ", path);
  const int channels = magic == "P6" ? 3 : 1;

  auto next_int = [&](const char* what) {
    // skip whitespace and '#' comments
    int c = in.peek();
    while (c == '#' || std::isspace(c)) {
      if (c == '#') in.ignore(1 << 16, '\n');
      else in.get();
      c = in.peek();
    }
    int value = -1;
    in >> value;
    SSLP_CHECK(in && value >= 0, "malformed PNM header (", what, ") in ", path);
    return value;
  };
  const int w = next_int("width");
  const int h = next_int("height");
  const int maxval = next_int("maxval");
  SSLP_CHECK(maxval == 255, "only maxval 255 PNM supported, got ", maxval, " in ", path);
  in.get();  // single whitespace after maxval

  std::vector<std::uint8_t> raw(static_cast<std::size_t>(w) * h * channels);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  SSLP_CHECK(in.gcount() == static_cast<std::streamsize>(raw.size()),
             "truncated PNM payload in ", path);

  Image img(channels, h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < channels; ++c)
        img.at(c, y, x) = from_byte(raw[(static_cast<std::size_t>(y) * w + x) * channels + c]);
  return img;
}

void write_pnm(const std::string& path, const Image& img) {
  SSLP_CHECK(img.channels == 1 || img.channels == 3, "PNM writer expects 1 or 3 channels");
  std::ofstream out(path, std::ios::binary);
  SSLP_CHECK(out, "cannot open for writing: ", path);
  out << (img.channels == 3 ? "P6" : "P5") << "\n"
      << img.width << " " << img.height << "\n255\n";
  std::vector<std::uint8_t> raw(static_cast<std::size_t>(img.width) * img.height * img.channels);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < img.channels; ++c)
        raw[(static_cast<std::size_t>(y) * img.width + x) * img.channels + c] =
            to_byte(img.at(c, y, x));
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  SSLP_CHECK(out, "short write: ", path);
}

Image read_image(const std::string& path) {
  if (ends_with(path, ".png")) return read_png(path);
  if (ends_with(path, ".ppm") || ends_with(path, ".pgm")) return read_pnm(path);
  SSLP_CHECK(false, "unsupported image extension: ", path);
  return {};
}

void write_image(const std::string& path, const Image& img) {
  if (ends_with(path, ".png")) return write_png(path, img);
  if (ends_with(path, ".ppm") || ends_with(path, ".pgm")) return write_pnm(path, img);
  SSLP_CHECK(false, "unsupported image extension: ", path);
}

}  // namespace sslp
