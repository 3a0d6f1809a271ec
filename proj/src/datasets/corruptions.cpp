#include <algorithm>
#include <cmath>

#include "sslp/core/parallel.hpp"
#include "sslp/datasets.hpp"
#include "sslp/priors.hpp"

#include "generated/corruption_table.hpp"

namespace sslp::data {

namespace {

constexpr double kPi = 3.14159265358979323846;

double severity_param(const CorruptionSpec& spec, const char* field) {
  const nlohmann::json& entry = corruption_severity_table().at(spec.kind);
  return entry.at(field).at(static_cast<std::size_t>(spec.severity - 1)).get<double>();
}

void check_spec(const CorruptionSpec& spec) {
  const auto& kinds = implemented_corruptions();
  if (std::find(kinds.begin(), kinds.end(), spec.kind) == kinds.end()) {
    std::string list;
    for (const std::string& k : kinds) list += (list.empty() ? "" : ", ") + k;
    SSLP_CHECK(false, "corruption '", spec.kind,
               "' is out of scope; implemented kinds: ", list);
  }
  SSLP_CHECK(spec.severity >= 1 && spec.severity <= 5, "severity must lie in [1,5], got ",
             spec.severity);
}

// smooth multi-octave value noise in [0,1], bilinearly upsampled grids
Image value_noise(int h, int w, Rng& rng, int octaves, double decay) {
  Image acc(1, h, w);
  double weight = 1.0, total = 0.0;
  int cells = 4;
  for (int o = 0; o < octaves; ++o) {
    Image grid(1, cells, cells);
    for (float& g : grid.v) g = static_cast<float>(rng.uniform());
    Image up = resize_bilinear(grid, h, w);
    for (std::size_t i = 0; i < acc.v.size(); ++i)
      acc.v[i] += static_cast<float>(weight) * up.v[i];
    total += weight;
    weight *= decay;
    cells = std::min(cells * 2, std::max(h, w));
  }
  for (float& v : acc.v) v = static_cast<float>(v / total);
  return acc;
}

Image disk_blur(const Image& img, double radius) {
  const int r = static_cast<int>(std::ceil(radius));
  const int k = 2 * r + 1;
  std::vector<double> kernel(static_cast<std::size_t>(k) * k, 0.0);
  double sum = 0.0;
  for (int y = -r; y <= r; ++y)
    for (int x = -r; x <= r; ++x)
      if (y * y + x * x <= radius * radius + 1e-9) {
        kernel[static_cast<std::size_t>(y + r) * k + (x + r)] = 1.0;
        sum += 1.0;
      }
  for (double& v : kernel) v /= sum;

  auto reflect = [](int i, int n) {
    while (i < 0 || i >= n) {
      if (i < 0) i = -i;
      if (i >= n) i = 2 * n - 2 - i;
    }
    return i;
  };
  Image out(img.channels, img.height, img.width);
  for (int c = 0; c < img.channels; ++c) {
    const float* src = img.plane(c);
    float* dst = out.plane(c);
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) {
        double acc = 0.0;
        for (int ky = -r; ky <= r; ++ky)
          for (int kx = -r; kx <= r; ++kx) {
            const double kv = kernel[static_cast<std::size_t>(ky + r) * k + (kx + r)];
            if (kv == 0.0) continue;
            acc += kv * src[reflect(y + ky, img.height) * img.width + reflect(x + kx, img.width)];
          }
        dst[y * img.width + x] = static_cast<float>(acc);
      }
  }
  return out;
}

Image center_zoom(const Image& img, double zoom) {
  const int ch = std::max(2, static_cast<int>(std::lround(img.height / zoom)));
  const int cw = std::max(2, static_cast<int>(std::lround(img.width / zoom)));
  Image patch(img.channels, ch, cw);
  const int top = (img.height - ch) / 2, left = (img.width - cw) / 2;
  for (int c = 0; c < img.channels; ++c)
    for (int y = 0; y < ch; ++y)
      for (int x = 0; x < cw; ++x) patch.at(c, y, x) = img.at(c, top + y, left + x);
  return resize_bilinear(patch, img.height, img.width);
}

int poisson_like(double lambda, Rng& rng) {
  if (lambda <= 0.0) return 0;
  if (lambda > 30.0) {
    const double v = lambda + std::sqrt(lambda) * rng.normal();
    return std::max(0, static_cast<int>(std::lround(v)));
  }
  const double limit = std::exp(-lambda);
  double prod = rng.uniform();
  int count = 0;
  while (prod > limit) {
    prod *= rng.uniform();
    ++count;
  }
  return count;
}

// 8x8 DCT-II / inverse with the standard JPEG luminance table
const int kJpegBase[64] = {16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
                           14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
                           18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
                           49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};

Image jpeg_quantize(const Image& img, int quality) {
  const double scale = quality < 50 ? 5000.0 / quality : 200.0 - 2.0 * quality;
  double quant[64];
  for (int i = 0; i < 64; ++i)
    quant[i] = std::max(1.0, std::floor((kJpegBase[i] * scale + 50.0) / 100.0));

  double cosTab[8][8];
  for (int k = 0; k < 8; ++k)
    for (int n = 0; n < 8; ++n) cosTab[k][n] = std::cos((2.0 * n + 1.0) * k * kPi / 16.0);
  auto alpha = [](int k) { return k == 0 ? 0.35355339059327373 : 0.5; };

  Image out(img.channels, img.height, img.width);
  for (int c = 0; c < img.channels; ++c) {
    for (int by = 0; by < img.height; by += 8) {
      for (int bx = 0; bx < img.width; bx += 8) {
        double block[8][8], coef[8][8];
        for (int y = 0; y < 8; ++y)
          for (int x = 0; x < 8; ++x) {
            const int iy = std::min(by + y, img.height - 1);
            const int ix = std::min(bx + x, img.width - 1);
            block[y][x] = img.at(c, iy, ix) * 255.0 - 128.0;
          }
        for (int u = 0; u < 8; ++u)
          for (int v = 0; v < 8; ++v) {
            double acc = 0.0;
            for (int y = 0; y < 8; ++y)
              for (int x = 0; x < 8; ++x) acc += block[y][x] * cosTab[u][y] * cosTab[v][x];
            acc *= alpha(u) * alpha(v);
            const double q = quant[u * 8 + v];
            coef[u][v] = std::round(acc / q) * q;
          }
        for (int y = 0; y < 8; ++y)
          for (int x = 0; x < 8; ++x) {
            double acc = 0.0;
            for (int u = 0; u < 8; ++u)
              for (int v = 0; v < 8; ++v)
                acc += alpha(u) * alpha(v) * coef[u][v] * cosTab[u][y] * cosTab[v][x];
            const int iy = by + y, ix = bx + x;
            if (iy < img.height && ix < img.width)
              out.at(c, iy, ix) = static_cast<float>((acc + 128.0) / 255.0);
          }
      }
    }
  }
  return out;
}

}  // namespace

const nlohmann::json& corruption_severity_table() {
  static const nlohmann::json table = nlohmann::json::parse(detail::kCorruptionSeverityJson);
  return table;
}

const std::vector<std::string>& implemented_corruptions() {
  static const std::vector<std::string> kinds = {
      "gaussian_noise", "shot_noise", "impulse_noise",  "gaussian_blur",
      "defocus_blur",   "zoom_blur",  "contrast",       "pixelate",
      "jpeg_quantization", "fog",     "brightness",     "frost"};
  return kinds;
}

CorruptionGroup corruption_group(const std::string& kind) {
  const std::string g = corruption_severity_table().at(kind).at("group").get<std::string>();
  if (g == "noise") return CorruptionGroup::noise;
  if (g == "blur") return CorruptionGroup::blur;
  if (g == "weather") return CorruptionGroup::weather;
  if (g == "digital") return CorruptionGroup::digital;
  SSLP_CHECK(false, "bad group '", g, "' in severity table");
  return CorruptionGroup::noise;
}

const char* to_string(CorruptionGroup g) {
  switch (g) {
    case CorruptionGroup::noise: return "noise";
    case CorruptionGroup::blur: return "blur";
    case CorruptionGroup::weather: return "weather";
    case CorruptionGroup::digital: return "digital";
  }
  return "?";
}

Image corrupt_image(const Image& img, const CorruptionSpec& spec, Rng& rng) {
  check_spec(spec);
  Image out = img;

  if (spec.kind == "gaussian_noise") {
    const double sigma = severity_param(spec, "sigma");
    for (float& p : out.v) p = static_cast<float>(p + sigma * rng.normal());
  } else if (spec.kind == "shot_noise") {
    const double lam = severity_param(spec, "photons");
    for (float& p : out.v) p = static_cast<float>(poisson_like(p * lam, rng) / lam);
  } else if (spec.kind == "impulse_noise") {
    const double prob = severity_param(spec, "probability");
    for (float& p : out.v)
      if (rng.uniform() < prob) p = rng.uniform() < 0.5 ? 0.0f : 1.0f;
  } else if (spec.kind == "gaussian_blur") {
    const double sigma = severity_param(spec, "sigma");
    int k = static_cast<int>(std::ceil(4.0 * sigma)) | 1;
    k = std::min(k, std::min(img.height, img.width) | 1);
    if (k % 2 == 0) --k;
    out = priors::gaussian_smooth(img, sigma, std::max(3, k));
  } else if (spec.kind == "defocus_blur") {
    out = disk_blur(img, severity_param(spec, "radius"));
  } else if (spec.kind == "zoom_blur") {
    const double max_zoom = severity_param(spec, "max_zoom");
    const int steps = 6;
    Image acc(img.channels, img.height, img.width);
    for (int s = 0; s < steps; ++s) {
      const double z = 1.0 + (max_zoom - 1.0) * s / (steps - 1);
      const Image zoomed = s == 0 ? img : center_zoom(img, z);
      for (std::size_t i = 0; i < acc.v.size(); ++i) acc.v[i] += zoomed.v[i];
    }
    for (std::size_t i = 0; i < acc.v.size(); ++i) out.v[i] = acc.v[i] / steps;
  } else if (spec.kind == "contrast") {
    const double f = severity_param(spec, "factor");
    for (int c = 0; c < img.channels; ++c) {
      const float* src = img.plane(c);
      double mean = 0.0;
      for (std::size_t i = 0; i < img.pixels(); ++i) mean += src[i];
      mean /= static_cast<double>(img.pixels());
      float* dst = out.plane(c);
      for (std::size_t i = 0; i < img.pixels(); ++i)
        dst[i] = static_cast<float>((src[i] - mean) * f + mean);
    }
  } else if (spec.kind == "pixelate") {
    const double frac = severity_param(spec, "fraction");
    const int sh = std::max(2, static_cast<int>(std::lround(img.height * frac)));
    const int sw = std::max(2, static_cast<int>(std::lround(img.width * frac)));
    out = resize_nearest(resize_bilinear(img, sh, sw), img.height, img.width);
  } else if (spec.kind == "jpeg_quantization") {
    out = jpeg_quantize(img, static_cast<int>(severity_param(spec, "quality")));
  } else if (spec.kind == "fog") {
    const double t = severity_param(spec, "intensity");
    Image haze = value_noise(img.height, img.width, rng, 4, 0.55);
    for (int c = 0; c < img.channels; ++c) {
      float* dst = out.plane(c);
      for (std::size_t i = 0; i < img.pixels(); ++i) {
        const double fogv = 0.5 + 0.5 * haze.v[i];
        dst[i] = static_cast<float>((1.0 - t) * dst[i] + t * fogv);
      }
    }
  } else if (spec.kind == "brightness") {
    const double d = severity_param(spec, "delta");
    for (float& p : out.v) p = static_cast<float>(p + d);
  } else if (spec.kind == "frost") {
    const double wi = severity_param(spec, "image_weight");
    const double wf = severity_param(spec, "frost_weight");
    // procedural frost: sparse bright crystalline patches from
    // thresholded multi-octave noise
    Image noise = value_noise(img.height, img.width, rng, 5, 0.6);
    Image frost(1, img.height, img.width);
    for (std::size_t i = 0; i < frost.v.size(); ++i) {
      const double v = std::max(0.0, static_cast<double>(noise.v[i]) - 0.55) * 3.0;
      frost.v[i] = static_cast<float>(std::min(1.0, v));
    }
    for (int c = 0; c < img.channels; ++c) {
      float* dst = out.plane(c);
      for (std::size_t i = 0; i < img.pixels(); ++i)
        dst[i] = static_cast<float>(wi * dst[i] + wf * frost.v[i]);
    }
  }

  clamp01(out);
  return out;
}

LabeledDataset corrupt(const LabeledDataset& ds, const CorruptionSpec& spec, std::uint64_t seed) {
  check_spec(spec);
  LabeledDataset out = ds;
  out.name = ds.name + "_" + spec.kind + std::to_string(spec.severity);
  const Rng root(Rng::mix(Rng::combine(seed, 0x636F7272ull)));
  par::parallel_for(static_cast<std::int64_t>(ds.size()), [&](std::int64_t i) {
    Rng rng = root.substream({static_cast<std::uint64_t>(i)});
    out.images[static_cast<std::size_t>(i)] =
        corrupt_image(ds.images[static_cast<std::size_t>(i)], spec, rng);
  });
  return out;
}

}  // namespace sslp::data
