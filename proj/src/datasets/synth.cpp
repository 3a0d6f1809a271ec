#include <cmath>

#include "sslp/core/parallel.hpp"
#include "sslp/datasets.hpp"

namespace sslp::data {

namespace {

constexpr double kPi = 3.14159265358979323846;

// unit-coordinate membership tests; (u, v) is the pixel offset from the
// shape center divided by its radius, already rotated
bool inside_shape(int shape, double u, double v) {
  switch (shape) {
    case 0:  // circle
      return u * u + v * v <= 1.0;
    case 1: {  // triangle, apex up
      // vertices at angles 90/210/330 degrees on the unit circle
      const double x0 = 0.0, y0 = -1.0;
      const double x1 = -0.866, y1 = 0.5;
      const double x2 = 0.866, y2 = 0.5;
      auto side = [&](double ax, double ay, double bx, double by) {
        return (bx - ax) * (v - ay) - (by - ay) * (u - ax);
      };
      const double s0 = side(x0, y0, x1, y1);
      const double s1 = side(x1, y1, x2, y2);
      const double s2 = side(x2, y2, x0, y0);
      return (s0 >= 0 && s1 >= 0 && s2 >= 0) || (s0 <= 0 && s1 <= 0 && s2 <= 0);
    }
    case 2:  // square
      return std::max(std::abs(u), std::abs(v)) <= 0.78;
    case 3:  // cross
      return (std::abs(u) <= 0.32 && std::abs(v) <= 1.0) ||
             (std::abs(v) <= 0.32 && std::abs(u) <= 1.0);
    case 4:  // diamond
      return std::abs(u) + std::abs(v) <= 1.05;
    case 5: {  // four-point star (astroid)
      const double s = std::sqrt(std::abs(u)) + std::sqrt(std::abs(v));
      return s * s <= 1.15;
    }
    case 6: {  // ring
      const double r = std::sqrt(u * u + v * v);
      return r >= 0.55 && r <= 1.0;
    }
    default: return false;
  }
}

// texture palette: one fixed characteristic color per texture index
const std::array<std::array<float, 3>, 7> kTexColor = {{
    {0.95f, 0.25f, 0.25f},  // red
    {0.25f, 0.85f, 0.30f},  // green
    {0.30f, 0.45f, 0.95f},  // blue
    {0.95f, 0.85f, 0.25f},  // yellow
    {0.85f, 0.30f, 0.85f},  // magenta
    {0.30f, 0.85f, 0.85f},  // cyan
    {0.95f, 0.55f, 0.20f},  // orange
}};

double hash_noise(std::uint64_t key, int x, int y) {
  std::uint64_t h = Rng::combine(key, (static_cast<std::uint64_t>(x) << 20) ^
                                          static_cast<std::uint64_t>(y));
  return static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

// oscillation in [-1, 1] for texture t at pixel (x, y)
double texture_value(int t, double x, double y, double phase, std::uint64_t noise_key) {
  const double p = 3.0;  // stripe period in pixels: high frequency, so
                         // smoothing in the prior filter suppresses it
  switch (t % 7) {
    case 0: return std::sin(2.0 * kPi * y / p + phase);
    case 1: return std::sin(2.0 * kPi * x / p + phase);
    case 2: return std::sin(2.0 * kPi * (x + y) / (p * 1.41421356) + phase);
    case 3:  // checker
      return std::tanh(3.0 * std::sin(2.0 * kPi * x / p + phase) *
                       std::sin(2.0 * kPi * y / p + phase));
    case 4: {  // radial ripples
      const double r = std::sqrt(x * x + y * y);
      return std::sin(2.0 * kPi * r / p + phase);
    }
    case 5:  // binary pixel noise
      return hash_noise(noise_key, static_cast<int>(x), static_cast<int>(y)) > 0 ? 1.0 : -1.0;
    case 6: {  // coarse blobs
      const int bx = static_cast<int>(std::floor(x / 3.0));
      const int by = static_cast<int>(std::floor(y / 3.0));
      return hash_noise(noise_key, bx, by);
    }
    default: return 0.0;
  }
}

}  // namespace

int synth_shape_template_count() { return 7; }

LabeledDataset synth_shapes_textures(const SynthConfig& cfg) {
  SSLP_CHECK(cfg.classes >= 2, "need at least 2 classes");
  SSLP_CHECK(cfg.classes <= synth_shape_template_count(), "classes=", cfg.classes,
             " exceeds the ", synth_shape_template_count(), " available shape templates");
  SSLP_CHECK(cfg.spurious_strength >= 0.0 && cfg.spurious_strength <= 1.0,
             "spurious_strength must lie in [0,1]");
  SSLP_CHECK(cfg.size >= 16, "images smaller than 16x16 are not useful here");

  const int n = cfg.n_per_class * cfg.classes;
  LabeledDataset ds;
  ds.name = "synth_shapes_textures";
  ds.class_count = cfg.classes;
  ds.images.resize(static_cast<std::size_t>(n));
  ds.labels.resize(static_cast<std::size_t>(n));
  ds.attributes["texture"].resize(static_cast<std::size_t>(n));

  const Rng root(Rng::mix(cfg.seed));
  par::parallel_for(n, [&](std::int64_t i) {
    const int label = static_cast<int>(i) % cfg.classes;
    Rng rng = root.substream({static_cast<std::uint64_t>(i)});

    int texture;
    if (rng.uniform() < cfg.spurious_strength) texture = label;
    else texture = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(cfg.classes)));

    const double cx = cfg.size * rng.uniform(0.40, 0.60);
    const double cy = cfg.size * rng.uniform(0.40, 0.60);
    const double radius = cfg.size * rng.uniform(0.26, 0.36);
    const double theta = rng.uniform(0.0, 2.0 * kPi);
    const double phase = rng.uniform(0.0, 2.0 * kPi);
    const double bg = rng.uniform(0.16, 0.26);
    const double fill_base = rng.uniform(0.62, 0.72);
    const std::uint64_t noise_key = rng.next_u64();
    const double ct = std::cos(theta), st = std::sin(theta);

    Image img(3, cfg.size, cfg.size);
    for (int y = 0; y < cfg.size; ++y) {
      for (int x = 0; x < cfg.size; ++x) {
        // 2x2 supersampled membership for soft edges
        int hits = 0;
        for (int sy = 0; sy < 2; ++sy)
          for (int sx = 0; sx < 2; ++sx) {
            const double px = x + 0.25 + 0.5 * sx - cx;
            const double py = y + 0.25 + 0.5 * sy - cy;
            const double u = (ct * px + st * py) / radius;
            const double v = (-st * px + ct * py) / radius;
            if (inside_shape(label, u, v)) ++hits;
          }
        const double alpha = hits / 4.0;
        const double tex = texture_value(texture, x, y, phase, noise_key);
        const double lum = fill_base + cfg.texture_amplitude * 0.5 * tex;
        for (int c = 0; c < 3; ++c) {
          const double fill = lum * kTexColor[static_cast<std::size_t>(texture) % 7][c] /
                              0.7;  // renormalize palette brightness
          const double value = alpha * fill + (1.0 - alpha) * bg;
          img.at(c, y, x) = static_cast<float>(std::min(1.0, std::max(0.0, value)));
        }
      }
    }
    ds.images[static_cast<std::size_t>(i)] = std::move(img);
    ds.labels[static_cast<std::size_t>(i)] = label;
    ds.attributes["texture"][static_cast<std::size_t>(i)] = texture;
  });

  ds.validate();
  return ds;
}

}  // namespace sslp::data
