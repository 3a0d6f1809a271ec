#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>

#include "sslp/cli.hpp"

namespace sslp::cli {

namespace {

struct Color {
  float r, g, b;
};

const Color kSeriesColors[] = {
    {0.85f, 0.25f, 0.20f}, {0.20f, 0.45f, 0.85f}, {0.20f, 0.70f, 0.30f},
    {0.90f, 0.65f, 0.15f}, {0.60f, 0.30f, 0.75f}, {0.25f, 0.70f, 0.70f},
};
constexpr Color kBlack{0.15f, 0.15f, 0.15f};
constexpr Color kGrid{0.85f, 0.85f, 0.85f};

// 5x7 column-major glyphs, LSB = top row
const std::map<char, std::array<std::uint8_t, 5>>& font() {
  static const std::map<char, std::array<std::uint8_t, 5>> f = {
      {' ', {0x00, 0x00, 0x00, 0x00, 0x00}}, {'%', {0x23, 0x13, 0x08, 0x64, 0x62}},
      {'(', {0x00, 0x1C, 0x22, 0x41, 0x00}}, {')', {0x00, 0x41, 0x22, 0x1C, 0x00}},
      {'+', {0x08, 0x08, 0x3E, 0x08, 0x08}}, {',', {0x00, 0x50, 0x30, 0x00, 0x00}},
      {'-', {0x08, 0x08, 0x08, 0x08, 0x08}}, {'.', {0x00, 0x60, 0x60, 0x00, 0x00}},
      {'/', {0x20, 0x10, 0x08, 0x04, 0x02}}, {':', {0x00, 0x36, 0x36, 0x00, 0x00}},
      {'=', {0x14, 0x14, 0x14, 0x14, 0x14}}, {'_', {0x40, 0x40, 0x40, 0x40, 0x40}},
      {'0', {0x3E, 0x51, 0x49, 0x45, 0x3E}}, {'1', {0x00, 0x42, 0x7F, 0x40, 0x00}},
      {'2', {0x42, 0x61, 0x51, 0x49, 0x46}}, {'3', {0x21, 0x41, 0x45, 0x4B, 0x31}},
      {'4', {0x18, 0x14, 0x12, 0x7F, 0x10}}, {'5', {0x27, 0x45, 0x45, 0x45, 0x39}},
      {'6', {0x3C, 0x4A, 0x49, 0x49, 0x30}}, {'7', {0x01, 0x71, 0x09, 0x05, 0x03}},
      {'8', {0x36, 0x49, 0x49, 0x49, 0x36}}, {'9', {0x06, 0x49, 0x49, 0x29, 0x1E}},
      {'A', {0x7E, 0x11, 0x11, 0x11, 0x7E}}, {'B', {0x7F, 0x49, 0x49, 0x49, 0x36}},
      {'C', {0x3E, 0x41, 0x41, 0x41, 0x22}}, {'D', {0x7F, 0x41, 0x41, 0x22, 0x1C}},
      {'E', {0x7F, 0x49, 0x49, 0x49, 0x41}}, {'F', {0x7F, 0x09, 0x09, 0x09, 0x01}},
      {'G', {0x3E, 0x41, 0x49, 0x49, 0x7A}}, {'H', {0x7F, 0x08, 0x08, 0x08, 0x7F}},
      {'I', {0x00, 0x41, 0x7F, 0x41, 0x00}}, {'J', {0x20, 0x40, 0x41, 0x3F, 0x01}},
      {'K', {0x7F, 0x08, 0x14, 0x22, 0x41}}, {'L', {0x7F, 0x40, 0x40, 0x40, 0x40}},
      {'M', {0x7F, 0x02, 0x0C, 0x02, 0x7F}}, {'N', {0x7F, 0x04, 0x08, 0x10, 0x7F}},
      {'O', {0x3E, 0x41, 0x41, 0x41, 0x3E}}, {'P', {0x7F, 0x09, 0x09, 0x09, 0x06}},
      {'Q', {0x3E, 0x41, 0x51, 0x21, 0x5E}}, {'R', {0x7F, 0x09, 0x19, 0x29, 0x46}},
      {'S', {0x46, 0x49, 0x49, 0x49, 0x31}}, {'T', {0x01, 0x01, 0x7F, 0x01, 0x01}},
      {'U', {0x3F, 0x40, 0x40, 0x40, 0x3F}}, {'V', {0x1F, 0x20, 0x40, 0x20, 0x1F}},
      {'W', {0x3F, 0x40, 0x38, 0x40, 0x3F}}, {'X', {0x63, 0x14, 0x08, 0x14, 0x63}},
      {'Y', {0x07, 0x08, 0x70, 0x08, 0x07}}, {'Z', {0x61, 0x51, 0x49, 0x45, 0x43}},
  };
  return f;
}

struct Canvas {
  Image img;

  Canvas(int h, int w) : img(3, h, w, 1.0f) {}

  void set(int x, int y, const Color& c) {
    if (x < 0 || x >= img.width || y < 0 || y >= img.height) return;
    img.at(0, y, x) = c.r;
    img.at(1, y, x) = c.g;
    img.at(2, y, x) = c.b;
  }

  void hline(int x0, int x1, int y, const Color& c) {
    for (int x = std::min(x0, x1); x <= std::max(x0, x1); ++x) set(x, y, c);
  }
  void vline(int x, int y0, int y1, const Color& c) {
    for (int y = std::min(y0, y1); y <= std::max(y0, y1); ++y) set(x, y, c);
  }

  void line(int x0, int y0, int x1, int y1, const Color& c, int thick = 1) {
    const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
      for (int ty = 0; ty < thick; ++ty)
        for (int tx = 0; tx < thick; ++tx) set(x0 + tx, y0 + ty, c);
      if (x0 == x1 && y0 == y1) break;
      const int e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x0 += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y0 += sy;
      }
    }
  }

  void fill_rect(int x0, int y0, int x1, int y1, const Color& c) {
    for (int y = std::min(y0, y1); y <= std::max(y0, y1); ++y) hline(x0, x1, y, c);
  }

  void text(int x, int y, const std::string& s, const Color& c, int scale = 1) {
    int cx = x;
    for (char raw : s) {
      const char ch = static_cast<char>(std::toupper(static_cast<unsigned char>(raw)));
      auto it = font().find(ch);
      const auto& glyph = it != font().end() ? it->second : font().at(' ');
      for (int col = 0; col < 5; ++col)
        for (int row = 0; row < 7; ++row)
          if (glyph[static_cast<std::size_t>(col)] & (1u << row))
            for (int sy = 0; sy < scale; ++sy)
              for (int sx = 0; sx < scale; ++sx)
                set(cx + col * scale + sx, y + row * scale + sy, c);
      cx += 6 * scale;
    }
  }

  static int text_width(const std::string& s, int scale = 1) {
    return static_cast<int>(s.size()) * 6 * scale;
  }
};

std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

struct Axes {
  int x0, y0, x1, y1;  // plot area in pixels (y grows down)
  double xmin, xmax, ymin, ymax;

  int px(double x) const {
    return x0 + static_cast<int>(std::lround((x - xmin) / (xmax - xmin) * (x1 - x0)));
  }
  int py(double y) const {
    return y1 - static_cast<int>(std::lround((y - ymin) / (ymax - ymin) * (y1 - y0)));
  }
};

void draw_frame(Canvas& canvas, const Axes& ax, const std::string& title,
                const std::string& x_label, const std::string& y_label) {
  // horizontal grid + y ticks
  for (int i = 0; i <= 5; ++i) {
    const double v = ax.ymin + (ax.ymax - ax.ymin) * i / 5.0;
    const int y = ax.py(v);
    canvas.hline(ax.x0, ax.x1, y, kGrid);
    const std::string label = fmt_tick(v);
    canvas.text(ax.x0 - Canvas::text_width(label) - 6, y - 3, label, kBlack);
  }
  // x ticks
  for (int i = 0; i <= 5; ++i) {
    const double v = ax.xmin + (ax.xmax - ax.xmin) * i / 5.0;
    const int x = ax.px(v);
    canvas.vline(x, ax.y1, ax.y1 + 3, kBlack);
    const std::string label = fmt_tick(v);
    canvas.text(x - Canvas::text_width(label) / 2, ax.y1 + 8, label, kBlack);
  }
  canvas.hline(ax.x0, ax.x1, ax.y1, kBlack);
  canvas.vline(ax.x0, ax.y0, ax.y1, kBlack);
  canvas.text((ax.x0 + ax.x1) / 2 - Canvas::text_width(title, 2) / 2, 12, title, kBlack, 2);
  canvas.text((ax.x0 + ax.x1) / 2 - Canvas::text_width(x_label) / 2, ax.y1 + 24, x_label, kBlack);
  canvas.text(8, ax.y0 - 14, y_label, kBlack);
}

void draw_legend(Canvas& canvas, const Axes& ax, const std::vector<std::string>& labels) {
  int y = ax.y0 + 8;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const Color& c = kSeriesColors[i % std::size(kSeriesColors)];
    const int x = ax.x1 - 24 - Canvas::text_width(labels[i]);
    canvas.fill_rect(x - 16, y, x - 6, y + 6, c);
    canvas.text(x, y, labels[i], kBlack);
    y += 14;
  }
}

}  // namespace

void render_line_plot(const std::string& path, const std::vector<Series>& series,
                      const std::string& title, const std::string& x_label,
                      const std::string& y_label) {
  SSLP_CHECK(!series.empty(), "line plot needs at least one series");
  Canvas canvas(480, 720);
  Axes ax{70, 40, 690, 420, 0, 1, 0, 1};

  ax.xmin = ax.ymin = 1e300;
  ax.xmax = ax.ymax = -1e300;
  for (const Series& s : series)
    for (const auto& [x, y] : s.points) {
      ax.xmin = std::min(ax.xmin, x);
      ax.xmax = std::max(ax.xmax, x);
      ax.ymin = std::min(ax.ymin, y);
      ax.ymax = std::max(ax.ymax, y);
    }
  if (ax.xmax == ax.xmin) ax.xmax = ax.xmin + 1;
  const double pad = std::max(1.0, (ax.ymax - ax.ymin) * 0.1);
  ax.ymin = std::max(0.0, ax.ymin - pad);
  ax.ymax = ax.ymax + pad;

  draw_frame(canvas, ax, title, x_label, y_label);

  std::vector<std::string> labels;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const Color& c = kSeriesColors[i % std::size(kSeriesColors)];
    std::vector<std::pair<double, double>> pts = series[i].points;
    std::sort(pts.begin(), pts.end());
    for (std::size_t p = 1; p < pts.size(); ++p)
      canvas.line(ax.px(pts[p - 1].first), ax.py(pts[p - 1].second), ax.px(pts[p].first),
                  ax.py(pts[p].second), c, 2);
    for (const auto& [x, y] : pts)
      canvas.fill_rect(ax.px(x) - 2, ax.py(y) - 2, ax.px(x) + 2, ax.py(y) + 2, c);
    labels.push_back(series[i].label);
  }
  draw_legend(canvas, ax, labels);
  write_image(path, canvas.img);
}

void render_grouped_bars(const std::string& path, const std::vector<std::string>& series_labels,
                         const std::vector<BarGroup>& groups, const std::string& title,
                         const std::string& y_label) {
  SSLP_CHECK(!groups.empty() && !series_labels.empty(), "bar plot needs data");
  Canvas canvas(480, 720);
  Axes ax{70, 40, 690, 420, 0, 1, 0, 1};

  ax.ymin = 0.0;
  ax.ymax = 1.0;
  for (const BarGroup& g : groups)
    for (double v : g.values) ax.ymax = std::max(ax.ymax, v);
  ax.ymax *= 1.15;
  ax.xmin = 0.0;
  ax.xmax = 1.0;

  draw_frame(canvas, ax, title, "", y_label);

  const int ngroups = static_cast<int>(groups.size());
  const int nseries = static_cast<int>(series_labels.size());
  const double group_width = static_cast<double>(ax.x1 - ax.x0) / ngroups;
  const double bar_width = group_width * 0.7 / nseries;

  for (int g = 0; g < ngroups; ++g) {
    const double gx = ax.x0 + group_width * (g + 0.15);
    for (int s = 0; s < nseries; ++s) {
      const double v = s < static_cast<int>(groups[static_cast<std::size_t>(g)].values.size())
                           ? groups[static_cast<std::size_t>(g)].values[static_cast<std::size_t>(s)]
                           : 0.0;
      const int x0 = static_cast<int>(gx + s * bar_width);
      const int x1 = static_cast<int>(gx + (s + 1) * bar_width) - 2;
      canvas.fill_rect(x0, ax.py(v), x1, ax.y1 - 1, kSeriesColors[s % std::size(kSeriesColors)]);
    }
    const std::string& name = groups[static_cast<std::size_t>(g)].name;
    canvas.text(static_cast<int>(gx + group_width * 0.35 - Canvas::text_width(name) / 2.0),
                ax.y1 + 8, name, kBlack);
  }
  draw_legend(canvas, ax, series_labels);
  write_image(path, canvas.img);
}

}  // namespace sslp::cli
