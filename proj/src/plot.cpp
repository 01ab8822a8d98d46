#include "pccgan/plot.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

namespace pccgan {
namespace {

using Glyph = std::array<unsigned char, 7>;

const Glyph& glyph(char c) {
  static const std::map<char, Glyph> font = {
      {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}}, {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
      {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}}, {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
      {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}}, {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
      {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}}, {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
      {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}}, {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
      {'A', {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}}, {'B', {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E}},
      {'C', {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}}, {'D', {0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C}},
      {'E', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}}, {'F', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10}},
      {'G', {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}}, {'H', {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
      {'I', {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}}, {'J', {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C}},
      {'K', {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}}, {'L', {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F}},
      {'M', {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}}, {'N', {0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11}},
      {'O', {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}}, {'P', {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10}},
      {'Q', {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D}}, {'R', {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11}},
      {'S', {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}}, {'T', {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04}},
      {'U', {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}}, {'V', {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04}},
      {'W', {0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A}}, {'X', {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11}},
      {'Y', {0x11, 0x11, 0x11, 0x0A, 0x04, 0x04, 0x04}}, {'Z', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F}},
      {' ', {0, 0, 0, 0, 0, 0, 0}},                      {'.', {0, 0, 0, 0, 0, 0x0C, 0x0C}},
      {',', {0, 0, 0, 0, 0x0C, 0x04, 0x08}},             {'-', {0, 0, 0, 0x1F, 0, 0, 0}},
      {'+', {0, 0x04, 0x04, 0x1F, 0x04, 0x04, 0}},       {'/', {0, 0x01, 0x02, 0x04, 0x08, 0x10, 0}},
      {'(', {0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02}}, {')', {0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08}},
      {'_', {0, 0, 0, 0, 0, 0, 0x1F}},                   {':', {0, 0x0C, 0x0C, 0, 0x0C, 0x0C, 0}},
      {'=', {0, 0, 0x1F, 0, 0x1F, 0, 0}},                {'%', {0x18, 0x19, 0x02, 0x04, 0x08, 0x13, 0x03}},
      {'<', {0x02, 0x04, 0x08, 0x10, 0x08, 0x04, 0x02}}, {'>', {0x08, 0x04, 0x02, 0x01, 0x02, 0x04, 0x08}},
      {'?', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x00, 0x04}},
  };
  auto it = font.find(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return it == font.end() ? font.at('?') : it->second;
}

std::string short_number(double v) {
  char buf[32];
  if (!std::isfinite(v)) return v > 0 ? "INF" : "NAN";
  const double a = std::abs(v);
  std::snprintf(buf, sizeof(buf), a >= 100 ? "%.0f" : a >= 10 ? "%.1f" : a >= 1 ? "%.2f" : "%.3f", v);
  return buf;
}

// Series shades, dark to light, all distinguishable from the white background.
float shade(std::size_t s, std::size_t n) {
  if (n <= 1) return 0.35f;
  return 0.15f + 0.6f * static_cast<float>(s) / static_cast<float>(n - 1);
}

}  // namespace

Canvas::Canvas(int width, int height, float background)
    : img_(width, height, 1, IntensityRange::Unit, background) {}

void Canvas::set(int x, int y, float v) {
  if (x >= 0 && y >= 0 && x < img_.width() && y < img_.height()) img_.at(x, y) = v;
}

void Canvas::fill_rect(int x, int y, int w, int h, float value) {
  for (int yy = y; yy < y + h; ++yy)
    for (int xx = x; xx < x + w; ++xx) set(xx, yy, value);
}

void Canvas::frame_rect(int x, int y, int w, int h, float value) {
  line(x, y, x + w - 1, y, value);
  line(x, y + h - 1, x + w - 1, y + h - 1, value);
  line(x, y, x, y + h - 1, value);
  line(x + w - 1, y, x + w - 1, y + h - 1, value);
}

void Canvas::line(int x0, int y0, int x1, int y1, float value) {
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    set(x0, y0, value);
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

int Canvas::text_width(const std::string& s, int scale) { return static_cast<int>(s.size()) * 6 * scale; }

void Canvas::text(int x, int y, const std::string& s, float value, int scale) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Glyph& g = glyph(s[i]);
    const int ox = x + static_cast<int>(i) * 6 * scale;
    for (int row = 0; row < 7; ++row)
      for (int col = 0; col < 5; ++col)
        if (g[row] & (0x10 >> col)) fill_rect(ox + col * scale, y + row * scale, scale, scale, value);
  }
}

void Canvas::blit(const Image& img, int x, int y) {
  const Image u = img.to_unit();
  for (int yy = 0; yy < u.height(); ++yy)
    for (int xx = 0; xx < u.width(); ++xx) set(x + xx, y + yy, std::clamp(u.at(xx, yy), 0.0f, 1.0f));
}

Image render_bar_chart(const BarChart& chart, int width, int height) {
  Canvas c(width, height);
  const int left = 56, right = 12, top = 28, bottom = 40 + 12 * static_cast<int>((chart.series.size() + 2) / 3);
  const int pw = width - left - right, ph = height - top - bottom;
  c.text((width - Canvas::text_width(chart.title, 2)) / 2, 6, chart.title, 0.0f, 2);

  double lo = 0.0, hi = 0.0;
  for (const auto& g : chart.values)
    for (double v : g)
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
  if (hi - lo <= 0.0) hi = lo + 1.0;
  auto ypix = [&](double v) { return top + static_cast<int>(std::lround((hi - v) / (hi - lo) * ph)); };

  for (int t = 0; t <= 4; ++t) {
    const double v = lo + (hi - lo) * t / 4.0;
    const int y = ypix(v);
    c.line(left - 4, y, left + pw, y, 0.85f);
    const std::string lbl = short_number(v);
    c.text(left - 6 - Canvas::text_width(lbl), y - 3, lbl);
  }
  c.line(left, top, left, top + ph, 0.0f);
  c.line(left, ypix(0.0), left + pw, ypix(0.0), 0.0f);

  const std::size_t ng = chart.groups.size(), ns = std::max<std::size_t>(1, chart.series.size());
  if (ng > 0) {
    const int gw = pw / static_cast<int>(ng);
    const int bw = std::max(1, (gw - 8) / static_cast<int>(ns));
    for (std::size_t g = 0; g < ng; ++g) {
      const int gx = left + static_cast<int>(g) * gw + 4;
      for (std::size_t s = 0; s < ns; ++s) {
        const int x = gx + static_cast<int>(s) * bw;
        const double v = g < chart.values.size() && s < chart.values[g].size()
                             ? chart.values[g][s]
                             : std::numeric_limits<double>::quiet_NaN();
        if (!std::isfinite(v)) {
          c.text(x + (bw - 5) / 2, ypix(0.0) - 9, "X");
          continue;
        }
        const int y0 = ypix(std::max(v, 0.0)), y1 = ypix(std::min(v, 0.0));
        c.fill_rect(x, y0, std::max(1, bw - 1), std::max(1, y1 - y0), shade(s, ns));
      }
      std::string lbl = chart.groups[g];
      const int max_chars = std::max(1, gw / 6);
      if (static_cast<int>(lbl.size()) > max_chars) lbl = lbl.substr(0, max_chars);
      c.text(gx + (gw - 8 - Canvas::text_width(lbl)) / 2, top + ph + 6, lbl);
    }
  }
  for (std::size_t s = 0; s < chart.series.size(); ++s) {
    const int lx = left + static_cast<int>(s % 3) * (pw / 3);
    const int ly = top + ph + 22 + 12 * static_cast<int>(s / 3);
    c.fill_rect(lx, ly, 10, 7, shade(s, ns));
    c.text(lx + 14, ly, chart.series[s]);
  }
  return c.image();
}

Image render_line_chart(const LineChart& chart, int width, int height) {
  Canvas c(width, height);
  const int left = 56, right = 12, top = 28, bottom = 40 + 12 * static_cast<int>((chart.names.size() + 2) / 3);
  const int pw = width - left - right, ph = height - top - bottom;
  c.text((width - Canvas::text_width(chart.title, 2)) / 2, 6, chart.title, 0.0f, 2);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  std::size_t n = 0;
  for (const auto& s : chart.series) {
    n = std::max(n, s.size());
    for (double v : s)
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
  }
  if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
  if (hi - lo <= 0.0) hi = lo + 1.0;
  auto ypix = [&](double v) { return top + static_cast<int>(std::lround((hi - v) / (hi - lo) * ph)); };
  auto xpix = [&](std::size_t i) {
    return left + (n > 1 ? static_cast<int>(std::lround(static_cast<double>(i) / (n - 1) * pw)) : 0);
  };
  for (int t = 0; t <= 4; ++t) {
    const double v = lo + (hi - lo) * t / 4.0;
    c.line(left - 4, ypix(v), left + pw, ypix(v), 0.85f);
    const std::string lbl = short_number(v);
    c.text(left - 6 - Canvas::text_width(lbl), ypix(v) - 3, lbl);
  }
  c.frame_rect(left, top, pw + 1, ph + 1, 0.0f);
  const std::string xl = "STEP 1-" + std::to_string(n);
  c.text(left + (pw - Canvas::text_width(xl)) / 2, top + ph + 6, xl);
  for (std::size_t s = 0; s < chart.series.size(); ++s) {
    const float v = shade(s, chart.series.size());
    const auto& ys = chart.series[s];
    for (std::size_t i = 1; i < ys.size(); ++i)
      if (std::isfinite(ys[i - 1]) && std::isfinite(ys[i]))
        c.line(xpix(i - 1), ypix(ys[i - 1]), xpix(i), ypix(ys[i]), v);
    if (s < chart.names.size()) {
      const int lx = left + static_cast<int>(s % 3) * (pw / 3);
      const int ly = top + ph + 22 + 12 * static_cast<int>(s / 3);
      c.fill_rect(lx, ly + 3, 10, 2, v);
      c.text(lx + 14, ly, chart.names[s]);
    }
  }
  return c.image();
}

Image sample_grid(const std::vector<std::vector<Image>>& rows, int pad) {
  int cell_w = 0, cell_h = 0;
  std::size_t cols = 0;
  for (const auto& r : rows) {
    cols = std::max(cols, r.size());
    for (const auto& img : r) {
      cell_w = std::max(cell_w, img.width());
      cell_h = std::max(cell_h, img.height());
    }
  }
  const int W = pad + static_cast<int>(cols) * (cell_w + pad);
  const int H = pad + static_cast<int>(rows.size()) * (cell_h + pad);
  Canvas c(std::max(W, 1), std::max(H, 1));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t k = 0; k < rows[r].size(); ++k)
      c.blit(rows[r][k].channels() == 1 ? rows[r][k] : rows[r][k].channel(0),
             pad + static_cast<int>(k) * (cell_w + pad), pad + static_cast<int>(r) * (cell_h + pad));
  return c.image();
}

void save_plot(const Image& img, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  save_image(img, path, PngDepth::Bit8);
}

}  // namespace pccgan
