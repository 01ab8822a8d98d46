#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pccgan/image.hpp"

namespace pccgan {

/// Grayscale raster with a built-in 5x7 bitmap font. White background.
class Canvas {
 public:
  Canvas(int width, int height, float background = 1.0f);

  void fill_rect(int x, int y, int w, int h, float value);
  void frame_rect(int x, int y, int w, int h, float value);
  void line(int x0, int y0, int x1, int y1, float value);
  /// Draws text with its top-left corner at (x, y); `scale` enlarges pixels.
  void text(int x, int y, const std::string& s, float value = 0.0f, int scale = 1);
  void blit(const Image& img, int x, int y);

  static int text_width(const std::string& s, int scale = 1);
  static int text_height(int scale = 1) { return 7 * scale; }

  const Image& image() const { return img_; }

 private:
  void set(int x, int y, float v);
  Image img_;
};

/// Grouped bars: values[group][series]. NaN values are drawn as an "X".
struct BarChart {
  std::string title;
  std::vector<std::string> groups;
  std::vector<std::string> series;
  std::vector<std::vector<double>> values;
};

Image render_bar_chart(const BarChart& chart, int width = 720, int height = 360);

struct LineChart {
  std::string title;
  std::vector<std::string> names;
  std::vector<std::vector<double>> series;  // y values at x = 1, 2, ...
};

Image render_line_chart(const LineChart& chart, int width = 720, int height = 360);

/// Tiles images row by row with `pad` pixels of white between them. Every
/// image is shown in [0,1].
Image sample_grid(const std::vector<std::vector<Image>>& rows, int pad = 2);

void save_plot(const Image& img, const std::filesystem::path& path);

}  // namespace pccgan
