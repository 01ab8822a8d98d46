#pragma once
// Independent reference computations shared by the unit tests and the
// acceptance binary. Nothing here calls into the library's metric, conditioning
// or dictionary code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "pccgan/image.hpp"

namespace support {

inline pccgan::Image random_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  pccgan::Image img(w, h);
  for (auto& v : img.data()) v = u(rng);
  return img;
}

// Smooth blob field plus noise: high variance, structured, in [0,1].
inline pccgan::Image textured_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double fx = 2 + 4 * u(rng), fy = 2 + 4 * u(rng), ph = 6.28 * u(rng);
  pccgan::Image img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double s = 0.5 + 0.35 * std::sin(fx * x / w * 6.28 + ph) * std::cos(fy * y / h * 6.28) + 0.1 * (u(rng) - 0.5);
      img.at(x, y) = static_cast<float>(std::clamp(s, 0.0, 1.0));
    }
  return img;
}

inline std::vector<float> pixels(const pccgan::Image& a) { return {a.data().begin(), a.data().end()}; }

inline double display(float v) { return static_cast<double>(v) * 255.0; }

inline double brute_mse(const pccgan::Image& a, const pccgan::Image& b) {
  double s = 0.0;
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x) {
      const double d = display(a.at(x, y)) - display(b.at(x, y));
      s += d * d;
    }
  return s / (static_cast<double>(a.width()) * a.height());
}

inline double brute_rmse(const pccgan::Image& a, const pccgan::Image& b) { return std::sqrt(brute_mse(a, b)); }

inline double brute_psnr(const pccgan::Image& a, const pccgan::Image& b) {
  const double mse = brute_mse(a, b);
  if (mse == 0.0) return INFINITY;
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

// Direct per-window SSIM: every 11x11 window fully inside the image, Gaussian
// weights normalized over the window, population statistics.
inline double brute_ssim(const pccgan::Image& a, const pccgan::Image& b) {
  const int r = 5;
  const double sigma = 1.5;
  double wk[11][11], wsum = 0.0;
  for (int j = -r; j <= r; ++j)
    for (int i = -r; i <= r; ++i) {
      wk[j + r][i + r] = std::exp(-(i * i + j * j) / (2 * sigma * sigma));
      wsum += wk[j + r][i + r];
    }
  const double c1 = std::pow(0.01 * 255, 2), c2 = std::pow(0.03 * 255, 2);
  double total = 0.0;
  long count = 0;
  for (int cy = r; cy < a.height() - r; ++cy)
    for (int cx = r; cx < a.width() - r; ++cx) {
      double ma = 0, mb = 0;
      for (int j = -r; j <= r; ++j)
        for (int i = -r; i <= r; ++i) {
          const double w = wk[j + r][i + r] / wsum;
          ma += w * display(a.at(cx + i, cy + j));
          mb += w * display(b.at(cx + i, cy + j));
        }
      double va = 0, vb = 0, cov = 0;
      for (int j = -r; j <= r; ++j)
        for (int i = -r; i <= r; ++i) {
          const double w = wk[j + r][i + r] / wsum;
          const double da = display(a.at(cx + i, cy + j)) - ma, db = display(b.at(cx + i, cy + j)) - mb;
          va += w * da * da;
          vb += w * db * db;
          cov += w * da * db;
        }
      total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  return total / count;
}

// Integer-valued 64x64 pair whose SSIM was computed once with scikit-image's
// structural_similarity(gaussian_weights=True, sigma=1.5,
// use_sample_covariance=False, data_range=255) and frozen below.
inline pccgan::Image frozen_a() {
  pccgan::Image img(64, 64);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) img.at(x, y) = static_cast<float>(((x * 7 + y * 13 + (x * y) % 17) % 256) / 255.0);
  return img;
}
inline pccgan::Image frozen_b() {
  pccgan::Image img(64, 64);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) {
      const double a = (x * 7 + y * 13 + (x * y) % 17) % 256;
      const double v = std::clamp(std::round(a * 0.8 + ((x * 5 + y * 11) % 31) * 2.0), 0.0, 255.0);
      img.at(x, y) = static_cast<float>(v / 255.0);
    }
  return img;
}
inline pccgan::Image frozen_a_inverted() {
  pccgan::Image a = frozen_a(), out(64, 64);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) out.at(x, y) = static_cast<float>((255.0 - std::round(a.at(x, y) * 255.0)) / 255.0);
  return out;
}
inline constexpr double kFrozenSsimAB = 0.8005867623504886;
inline constexpr double kFrozenSsimAInv = -0.6774377368471133;

// 20*log10(255): PSNR at unit MSE on the display scale.
inline constexpr double kPsnrAtUnitMse = 48.13080360867910;

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("pccgan_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace support
