#pragma once

#include <limits>

#include "pccgan/image.hpp"

namespace pccgan {

/// All metrics run on the 8-bit display scale: intensities are mapped to
/// [0,1] and multiplied by 255 before comparison.
inline constexpr double kDisplayMax = 255.0;

/// Returned by psnr() for identical images.
inline constexpr double kPsnrIdentical = std::numeric_limits<double>::infinity();

struct MetricReport {
  double rmse = 0.0;
  double psnr = 0.0;
  double ssim = 0.0;
};

struct SsimOptions {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

double rmse(const Image& a, const Image& b);
double psnr(const Image& a, const Image& b);
double psnr_from_mse(double mse);

/// Mean local SSIM over all window positions lying fully inside the image,
/// Gaussian-weighted window.
double ssim(const Image& a, const Image& b, const SsimOptions& opts = {});

MetricReport compare(const Image& a, const Image& b);

}  // namespace pccgan
