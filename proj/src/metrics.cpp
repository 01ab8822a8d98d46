#include "pccgan/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace pccgan {
namespace {

void require_comparable(const Image& a, const Image& b, const char* what) {
  if (!a.same_shape(b)) throw std::invalid_argument(std::string(what) + ": image shapes differ");
  if (a.channels() != 1) throw std::invalid_argument(std::string(what) + ": single-channel images required");
}

std::vector<double> display_scale(const Image& img) {
  const Image unit = img.to_unit();
  std::vector<double> out(unit.size());
  auto src = unit.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = kDisplayMax * static_cast<double>(src[i]);
  return out;
}

double mean_squared_error(const Image& a, const Image& b) {
  const auto da = display_scale(a);
  const auto db = display_scale(b);
  double sum = 0.0;
  for (std::size_t i = 0; i < da.size(); ++i) {
    const double d = da[i] - db[i];
    sum += d * d;
  }
  return da.empty() ? 0.0 : sum / static_cast<double>(da.size());
}

// Valid-mode separable filtering: output is (w-k+1) x (h-k+1).
std::vector<double> filter_valid(const std::vector<double>& src, int w, int h,
                                 const std::vector<double>& kernel) {
  const int k = static_cast<int>(kernel.size());
  const int ow = w - k + 1;
  const int oh = h - k + 1;
  std::vector<double> rows(static_cast<std::size_t>(ow) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < k; ++i) s += kernel[i] * src[static_cast<std::size_t>(y) * w + x + i];
      rows[static_cast<std::size_t>(y) * ow + x] = s;
    }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < k; ++i) s += kernel[i] * rows[static_cast<std::size_t>(y + i) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = s;
    }
  return out;
}

}  // namespace

double rmse(const Image& a, const Image& b) {
  require_comparable(a, b, "rmse");
  return std::sqrt(mean_squared_error(a, b));
}

double psnr_from_mse(double mse) {
  if (mse < 0.0) throw std::invalid_argument("psnr: negative MSE");
  if (mse == 0.0) return kPsnrIdentical;
  return 10.0 * std::log10(kDisplayMax * kDisplayMax / mse);
}

double psnr(const Image& a, const Image& b) {
  require_comparable(a, b, "psnr");
  return psnr_from_mse(mean_squared_error(a, b));
}

double ssim(const Image& a, const Image& b, const SsimOptions& opts) {
  require_comparable(a, b, "ssim");
  if (a.width() < opts.window || a.height() < opts.window)
    throw std::invalid_argument("ssim: image smaller than the window");

  std::vector<double> kernel(opts.window);
  const int half = opts.window / 2;
  double norm = 0.0;
  for (int i = 0; i < opts.window; ++i) {
    const double t = i - half;
    kernel[i] = std::exp(-t * t / (2.0 * opts.sigma * opts.sigma));
    norm += kernel[i];
  }
  for (auto& v : kernel) v /= norm;

  const int w = a.width();
  const int h = a.height();
  const auto x = display_scale(a);
  const auto y = display_scale(b);
  std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto mu_x = filter_valid(x, w, h, kernel);
  const auto mu_y = filter_valid(y, w, h, kernel);
  const auto e_xx = filter_valid(xx, w, h, kernel);
  const auto e_yy = filter_valid(yy, w, h, kernel);
  const auto e_xy = filter_valid(xy, w, h, kernel);

  const double c1 = (opts.k1 * kDisplayMax) * (opts.k1 * kDisplayMax);
  const double c2 = (opts.k2 * kDisplayMax) * (opts.k2 * kDisplayMax);
  double total = 0.0;
  for (std::size_t i = 0; i < mu_x.size(); ++i) {
    const double mx = mu_x[i];
    const double my = mu_y[i];
    const double vx = e_xx[i] - mx * mx;
    const double vy = e_yy[i] - my * my;
    const double cxy = e_xy[i] - mx * my;
    total += ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
  }
  return total / static_cast<double>(mu_x.size());
}

MetricReport compare(const Image& a, const Image& b) {
  return {rmse(a, b), psnr(a, b), ssim(a, b)};
}

}  // namespace pccgan
