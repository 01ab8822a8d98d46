#include "pccgan/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace pccgan {

void PhantomSpec::validate() const {
  if (size <= 0 || size % 64 != 0)
    throw std::invalid_argument("PhantomSpec: size must be a positive multiple of 64");
  if (num_shapes < 1) throw std::invalid_argument("PhantomSpec: num_shapes must be >= 1");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
    throw std::invalid_argument("PhantomSpec: noise_sigma must be finite and >= 0");
}

double mri_contrast(double v) {
  if (v < 0.1) return 0.0;
  return 0.95 - 0.75 * std::pow(v, 1.5);
}

double inverse_mri_contrast(double m) {
  if (m <= 0.0) return 0.0;
  return std::pow((0.95 - m) / 0.75, 2.0 / 3.0);
}

PhantomLayers generate_phantom_layers(const PhantomSpec& spec) {
  spec.validate();
  const int n = spec.size;
  std::mt19937_64 rng(spec.seed);
  auto uniform = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  PhantomLayers layers{Image(n, n), Image(n, n), Image(n, n), Image(n, n)};

  // Ellipses painted in order; later shapes overwrite earlier ones.
  for (int s = 0; s < spec.num_shapes; ++s) {
    const double cx = uniform(0.25, 0.75) * n;
    const double cy = uniform(0.25, 0.75) * n;
    const double ax = uniform(0.08, 0.35) * n;
    const double ay = uniform(0.08, 0.35) * n;
    const double theta = uniform(0.0, std::numbers::pi);
    const double level = uniform(kTissueMin, 1.0);
    const double c = std::cos(theta);
    const double sn = std::sin(theta);
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) {
        const double dx = x + 0.5 - cx;
        const double dy = y + 0.5 - cy;
        const double u = (c * dx + sn * dy) / ax;
        const double v = (-sn * dx + c * dy) / ay;
        if (u * u + v * v <= 1.0) layers.ct_clean.at(x, y) = static_cast<float>(level);
      }
  }

  // Texture: three low-frequency plane waves, masked to tissue.
  constexpr int kWaves = 3;
  constexpr double kAmplitude = 0.015;
  double fx[kWaves], fy[kWaves], phase[kWaves];
  for (int k = 0; k < kWaves; ++k) {
    fx[k] = uniform(1.0, 4.0);
    fy[k] = uniform(1.0, 4.0);
    phase[k] = uniform(0.0, 2.0 * std::numbers::pi);
  }
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      if (layers.ct_clean.at(x, y) < 0.1f) continue;
      double t = 0.0;
      for (int k = 0; k < kWaves; ++k)
        t += std::sin(2.0 * std::numbers::pi * (fx[k] * x + fy[k] * y) / n + phase[k]);
      layers.texture.at(x, y) = static_cast<float>(kAmplitude * t);
    }

  if (spec.noise_sigma > 0.0) {
    for (auto* img : {&layers.ct_noise, &layers.mri_noise})
      for (auto& v : img->data())
        v = static_cast<float>(std::normal_distribution<double>(0.0, spec.noise_sigma)(rng));
  }
  return layers;
}

PhantomPair generate_phantom_pair(const PhantomSpec& spec) {
  const PhantomLayers layers = generate_phantom_layers(spec);
  const int n = spec.size;
  PhantomPair pair{Image(n, n), Image(n, n)};
  auto clean = layers.ct_clean.data();
  auto tex = layers.texture.data();
  auto ctn = layers.ct_noise.data();
  auto mrn = layers.mri_noise.data();
  auto ct = pair.ct.data();
  auto mri = pair.mri.data();
  for (std::size_t i = 0; i < ct.size(); ++i) {
    ct[i] = std::clamp(clean[i] + ctn[i], 0.0f, 1.0f);
    const float remapped = static_cast<float>(mri_contrast(clean[i]));
    mri[i] = std::clamp(remapped + tex[i] + mrn[i], 0.0f, 1.0f);
  }
  return pair;
}

}  // namespace pccgan
