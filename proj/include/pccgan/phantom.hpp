#pragma once

#include <cstdint>

#include "pccgan/image.hpp"

namespace pccgan {

struct PhantomSpec {
  int size = 64;          // must be a multiple of 64
  int num_shapes = 6;
  std::uint64_t seed = 0;
  double noise_sigma = 0.01;

  void validate() const;
};

/// Shape intensities of the pseudo-CT are drawn from [kTissueMin, 1] on a
/// zero background.
inline constexpr double kTissueMin = 0.2;

/// Fixed cross-modal contrast map taking a noiseless pseudo-CT intensity to
/// its pseudo-MRI counterpart. Background (< 0.1) stays at 0; tissue is
/// inverted through 0.95 - 0.75 v^1.5, which is strictly decreasing on
/// [kTissueMin, 1] and hence invertible there.
double mri_contrast(double ct_intensity);
double inverse_mri_contrast(double mri_intensity);

/// Every intermediate of the phantom construction, exposed so the pair can be
/// checked against the documented recipe.
struct PhantomLayers {
  Image ct_clean;   // piecewise-constant ellipse phantom
  Image texture;    // band-limited texture, zero outside tissue
  Image ct_noise;   // additive Gaussian noise for the pseudo-CT
  Image mri_noise;  // additive Gaussian noise for the pseudo-MRI
};

PhantomLayers generate_phantom_layers(const PhantomSpec& spec);

struct PhantomPair {
  Image ct;
  Image mri;
};

/// pseudo-CT  = clamp(ct_clean + ct_noise)
/// pseudo-MRI = clamp(mri_contrast(ct_clean) + texture + mri_noise)
PhantomPair generate_phantom_pair(const PhantomSpec& spec);

}  // namespace pccgan
