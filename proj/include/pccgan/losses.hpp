#pragma once

#include <span>
#include <string>
#include <vector>

#include "pccgan/tensor.hpp"

namespace pccgan {

/// Least-squares adversarial objective for one CGAN.
///   discriminator = mean[(D(real) - 1)^2] + mean[D(fake)^2]
///   generator     = mean[(D(fake) - 1)^2]
struct AdversarialTerms {
  double generator = 0.0;
  double discriminator = 0.0;
};

/// Partial derivatives of AdversarialTerms w.r.t. every score.
struct AdversarialGradients {
  std::vector<double> generator_wrt_fake;
  std::vector<double> discriminator_wrt_real;
  std::vector<double> discriminator_wrt_fake;
};

AdversarialTerms least_squares_adversarial(std::span<const double> real_scores, std::span<const double> fake_scores);
AdversarialGradients least_squares_adversarial_gradients(std::span<const double> real_scores,
                                                         std::span<const double> fake_scores);

/// Generator half alone: mean[(D(fake) - 1)^2] and its gradient.
double least_squares_generator_term(std::span<const double> fake_scores);
std::vector<double> least_squares_generator_gradient(std::span<const double> fake_scores);

/// CT->MRI CGAN: real = target-modality images, fake = translations.
inline AdversarialTerms adversarial_loss_forward(std::span<const double> real, std::span<const double> fake) {
  return least_squares_adversarial(real, fake);
}
/// MRI->CT CGAN: real = input-modality images, fake = back-translations.
inline AdversarialTerms adversarial_loss_backward(std::span<const double> real, std::span<const double> fake) {
  return least_squares_adversarial(real, fake);
}

enum class ReconstructionNorm { L1, L2 };

std::string to_string(ReconstructionNorm n);
ReconstructionNorm parse_norm(const std::string& text);

/// mean |a - b| (L1) or mean (a - b)^2 (L2). When `grad` is non-null it
/// receives d/da scaled by `weight`, added to any existing contents.
template <typename T>
double reconstruction_term(const Tensor<T>& a, const Tensor<T>& b, ReconstructionNorm norm,
                           Tensor<T>* grad = nullptr, double weight = 1.0);

/// mean|G_b(G_f(x)) - x| + mean|G_f(G_b(y)) - y|
template <typename T>
double cyclic_loss(const Tensor<T>& x, const Tensor<T>& x_cycled, const Tensor<T>& y, const Tensor<T>& y_cycled,
                   ReconstructionNorm norm = ReconstructionNorm::L1);

/// mean|G_f(y) - y| + mean|G_b(x) - x|
template <typename T>
double identity_loss(const Tensor<T>& fwd_on_target, const Tensor<T>& target, const Tensor<T>& back_on_input,
                     const Tensor<T>& input, ReconstructionNorm norm = ReconstructionNorm::L1);

struct LossWeights {
  double gamma = 1.5;
  void validate() const;
};

struct LossComponents {
  double cgan1 = 0.0;  // generator term, CT->MRI
  double cgan2 = 0.0;  // generator term, MRI->CT on back-translations
  double cyc = 0.0;
  double id = 0.0;
};

/// gamma (L_CGAN1 + L_CGAN2) + L_cyc + L_id
double total_loss(const LossComponents& c, const LossWeights& w);

}  // namespace pccgan
