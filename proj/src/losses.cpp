#include "pccgan/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace pccgan {
namespace {

void require_finite(std::span<const double> v, const char* what) {
  for (double s : v)
    if (!std::isfinite(s)) throw std::domain_error(std::string(what) + ": non-finite discriminator score");
}

double mean_square_to(std::span<const double> v, double target) {
  if (v.empty()) throw std::invalid_argument("adversarial loss: empty score batch");
  double s = 0.0;
  for (double x : v) s += (x - target) * (x - target);
  return s / static_cast<double>(v.size());
}

}  // namespace

AdversarialTerms least_squares_adversarial(std::span<const double> real, std::span<const double> fake) {
  require_finite(real, "adversarial loss");
  require_finite(fake, "adversarial loss");
  return {mean_square_to(fake, 1.0), mean_square_to(real, 1.0) + mean_square_to(fake, 0.0)};
}

AdversarialGradients least_squares_adversarial_gradients(std::span<const double> real, std::span<const double> fake) {
  require_finite(real, "adversarial gradient");
  require_finite(fake, "adversarial gradient");
  AdversarialGradients g;
  const double nr = static_cast<double>(real.size());
  const double nf = static_cast<double>(fake.size());
  for (double s : fake) {
    g.generator_wrt_fake.push_back(2.0 * (s - 1.0) / nf);
    g.discriminator_wrt_fake.push_back(2.0 * s / nf);
  }
  for (double r : real) g.discriminator_wrt_real.push_back(2.0 * (r - 1.0) / nr);
  return g;
}

double least_squares_generator_term(std::span<const double> fake) {
  require_finite(fake, "adversarial loss");
  return mean_square_to(fake, 1.0);
}

std::vector<double> least_squares_generator_gradient(std::span<const double> fake) {
  require_finite(fake, "adversarial gradient");
  std::vector<double> g;
  for (double s : fake) g.push_back(2.0 * (s - 1.0) / static_cast<double>(fake.size()));
  return g;
}

std::string to_string(ReconstructionNorm n) { return n == ReconstructionNorm::L1 ? "l1" : "l2"; }

ReconstructionNorm parse_norm(const std::string& text) {
  if (text == "l1" || text == "L1") return ReconstructionNorm::L1;
  if (text == "l2" || text == "L2") return ReconstructionNorm::L2;
  throw std::invalid_argument("unknown reconstruction norm: " + text);
}

template <typename T>
double reconstruction_term(const Tensor<T>& a, const Tensor<T>& b, ReconstructionNorm norm, Tensor<T>* grad,
                           double weight) {
  if (!a.same_shape(b)) throw std::invalid_argument("reconstruction loss: shape mismatch " + a.shape_string() +
                                                    " vs " + b.shape_string());
  if (a.empty()) throw std::invalid_argument("reconstruction loss: empty tensors");
  if (grad && grad->empty()) *grad = Tensor<T>(a.n, a.c, a.h, a.w);
  if (grad && !grad->same_shape(a)) throw std::invalid_argument("reconstruction loss: gradient shape mismatch");
  const double inv = 1.0 / static_cast<double>(a.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
    if (norm == ReconstructionNorm::L1) {
      sum += std::abs(diff);
      if (grad) grad->data[i] += static_cast<T>(weight * inv * ((diff > 0) - (diff < 0)));
    } else {
      sum += diff * diff;
      if (grad) grad->data[i] += static_cast<T>(weight * inv * 2.0 * diff);
    }
  }
  return sum * inv;
}

template <typename T>
double cyclic_loss(const Tensor<T>& x, const Tensor<T>& x_cycled, const Tensor<T>& y, const Tensor<T>& y_cycled,
                   ReconstructionNorm norm) {
  return reconstruction_term(x_cycled, x, norm) + reconstruction_term(y_cycled, y, norm);
}

template <typename T>
double identity_loss(const Tensor<T>& fwd_on_target, const Tensor<T>& target, const Tensor<T>& back_on_input,
                     const Tensor<T>& input, ReconstructionNorm norm) {
  return reconstruction_term(fwd_on_target, target, norm) + reconstruction_term(back_on_input, input, norm);
}

void LossWeights::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be finite and > 0");
}

double total_loss(const LossComponents& c, const LossWeights& w) {
  for (double v : {c.cgan1, c.cgan2, c.cyc, c.id})
    if (!std::isfinite(v)) throw std::domain_error("total_loss: non-finite component");
  return w.gamma * (c.cgan1 + c.cgan2) + c.cyc + c.id;
}

template double reconstruction_term<float>(const Tensor<float>&, const Tensor<float>&, ReconstructionNorm,
                                           Tensor<float>*, double);
template double reconstruction_term<double>(const Tensor<double>&, const Tensor<double>&, ReconstructionNorm,
                                            Tensor<double>*, double);
template double cyclic_loss<float>(const Tensor<float>&, const Tensor<float>&, const Tensor<float>&,
                                   const Tensor<float>&, ReconstructionNorm);
template double cyclic_loss<double>(const Tensor<double>&, const Tensor<double>&, const Tensor<double>&,
                                    const Tensor<double>&, ReconstructionNorm);
template double identity_loss<float>(const Tensor<float>&, const Tensor<float>&, const Tensor<float>&,
                                     const Tensor<float>&, ReconstructionNorm);
template double identity_loss<double>(const Tensor<double>&, const Tensor<double>&, const Tensor<double>&,
                                      const Tensor<double>&, ReconstructionNorm);

}  // namespace pccgan
