#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pccgan/layers.hpp"

namespace pccgan {

struct AdamOptions {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam over a fixed list of parameters. Moments are stored per parameter
/// in the same order as the list handed to the constructor.
template <typename T>
class Adam {
 public:
  Adam() = default;
  Adam(std::vector<Param<T>*> params, AdamOptions opt) : params_(std::move(params)), opt_(opt) {
    if (!(opt_.learning_rate >= 0.0)) throw std::invalid_argument("Adam: learning rate must be >= 0");
    for (auto* p : params_) {
      m_.emplace_back(p->value.size(), T(0));
      v_.emplace_back(p->value.size(), T(0));
    }
  }

  void step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
    const double lr = opt_.learning_rate;
    const T b1 = static_cast<T>(opt_.beta1), b2 = static_cast<T>(opt_.beta2);
    for (std::size_t k = 0; k < params_.size(); ++k) {
      auto& val = params_[k]->value;
      const auto& g = params_[k]->grad;
      auto& m = m_[k];
      auto& v = v_[k];
      for (std::size_t i = 0; i < val.size(); ++i) {
        m[i] = b1 * m[i] + (T(1) - b1) * g[i];
        v[i] = b2 * v[i] + (T(1) - b2) * g[i] * g[i];
        const double mh = m[i] / bc1;
        const double vh = v[i] / bc2;
        val[i] = static_cast<T>(val[i] - lr * mh / (std::sqrt(vh) + opt_.eps));
      }
    }
  }

  long long steps() const { return t_; }
  void set_steps(long long t) { t_ = t; }
  std::vector<std::vector<T>>& first_moments() { return m_; }
  std::vector<std::vector<T>>& second_moments() { return v_; }
  const AdamOptions& options() const { return opt_; }

 private:
  std::vector<Param<T>*> params_;
  AdamOptions opt_;
  std::vector<std::vector<T>> m_;
  std::vector<std::vector<T>> v_;
  long long t_ = 0;
};

/// Plain gradient descent, value -= lr * grad.
template <typename T>
void sgd_step(const std::vector<Param<T>*>& params, double learning_rate) {
  for (auto* p : params)
    for (std::size_t i = 0; i < p->value.size(); ++i)
      p->value[i] = static_cast<T>(p->value[i] - learning_rate * p->grad[i]);
}

}  // namespace pccgan
