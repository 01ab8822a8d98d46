#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "pccgan/tensor.hpp"

namespace pccgan {

enum class Mode { Train, Infer };

/// A learnable tensor and its accumulated gradient.
template <typename T>
struct Param {
  std::string name;
  std::vector<T> value;
  std::vector<T> grad;

  void resize(std::size_t n) {
    value.assign(n, T(0));
    grad.assign(n, T(0));
  }
  void zero_grad() { std::fill(grad.begin(), grad.end(), T(0)); }
};

/// Stride-1 "same" convolution with odd kernel, via im2col + GEMM.
template <typename T>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(std::string name, int in_channels, int out_channels, int kernel);

  void init(std::mt19937_64& rng, double stddev);

  Tensor<T> forward(const Tensor<T>& x) const;
  /// Accumulates weight/bias gradients and returns dL/dx (empty when
  /// need_dx is false).
  Tensor<T> backward(const Tensor<T>& x, const Tensor<T>& dy, bool need_dx);

  int in_channels() const { return in_; }
  int out_channels() const { return out_; }
  int kernel() const { return k_; }

  Param<T> weight;  // out x (in * k * k), row-major
  Param<T> bias;

 private:
  int in_ = 0;
  int out_ = 0;
  int k_ = 1;
};

template <typename T>
class BatchNorm2d {
 public:
  struct Cache {
    Tensor<T> xhat;
    std::vector<T> inv_std;
  };

  BatchNorm2d() = default;
  BatchNorm2d(std::string name, int channels);

  /// Train mode normalizes with batch statistics (over N, H, W), records a
  /// cache, and updates the running averages. Infer mode uses the running
  /// averages and touches nothing.
  Tensor<T> forward(const Tensor<T>& x, Mode mode, Cache* cache);
  Tensor<T> backward(const Cache& cache, const Tensor<T>& dy);

  /// gamma * xhat + beta, reconstructing the forward output from a cache.
  Tensor<T> affine(const Tensor<T>& xhat) const;

  int channels() const { return static_cast<int>(gamma.value.size()); }

  Param<T> gamma;
  Param<T> beta;
  std::vector<T> running_mean;
  std::vector<T> running_var;
  double momentum = 0.1;
  double eps = 1e-5;
};

template <typename T>
void leaky_relu_inplace(Tensor<T>& x, double slope);

/// dy scaled by 1 or slope depending on the sign of the pre-activation.
template <typename T>
void leaky_relu_backward_inplace(Tensor<T>& dy, const Tensor<T>& pre, double slope);

}  // namespace pccgan
