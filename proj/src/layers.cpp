#include "pccgan/layers.hpp"

#include <Eigen/Core>
#include <cmath>

namespace pccgan {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using RowMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstRowMap = Eigen::Map<const RowMat<T>>;

// Output rows [y0, y1) only: col has (c*k*k) rows and (y1-y0)*w columns.
template <typename T>
void im2col(const T* src, int c, int h, int w, int k, int y0, int y1, T* col) {
  const int pad = k / 2;
  const std::size_t bw = static_cast<std::size_t>(y1 - y0) * w;
  for (int ch = 0; ch < c; ++ch)
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        T* row = col + ((static_cast<std::size_t>(ch) * k + ky) * k + kx) * bw;
        const int dx = kx - pad;
        const int x0 = std::max(0, -dx);
        const int x1 = std::min(w, w - dx);
        for (int y = y0; y < y1; ++y) {
          T* out = row + static_cast<std::size_t>(y - y0) * w;
          const int sy = y + ky - pad;
          if (sy < 0 || sy >= h) {
            std::fill(out, out + w, T(0));
            continue;
          }
          const T* in = src + (static_cast<std::size_t>(ch) * h + sy) * w;
          std::fill(out, out + x0, T(0));
          std::copy(in + x0 + dx, in + x1 + dx, out + x0);
          std::fill(out + std::max(x0, x1), out + w, T(0));
        }
      }
}

// Accumulates a band of columns back into dst.
template <typename T>
void col2im(const T* col, int c, int h, int w, int k, int y0, int y1, T* dst) {
  const int pad = k / 2;
  const std::size_t bw = static_cast<std::size_t>(y1 - y0) * w;
  for (int ch = 0; ch < c; ++ch)
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        const T* row = col + ((static_cast<std::size_t>(ch) * k + ky) * k + kx) * bw;
        const int dx = kx - pad;
        const int x0 = std::max(0, -dx);
        const int x1 = std::min(w, w - dx);
        for (int y = y0; y < y1; ++y) {
          const int sy = y + ky - pad;
          if (sy < 0 || sy >= h) continue;
          const T* in = row + static_cast<std::size_t>(y - y0) * w;
          T* out = dst + (static_cast<std::size_t>(ch) * h + sy) * w;
          for (int x = x0; x < x1; ++x) out[x + dx] += in[x];
        }
      }
}

// Rows per band so the column buffer stays cache-sized.
int band_rows(int ck, int h, int w, std::size_t elem) {
  const std::size_t budget = 256 * 1024;
  const std::size_t per_row = static_cast<std::size_t>(ck) * w * elem;
  return std::clamp(static_cast<int>(budget / std::max<std::size_t>(per_row, 1)), 1, h);
}

}  // namespace

template <typename T>
Conv2d<T>::Conv2d(std::string name, int in_channels, int out_channels, int kernel)
    : in_(in_channels), out_(out_channels), k_(kernel) {
  if (in_channels < 1 || out_channels < 1) throw std::invalid_argument("Conv2d: channel counts must be >= 1");
  if (kernel < 1 || kernel % 2 == 0) throw std::invalid_argument("Conv2d: kernel must be odd");
  weight.name = name + ".weight";
  bias.name = name + ".bias";
  weight.resize(static_cast<std::size_t>(out_) * in_ * k_ * k_);
  bias.resize(out_);
}

template <typename T>
void Conv2d<T>::init(std::mt19937_64& rng, double stddev) {
  for (auto& v : weight.value) v = static_cast<T>(std::normal_distribution<double>(0.0, stddev)(rng));
  std::fill(bias.value.begin(), bias.value.end(), T(0));
}

template <typename T>
Tensor<T> Conv2d<T>::forward(const Tensor<T>& x) const {
  if (x.c != in_)
    throw std::invalid_argument(weight.name + ": expected " + std::to_string(in_) + " input channels, got " +
                                std::to_string(x.c));
  const int hw = x.h * x.w;
  const int ck = in_ * k_ * k_;
  const int band = band_rows(ck, x.h, x.w, sizeof(T));
  Tensor<T> y(x.n, out_, x.h, x.w);
  std::vector<T> col(static_cast<std::size_t>(ck) * band * x.w);
  ConstRowMap<T> W(weight.value.data(), out_, ck);
  Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> b(bias.value.data(), out_);
  for (int i = 0; i < x.n; ++i) {
    RowMap<T> Y(y.sample(i), out_, hw);
    for (int y0 = 0; y0 < x.h; y0 += band) {
      const int y1 = std::min(x.h, y0 + band), cols = (y1 - y0) * x.w;
      im2col(x.sample(i), in_, x.h, x.w, k_, y0, y1, col.data());
      ConstRowMap<T> C(col.data(), ck, cols);
      Y.middleCols(y0 * x.w, cols).noalias() = W * C;
    }
    Y.colwise() += b;
  }
  return y;
}

template <typename T>
Tensor<T> Conv2d<T>::backward(const Tensor<T>& x, const Tensor<T>& dy, bool need_dx) {
  const int hw = x.h * x.w;
  const int ck = in_ * k_ * k_;
  const int band = band_rows(ck, x.h, x.w, sizeof(T));
  std::vector<T> col(static_cast<std::size_t>(ck) * band * x.w);
  std::vector<T> dcol(need_dx ? col.size() : 0);
  Tensor<T> dx;
  if (need_dx) dx = Tensor<T>(x.n, in_, x.h, x.w);
  ConstRowMap<T> W(weight.value.data(), out_, ck);
  RowMap<T> dW(weight.grad.data(), out_, ck);
  for (int i = 0; i < x.n; ++i) {
    ConstRowMap<T> dY(dy.sample(i), out_, hw);
    // plain loop: Eigen's vectorized sum peels by pointer alignment, which
    // makes the rounding depend on where the heap put the buffer
    for (int o = 0; o < out_; ++o) {
      const T* row = dy.sample(i) + static_cast<std::size_t>(o) * hw;
      T acc = T(0);
      for (int k = 0; k < hw; ++k) acc += row[k];
      bias.grad[o] += acc;
    }
    for (int y0 = 0; y0 < x.h; y0 += band) {
      const int y1 = std::min(x.h, y0 + band), cols = (y1 - y0) * x.w;
      im2col(x.sample(i), in_, x.h, x.w, k_, y0, y1, col.data());
      ConstRowMap<T> C(col.data(), ck, cols);
      const auto dYb = dY.middleCols(y0 * x.w, cols);
      dW.noalias() += dYb * C.transpose();
      if (need_dx) {
        RowMap<T> dC(dcol.data(), ck, cols);
        dC.noalias() = W.transpose() * dYb;
        col2im(dcol.data(), in_, x.h, x.w, k_, y0, y1, dx.sample(i));
      }
    }
  }
  return dx;
}

template <typename T>
BatchNorm2d<T>::BatchNorm2d(std::string name, int channels) {
  gamma.name = name + ".gamma";
  beta.name = name + ".beta";
  gamma.resize(channels);
  beta.resize(channels);
  std::fill(gamma.value.begin(), gamma.value.end(), T(1));
  running_mean.assign(channels, T(0));
  running_var.assign(channels, T(1));
}

template <typename T>
Tensor<T> BatchNorm2d<T>::forward(const Tensor<T>& x, Mode mode, Cache* cache) {
  const int C = channels();
  if (x.c != C) throw std::invalid_argument(gamma.name + ": channel mismatch");
  Tensor<T> y(x.n, x.c, x.h, x.w);
  const std::size_t plane = x.plane();
  const double count = static_cast<double>(plane) * x.n;
  if (mode == Mode::Infer) {
    for (int ch = 0; ch < C; ++ch) {
      const double inv = 1.0 / std::sqrt(static_cast<double>(running_var[ch]) + eps);
      const T scale = static_cast<T>(gamma.value[ch] * inv);
      const T shift = static_cast<T>(beta.value[ch] - running_mean[ch] * gamma.value[ch] * inv);
      for (int i = 0; i < x.n; ++i) {
        const T* src = x.channel(i, ch);
        T* dst = y.channel(i, ch);
        for (std::size_t p = 0; p < plane; ++p) dst[p] = src[p] * scale + shift;
      }
    }
    return y;
  }
  if (cache) {
    cache->xhat = Tensor<T>(x.n, x.c, x.h, x.w);
    cache->inv_std.assign(C, T(0));
  }
  for (int ch = 0; ch < C; ++ch) {
    double sum = 0.0;
    for (int i = 0; i < x.n; ++i) {
      const T* src = x.channel(i, ch);
      for (std::size_t p = 0; p < plane; ++p) sum += src[p];
    }
    const double mean = sum / count;
    double sq = 0.0;
    for (int i = 0; i < x.n; ++i) {
      const T* src = x.channel(i, ch);
      for (std::size_t p = 0; p < plane; ++p) {
        const double d = src[p] - mean;
        sq += d * d;
      }
    }
    const double var = sq / count;
    const double inv = 1.0 / std::sqrt(var + eps);
    const T g = gamma.value[ch];
    const T b = beta.value[ch];
    for (int i = 0; i < x.n; ++i) {
      const T* src = x.channel(i, ch);
      T* dst = y.channel(i, ch);
      T* xh = cache ? cache->xhat.channel(i, ch) : nullptr;
      for (std::size_t p = 0; p < plane; ++p) {
        const T v = static_cast<T>((src[p] - mean) * inv);
        if (xh) xh[p] = v;
        dst[p] = g * v + b;
      }
    }
    if (cache) cache->inv_std[ch] = static_cast<T>(inv);
    const double unbiased = count > 1 ? sq / (count - 1) : var;
    running_mean[ch] = static_cast<T>((1.0 - momentum) * running_mean[ch] + momentum * mean);
    running_var[ch] = static_cast<T>((1.0 - momentum) * running_var[ch] + momentum * unbiased);
  }
  return y;
}

template <typename T>
Tensor<T> BatchNorm2d<T>::backward(const Cache& cache, const Tensor<T>& dy) {
  const int C = channels();
  const auto& xhat = cache.xhat;
  Tensor<T> dx(dy.n, dy.c, dy.h, dy.w);
  const std::size_t plane = dy.plane();
  const double count = static_cast<double>(plane) * dy.n;
  for (int ch = 0; ch < C; ++ch) {
    double sum_dy = 0.0;
    double sum_dy_xhat = 0.0;
    for (int i = 0; i < dy.n; ++i) {
      const T* g = dy.channel(i, ch);
      const T* xh = xhat.channel(i, ch);
      for (std::size_t p = 0; p < plane; ++p) {
        sum_dy += g[p];
        sum_dy_xhat += static_cast<double>(g[p]) * xh[p];
      }
    }
    gamma.grad[ch] += static_cast<T>(sum_dy_xhat);
    beta.grad[ch] += static_cast<T>(sum_dy);
    const double scale = static_cast<double>(gamma.value[ch]) * cache.inv_std[ch];
    const double mean_dy = sum_dy / count;
    const double mean_dy_xhat = sum_dy_xhat / count;
    for (int i = 0; i < dy.n; ++i) {
      const T* g = dy.channel(i, ch);
      const T* xh = xhat.channel(i, ch);
      T* out = dx.channel(i, ch);
      for (std::size_t p = 0; p < plane; ++p)
        out[p] = static_cast<T>(scale * (g[p] - mean_dy - xh[p] * mean_dy_xhat));
    }
  }
  return dx;
}

template <typename T>
Tensor<T> BatchNorm2d<T>::affine(const Tensor<T>& xhat) const {
  Tensor<T> y(xhat.n, xhat.c, xhat.h, xhat.w);
  const std::size_t plane = xhat.plane();
  for (int i = 0; i < xhat.n; ++i)
    for (int ch = 0; ch < xhat.c; ++ch) {
      const T* src = xhat.channel(i, ch);
      T* dst = y.channel(i, ch);
      const T g = gamma.value[ch];
      const T b = beta.value[ch];
      for (std::size_t p = 0; p < plane; ++p) dst[p] = g * src[p] + b;
    }
  return y;
}

template <typename T>
void leaky_relu_inplace(Tensor<T>& x, double slope) {
  const T s = static_cast<T>(slope);
  for (auto& v : x.data) v = v < T(0) ? v * s : v;
}

template <typename T>
void leaky_relu_backward_inplace(Tensor<T>& dy, const Tensor<T>& pre, double slope) {
  const T s = static_cast<T>(slope);
  T* d = dy.data.data();
  const T* p = pre.data.data();
  for (std::size_t i = 0; i < dy.data.size(); ++i) d[i] = p[i] < T(0) ? d[i] * s : d[i];
}

template class Conv2d<float>;
template class Conv2d<double>;
template class BatchNorm2d<float>;
template class BatchNorm2d<double>;
template void leaky_relu_inplace<float>(Tensor<float>&, double);
template void leaky_relu_inplace<double>(Tensor<double>&, double);
template void leaky_relu_backward_inplace<float>(Tensor<float>&, const Tensor<float>&, double);
template void leaky_relu_backward_inplace<double>(Tensor<double>&, const Tensor<double>&, double);

}  // namespace pccgan
