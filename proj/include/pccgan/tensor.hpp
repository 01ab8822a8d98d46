#pragma once

#include <algorithm>
#include <cassert>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pccgan {

/// Dense NCHW batch.
template <typename T>
struct Tensor {
  int n = 0;
  int c = 0;
  int h = 0;
  int w = 0;
  std::vector<T> data;

  Tensor() = default;
  Tensor(int n_, int c_, int h_, int w_, T fill = T(0))
      : n(n_), c(c_), h(h_), w(w_), data(static_cast<std::size_t>(n_) * c_ * h_ * w_, fill) {}

  std::size_t size() const { return data.size(); }
  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
  std::size_t sample_size() const { return plane() * c; }
  bool empty() const { return data.empty(); }

  T* sample(int i) { return data.data() + sample_size() * i; }
  const T* sample(int i) const { return data.data() + sample_size() * i; }
  T* channel(int i, int ch) { return sample(i) + plane() * ch; }
  const T* channel(int i, int ch) const { return sample(i) + plane() * ch; }

  T& at(int i, int ch, int y, int x) { return data[((static_cast<std::size_t>(i) * c + ch) * h + y) * w + x]; }
  T at(int i, int ch, int y, int x) const { return data[((static_cast<std::size_t>(i) * c + ch) * h + y) * w + x]; }

  bool same_shape(const Tensor& o) const { return n == o.n && c == o.c && h == o.h && w == o.w; }
  std::string shape_string() const {
    return "[" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," +
           std::to_string(w) + "]";
  }
  void fill(T v) { std::fill(data.begin(), data.end(), v); }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out(n, c, h, w);
    std::transform(data.begin(), data.end(), out.data.begin(), [](T v) { return static_cast<U>(v); });
    return out;
  }
};

/// Channel concatenation of tensors sharing n, h, w. Empty tensors are skipped.
template <typename T>
Tensor<T> concat_channels(std::initializer_list<const Tensor<T>*> parts) {
  const Tensor<T>* first = nullptr;
  int channels = 0;
  for (const auto* p : parts) {
    if (!p || p->empty()) continue;
    if (!first) first = p;
    if (p->n != first->n || p->h != first->h || p->w != first->w)
      throw std::invalid_argument("concat_channels: spatial/batch mismatch " + p->shape_string() +
                                  " vs " + first->shape_string());
    channels += p->c;
  }
  if (!first) return {};
  Tensor<T> out(first->n, channels, first->h, first->w);
  for (int i = 0; i < out.n; ++i) {
    T* dst = out.sample(i);
    for (const auto* p : parts) {
      if (!p || p->empty()) continue;
      std::copy(p->sample(i), p->sample(i) + p->sample_size(), dst);
      dst += p->sample_size();
    }
  }
  return out;
}

/// Copies channels [from, from + count) of every sample.
template <typename T>
Tensor<T> slice_channels(const Tensor<T>& t, int from, int count) {
  if (from < 0 || count < 0 || from + count > t.c) throw std::out_of_range("slice_channels");
  Tensor<T> out(t.n, count, t.h, t.w);
  for (int i = 0; i < t.n; ++i)
    std::copy(t.channel(i, from), t.channel(i, from) + t.plane() * count, out.sample(i));
  return out;
}

}  // namespace pccgan
