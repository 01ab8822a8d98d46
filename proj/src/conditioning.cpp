#include "pccgan/conditioning.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace pccgan {

PatchGrid extract_patches(const Image& img, int p) {
  if (img.channels() != 1) throw std::invalid_argument("extract_patches: single-channel image required");
  if (p <= 0 || img.width() % p != 0 || img.height() % p != 0)
    throw std::invalid_argument("extract_patches: patch size " + std::to_string(p) +
                                " does not divide the image");
  PatchGrid grid;
  grid.patch_size = p;
  grid.grid_w = img.width() / p;
  grid.grid_h = img.height() / p;
  grid.range = img.range();
  grid.patches.reserve(static_cast<std::size_t>(grid.grid_w) * grid.grid_h);
  for (int gy = 0; gy < grid.grid_h; ++gy)
    for (int gx = 0; gx < grid.grid_w; ++gx) {
      Patch patch(static_cast<std::size_t>(p) * p);
      for (int y = 0; y < p; ++y)
        for (int x = 0; x < p; ++x) patch[y * p + x] = img.at(gx * p + x, gy * p + y);
      grid.patches.push_back(std::move(patch));
    }
  return grid;
}

Image reassemble(const PatchGrid& grid) {
  const int p = grid.patch_size;
  if (grid.patches.size() != static_cast<std::size_t>(grid.grid_w) * grid.grid_h)
    throw std::invalid_argument("reassemble: patch count does not match the grid");
  Image img(grid.grid_w * p, grid.grid_h * p, 1, grid.range);
  for (int gy = 0; gy < grid.grid_h; ++gy)
    for (int gx = 0; gx < grid.grid_w; ++gx) {
      const Patch& patch = grid.patches[gy * grid.grid_w + gx];
      if (patch.size() != static_cast<std::size_t>(p) * p)
        throw std::invalid_argument("reassemble: patch of wrong size");
      for (int y = 0; y < p; ++y)
        for (int x = 0; x < p; ++x) img.at(gx * p + x, gy * p + y) = patch[y * p + x];
    }
  return img;
}

InterleavedPatchSequence interleave_alternate(const PatchGrid& input, const PatchGrid& target) {
  if (!input.same_geometry(target) || input.count() != target.count())
    throw std::invalid_argument("interleave_alternate: patch grids differ in shape");
  InterleavedPatchSequence seq;
  seq.patch_size = input.patch_size;
  seq.grid_w = input.grid_w;
  seq.grid_h = input.grid_h;
  seq.range = input.range;
  seq.entries.reserve(2 * input.count());
  for (std::size_t i = 0; i < input.count(); ++i) {
    seq.entries.push_back(input.patches[i]);
    seq.entries.push_back(target.patches[i]);
  }
  return seq;
}

std::pair<PatchGrid, PatchGrid> deinterleave(const InterleavedPatchSequence& seq) {
  if (seq.entries.size() % 2 != 0) throw std::invalid_argument("deinterleave: odd sequence length");
  PatchGrid a{seq.patch_size, seq.grid_w, seq.grid_h, seq.range, {}};
  PatchGrid b = a;
  for (std::size_t i = 0; i < seq.entries.size(); i += 2) {
    a.patches.push_back(seq.entries[i]);
    b.patches.push_back(seq.entries[i + 1]);
  }
  return {std::move(a), std::move(b)};
}

int ConditioningSpec::patch_size() const {
  if (const auto* m = std::get_if<PatchMosaic>(&kind)) return m->patch_size;
  return 0;
}

void ConditioningSpec::validate() const {
  std::visit(
      [](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, PatchMosaic>) {
          if (k.patch_size != 8 && k.patch_size != 16 && k.patch_size != 32 && k.patch_size != 64)
            throw std::invalid_argument("PatchMosaic: patch size must be one of 8, 16, 32, 64");
        } else if constexpr (std::is_same_v<K, AverageTarget>) {
          if (k.k < 1) throw std::invalid_argument("AverageTarget: k must be >= 1");
        } else if constexpr (std::is_same_v<K, SamplePdf>) {
          if (k.k < 1) throw std::invalid_argument("SamplePdf: k must be >= 1");
          if (k.bins < 2) throw std::invalid_argument("SamplePdf: bins must be >= 2");
        }
      },
      kind);
}

void ConditioningSpec::validate_for(int side) const {
  validate();
  const int p = patch_size();
  if (p > 0 && side % p != 0)
    throw std::invalid_argument("patch size " + std::to_string(p) + " does not divide image side " +
                                std::to_string(side));
}

std::string to_string(const ConditioningSpec& spec) {
  return std::visit(
      [](const auto& k) -> std::string {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, PatchMosaic>) return "patch" + std::to_string(k.patch_size);
        else if constexpr (std::is_same_v<K, RandomTarget>) return "random";
        else if constexpr (std::is_same_v<K, AverageTarget>) return "average" + std::to_string(k.k);
        else if constexpr (std::is_same_v<K, SamplePdf>) return "pdf" + std::to_string(k.k);
        else return "unconditional";
      },
      spec.kind);
}

ConditioningKind parse_conditioning_kind(const std::string& text) {
  auto suffix_int = [&](std::size_t prefix_len, int fallback) {
    if (text.size() == prefix_len) return fallback;
    std::size_t used = 0;
    const int v = std::stoi(text.substr(prefix_len), &used);
    if (used != text.size() - prefix_len) throw std::invalid_argument("bad conditioning: " + text);
    return v;
  };
  try {
    if (text.rfind("patch", 0) == 0) {
      const PatchMosaic m{suffix_int(5, 16)};
      ConditioningSpec{m, 0}.validate();
      return m;
    }
    if (text == "random") return RandomTarget{};
    if (text.rfind("average", 0) == 0) return AverageTarget{suffix_int(7, 100)};
    if (text.rfind("pdf", 0) == 0) return SamplePdf{suffix_int(3, 100), 256};
    if (text == "unconditional") return Unconditional{};
  } catch (const std::logic_error&) {
  }
  throw std::invalid_argument("unknown conditioning scenario: " + text);
}

Image ConditioningTensor::channel(int c) const {
  if (c < 0 || c >= channels) throw std::out_of_range("ConditioningTensor::channel: index out of range");
  const std::size_t plane = static_cast<std::size_t>(width) * height;
  return Image(width, height, 1, range,
               std::vector<float>(data.begin() + c * plane, data.begin() + (c + 1) * plane));
}

Image ConditioningTensor::as_image() const {
  if (channels == 0) throw std::logic_error("ConditioningTensor::as_image: no channels");
  return Image(width, height, channels, range, data);
}

ConditioningTensor sequence_to_conditioning(const InterleavedPatchSequence& seq,
                                            const ConditioningSpec& provenance) {
  auto [input, target] = deinterleave(seq);
  const Image a = reassemble(input);
  const Image b = reassemble(target);
  ConditioningTensor cond;
  cond.width = a.width();
  cond.height = a.height();
  cond.channels = 2;
  cond.range = seq.range;
  cond.data.reserve(a.size() * 2);
  cond.data.insert(cond.data.end(), a.data().begin(), a.data().end());
  cond.data.insert(cond.data.end(), b.data().begin(), b.data().end());
  cond.provenance = provenance;
  return cond;
}

InterleavedPatchSequence conditioning_to_sequence(const ConditioningTensor& cond, int patch_size) {
  if (cond.channels != 2) throw std::invalid_argument("conditioning_to_sequence: two channels required");
  return interleave_alternate(extract_patches(cond.channel(0), patch_size),
                              extract_patches(cond.channel(1), patch_size));
}

Image render_histogram(std::span<const Image> pool, int bins, int width, int height,
                       IntensityRange range) {
  if (pool.empty()) throw std::invalid_argument("render_histogram: empty pool");
  if (bins < 2) throw std::invalid_argument("render_histogram: bins must be >= 2");
  std::vector<double> hist(bins, 0.0);
  double total = 0.0;
  for (const Image& img : pool) {
    const Image unit = img.to_unit();
    for (float v : unit.data()) {
      const int b = std::clamp(static_cast<int>(std::floor(static_cast<double>(v) * bins)), 0, bins - 1);
      hist[b] += 1.0;
      total += 1.0;
    }
  }
  for (auto& h : hist) h /= total;

  std::vector<float> row(width, 0.0f);
  for (int x = 0; x < width; ++x) {
    const long lo = static_cast<long>(x) * bins / width;
    long hi = static_cast<long>(x + 1) * bins / width;
    if (hi <= lo) hi = lo + 1;  // more columns than bins: repeat the bin
    double mass = 0.0;
    if (width > bins) mass = hist[lo];
    else
      for (long b = lo; b < hi; ++b) mass += hist[b];
    row[x] = static_cast<float>(mass);
  }
  Image out(width, height, 1, range);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) out.at(x, y) = row[x];
  return out;
}

namespace {

Image pixelwise_mean(std::span<const Image> pool, IntensityRange range) {
  const Image& first = pool.front();
  std::vector<double> acc(first.size(), 0.0);
  for (const Image& img : pool) {
    if (!img.same_shape(first)) throw std::invalid_argument("AverageTarget: pool images differ in shape");
    const Image conv = img.with_range(range);
    auto d = conv.data();
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += d[i];
  }
  Image out(first.width(), first.height(), 1, range);
  auto o = out.data();
  for (std::size_t i = 0; i < acc.size(); ++i) o[i] = static_cast<float>(acc[i] / pool.size());
  return out;
}

}  // namespace

Image scenario_target_channel(const ConditioningSpec& spec, const Image& input,
                              std::span<const Image> pool) {
  spec.validate();
  if (input.channels() != 1) throw std::invalid_argument("conditioning: single-channel input required");
  if (!spec.conditioned()) throw std::logic_error("scenario_target_channel: unconditional scenario");
  if (pool.empty()) throw std::invalid_argument("conditioning: empty target pool");

  auto check_shape = [&](const Image& t) {
    if (t.width() != input.width() || t.height() != input.height() || t.channels() != 1)
      throw std::invalid_argument("conditioning: target shape differs from input");
  };

  return std::visit(
      [&](const auto& k) -> Image {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, PatchMosaic>) {
          check_shape(pool.front());
          return pool.front().with_range(input.range());
        } else if constexpr (std::is_same_v<K, RandomTarget>) {
          std::mt19937_64 rng(spec.seed);
          const auto idx = std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng);
          check_shape(pool[idx]);
          return pool[idx].with_range(input.range());
        } else if constexpr (std::is_same_v<K, AverageTarget>) {
          if (static_cast<std::size_t>(k.k) > pool.size())
            throw std::invalid_argument("AverageTarget: k exceeds the target pool");
          check_shape(pool.front());
          return pixelwise_mean(pool.first(k.k), input.range());
        } else if constexpr (std::is_same_v<K, SamplePdf>) {
          if (static_cast<std::size_t>(k.k) > pool.size())
            throw std::invalid_argument("SamplePdf: k exceeds the target pool");
          return render_histogram(pool.first(k.k), k.bins, input.width(), input.height(), input.range());
        } else {
          throw std::logic_error("unreachable");
        }
      },
      spec.kind);
}

ConditioningTensor build_scenario_conditioning(const ConditioningSpec& spec, const Image& input,
                                               std::span<const Image> pool) {
  if (!spec.conditioned()) {
    spec.validate();
    ConditioningTensor cond;
    cond.width = input.width();
    cond.height = input.height();
    cond.range = input.range();
    cond.provenance = spec;
    return cond;
  }
  if (const auto* mosaic = std::get_if<PatchMosaic>(&spec.kind)) {
    spec.validate_for(std::min(input.width(), input.height()));
    if (pool.empty()) throw std::invalid_argument("conditioning: empty target pool");
    const Image target = pool.front().with_range(input.range());
    const auto seq = interleave_alternate(extract_patches(input, mosaic->patch_size),
                                          extract_patches(target, mosaic->patch_size));
    return sequence_to_conditioning(seq, spec);
  }
  const Image target = scenario_target_channel(spec, input, pool);
  ConditioningTensor cond;
  cond.width = input.width();
  cond.height = input.height();
  cond.channels = 2;
  cond.range = input.range();
  cond.data.reserve(input.size() * 2);
  cond.data.insert(cond.data.end(), input.data().begin(), input.data().end());
  cond.data.insert(cond.data.end(), target.data().begin(), target.data().end());
  cond.provenance = spec;
  return cond;
}

ConditioningTensor downsample_conditioning(const ConditioningTensor& cond, int factor) {
  if (factor < 1 || cond.width % factor != 0 || cond.height % factor != 0)
    throw std::invalid_argument("downsample_conditioning: factor must divide the spatial size");
  if (factor == 1) return cond;
  ConditioningTensor out = cond;
  out.width = cond.width / factor;
  out.height = cond.height / factor;
  out.data.assign(static_cast<std::size_t>(out.width) * out.height * cond.channels, 0.0f);
  const double inv = 1.0 / (static_cast<double>(factor) * factor);
  for (int c = 0; c < cond.channels; ++c)
    for (int y = 0; y < out.height; ++y)
      for (int x = 0; x < out.width; ++x) {
        double s = 0.0;
        for (int dy = 0; dy < factor; ++dy)
          for (int dx = 0; dx < factor; ++dx)
            s += cond.data[(static_cast<std::size_t>(c) * cond.height + y * factor + dy) * cond.width +
                           x * factor + dx];
        out.data[(static_cast<std::size_t>(c) * out.height + y) * out.width + x] = static_cast<float>(s * inv);
      }
  return out;
}

}  // namespace pccgan
