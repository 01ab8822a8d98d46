#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pccgan/image.hpp"

namespace pccgan {

using Patch = std::vector<float>;  // p*p samples, row-major

/// Non-overlapping p x p tiling of a single-channel image, raster order.
struct PatchGrid {
  int patch_size = 0;
  int grid_w = 0;
  int grid_h = 0;
  IntensityRange range = IntensityRange::Unit;
  std::vector<Patch> patches;

  std::size_t count() const { return patches.size(); }
  bool same_geometry(const PatchGrid& o) const {
    return patch_size == o.patch_size && grid_w == o.grid_w && grid_h == o.grid_h;
  }
};

PatchGrid extract_patches(const Image& img, int patch_size);
Image reassemble(const PatchGrid& grid);

/// input_1, target_1, input_2, target_2, ... in raster order.
struct InterleavedPatchSequence {
  int patch_size = 0;
  int grid_w = 0;
  int grid_h = 0;
  IntensityRange range = IntensityRange::Unit;
  std::vector<Patch> entries;

  std::size_t pairs() const { return entries.size() / 2; }
};

InterleavedPatchSequence interleave_alternate(const PatchGrid& input, const PatchGrid& target);
std::pair<PatchGrid, PatchGrid> deinterleave(const InterleavedPatchSequence& seq);

// Scenario kinds.
struct PatchMosaic {
  int patch_size = 16;
  friend bool operator==(const PatchMosaic&, const PatchMosaic&) = default;
};
struct RandomTarget {
  friend bool operator==(const RandomTarget&, const RandomTarget&) = default;
};
struct AverageTarget {
  int k = 100;
  friend bool operator==(const AverageTarget&, const AverageTarget&) = default;
};
struct SamplePdf {
  int k = 100;
  int bins = 256;
  friend bool operator==(const SamplePdf&, const SamplePdf&) = default;
};
struct Unconditional {
  friend bool operator==(const Unconditional&, const Unconditional&) = default;
};

using ConditioningKind = std::variant<PatchMosaic, RandomTarget, AverageTarget, SamplePdf, Unconditional>;

struct ConditioningSpec {
  ConditioningKind kind = PatchMosaic{};
  std::uint64_t seed = 0;

  bool conditioned() const { return !std::holds_alternative<Unconditional>(kind); }
  int channels() const { return conditioned() ? 2 : 0; }
  /// Patch size when the scenario is a mosaic, otherwise 0.
  int patch_size() const;
  void validate() const;
  void validate_for(int image_side) const;

  friend bool operator==(const ConditioningSpec&, const ConditioningSpec&) = default;
};

/// Short names: "patch8", "patch16", "random", "average", "average<k>",
/// "pdf", "pdf<k>", "unconditional".
std::string to_string(const ConditioningSpec& spec);
ConditioningKind parse_conditioning_kind(const std::string& text);

/// Conditioning channels at full image resolution. Unconditional scenarios
/// carry zero channels and an empty data vector.
struct ConditioningTensor {
  int width = 0;
  int height = 0;
  int channels = 0;
  IntensityRange range = IntensityRange::Unit;
  std::vector<float> data;  // planar, same layout as Image
  ConditioningSpec provenance;

  Image channel(int c) const;
  Image as_image() const;
};

/// Channel 0 reassembles the even (input) entries, channel 1 the odd
/// (target) entries, each at its raster position.
ConditioningTensor sequence_to_conditioning(const InterleavedPatchSequence& seq,
                                            const ConditioningSpec& provenance = {});
InterleavedPatchSequence conditioning_to_sequence(const ConditioningTensor& cond, int patch_size);

/// Row-broadcast rendering of the normalized intensity histogram of `pool`.
/// Column x holds the mass of the bins that fall into it; every row is equal.
Image render_histogram(std::span<const Image> pool, int bins, int width, int height,
                       IntensityRange range);

/// Target-side channel for the scenario. PatchMosaic uses target_pool[0];
/// RandomTarget draws one pool member with the ConditioningSpec seed; AverageTarget and
/// SamplePdf summarize the first k pool members.
Image scenario_target_channel(const ConditioningSpec& spec, const Image& input,
                              std::span<const Image> target_pool);

ConditioningTensor build_scenario_conditioning(const ConditioningSpec& spec, const Image& input,
                                               std::span<const Image> target_pool);

ConditioningTensor downsample_conditioning(const ConditioningTensor& cond, int factor);

}  // namespace pccgan
