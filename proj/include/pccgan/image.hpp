#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pccgan {

enum class Modality { CT, MRI };

std::string_view to_string(Modality m);
Modality parse_modality(std::string_view text);
inline Modality other(Modality m) { return m == Modality::CT ? Modality::MRI : Modality::CT; }

/// Intensity convention carried by an Image: [0,1] at the I/O boundary,
/// [-1,1] inside the network pipeline.
enum class IntensityRange { Unit, Signed };

std::string_view to_string(IntensityRange r);
IntensityRange parse_range(std::string_view text);

/// Planar multi-channel raster. Sample (x, y, c) lives at
/// data[(c * height + y) * width + x].
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels = 1,
        IntensityRange range = IntensityRange::Unit, float fill = 0.0f);
  Image(int width, int height, int channels, IntensityRange range,
        std::vector<float> data);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  IntensityRange range() const { return range_; }
  std::size_t size() const { return data_.size(); }
  std::size_t plane_size() const {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  bool empty() const { return data_.empty(); }

  float& at(int x, int y, int c = 0) {
    return data_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x];
  }
  float at(int x, int y, int c = 0) const {
    return data_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x];
  }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }
  std::span<float> plane(int c) { return std::span<float>(data_).subspan(c * plane_size(), plane_size()); }
  std::span<const float> plane(int c) const {
    return std::span<const float>(data_).subspan(c * plane_size(), plane_size());
  }

  /// Single-channel copy of channel c.
  Image channel(int c) const;

  /// Same pixels mapped to the other convention. Identity when already there.
  Image to_unit() const;
  Image to_signed() const;
  Image with_range(IntensityRange r) const { return r == IntensityRange::Unit ? to_unit() : to_signed(); }

  bool all_finite() const;
  bool same_shape(const Image& other) const {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }

  friend bool operator==(const Image& a, const Image& b) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  IntensityRange range_ = IntensityRange::Unit;
  std::vector<float> data_;
};

/// Stack single-channel images (all the same size and range) as channels.
Image stack_channels(std::span<const Image> planes);

enum class PngDepth { Bit8 = 8, Bit16 = 16 };

/// Reads a grayscale 8/16-bit PNG or a `.raw` float32 file with a `.hdr`
/// sidecar. PNG intensities are scaled to [0,1].
Image load_image(const std::filesystem::path& path);

/// Writes by extension: `.png` (quantized at `depth`) or `.raw` (+ `.hdr`).
/// PNG output requires a single-channel image; values are clamped to [0,1].
void save_image(const Image& img, const std::filesystem::path& path,
                PngDepth depth = PngDepth::Bit16);

void save_raw(const Image& img, const std::filesystem::path& path);
Image load_raw(const std::filesystem::path& path);

}  // namespace pccgan
