#include "pccgan/image.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <stdexcept>

namespace pccgan {

std::string_view to_string(Modality m) { return m == Modality::CT ? "CT" : "MRI"; }

Modality parse_modality(std::string_view text) {
  if (text == "CT" || text == "ct") return Modality::CT;
  if (text == "MRI" || text == "mri") return Modality::MRI;
  throw std::invalid_argument("unknown modality: " + std::string(text));
}

std::string_view to_string(IntensityRange r) { return r == IntensityRange::Unit ? "unit" : "signed"; }

IntensityRange parse_range(std::string_view text) {
  if (text == "unit") return IntensityRange::Unit;
  if (text == "signed") return IntensityRange::Signed;
  throw std::invalid_argument("unknown intensity convention: " + std::string(text));
}

Image::Image(int width, int height, int channels, IntensityRange range, float fill)
    : width_(width), height_(height), channels_(channels), range_(range) {
  if (width < 0 || height < 0 || channels < 0)
    throw std::invalid_argument("Image: negative dimension");
  data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

Image::Image(int width, int height, int channels, IntensityRange range, std::vector<float> data)
    : width_(width), height_(height), channels_(channels), range_(range), data_(std::move(data)) {
  if (width < 0 || height < 0 || channels < 0)
    throw std::invalid_argument("Image: negative dimension");
  if (data_.size() != static_cast<std::size_t>(width) * height * channels)
    throw std::invalid_argument("Image: data length does not match width*height*channels");
}

Image Image::channel(int c) const {
  if (c < 0 || c >= channels_) throw std::out_of_range("Image::channel: index out of range");
  auto p = plane(c);
  return Image(width_, height_, 1, range_, std::vector<float>(p.begin(), p.end()));
}

Image Image::to_unit() const {
  if (range_ == IntensityRange::Unit) return *this;
  Image out = *this;
  out.range_ = IntensityRange::Unit;
  for (auto& v : out.data_) v = 0.5f * (v + 1.0f);
  return out;
}

Image Image::to_signed() const {
  if (range_ == IntensityRange::Signed) return *this;
  Image out = *this;
  out.range_ = IntensityRange::Signed;
  for (auto& v : out.data_) v = 2.0f * v - 1.0f;
  return out;
}

bool Image::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

Image stack_channels(std::span<const Image> planes) {
  if (planes.empty()) throw std::invalid_argument("stack_channels: no planes");
  const Image& first = planes.front();
  std::vector<float> data;
  data.reserve(first.plane_size() * planes.size());
  for (const auto& p : planes) {
    if (p.channels() != 1 || p.width() != first.width() || p.height() != first.height())
      throw std::invalid_argument("stack_channels: planes must be single-channel and equally sized");
    if (p.range() != first.range())
      throw std::invalid_argument("stack_channels: mixed intensity conventions");
    data.insert(data.end(), p.data().begin(), p.data().end());
  }
  return Image(first.width(), first.height(), static_cast<int>(planes.size()), first.range(),
               std::move(data));
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// libpng reports errors via longjmp; the functions below keep only trivially
// destructible locals between setjmp and the libpng calls.
struct PngRead {
  int width = 0;
  int height = 0;
  int bit_depth = 0;
  int color_type = 0;
  std::vector<unsigned char> bytes;  // row-major, big-endian samples
  std::vector<png_bytep> rows;
  char error[256] = {0};
};

void png_error_to_buffer(png_structp png, png_const_charp msg) {
  auto* err = static_cast<char*>(png_get_error_ptr(png));
  std::snprintf(err, 256, "%s", msg);
  png_longjmp(png, 1);
}

bool read_png_raw(std::FILE* fp, PngRead& out) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, out.error, png_error_to_buffer, nullptr);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.bit_depth = png_get_bit_depth(png, info);
  out.color_type = png_get_color_type(png, info);
  if (out.color_type != PNG_COLOR_TYPE_GRAY || (out.bit_depth != 8 && out.bit_depth != 16)) {
    png_destroy_read_struct(&png, &info, nullptr);
    return true;  // caller reports the unsupported format
  }
  const std::size_t stride = png_get_rowbytes(png, info);
  out.bytes.resize(stride * out.height);
  out.rows.resize(out.height);
  for (int y = 0; y < out.height; ++y) out.rows[y] = out.bytes.data() + stride * y;
  png_read_image(png, out.rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

bool write_png_raw(std::FILE* fp, int width, int height, int bit_depth,
                   std::vector<unsigned char>& bytes, std::vector<png_bytep>& rows, char* error) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, error, png_error_to_buffer, nullptr);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, width, height, bit_depth, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(width) * (bit_depth / 8);
  rows.resize(height);
  for (int y = 0; y < height; ++y) rows[y] = bytes.data() + stride * y;
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

Image load_png(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw std::runtime_error("cannot open image: " + path.string());
  PngRead raw;
  if (!read_png_raw(fp.get(), raw))
    throw std::runtime_error("cannot decode PNG " + path.string() + ": " + raw.error);
  if (raw.color_type != PNG_COLOR_TYPE_GRAY)
    throw std::runtime_error("unsupported PNG color type (grayscale required): " + path.string());
  if (raw.bit_depth != 8 && raw.bit_depth != 16)
    throw std::runtime_error("unsupported PNG bit depth " + std::to_string(raw.bit_depth) + ": " +
                             path.string());
  Image img(raw.width, raw.height, 1, IntensityRange::Unit);
  auto data = img.data();
  if (raw.bit_depth == 8) {
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<float>(raw.bytes[i] / 255.0);
  } else {
    for (std::size_t i = 0; i < data.size(); ++i) {
      const unsigned v = (static_cast<unsigned>(raw.bytes[2 * i]) << 8) | raw.bytes[2 * i + 1];
      data[i] = static_cast<float>(v / 65535.0);
    }
  }
  return img;
}

void save_png(const Image& img, const std::filesystem::path& path, PngDepth depth) {
  if (img.channels() != 1) throw std::invalid_argument("save_image: PNG output needs one channel");
  const Image unit = img.to_unit();
  const int bits = static_cast<int>(depth);
  std::vector<unsigned char> bytes(unit.size() * (bits / 8));
  auto data = unit.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double v = std::clamp(static_cast<double>(data[i]), 0.0, 1.0);
    if (bits == 8) {
      bytes[i] = static_cast<unsigned char>(std::lround(v * 255.0));
    } else {
      const auto q = static_cast<unsigned>(std::lround(v * 65535.0));
      bytes[2 * i] = static_cast<unsigned char>(q >> 8);
      bytes[2 * i + 1] = static_cast<unsigned char>(q & 0xff);
    }
  }
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw std::runtime_error("cannot write image: " + path.string());
  char error[256] = {0};
  std::vector<png_bytep> rows;
  if (!write_png_raw(fp.get(), img.width(), img.height(), bits, bytes, rows, error))
    throw std::runtime_error("cannot encode PNG " + path.string() + ": " + error);
}

std::filesystem::path sidecar_of(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".hdr");
}

bool has_extension(const std::filesystem::path& path, std::string_view ext) {
  std::string e = path.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e == ext;
}

}  // namespace

void save_raw(const Image& img, const std::filesystem::path& path) {
  {
    std::ofstream hdr(sidecar_of(path));
    if (!hdr) throw std::runtime_error("cannot write header: " + sidecar_of(path).string());
    hdr << "format float32le\n"
        << "width " << img.width() << "\n"
        << "height " << img.height() << "\n"
        << "channels " << img.channels() << "\n"
        << "convention " << to_string(img.range()) << "\n";
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write image: " + path.string());
  for (float v : img.data()) {
    auto bits = std::bit_cast<std::uint32_t>(v);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
    out.write(reinterpret_cast<const char*>(&bits), sizeof(bits));
  }
  if (!out) throw std::runtime_error("short write: " + path.string());
}

Image load_raw(const std::filesystem::path& path) {
  std::ifstream hdr(sidecar_of(path));
  if (!hdr) throw std::runtime_error("missing raw header sidecar: " + sidecar_of(path).string());
  int width = -1, height = -1, channels = 1;
  IntensityRange range = IntensityRange::Unit;
  std::string key, value;
  while (hdr >> key >> value) {
    if (key == "format") {
      if (value != "float32le") throw std::runtime_error("unsupported raw format: " + value);
    } else if (key == "width") {
      width = std::stoi(value);
    } else if (key == "height") {
      height = std::stoi(value);
    } else if (key == "channels") {
      channels = std::stoi(value);
    } else if (key == "convention") {
      range = parse_range(value);
    } else {
      throw std::runtime_error("unknown raw header key: " + key);
    }
  }
  if (width <= 0 || height <= 0 || channels <= 0)
    throw std::runtime_error("raw header lacks valid dimensions: " + sidecar_of(path).string());
  std::vector<float> data(static_cast<std::size_t>(width) * height * channels);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open image: " + path.string());
  for (auto& v : data) {
    std::uint32_t bits = 0;
    if (!in.read(reinterpret_cast<char*>(&bits), sizeof(bits)))
      throw std::runtime_error("truncated raw image: " + path.string());
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
    v = std::bit_cast<float>(bits);
  }
  return Image(width, height, channels, range, std::move(data));
}

Image load_image(const std::filesystem::path& path) {
  if (has_extension(path, ".raw")) return load_raw(path);
  return load_png(path);
}

void save_image(const Image& img, const std::filesystem::path& path, PngDepth depth) {
  if (has_extension(path, ".raw")) return save_raw(img, path);
  save_png(img, path, depth);
}

}  // namespace pccgan
