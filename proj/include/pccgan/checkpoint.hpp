#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace pccgan {

/// Single-file container: a text manifest (magic + version, key/value
/// metadata, tensor index) followed by a little-endian binary payload.
///
///   pccgan-checkpoint <version>
///   meta <key> <value>
///   tensor <name> <f32|f64|text> <count> <offset>
///   end
///   <payload bytes>
class Checkpoint {
 public:
  static constexpr int kVersion = 1;

  enum class DType { F32, F64, Text };

  void set_meta(const std::string& key, const std::string& value);
  const std::string& meta(const std::string& key) const;
  bool has_meta(const std::string& key) const { return meta_.count(key) > 0; }

  void put(const std::string& name, std::span<const float> values);
  void put(const std::string& name, std::span<const double> values);
  void put_text(const std::string& name, const std::string& text);

  std::vector<float> f32(const std::string& name) const;
  std::vector<double> f64(const std::string& name) const;
  std::string text(const std::string& name) const;
  bool has(const std::string& name) const { return entries_.count(name) > 0; }
  std::vector<std::string> names() const;

  /// Writes to a temporary sibling and renames over `path`.
  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);

 private:
  struct Entry {
    DType type = DType::F32;
    std::size_t count = 0;
    std::vector<unsigned char> bytes;
  };
  const Entry& entry(const std::string& name, DType type) const;

  std::map<std::string, std::string> meta_;
  std::map<std::string, Entry> entries_;
};

}  // namespace pccgan
