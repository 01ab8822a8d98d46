#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pccgan/trainer.hpp"

namespace pccgan {

/// Everything a CLI run needs: training settings plus dataset and output
/// locations.
struct RunConfig {
  TrainConfig train;
  std::filesystem::path train_dir = "data/train";
  std::filesystem::path test_dir = "data/test";
  std::filesystem::path out_dir = "runs/default";
};

/// Raised for malformed config text. `key` names the offending key when there
/// is one; unknown keys set `unknown_key`.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, std::string key, bool unknown)
      : std::runtime_error(message), key_(std::move(key)), unknown_(unknown) {}
  const std::string& key() const { return key_; }
  bool unknown_key() const { return unknown_; }

 private:
  std::string key_;
  bool unknown_;
};

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string doc;
};

/// Every accepted key with its default, in canonical order.
std::vector<ConfigKey> config_keys();

/// `key = value` lines; `#` starts a comment; blank lines ignored. Later
/// duplicates override earlier ones.
RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Sorted `key=value` lines covering every key (defaults included).
std::string canonical_text(const RunConfig& cfg);
/// Same, restricted to keys that shape training.
std::string canonical_text(const TrainConfig& cfg);
TrainConfig parse_train_config(std::string_view text);

/// Keys whose canonical values differ between two configs.
std::vector<std::string> differing_keys(const RunConfig& a, const RunConfig& b);

std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t config_hash(const RunConfig& cfg);
std::uint64_t config_hash(const TrainConfig& cfg);
std::string hash_hex(std::uint64_t h);

}  // namespace pccgan
