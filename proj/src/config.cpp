#include "pccgan/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace pccgan {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string fmt_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'", key, false);
  return out;
}

template <typename I>
I to_int(const std::string& key, const std::string& v) {
  I out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("config key '" + key + "': expected an integer, got '" + v + "'", key, false);
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config key '" + key + "': expected true/false, got '" + v + "'", key, false);
}

struct KeyDef {
  const char* name;
  const char* doc;
  bool training;  // shapes the trained model (part of the training hash)
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

template <typename F>
auto wrap(const char* key, F f) {
  return [key, f](RunConfig& c, const std::string& v) {
    try {
      f(c, v);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(std::string("config key '") + key + "': " + e.what(), key, false);
    }
  };
}

const std::vector<KeyDef>& key_table() {
  static const std::vector<KeyDef> keys = [] {
    std::vector<KeyDef> k;
    auto add = [&](const char* name, const char* doc, bool training, auto get, auto set) {
      k.push_back({name, doc, training, get, wrap(name, set)});
    };
    add("adam_beta1", "first-moment decay", true, [](const RunConfig& c) { return fmt_double(c.train.adam_beta1); },
        [](RunConfig& c, const std::string& v) { c.train.adam_beta1 = to_double("adam_beta1", v); });
    add("adam_beta2", "second-moment decay", true, [](const RunConfig& c) { return fmt_double(c.train.adam_beta2); },
        [](RunConfig& c, const std::string& v) { c.train.adam_beta2 = to_double("adam_beta2", v); });
    add("adam_eps", "optimizer denominator floor", true,
        [](const RunConfig& c) { return fmt_double(c.train.adam_eps); },
        [](RunConfig& c, const std::string& v) { c.train.adam_eps = to_double("adam_eps", v); });
    add("batch_size", "images per modality per step", true,
        [](const RunConfig& c) { return std::to_string(c.train.batch_size); },
        [](RunConfig& c, const std::string& v) { c.train.batch_size = to_int<int>("batch_size", v); });
    add("checkpoint_every", "epochs between checkpoints (0 = final only)", false,
        [](const RunConfig& c) { return std::to_string(c.train.checkpoint_every); },
        [](RunConfig& c, const std::string& v) { c.train.checkpoint_every = to_int<int>("checkpoint_every", v); });
    add("conditioning", "patch8|patch16|patch32|patch64|random|average<k>|pdf<k>|unconditional", true,
        [](const RunConfig& c) { return to_string(c.train.conditioning); },
        [](RunConfig& c, const std::string& v) { c.train.conditioning.kind = parse_conditioning_kind(v); });
    add("conditioning_seed", "seed of the random-target draw", true,
        [](const RunConfig& c) { return std::to_string(c.train.conditioning.seed); },
        [](RunConfig& c, const std::string& v) {
          c.train.conditioning.seed = to_int<std::uint64_t>("conditioning_seed", v);
        });
    add("dil", "enable the dictionary-learning branch", true,
        [](const RunConfig& c) { return std::string(c.train.dil.enabled ? "true" : "false"); },
        [](RunConfig& c, const std::string& v) { c.train.dil.enabled = to_bool("dil", v); });
    add("dil_atoms", "dictionary atoms (0 = twice the patch dimension)", true,
        [](const RunConfig& c) { return std::to_string(c.train.dil.num_atoms); },
        [](RunConfig& c, const std::string& v) { c.train.dil.num_atoms = to_int<int>("dil_atoms", v); });
    add("dil_iters", "code/update rounds per training step", true,
        [](const RunConfig& c) { return std::to_string(c.train.dil.dict_update_iters); },
        [](RunConfig& c, const std::string& v) { c.train.dil.dict_update_iters = to_int<int>("dil_iters", v); });
    add("dil_patch_size", "DiL patch side for non-mosaic scenarios (mosaics use their own)", true,
        [](const RunConfig& c) { return std::to_string(c.train.dil.patch_size); },
        [](RunConfig& c, const std::string& v) { c.train.dil.patch_size = to_int<int>("dil_patch_size", v); });
    add("dil_residue", "both|input|target residue channels", true,
        [](const RunConfig& c) { return to_string(c.train.dil.residue); },
        [](RunConfig& c, const std::string& v) { c.train.dil.residue = parse_residue_channels(v); });
    add("dil_sparsity", "OMP atoms per patch", true,
        [](const RunConfig& c) { return std::to_string(c.train.dil.sparsity); },
        [](RunConfig& c, const std::string& v) { c.train.dil.sparsity = to_int<int>("dil_sparsity", v); });
    add("epochs", "training epochs", false, [](const RunConfig& c) { return std::to_string(c.train.epochs); },
        [](RunConfig& c, const std::string& v) { c.train.epochs = to_int<int>("epochs", v); });
    add("gamma", "adversarial weight", true, [](const RunConfig& c) { return fmt_double(c.train.weights.gamma); },
        [](RunConfig& c, const std::string& v) { c.train.weights.gamma = to_double("gamma", v); });
    add("learning_rate", "optimizer step size", true,
        [](const RunConfig& c) { return fmt_double(c.train.learning_rate); },
        [](RunConfig& c, const std::string& v) { c.train.learning_rate = to_double("learning_rate", v); });
    add("max_steps", "stop after this many steps (0 = no cap)", false,
        [](const RunConfig& c) { return std::to_string(c.train.max_steps); },
        [](RunConfig& c, const std::string& v) { c.train.max_steps = to_int<long long>("max_steps", v); });
    add("out_dir", "run output directory", false, [](const RunConfig& c) { return c.out_dir.string(); },
        [](RunConfig& c, const std::string& v) { c.out_dir = v; });
    add("recon_norm", "l1|l2 for cycle and identity terms", true,
        [](const RunConfig& c) { return to_string(c.train.norm); },
        [](RunConfig& c, const std::string& v) { c.train.norm = parse_norm(v); });
    add("seed", "master seed", true, [](const RunConfig& c) { return std::to_string(c.train.seed); },
        [](RunConfig& c, const std::string& v) { c.train.seed = to_int<std::uint64_t>("seed", v); });
    add("test_dir", "dataset with the hidden pairing used for evaluation", false,
        [](const RunConfig& c) { return c.test_dir.string(); },
        [](RunConfig& c, const std::string& v) { c.test_dir = v; });
    add("train_dir", "unpaired training dataset", false, [](const RunConfig& c) { return c.train_dir.string(); },
        [](RunConfig& c, const std::string& v) { c.train_dir = v; });
    add("width_scale", "filter multiplier, e.g. 1/4", true,
        [](const RunConfig& c) { return c.train.width_scale.to_string(); },
        [](RunConfig& c, const std::string& v) { c.train.width_scale = WidthScale::parse(v); });
    return k;
  }();
  return keys;
}

const KeyDef* find_key(const std::string& name) {
  for (const auto& k : key_table())
    if (name == k.name) return &k;
  return nullptr;
}

std::string canonical(const RunConfig& cfg, bool training_only) {
  std::string out;
  for (const auto& k : key_table()) {
    if (training_only && !k.training) continue;
    out += k.name;
    out += '=';
    out += k.get(cfg);
    out += '\n';
  }
  return out;
}

std::map<std::string, std::string> parse_lines(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value", "", false);
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (!find_key(key)) throw ConfigError("unknown config key '" + key + "'", key, true);
    kv[key] = value;
  }
  return kv;
}

}  // namespace

std::vector<ConfigKey> config_keys() {
  RunConfig defaults;
  std::vector<ConfigKey> out;
  for (const auto& k : key_table()) out.push_back({k.name, k.get(defaults), k.doc});
  return out;
}

RunConfig parse_run_config(std::string_view text) {
  RunConfig cfg;
  const auto kv = parse_lines(text);
  for (const auto& [key, value] : kv) find_key(key)->set(cfg, value);
  const int p = cfg.train.conditioning.patch_size();
  if (p > 0 && kv.count("dil_patch_size") && cfg.train.dil.patch_size != p)
    throw ConfigError("config key 'dil_patch_size': must equal the mosaic patch size " + std::to_string(p),
                      "dil_patch_size", false);
  try {
    cfg.train.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid config: ") + e.what(), "", false);
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string canonical_text(const RunConfig& cfg) { return canonical(cfg, false); }

std::string canonical_text(const TrainConfig& cfg) {
  RunConfig rc;
  rc.train = cfg;
  return canonical(rc, true);
}

TrainConfig parse_train_config(std::string_view text) {
  RunConfig cfg;
  for (const auto& [key, value] : parse_lines(text)) find_key(key)->set(cfg, value);
  return cfg.train;
}

std::vector<std::string> differing_keys(const RunConfig& a, const RunConfig& b) {
  std::vector<std::string> out;
  for (const auto& k : key_table())
    if (k.get(a) != k.get(b)) out.push_back(k.name);
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t config_hash(const RunConfig& cfg) { return fnv1a64(canonical_text(cfg)); }
std::uint64_t config_hash(const TrainConfig& cfg) { return fnv1a64(canonical_text(cfg)); }

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace pccgan
