#include "pccgan/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pccgan {
namespace {

constexpr const char* kMagic = "pccgan-checkpoint";

const char* type_name(Checkpoint::DType t) {
  switch (t) {
    case Checkpoint::DType::F32: return "f32";
    case Checkpoint::DType::F64: return "f64";
    case Checkpoint::DType::Text: return "text";
  }
  return "?";
}

Checkpoint::DType parse_type(const std::string& s) {
  if (s == "f32") return Checkpoint::DType::F32;
  if (s == "f64") return Checkpoint::DType::F64;
  if (s == "text") return Checkpoint::DType::Text;
  throw std::runtime_error("checkpoint: unknown tensor type '" + s + "'");
}

std::size_t element_size(Checkpoint::DType t) {
  return t == Checkpoint::DType::F32 ? 4 : t == Checkpoint::DType::F64 ? 8 : 1;
}

template <typename U>
void to_le(const U* src, std::size_t n, unsigned char* dst) {
  std::memcpy(dst, src, n * sizeof(U));
  if constexpr (std::endian::native == std::endian::big)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t a = 0, b = sizeof(U) - 1; a < b; ++a, --b) std::swap(dst[i * sizeof(U) + a], dst[i * sizeof(U) + b]);
}

template <typename U>
std::vector<U> from_le(const std::vector<unsigned char>& bytes, std::size_t n) {
  std::vector<unsigned char> tmp = bytes;
  if constexpr (std::endian::native == std::endian::big)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t a = 0, b = sizeof(U) - 1; a < b; ++a, --b) std::swap(tmp[i * sizeof(U) + a], tmp[i * sizeof(U) + b]);
  std::vector<U> out(n);
  std::memcpy(out.data(), tmp.data(), n * sizeof(U));
  return out;
}

void check_token(const std::string& s, const char* what) {
  if (s.empty() || s.find_first_of(" \t\r\n") != std::string::npos)
    throw std::invalid_argument(std::string("checkpoint: ") + what + " '" + s + "' must be a non-empty token");
}

}  // namespace

void Checkpoint::set_meta(const std::string& key, const std::string& value) {
  check_token(key, "meta key");
  if (value.find('\n') != std::string::npos) throw std::invalid_argument("checkpoint: meta value contains a newline");
  meta_[key] = value;
}

const std::string& Checkpoint::meta(const std::string& key) const {
  auto it = meta_.find(key);
  if (it == meta_.end()) throw std::runtime_error("checkpoint: missing meta '" + key + "'");
  return it->second;
}

void Checkpoint::put(const std::string& name, std::span<const float> values) {
  check_token(name, "tensor name");
  Entry e{DType::F32, values.size(), std::vector<unsigned char>(values.size() * 4)};
  to_le(values.data(), values.size(), e.bytes.data());
  entries_[name] = std::move(e);
}

void Checkpoint::put(const std::string& name, std::span<const double> values) {
  check_token(name, "tensor name");
  Entry e{DType::F64, values.size(), std::vector<unsigned char>(values.size() * 8)};
  to_le(values.data(), values.size(), e.bytes.data());
  entries_[name] = std::move(e);
}

void Checkpoint::put_text(const std::string& name, const std::string& text) {
  check_token(name, "tensor name");
  entries_[name] = Entry{DType::Text, text.size(), std::vector<unsigned char>(text.begin(), text.end())};
}

const Checkpoint::Entry& Checkpoint::entry(const std::string& name, DType type) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw std::runtime_error("checkpoint: missing tensor '" + name + "'");
  if (it->second.type != type)
    throw std::runtime_error("checkpoint: tensor '" + name + "' is " + type_name(it->second.type) + ", expected " +
                             type_name(type));
  return it->second;
}

std::vector<float> Checkpoint::f32(const std::string& name) const {
  const Entry& e = entry(name, DType::F32);
  return from_le<float>(e.bytes, e.count);
}

std::vector<double> Checkpoint::f64(const std::string& name) const {
  const Entry& e = entry(name, DType::F64);
  return from_le<double>(e.bytes, e.count);
}

std::string Checkpoint::text(const std::string& name) const {
  const Entry& e = entry(name, DType::Text);
  return {e.bytes.begin(), e.bytes.end()};
}

std::vector<std::string> Checkpoint::names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_) out.push_back(k);
  return out;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  std::ostringstream head;
  head << kMagic << ' ' << kVersion << '\n';
  for (const auto& [k, v] : meta_) head << "meta " << k << ' ' << v << '\n';
  std::size_t offset = 0;
  for (const auto& [name, e] : entries_) {
    head << "tensor " << name << ' ' << type_name(e.type) << ' ' << e.count << ' ' << offset << '\n';
    offset += e.bytes.size();
  }
  head << "end\n";

  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("checkpoint: cannot write " + tmp.string());
    const std::string h = head.str();
    out.write(h.data(), static_cast<std::streamsize>(h.size()));
    for (const auto& [name, e] : entries_)
      out.write(reinterpret_cast<const char*>(e.bytes.data()), static_cast<std::streamsize>(e.bytes.size()));
    if (!out) throw std::runtime_error("checkpoint: write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("checkpoint: empty file " + path.string());
  {
    std::istringstream ls(line);
    std::string magic;
    int version = 0;
    ls >> magic >> version;
    if (magic != kMagic) throw std::runtime_error("checkpoint: " + path.string() + " is not a checkpoint");
    if (version != kVersion)
      throw std::runtime_error("checkpoint: unsupported format version " + std::to_string(version));
  }
  Checkpoint ck;
  struct Pending {
    std::string name;
    DType type;
    std::size_t count;
    std::size_t offset;
  };
  std::vector<Pending> index;
  bool ended = false;
  while (std::getline(in, line)) {
    if (line == "end") {
      ended = true;
      break;
    }
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    if (kind == "meta") {
      std::string key;
      ls >> key;
      std::string value;
      std::getline(ls, value);
      if (!value.empty() && value[0] == ' ') value.erase(0, 1);
      ck.meta_[key] = value;
    } else if (kind == "tensor") {
      Pending p;
      std::string type;
      ls >> p.name >> type >> p.count >> p.offset;
      if (!ls) throw std::runtime_error("checkpoint: malformed index line '" + line + "'");
      p.type = parse_type(type);
      index.push_back(p);
    } else {
      throw std::runtime_error("checkpoint: unexpected manifest line '" + line + "'");
    }
  }
  if (!ended) throw std::runtime_error("checkpoint: manifest not terminated");
  const std::streamoff base = in.tellg();
  for (const auto& p : index) {
    Entry e{p.type, p.count, std::vector<unsigned char>(p.count * element_size(p.type))};
    in.seekg(base + static_cast<std::streamoff>(p.offset));
    in.read(reinterpret_cast<char*>(e.bytes.data()), static_cast<std::streamsize>(e.bytes.size()));
    if (!in) throw std::runtime_error("checkpoint: truncated payload for '" + p.name + "'");
    ck.entries_[p.name] = std::move(e);
  }
  return ck;
}

}  // namespace pccgan
