#include "pccgan/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace pccgan {
namespace fs = std::filesystem;

namespace {

std::string numbered(const char* prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%04d.png", prefix, i);
  return buf;
}

std::vector<std::string> sorted_pngs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("missing dataset directory: " + dir.string());
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".png")
      names.push_back(entry.path().filename().string());
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace

DatasetManifest generate_unpaired_dataset(int n, std::uint64_t seed, const fs::path& out_dir,
                                          const PhantomSpec& base) {
  if (n < 2) throw std::invalid_argument("generate_unpaired_dataset: need n >= 2 to unpair");
  base.validate();

  std::error_code ec;
  fs::create_directories(out_dir / "ct", ec);
  fs::create_directories(out_dir / "mri", ec);
  if (!fs::is_directory(out_dir / "ct") || !fs::is_directory(out_dir / "mri"))
    throw std::runtime_error("cannot create dataset directories under " + out_dir.string());

  std::mt19937_64 rng(seed);
  std::vector<int> ct_slot(n), mri_slot(n);
  std::iota(ct_slot.begin(), ct_slot.end(), 0);
  std::iota(mri_slot.begin(), mri_slot.end(), 0);
  std::shuffle(ct_slot.begin(), ct_slot.end(), rng);
  std::shuffle(mri_slot.begin(), mri_slot.end(), rng);
  const std::uint64_t phantom_seed_base = rng();

  DatasetManifest manifest;
  manifest.root = out_dir;
  manifest.ct_files.resize(n);
  manifest.mri_files.resize(n);
  for (int i = 0; i < n; ++i) {
    PhantomSpec spec = base;
    spec.seed = phantom_seed_base + static_cast<std::uint64_t>(i);
    const PhantomPair pair = generate_phantom_pair(spec);
    const std::string ct_name = numbered("ct", ct_slot[i]);
    const std::string mri_name = numbered("mri", mri_slot[i]);
    save_image(pair.ct, out_dir / "ct" / ct_name);
    save_image(pair.mri, out_dir / "mri" / mri_name);
    manifest.ct_files[ct_slot[i]] = ct_name;
    manifest.mri_files[mri_slot[i]] = mri_name;
    manifest.pairs.push_back({ct_name, mri_name});
  }
  write_eval_pairs(out_dir, manifest.pairs);
  return manifest;
}

UnpairedPools load_unpaired_pools(const fs::path& root) {
  UnpairedPools pools;
  pools.ct_names = sorted_pngs(root / "ct");
  pools.mri_names = sorted_pngs(root / "mri");
  if (pools.ct_names.empty() || pools.mri_names.empty())
    throw std::runtime_error("dataset has an empty modality pool: " + root.string());
  for (const auto& name : pools.ct_names) pools.ct.push_back(load_image(root / "ct" / name));
  for (const auto& name : pools.mri_names) pools.mri.push_back(load_image(root / "mri" / name));
  return pools;
}

std::vector<EvalPair> load_eval_pairs(const fs::path& root) {
  std::ifstream in(root / kPairsFile);
  if (!in) throw std::runtime_error("evaluation manifest missing: " + (root / kPairsFile).string());
  std::vector<EvalPair> pairs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw std::runtime_error("malformed pairing line: " + line);
    pairs.push_back({line.substr(0, tab), line.substr(tab + 1)});
  }
  return pairs;
}

void write_eval_pairs(const fs::path& root, const std::vector<EvalPair>& pairs) {
  std::ofstream out(root / kPairsFile);
  if (!out) throw std::runtime_error("cannot write " + (root / kPairsFile).string());
  out << "# ct_file\tmri_file (evaluation only)\n";
  for (const auto& p : pairs) out << p.ct_file << '\t' << p.mri_file << '\n';
  if (!out) throw std::runtime_error("short write: " + (root / kPairsFile).string());
}

}  // namespace pccgan
