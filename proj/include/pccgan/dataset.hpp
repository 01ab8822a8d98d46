#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pccgan/image.hpp"
#include "pccgan/phantom.hpp"

namespace pccgan {

/// Hidden correspondence between a CT file and its MRI partner. Written to
/// `pairs.eval.tsv` and read only by evaluation code.
struct EvalPair {
  std::string ct_file;
  std::string mri_file;
};

struct DatasetManifest {
  std::filesystem::path root;
  std::vector<std::string> ct_files;   // relative to root/ct
  std::vector<std::string> mri_files;  // relative to root/mri
  std::vector<EvalPair> pairs;
};

inline constexpr const char* kPairsFile = "pairs.eval.tsv";

/// Generates n phantom pairs, writes them as 16-bit PNGs under root/ct and
/// root/mri with independently shuffled file numbering, and records the
/// true pairing in root/pairs.eval.tsv.
DatasetManifest generate_unpaired_dataset(int n, std::uint64_t seed,
                                          const std::filesystem::path& out_dir,
                                          const PhantomSpec& base = {});

/// Modality pools as seen by training. Only the ct/ and mri/ directories are
/// read; the pairing file is never touched.
struct UnpairedPools {
  std::vector<Image> ct;
  std::vector<Image> mri;
  std::vector<std::string> ct_names;
  std::vector<std::string> mri_names;

  const std::vector<Image>& pool(Modality m) const { return m == Modality::CT ? ct : mri; }
};

UnpairedPools load_unpaired_pools(const std::filesystem::path& root);

std::vector<EvalPair> load_eval_pairs(const std::filesystem::path& root);
void write_eval_pairs(const std::filesystem::path& root, const std::vector<EvalPair>& pairs);

}  // namespace pccgan
