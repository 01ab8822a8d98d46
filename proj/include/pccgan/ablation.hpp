#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "pccgan/config.hpp"
#include "pccgan/metrics.hpp"

namespace pccgan {

struct AblationCell {
  std::string scenario;  // conditioning name, e.g. "patch16"
  bool dil = false;
  bool ok = false;
  std::string failure;
  MetricReport forward;  // CT->MRI translation vs hidden MRI partner
  MetricReport reverse;  // MRI->CT translation vs hidden CT partner
  std::string config_hash;
  std::vector<std::string> changed_keys;  // relative to the base config
  double seconds = 0.0;
};

/// Eight scenario rows x {without, with DiL}.
struct AblationMatrix {
  std::vector<std::string> scenarios;
  std::vector<AblationCell> cells;  // row-major, index = row * 2 + dil

  AblationCell& cell(std::size_t row, bool dil) { return cells.at(row * 2 + (dil ? 1 : 0)); }
  const AblationCell& cell(std::size_t row, bool dil) const { return cells.at(row * 2 + (dil ? 1 : 0)); }
};

/// Unconditional, random target, average of k, sample PDF of k, mosaics of
/// 8, 16, 32, 64.
std::vector<ConditioningSpec> ablation_scenarios(int k, std::uint64_t seed);
std::string scenario_label(const ConditioningSpec& spec);

/// Base config with only the conditioning scenario and DiL flag replaced.
RunConfig cell_config(const RunConfig& base, const ConditioningSpec& scenario, bool dil);

struct AblationOptions {
  long long steps_per_cell = 200;
  std::vector<std::string> only;  // scenario names to run; empty = all
  bool run_without_dil = true;
  bool run_with_dil = true;
  int max_eval_pairs = 0;
  bool write_images = false;
  std::filesystem::path out_dir;
  std::function<void(const std::string&)> log;
};

/// Trains and evaluates every selected cell with the same seed and data.
/// Cell failures are recorded in the matrix; only I/O errors propagate.
AblationMatrix run_ablation(const RunConfig& base, const AblationOptions& opts);

/// Header + 8 rows; 12 value columns ordered DiL flag, direction, metric.
/// Failed cells carry "failed(<reason>)" in each of their columns.
std::string matrix_to_tsv(const AblationMatrix& m);
AblationMatrix matrix_from_tsv(const std::string& text);
std::string cells_audit_tsv(const AblationMatrix& m);

/// SSIM, PSNR and RMSE bar charts into out_dir.
void write_ablation_plots(const AblationMatrix& m, const std::filesystem::path& out_dir);

}  // namespace pccgan
