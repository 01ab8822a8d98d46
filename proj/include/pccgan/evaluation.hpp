#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pccgan/metrics.hpp"
#include "pccgan/trainer.hpp"

namespace pccgan {

/// Cycle translation of one image: (input, direction, target-side pool,
/// input-side pool for the back hop) -> synthesized + back-translated.
using CycleFn =
    std::function<CycleResult(const Image&, Direction, std::span<const Image>, std::span<const Image>)>;

/// Per-pair scores. `forward` compares the synthesized MRI of the CT with its
/// hidden MRI partner, `reverse` the synthesized CT of the MRI with its CT
/// partner; the cycle entries compare back-translations with their inputs.
struct EvalRow {
  std::string ct_file;
  std::string mri_file;
  MetricReport forward;
  MetricReport reverse;
  MetricReport cycle_ct;
  MetricReport cycle_mri;
};

struct EvalSummary {
  std::vector<EvalRow> rows;
  MetricReport forward;
  MetricReport reverse;
  MetricReport cycle_ct;
  MetricReport cycle_mri;
};

struct EvalOptions {
  std::filesystem::path out_dir;  // empty = no files written
  bool write_images = true;       // synthesized, back-translated, difference PNGs
  int max_pairs = 0;              // 0 = all
};

/// Conditioning material for pair i: every other image of the modality,
/// starting after i, so the hidden partner is never shown to the generator.
std::vector<Image> pool_excluding(const std::vector<Image>& images, std::size_t i);

/// |a - b| in [0,1].
Image difference_image(const Image& a, const Image& b);

MetricReport mean_report(const std::vector<MetricReport>& reports);

/// Scores a translator on a dataset directory that carries the hidden pairing
/// manifest. Writes eval.tsv and eval_summary.tsv when out_dir is set.
EvalSummary evaluate_dataset(const std::filesystem::path& root, const CycleFn& fn, const EvalOptions& opts);
EvalSummary evaluate_dataset(const std::filesystem::path& root, TrainState& state, const EvalOptions& opts);

std::string eval_rows_tsv(const EvalSummary& s);
std::string eval_summary_tsv(const EvalSummary& s);

}  // namespace pccgan
