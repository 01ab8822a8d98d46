#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pccgan/checkpoint.hpp"
#include "pccgan/conditioning.hpp"
#include "pccgan/cycle.hpp"
#include "pccgan/dataset.hpp"
#include "pccgan/dictionary.hpp"
#include "pccgan/losses.hpp"
#include "pccgan/networks.hpp"
#include "pccgan/optimizer.hpp"

namespace pccgan {

struct TrainConfig {
  double learning_rate = 3e-4;
  int epochs = 1;
  int batch_size = 4;
  long long max_steps = 0;  // 0 = run every epoch to completion
  ConditioningSpec conditioning;
  DiLConfig dil;  // patch size follows the mosaic size for PatchMosaic scenarios
  WidthScale width_scale{1, 4};
  std::uint64_t seed = 0;
  LossWeights weights;
  ReconstructionNorm norm = ReconstructionNorm::L1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int checkpoint_every = 1;  // epochs between checkpoints; 0 = final only

  void validate() const;
  /// DiL settings actually used, or a disabled config when DiL cannot apply.
  DiLConfig resolved_dil() const;
  GeneratorSpec generator_spec() const { return GeneratorSpec::desk(width_scale); }
  DiscriminatorSpec discriminator_spec() const { return DiscriminatorSpec::desk(width_scale); }
  int residue_channels() const;
};

/// Raised when a non-finite loss appears; names the last checkpoint written.
class NonFiniteLoss : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The scenario needs target-side material that was not provided.
class MissingConditioning : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StepStats {
  long long step = 0;
  LossComponents g;
  double total = 0.0;
  DiscriminatorTerms d;
};

struct EpochStats {
  int epoch = 0;
  long long steps = 0;
  double cgan1 = 0.0;
  double cgan2 = 0.0;
  double cyc = 0.0;
  double id = 0.0;
  double total = 0.0;
  double d_mri = 0.0;
  double d_ct = 0.0;
};

/// Everything that evolves during training. Optimizers hold pointers into the
/// networks, so the state is neither copyable nor movable.
struct TrainState {
  explicit TrainState(const TrainConfig& config, int image_size);
  TrainState(const TrainState&) = delete;
  TrainState& operator=(const TrainState&) = delete;

  TrainConfig config;
  int image_size = 0;
  Generator<float> g_fwd;  // CT -> MRI
  Generator<float> g_bwd;  // MRI -> CT
  Discriminator<float> d_mri;
  Discriminator<float> d_ct;
  Dictionary dict_fwd;
  Dictionary dict_bwd;
  Adam<float> opt_g_fwd, opt_g_bwd, opt_d_mri, opt_d_ct;
  std::mt19937_64 rng;
  long long step = 0;
  int epoch = 0;           // completed epochs
  int step_in_epoch = 0;
  std::vector<double> epoch_sums;  // running sums of the current epoch's stats
};

/// Training pools in the network convention plus cached target channels.
class TrainingData {
 public:
  TrainingData(const UnpairedPools& pools, const ConditioningSpec& spec);
  int image_size() const { return size_; }
  const std::vector<Image>& ct() const { return ct_; }
  const std::vector<Image>& mri() const { return mri_; }
  int steps_per_epoch(int batch_size) const;
  /// Target-side channel for a generator of direction `dir`; `draw` is the
  /// per-sample pool index used by mosaic scenarios.
  const Image& target_channel(Direction dir, std::size_t draw) const;
  bool per_sample_targets() const { return per_sample_; }

 private:
  std::vector<Image> ct_, mri_;
  Image fixed_fwd_, fixed_bwd_;
  bool per_sample_ = false;
  int size_ = 0;
};

std::unique_ptr<TrainState> make_state(const TrainConfig& config, int image_size);

/// Residue of a generator call in `dir` on a single image and its target
/// channel, using the direction's current dictionary.
Image inference_residue(const TrainState& state, Direction dir, const Image& input, const Image& target);

/// One optimization step: draw a batch, build conditioning, restore with DiL,
/// translate both ways, update both discriminators, then both generators.
StepStats train_step(TrainState& state, const TrainingData& data);

struct TrainOptions {
  std::filesystem::path out_dir;
  bool resume = false;
  std::function<void(const StepStats&)> on_step;
  std::function<void(const EpochStats&)> on_epoch;
};

inline constexpr const char* kCheckpointFile = "checkpoint.ckpt";
inline constexpr const char* kStatsFile = "stats.tsv";
inline constexpr const char* kStepsFile = "steps.tsv";

/// Runs until `epochs` epochs (or `max_steps` steps) are complete. Writes
/// per-epoch stats, per-step stats, and checkpoints into out_dir.
std::unique_ptr<TrainState> train(const TrainConfig& config, const UnpairedPools& pools, const TrainOptions& opts);

Checkpoint to_checkpoint(TrainState& state);
std::unique_ptr<TrainState> from_checkpoint(const Checkpoint& ck);
void save_state(TrainState& state, const std::filesystem::path& path);
std::unique_ptr<TrainState> load_state(const std::filesystem::path& path);

/// Single-generator inference. `input` is a single-channel image in either
/// convention; the result is in [-1,1]. `cond_pool` holds the target-side
/// material: the first image is used for mosaic and random-target scenarios.
Image translate(TrainState& state, const Image& input, Direction dir, std::span<const Image> cond_pool);

struct CycleResult {
  Image synthesized;
  Image back;
};

/// Forward translation followed by back-translation of the synthesized
/// image. `back_pool` holds input-modality material for the back hop; when
/// empty the original input is used.
CycleResult cycle_translate(TrainState& state, const Image& input, Direction dir, std::span<const Image> cond_pool,
                            std::span<const Image> back_pool);

std::string stats_header();
std::string stats_row(const EpochStats& s);

}  // namespace pccgan
