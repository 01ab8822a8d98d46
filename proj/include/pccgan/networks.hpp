#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "pccgan/layers.hpp"

namespace pccgan {

/// Rational multiplier applied to every stage filter count.
struct WidthScale {
  int num = 1;
  int den = 1;

  int apply(int filters) const;
  double value() const { return static_cast<double>(num) / den; }
  std::string to_string() const;
  static WidthScale parse(const std::string& text);
  friend bool operator==(const WidthScale&, const WidthScale&) = default;
};

/// Consecutive layers [first_layer, last_layer] sharing filters and kernel.
struct ConvStage {
  int first_layer = 1;
  int last_layer = 1;
  int filters = 1;
  int kernel = 3;
  friend bool operator==(const ConvStage&, const ConvStage&) = default;
};

struct GeneratorSpec {
  int total_layers = 32;
  std::vector<ConvStage> stages{{1, 15, 128, 5}, {16, 32, 256, 3}};
  std::vector<int> injection_layers{3, 15, 25};
  int residue_layer = 15;
  WidthScale width_scale{1, 4};
  double dropout_rate = 0.2;
  std::vector<int> dropout_layers{7, 14, 24};
  double leaky_slope = 0.2;
  std::vector<std::pair<int, int>> skip_pairs{{3, 7}, {8, 12}, {16, 20}, {21, 25}, {26, 30}};
  int input_channels = 1;
  int output_channels = 1;

  /// Full-width schedule (width scale 1).
  static GeneratorSpec full();
  static GeneratorSpec desk(WidthScale scale = {1, 4});

  const ConvStage& stage_of(int layer) const;
  void validate() const;
};

struct DiscriminatorSpec {
  int total_layers = 15;
  std::vector<ConvStage> stages{{1, 10, 84, 5}, {11, 15, 128, 3}};
  WidthScale width_scale{1, 4};
  double leaky_slope = 0.2;
  int input_channels = 1;

  static DiscriminatorSpec full();
  static DiscriminatorSpec desk(WidthScale scale = {1, 4});

  const ConvStage& stage_of(int layer) const;
  void validate() const;
};

/// One row of a network's layer listing. Layer 0 denotes the discriminator's
/// pooled linear scoring head.
struct LayerAudit {
  int index = 0;
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 0;
  int injected_channels = 0;  // conditioning + residue channels appended to the input
  bool batch_norm = false;
  std::string activation;
  bool dropout = false;
  int skip_from = 0;  // 0 = none

  long long conv_parameters() const;
  long long bn_parameters() const { return batch_norm ? 2LL * out_channels : 0; }
  long long parameters() const { return conv_parameters() + bn_parameters(); }
  friend bool operator==(const LayerAudit&, const LayerAudit&) = default;
};

std::vector<LayerAudit> audit_generator(const GeneratorSpec& spec, int cond_channels, int residue_channels);
std::vector<LayerAudit> audit_discriminator(const DiscriminatorSpec& spec);

/// Closed-form sum over an audit listing.
long long count_parameters(const std::vector<LayerAudit>& audit);
long long count_parameters(const GeneratorSpec& spec, int cond_channels, int residue_channels);
long long count_parameters(const DiscriminatorSpec& spec);

std::string audit_to_tsv(const std::vector<LayerAudit>& audit);

/// Conditional generator: stride-1 convolutions, BN + leaky ReLU on all but
/// the last layer, conditioning channels appended at the injection layers,
/// DiL residue appended at the residue layer, additive skips, dropout, tanh out.
template <typename T>
class Generator {
 public:
  struct LayerTrace {
    Tensor<T> conv_in;
    typename BatchNorm2d<T>::Cache bn;
    std::vector<T> dropout_scale;  // empty when no dropout was applied
    Tensor<T> output;              // only kept for the final (tanh) layer
  };
  struct Trace {
    std::vector<LayerTrace> layers;
  };
  struct InputGrads {
    Tensor<T> input;
    Tensor<T> cond;
    Tensor<T> residue;
  };

  Generator() = default;
  Generator(const GeneratorSpec& spec, int cond_channels, int residue_channels, std::uint64_t seed);

  /// `cond` must have cond_channels() channels (ignored when zero) and
  /// `residue` residue_channels(). Dropout draws from `rng` in train mode.
  Tensor<T> forward(const Tensor<T>& input, const Tensor<T>* cond, const Tensor<T>* residue, Mode mode,
                    std::mt19937_64* rng, Trace* trace);

  /// Accumulates parameter gradients for one traced forward pass.
  InputGrads backward(const Trace& trace, const Tensor<T>& d_out);

  std::vector<Param<T>*> parameters();
  std::vector<std::vector<T>*> buffers();
  void zero_grad();
  long long parameter_count() const;

  const GeneratorSpec& spec() const { return spec_; }
  const std::vector<LayerAudit>& audit() const { return audit_; }
  int cond_channels() const { return cond_channels_; }
  int residue_channels() const { return residue_channels_; }

 private:
  GeneratorSpec spec_;
  int cond_channels_ = 0;
  int residue_channels_ = 0;
  std::vector<LayerAudit> audit_;
  std::vector<Conv2d<T>> convs_;
  std::vector<BatchNorm2d<T>> norms_;  // one per layer except the last
};

/// 15-layer conv + BN + leaky ReLU stack, global average pooling, linear score.
template <typename T>
class Discriminator {
 public:
  struct Trace {
    std::vector<Tensor<T>> conv_in;
    std::vector<typename BatchNorm2d<T>::Cache> bn;
    std::vector<T> pooled;  // n x C
    int h = 0;
    int w = 0;
  };

  Discriminator() = default;
  Discriminator(const DiscriminatorSpec& spec, std::uint64_t seed);

  /// One score per sample.
  std::vector<T> forward(const Tensor<T>& input, Mode mode, Trace* trace);
  /// Accumulates parameter gradients, returns dL/dinput.
  Tensor<T> backward(const Trace& trace, const std::vector<T>& d_scores);

  std::vector<Param<T>*> parameters();
  std::vector<std::vector<T>*> buffers();
  void zero_grad();
  long long parameter_count() const;

  const DiscriminatorSpec& spec() const { return spec_; }
  const std::vector<LayerAudit>& audit() const { return audit_; }

 private:
  DiscriminatorSpec spec_;
  std::vector<LayerAudit> audit_;
  std::vector<Conv2d<T>> convs_;
  std::vector<BatchNorm2d<T>> norms_;
  Param<T> head_weight_;
  Param<T> head_bias_;
};

}  // namespace pccgan
