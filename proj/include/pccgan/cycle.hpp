#pragma once

#include <functional>
#include <random>
#include <string>

#include "pccgan/losses.hpp"
#include "pccgan/networks.hpp"

namespace pccgan {

enum class Direction { CtToMri, MriToCt };

std::string to_string(Direction d);
Direction parse_direction(const std::string& text);

/// Per-term multipliers applied on top of the loss weights when gradients are
/// accumulated. All ones is the training objective.
struct TermMask {
  double cgan1 = 1.0;
  double cgan2 = 1.0;
  double cyc = 1.0;
  double id = 1.0;

  static TermMask only_cgan1() { return {1, 0, 0, 0}; }
  static TermMask only_cgan2() { return {0, 1, 0, 0}; }
  static TermMask only_cyc() { return {0, 0, 1, 0}; }
  static TermMask only_id() { return {0, 0, 0, 1}; }
  double combine(const LossComponents& c, const LossWeights& w) const {
    return w.gamma * (cgan1 * c.cgan1 + cgan2 * c.cgan2) + cyc * c.cyc + id * c.id;
  }
};

struct DiscriminatorTerms {
  double mri = 0.0;  // D_MRI on real MRI vs synthesized MRI
  double ct = 0.0;   // D_CT on real CT vs back-translated CT
};

/// One pass through both CGANs for a batch of unpaired images.
///
/// Chain 1 translates CT x to MRI and back; chain 2 does the reverse for MRI y.
/// Every generator call is conditioned on [its input, the target-side channel
/// of its direction]; the input half of the conditioning carries gradient back
/// to the input, the target half is constant. DiL residues are constants.
///
///   L_CGAN1: D_MRI, real y vs G_f(x)
///   L_CGAN2: D_CT,  real x vs G_b(G_f(x))
///   L_cyc:   |G_b(G_f(x)) - x| + |G_f(G_b(y)) - y|
///   L_id:    |G_f(y) - y| + |G_b(x) - x|
template <typename T>
class CyclePass {
 public:
  struct Networks {
    Generator<T>* forward = nullptr;   // CT -> MRI
    Generator<T>* backward = nullptr;  // MRI -> CT
    Discriminator<T>* d_mri = nullptr;
    Discriminator<T>* d_ct = nullptr;
  };

  /// Residue for a generator call on (input, target channel); only called
  /// when the generator takes residue channels.
  using ResidueFn = std::function<Tensor<T>(Direction, const Tensor<T>& input, const Tensor<T>& target)>;

  struct Batch {
    Tensor<T> ct;          // x, n x 1 x H x W, [-1,1]
    Tensor<T> mri;         // y
    Tensor<T> target_fwd;  // MRI-side conditioning channel for G_f
    Tensor<T> target_bwd;  // CT-side conditioning channel for G_b
    Tensor<T> residue_fwd; // residue for G_f(x); empty without DiL
    Tensor<T> residue_bwd; // residue for G_b(y)
  };

  CyclePass(Networks nets, LossWeights weights, ReconstructionNorm norm, ResidueFn residue_fn,
            std::mt19937_64* rng);

  /// Traced train-mode forward of both chains.
  void forward(Batch batch);

  /// Least-squares discriminator terms on the current translations (treated
  /// as constants). With `accumulate`, adds dL/dtheta into both
  /// discriminators' gradients.
  DiscriminatorTerms discriminator_step(bool accumulate);

  /// Re-scores the translations with the discriminators, runs the identity
  /// passes and, with `accumulate`, adds the masked objective's gradient into
  /// both generators. Discriminator gradients are left dirty.
  LossComponents generator_step(const TermMask& mask, bool accumulate);

  const Tensor<T>& synthesized_mri() const { return syn_y_; }
  const Tensor<T>& cycled_ct() const { return cyc_x_; }
  const Tensor<T>& synthesized_ct() const { return syn_x_; }
  const Tensor<T>& cycled_mri() const { return cyc_y_; }

 private:
  Tensor<T> run(Generator<T>& g, Direction dir, const Tensor<T>& input, const Tensor<T>& target,
                const Tensor<T>* residue, typename Generator<T>::Trace* trace);
  Tensor<T> input_gradient(Generator<T>& g, const typename Generator<T>::Trace& trace, const Tensor<T>& d_out);

  Networks nets_;
  LossWeights weights_;
  ReconstructionNorm norm_;
  ResidueFn residue_fn_;
  std::mt19937_64* rng_;

  Batch batch_;
  Tensor<T> syn_y_, cyc_x_, syn_x_, cyc_y_;
  typename Generator<T>::Trace t_syn_y_, t_cyc_x_, t_syn_x_, t_cyc_y_;
  bool ready_ = false;
};

}  // namespace pccgan
