#pragma once

#include <Eigen/Dense>
#include <string>

#include "pccgan/conditioning.hpp"
#include "pccgan/image.hpp"

namespace pccgan {

/// Overcomplete dictionary: d x K matrix with unit-norm columns, K >= d.
class Dictionary {
 public:
  Dictionary() = default;
  explicit Dictionary(Eigen::MatrixXd atoms);

  int atom_dim() const { return static_cast<int>(atoms_.rows()); }
  int num_atoms() const { return static_cast<int>(atoms_.cols()); }
  const Eigen::MatrixXd& atoms() const { return atoms_; }
  bool empty() const { return atoms_.size() == 0; }

  /// Largest | ||column|| - 1 | over all atoms.
  double max_norm_deviation() const;

 private:
  Eigen::MatrixXd atoms_;
};

/// Separable overcomplete DCT on a sqrt(d) x sqrt(d) patch: products of 1-D
/// cosine atoms, ordered by total frequency, first K kept. Non-DC 1-D atoms
/// are mean-removed before normalization.
Dictionary init_dictionary(int atom_dim, int num_atoms);

/// Coefficients stored densely, one column per signal.
struct SparseCodeSet {
  Eigen::MatrixXd codes;  // K x N
  int sparsity = 0;

  int max_nonzeros() const;
};

/// Orthogonal matching pursuit with at most T atoms per signal. Signals are the
/// columns of X (d x N).
SparseCodeSet sparse_code(const Dictionary& dict, const Eigen::MatrixXd& signals, int sparsity);

struct DictionaryUpdate {
  Dictionary dictionary;
  SparseCodeSet codes;
};

/// One K-SVD sweep: every atom with a non-empty support is replaced by the
/// leading left singular vector of its restricted residual, and its
/// coefficients by the matching scaled right singular vector. Unused atoms are
/// left unchanged.
DictionaryUpdate update_dictionary(const Dictionary& dict, const Eigen::MatrixXd& signals,
                                   const SparseCodeSet& codes);

/// X - D A, one column per signal.
Eigen::MatrixXd compute_residue(const Eigen::MatrixXd& signals, const Dictionary& dict,
                                const SparseCodeSet& codes);

double reconstruction_error(const Eigen::MatrixXd& signals, const Dictionary& dict,
                            const SparseCodeSet& codes);

enum class ResidueChannels { Both, Input, Target };

std::string to_string(ResidueChannels r);
ResidueChannels parse_residue_channels(const std::string& text);

struct DiLConfig {
  bool enabled = true;
  int patch_size = 16;
  int num_atoms = 0;  // 0 selects 2 d
  int sparsity = 5;
  int dict_update_iters = 1;
  ResidueChannels residue = ResidueChannels::Both;

  int atom_dim() const { return patch_size * patch_size; }
  int resolved_atoms() const { return num_atoms > 0 ? num_atoms : 2 * atom_dim(); }
  int residue_channel_count() const { return residue == ResidueChannels::Both ? 2 : 1; }
  void validate() const;
};

/// Patches of a sequence as columns, in sequence order.
Eigen::MatrixXd sequence_matrix(const InterleavedPatchSequence& seq);

/// Folds residue columns (sequence order) back to image layout. Returns the
/// channels selected by `which`: input residues then target residues.
Image residue_image(const InterleavedPatchSequence& seq, const Eigen::MatrixXd& residue,
                    ResidueChannels which);

struct RestoreResult {
  std::vector<Image> residues;  // one per input sequence
  Dictionary dictionary;
};

/// Sparse-codes the patches of all sequences, refits the dictionary
/// dict_update_iters times, and returns the per-sequence residue images along
/// with the evolved dictionary.
RestoreResult restore_step(std::span<const InterleavedPatchSequence> sequences, const DiLConfig& cfg,
                           const Dictionary& state);

inline RestoreResult restore_step(const InterleavedPatchSequence& seq, const DiLConfig& cfg,
                                  const Dictionary& state) {
  return restore_step(std::span<const InterleavedPatchSequence>(&seq, 1), cfg, state);
}

/// Residue against a fixed dictionary (no update).
Image residue_only(const InterleavedPatchSequence& seq, const DiLConfig& cfg, const Dictionary& dict);

}  // namespace pccgan
