#include "pccgan/dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace pccgan {

Dictionary::Dictionary(Eigen::MatrixXd atoms) : atoms_(std::move(atoms)) {
  if (atoms_.cols() < atoms_.rows())
    throw std::invalid_argument("Dictionary: need at least as many atoms as dimensions");
}

double Dictionary::max_norm_deviation() const {
  double worst = 0.0;
  for (Eigen::Index k = 0; k < atoms_.cols(); ++k)
    worst = std::max(worst, std::abs(atoms_.col(k).norm() - 1.0));
  return worst;
}

namespace {

// 1-D cosine atoms of length n sampled at `count` frequencies over [0, pi).
Eigen::MatrixXd cosine_atoms(int n, int count) {
  Eigen::MatrixXd a(n, count);
  for (int k = 0; k < count; ++k) {
    for (int i = 0; i < n; ++i) a(i, k) = std::cos(std::numbers::pi * (i + 0.5) * k / count);
    if (k > 0) a.col(k).array() -= a.col(k).mean();
    const double norm = a.col(k).norm();
    if (norm > 0.0) a.col(k) /= norm;
  }
  return a;
}

}  // namespace

Dictionary init_dictionary(int d, int K) {
  if (d < 1) throw std::invalid_argument("init_dictionary: atom dimension must be >= 1");
  if (K < d) throw std::invalid_argument("init_dictionary: K must be >= d");
  const int p = static_cast<int>(std::lround(std::sqrt(static_cast<double>(d))));
  if (p * p != d) throw std::invalid_argument("init_dictionary: atom dimension must be a square p*p");

  const int ka = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(K))));
  const int kb = (K + ka - 1) / ka;
  const Eigen::MatrixXd rows = cosine_atoms(p, ka);  // vertical frequencies
  const Eigen::MatrixXd cols = cosine_atoms(p, kb);  // horizontal frequencies

  // Order (i, j) pairs by i + j, then i, and keep the first K.
  std::vector<std::pair<int, int>> order;
  order.reserve(static_cast<std::size_t>(ka) * kb);
  for (int i = 0; i < ka; ++i)
    for (int j = 0; j < kb; ++j) order.emplace_back(i, j);
  std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    return a.first + a.second < b.first + b.second;
  });

  Eigen::MatrixXd atoms(d, K);
  for (int k = 0; k < K; ++k) {
    const auto [i, j] = order[k];
    for (int y = 0; y < p; ++y)
      for (int x = 0; x < p; ++x) atoms(y * p + x, k) = rows(y, i) * cols(x, j);
    const double norm = atoms.col(k).norm();
    if (norm == 0.0) throw std::logic_error("init_dictionary: degenerate atom");
    atoms.col(k) /= norm;
  }
  return Dictionary(std::move(atoms));
}

int SparseCodeSet::max_nonzeros() const {
  int worst = 0;
  for (Eigen::Index i = 0; i < codes.cols(); ++i)
    worst = std::max(worst, static_cast<int>((codes.col(i).array() != 0.0).count()));
  return worst;
}

SparseCodeSet sparse_code(const Dictionary& dict, const Eigen::MatrixXd& signals, int sparsity) {
  const int d = dict.atom_dim();
  const int K = dict.num_atoms();
  if (sparsity < 1 || sparsity > d) throw std::invalid_argument("sparse_code: sparsity must lie in [1, d]");
  if (signals.rows() != d) throw std::invalid_argument("sparse_code: signal dimension differs from atoms");

  const Eigen::MatrixXd& D = dict.atoms();
  SparseCodeSet out{Eigen::MatrixXd::Zero(K, signals.cols()), sparsity};
  std::vector<int> support;
  std::vector<char> chosen(K);
  Eigen::MatrixXd sub;
  for (Eigen::Index n = 0; n < signals.cols(); ++n) {
    const Eigen::VectorXd x = signals.col(n);
    const double floor = 1e-13 * std::max(1.0, x.norm());
    Eigen::VectorXd r = x;
    Eigen::VectorXd coef;
    support.clear();
    std::fill(chosen.begin(), chosen.end(), 0);
    for (int t = 0; t < sparsity; ++t) {
      if (r.norm() <= floor) break;
      const Eigen::VectorXd corr = D.transpose() * r;
      int best = -1;
      double best_abs = 0.0;
      for (int k = 0; k < K; ++k) {
        if (chosen[k]) continue;
        const double a = std::abs(corr[k]);
        if (a > best_abs) {
          best_abs = a;
          best = k;
        }
      }
      if (best < 0 || best_abs <= floor) break;
      support.push_back(best);
      chosen[best] = 1;
      sub.resize(d, static_cast<Eigen::Index>(support.size()));
      for (std::size_t s = 0; s < support.size(); ++s) sub.col(s) = D.col(support[s]);
      coef = sub.colPivHouseholderQr().solve(x);
      r = x - sub * coef;
    }
    for (std::size_t s = 0; s < support.size(); ++s) out.codes(support[s], n) = coef[s];
  }
  return out;
}

DictionaryUpdate update_dictionary(const Dictionary& dict, const Eigen::MatrixXd& signals,
                                   const SparseCodeSet& codes) {
  const int d = dict.atom_dim();
  const int K = dict.num_atoms();
  if (signals.rows() != d || codes.codes.rows() != K || codes.codes.cols() != signals.cols())
    throw std::invalid_argument("update_dictionary: dimension mismatch");

  Eigen::MatrixXd D = dict.atoms();
  Eigen::MatrixXd A = codes.codes;
  Eigen::MatrixXd R = signals - D * A;

  std::vector<Eigen::Index> users;
  for (int k = 0; k < K; ++k) {
    users.clear();
    for (Eigen::Index n = 0; n < A.cols(); ++n)
      if (A(k, n) != 0.0) users.push_back(n);
    if (users.empty()) continue;

    const auto m = static_cast<Eigen::Index>(users.size());
    Eigen::MatrixXd E(d, m);
    for (Eigen::Index j = 0; j < m; ++j) E.col(j) = R.col(users[j]) + D.col(k) * A(k, users[j]);

    // Leading singular pair of E via the smaller Gram matrix.
    Eigen::VectorXd u;
    if (d <= m) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(E * E.transpose());
      u = eig.eigenvectors().col(d - 1);
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(E.transpose() * E);
      const Eigen::VectorXd v = eig.eigenvectors().col(m - 1);
      u = E * v;
    }
    const double un = u.norm();
    if (!(un > 0.0) || !std::isfinite(un)) continue;
    u /= un;
    if (u.dot(D.col(k)) < 0.0) u = -u;
    const Eigen::VectorXd coeffs = E.transpose() * u;

    D.col(k) = u;
    for (Eigen::Index j = 0; j < m; ++j) {
      A(k, users[j]) = coeffs[j];
      R.col(users[j]) = E.col(j) - u * coeffs[j];
    }
  }
  return {Dictionary(std::move(D)), SparseCodeSet{std::move(A), codes.sparsity}};
}

Eigen::MatrixXd compute_residue(const Eigen::MatrixXd& signals, const Dictionary& dict,
                                const SparseCodeSet& codes) {
  if (signals.rows() != dict.atom_dim() || codes.codes.rows() != dict.num_atoms() ||
      codes.codes.cols() != signals.cols())
    throw std::invalid_argument("compute_residue: dimension mismatch");
  return signals - dict.atoms() * codes.codes;
}

double reconstruction_error(const Eigen::MatrixXd& signals, const Dictionary& dict,
                            const SparseCodeSet& codes) {
  return compute_residue(signals, dict, codes).squaredNorm();
}

std::string to_string(ResidueChannels r) {
  switch (r) {
    case ResidueChannels::Both: return "both";
    case ResidueChannels::Input: return "input";
    case ResidueChannels::Target: return "target";
  }
  return "both";
}

ResidueChannels parse_residue_channels(const std::string& text) {
  if (text == "both") return ResidueChannels::Both;
  if (text == "input") return ResidueChannels::Input;
  if (text == "target") return ResidueChannels::Target;
  throw std::invalid_argument("unknown residue channel selection: " + text);
}

void DiLConfig::validate() const {
  if (patch_size < 1) throw std::invalid_argument("DiLConfig: patch_size must be >= 1");
  if (resolved_atoms() < atom_dim()) throw std::invalid_argument("DiLConfig: num_atoms must be >= p*p");
  if (sparsity < 1 || sparsity > atom_dim()) throw std::invalid_argument("DiLConfig: sparsity must lie in [1, p*p]");
  if (dict_update_iters < 1) throw std::invalid_argument("DiLConfig: dict_update_iters must be >= 1");
}

Eigen::MatrixXd sequence_matrix(const InterleavedPatchSequence& seq) {
  const auto d = static_cast<Eigen::Index>(seq.patch_size) * seq.patch_size;
  Eigen::MatrixXd X(d, static_cast<Eigen::Index>(seq.entries.size()));
  for (std::size_t n = 0; n < seq.entries.size(); ++n) {
    if (static_cast<Eigen::Index>(seq.entries[n].size()) != d)
      throw std::invalid_argument("sequence_matrix: patch of wrong size");
    for (Eigen::Index i = 0; i < d; ++i) X(i, static_cast<Eigen::Index>(n)) = seq.entries[n][i];
  }
  return X;
}

Image residue_image(const InterleavedPatchSequence& seq, const Eigen::MatrixXd& residue,
                    ResidueChannels which) {
  if (residue.cols() != static_cast<Eigen::Index>(seq.entries.size()) ||
      residue.rows() != static_cast<Eigen::Index>(seq.patch_size) * seq.patch_size)
    throw std::invalid_argument("residue_image: residue does not match the sequence");
  InterleavedPatchSequence folded = seq;
  for (std::size_t n = 0; n < folded.entries.size(); ++n)
    for (std::size_t i = 0; i < folded.entries[n].size(); ++i)
      folded.entries[n][i] = static_cast<float>(residue(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n)));
  auto [input, target] = deinterleave(folded);
  std::vector<Image> planes;
  if (which != ResidueChannels::Target) planes.push_back(reassemble(input));
  if (which != ResidueChannels::Input) planes.push_back(reassemble(target));
  return stack_channels(planes);
}

namespace {

void check_sequences(std::span<const InterleavedPatchSequence> sequences, const DiLConfig& cfg,
                     const Dictionary& dict) {
  cfg.validate();
  if (!cfg.enabled) throw std::logic_error("restore_step: DiL is disabled");
  if (dict.atom_dim() != cfg.atom_dim())
    throw std::invalid_argument("restore_step: dictionary atom size does not match the patch size");
  for (const auto& s : sequences)
    if (s.patch_size != cfg.patch_size)
      throw std::invalid_argument("restore_step: sequence patch size differs from the DiL patch size");
}

}  // namespace

RestoreResult restore_step(std::span<const InterleavedPatchSequence> sequences, const DiLConfig& cfg,
                           const Dictionary& state) {
  check_sequences(sequences, cfg, state);
  std::vector<Eigen::Index> offsets;
  Eigen::Index total = 0;
  for (const auto& s : sequences) {
    offsets.push_back(total);
    total += static_cast<Eigen::Index>(s.entries.size());
  }
  Eigen::MatrixXd X(cfg.atom_dim(), total);
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    const Eigen::MatrixXd part = sequence_matrix(sequences[i]);
    X.middleCols(offsets[i], part.cols()) = part;
  }

  Dictionary dict = state;
  SparseCodeSet codes;
  for (int it = 0; it < cfg.dict_update_iters; ++it) {
    codes = sparse_code(dict, X, cfg.sparsity);
    auto upd = update_dictionary(dict, X, codes);
    dict = std::move(upd.dictionary);
    codes = std::move(upd.codes);
  }
  const Eigen::MatrixXd residue = compute_residue(X, dict, codes);

  RestoreResult result;
  result.dictionary = std::move(dict);
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    const auto n = static_cast<Eigen::Index>(sequences[i].entries.size());
    result.residues.push_back(residue_image(sequences[i], residue.middleCols(offsets[i], n), cfg.residue));
  }
  return result;
}

Image residue_only(const InterleavedPatchSequence& seq, const DiLConfig& cfg, const Dictionary& dict) {
  check_sequences(std::span<const InterleavedPatchSequence>(&seq, 1), cfg, dict);
  const Eigen::MatrixXd X = sequence_matrix(seq);
  const SparseCodeSet codes = sparse_code(dict, X, cfg.sparsity);
  return residue_image(seq, compute_residue(X, dict, codes), cfg.residue);
}

}  // namespace pccgan
