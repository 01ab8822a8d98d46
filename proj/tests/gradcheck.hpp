#pragma once
// Central-difference gradient checks on a two-layer generator/discriminator
// pair run through the full cyclic pass in double precision.

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "pccgan/cycle.hpp"
#include "pccgan/optimizer.hpp"

namespace gradcheck {

using namespace pccgan;

inline GeneratorSpec micro_generator() {
  GeneratorSpec s;
  s.total_layers = 2;
  s.stages = {{1, 1, 3, 3}, {2, 2, 3, 3}};
  s.injection_layers = {2};
  s.residue_layer = 2;
  s.width_scale = {1, 1};
  s.dropout_layers = {};
  s.skip_pairs = {};
  return s;
}

inline DiscriminatorSpec micro_discriminator() {
  DiscriminatorSpec s;
  s.total_layers = 2;
  s.stages = {{1, 1, 2, 3}, {2, 2, 2, 3}};
  s.width_scale = {1, 1};
  return s;
}

struct Micro {
  Generator<double> gf, gb;
  Discriminator<double> dm, dc;
  typename CyclePass<double>::Batch batch;
  ReconstructionNorm norm = ReconstructionNorm::L1;
  LossWeights weights;
  std::mt19937_64 rng{0};

  explicit Micro(std::uint64_t seed, ReconstructionNorm n = ReconstructionNorm::L1)
      : gf(micro_generator(), 2, 2, seed + 1),
        gb(micro_generator(), 2, 2, seed + 2),
        dm(micro_discriminator(), seed + 3),
        dc(micro_discriminator(), seed + 4),
        norm(n) {
    std::mt19937_64 r(seed);
    std::uniform_real_distribution<double> u(-0.9, 0.9);
    auto fill = [&](int c) {
      Tensor<double> t(2, c, 8, 8);
      for (auto& v : t.data) v = u(r);
      return t;
    };
    batch.ct = fill(1);
    batch.mri = fill(1);
    batch.target_fwd = fill(1);
    batch.target_bwd = fill(1);
    batch.residue_fwd = fill(2);
    batch.residue_bwd = fill(2);
    // Micro parameters start small; spread them so every unit is active.
    std::normal_distribution<double> g(0.0, 0.4);
    for (auto* net : {&gf, &gb})
      for (auto* p : net->parameters())
        for (auto& v : p->value) v += g(r);
    for (auto* net : {&dm, &dc})
      for (auto* p : net->parameters())
        for (auto& v : p->value) v += g(r);
  }

  // Residues of back hops and identity passes depend only on the target
  // channel, so they are constants of the generator parameters.
  CyclePass<double> pass() {
    auto fn = [](Direction d, const Tensor<double>&, const Tensor<double>& target) {
      Tensor<double> r(target.n, 2, target.h, target.w);
      for (int i = 0; i < target.n; ++i)
        for (std::size_t k = 0; k < target.plane(); ++k) {
          r.channel(i, 0)[k] = 0.3 * target.sample(i)[k] + (d == Direction::CtToMri ? 0.1 : -0.1);
          r.channel(i, 1)[k] = -0.2 * target.sample(i)[k];
        }
      return r;
    };
    return CyclePass<double>({&gf, &gb, &dm, &dc}, weights, norm, fn, &rng);
  }

  std::vector<Param<double>*> generator_params() {
    auto a = gf.parameters(), b = gb.parameters();
    a.insert(a.end(), b.begin(), b.end());
    return a;
  }

  double generator_objective(const TermMask& mask) {
    auto p = pass();
    p.forward(batch);
    return mask.combine(p.generator_step(mask, false), weights);
  }

  DiscriminatorTerms discriminator_terms() {
    auto p = pass();
    p.forward(batch);
    return p.discriminator_step(false);
  }
};

struct Result {
  double relative_error = 0.0;
  double analytic_norm = 0.0;
  std::size_t checked = 0;
};

inline Result compare(const std::vector<double>& analytic, const std::vector<double>& numeric) {
  double diff = 0.0, na = 0.0, nn = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
    na += analytic[i] * analytic[i];
    nn += numeric[i] * numeric[i];
  }
  Result r;
  r.analytic_norm = std::sqrt(na);
  r.relative_error = std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nn), 1e-12});
  r.checked = analytic.size();
  return r;
}

inline std::vector<double> numeric_gradient(const std::vector<Param<double>*>& params,
                                            const std::function<double()>& f, double h) {
  std::vector<double> out;
  for (auto* p : params)
    for (auto& v : p->value) {
      const double v0 = v;
      v = v0 + h;
      const double up = f();
      v = v0 - h;
      const double down = f();
      v = v0;
      out.push_back((up - down) / (2 * h));
    }
  return out;
}

inline std::vector<double> gathered_grads(const std::vector<Param<double>*>& params) {
  std::vector<double> out;
  for (auto* p : params) out.insert(out.end(), p->grad.begin(), p->grad.end());
  return out;
}

/// Generator parameters vs the masked generator objective.
inline Result check_generator(std::uint64_t seed, const TermMask& mask, double h = 1e-4,
                              ReconstructionNorm norm = ReconstructionNorm::L1) {
  Micro m(seed, norm);
  m.gf.zero_grad();
  m.gb.zero_grad();
  {
    auto p = m.pass();
    p.forward(m.batch);
    p.generator_step(mask, true);
  }
  const auto params = m.generator_params();
  const auto analytic = gathered_grads(params);
  const auto numeric = numeric_gradient(params, [&] { return m.generator_objective(mask); }, h);
  return compare(analytic, numeric);
}

/// Discriminator parameters vs one least-squares discriminator term.
inline Result check_discriminator(std::uint64_t seed, bool mri, double h = 1e-4) {
  Micro m(seed);
  m.dm.zero_grad();
  m.dc.zero_grad();
  {
    auto p = m.pass();
    p.forward(m.batch);
    p.discriminator_step(true);
  }
  const auto params = mri ? m.dm.parameters() : m.dc.parameters();
  const auto analytic = gathered_grads(params);
  const auto numeric = numeric_gradient(
      params, [&] { return mri ? m.discriminator_terms().mri : m.discriminator_terms().ct; }, h);
  return compare(analytic, numeric);
}

struct Named {
  std::string name;
  std::function<Result()> run;
};

inline std::vector<Named> all_checks(std::uint64_t seed) {
  return {
      {"L_CGAN1 (generators)", [=] { return check_generator(seed, TermMask::only_cgan1()); }},
      {"L_CGAN2 (generators)", [=] { return check_generator(seed, TermMask::only_cgan2()); }},
      {"L_cyc (generators)", [=] { return check_generator(seed, TermMask::only_cyc()); }},
      {"L_id (generators)", [=] { return check_generator(seed, TermMask::only_id()); }},
      {"L_Total (generators)", [=] { return check_generator(seed, TermMask{}); }},
      {"L_cyc l2 (generators)",
       [=] { return check_generator(seed, TermMask::only_cyc(), 1e-4, ReconstructionNorm::L2); }},
      {"L_id l2 (generators)",
       [=] { return check_generator(seed, TermMask::only_id(), 1e-4, ReconstructionNorm::L2); }},
      {"D_MRI term (discriminator)", [=] { return check_discriminator(seed, true); }},
      {"D_CT term (discriminator)", [=] { return check_discriminator(seed, false); }},
  };
}

}  // namespace gradcheck
