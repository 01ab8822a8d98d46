// Acceptance runner: one PASS/FAIL line per criterion. Soft criteria report
// SOFT-PASS/SOFT-FAIL and never change the exit status.
//
//   acceptance            run everything
//   acceptance 1 3 9      run a subset

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "gradcheck.hpp"
#include "pccgan/ablation.hpp"
#include "pccgan/conditioning.hpp"
#include "pccgan/config.hpp"
#include "pccgan/dictionary.hpp"
#include "pccgan/evaluation.hpp"
#include "pccgan/metrics.hpp"
#include "pccgan/networks.hpp"
#include "pccgan/trainer.hpp"
#include "support.hpp"

using namespace pccgan;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::filesystem::path work_dir() {
  static const auto dir = [] {
    auto d = std::filesystem::current_path() / "acceptance_out";
    std::filesystem::create_directories(d);
    return d;
  }();
  return dir;
}

std::vector<float> flat_params(TrainState& s) {
  std::vector<float> out;
  for (auto* net : {&s.g_fwd, &s.g_bwd})
    for (auto* p : net->parameters()) out.insert(out.end(), p->value.begin(), p->value.end());
  for (auto* net : {&s.d_mri, &s.d_ct})
    for (auto* p : net->parameters()) out.insert(out.end(), p->value.begin(), p->value.end());
  for (auto* net : {&s.g_fwd, &s.g_bwd})
    for (auto* b : net->buffers()) out.insert(out.end(), b->begin(), b->end());
  return out;
}

// ---------------------------------------------------------------------------

Outcome metrics_oracle() {
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Image a = k % 2 ? support::random_image(64, 64, 1000 + k) : support::textured_image(64, 64, 1000 + k);
    const Image b = support::random_image(64, 64, 2000 + k);
    worst = std::max({worst, std::abs(rmse(a, b) - support::brute_rmse(a, b)),
                      std::abs(psnr(a, b) - support::brute_psnr(a, b)),
                      std::abs(ssim(a, b) - support::brute_ssim(a, b))});
  }
  const Image x = support::textured_image(64, 64, 7);
  const double self_ssim = ssim(x, x), self_rmse = rmse(x, x), unit = psnr_from_mse(1.0);
  const double frozen = std::abs(ssim(support::frozen_a(), support::frozen_b()) - support::kFrozenSsimAB);
  const bool ok = worst < 1e-6 && std::abs(self_ssim - 1.0) < 1e-12 && self_rmse == 0.0 &&
                  std::abs(unit - 48.1308) < 5e-5 && frozen < 1e-6;
  return {ok, fmt("max |impl - oracle| = %.2e over 20 pairs; ssim(x,x) = %.12f; rmse(x,x) = %g; psnr(mse=1) = %.4f",
                  worst, self_ssim, self_rmse, unit)};
}

Outcome interleave_roundtrip() {
  std::mt19937_64 rng(17);
  int exact = 0;
  for (int t = 0; t < 100; ++t) {
    const int p = 1 + static_cast<int>(rng() % 8), gw = 1 + static_cast<int>(rng() % 8),
              gh = 1 + static_cast<int>(rng() % 8);
    const PatchGrid a = extract_patches(support::random_image(p * gw, p * gh, rng()), p);
    const PatchGrid b = extract_patches(support::random_image(p * gw, p * gh, rng()), p);
    const auto [a2, b2] = deinterleave(interleave_alternate(a, b));
    exact += a2.same_geometry(a) && a2.patches == a.patches && b2.patches == b.patches;
  }
  int bit_exact = 0;
  for (int p : {8, 16, 32, 64}) {
    const Image in = support::random_image(64, 64, 40 + p), tgt = support::random_image(64, 64, 80 + p);
    const ConditioningTensor c = sequence_to_conditioning(interleave_alternate(extract_patches(in, p), extract_patches(tgt, p)));
    const Image c0 = c.channel(0), c1 = c.channel(1);
    bit_exact += c.channels == 2 && support::pixels(c0) == support::pixels(in) && support::pixels(c1) == support::pixels(tgt);
  }
  return {exact == 100 && bit_exact == 4,
          fmt("%g/100 random shapes round-trip exactly; %g/4 mosaic sizes bit-exact", exact, bit_exact)};
}

Outcome gradients() {
  double worst = 0.0;
  std::string detail;
  bool nontrivial = true;
  for (const auto& c : gradcheck::all_checks(11)) {
    const auto r = c.run();
    worst = std::max(worst, r.relative_error);
    nontrivial = nontrivial && r.analytic_norm > 1e-6;
    detail += " " + c.name + "=" + fmt("%.1e", r.relative_error) + ";";
  }
  return {worst <= 1e-3 && nontrivial, fmt("worst relative error %.2e (step 1e-4):", worst) + detail};
}

Outcome total_identity() {
  const auto dir = work_dir() / "identity";
  generate_unpaired_dataset(8, 31, dir / "data");
  TrainConfig c;
  c.width_scale = {1, 8};
  c.batch_size = 1;
  c.seed = 3;
  c.epochs = 1000;
  c.max_steps = 50;
  c.checkpoint_every = 0;
  double worst = 0.0;
  int steps = 0;
  TrainOptions o;
  o.out_dir = dir / "run";
  o.on_step = [&](const StepStats& s) {
    const double expect = 1.5 * (s.g.cgan1 + s.g.cgan2) + s.g.cyc + s.g.id;
    worst = std::max(worst, std::abs(s.total - expect));
    ++steps;
  };
  train(c, load_unpaired_pools(dir / "data"), o);
  return {steps == 50 && worst <= 1e-6 && c.weights.gamma == 1.5,
          fmt("%g steps, max |L_Total - (1.5(L_CGAN1+L_CGAN2)+L_cyc+L_id)| = %.2e", steps, worst)};
}

Outcome dictionary_learning() {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  const Dictionary dct = init_dictionary(64, 128);
  Eigen::MatrixXd patches(64, 1000);
  for (int j = 0; j < 1000; ++j)
    for (int i = 0; i < 64; ++i) patches(i, j) = g(rng);
  Eigen::VectorXd prev = patches.colwise().norm().transpose();
  long long violations = 0;
  for (int t = 1; t <= 16; ++t) {
    const Eigen::VectorXd now =
        compute_residue(patches, dct, sparse_code(dct, patches, t)).colwise().norm().transpose();
    for (int j = 0; j < 1000; ++j) violations += now(j) > prev(j) + 1e-10;
    prev = now;
  }

  const int d = 16, k = 32, t = 3, n = 1500;
  Eigen::MatrixXd truth(d, k);
  for (int j = 0; j < k; ++j) {
    for (int i = 0; i < d; ++i) truth(i, j) = g(rng);
    truth.col(j).normalize();
  }
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(d, n);
  std::uniform_int_distribution<int> pick(0, k - 1);
  for (int j = 0; j < n; ++j) {
    std::set<int> used;
    while (static_cast<int>(used.size()) < t) used.insert(pick(rng));
    for (int a : used) x.col(j) += (g(rng) >= 0 ? 1.0 : -1.0) * (0.5 + std::abs(g(rng))) * truth.col(a);
  }
  Eigen::MatrixXd init(d, k);
  for (int j = 0; j < k; ++j) init.col(j) = x.col(j).normalized();
  Dictionary dict(init);
  for (int round = 0; round < 30; ++round) dict = update_dictionary(dict, x, sparse_code(dict, x, t)).dictionary;
  int recovered = 0;
  for (int a = 0; a < k; ++a) recovered += (dict.atoms().transpose() * truth.col(a)).cwiseAbs().maxCoeff() > 0.9;
  return {violations == 0 && recovered >= 0.9 * k,
          fmt("OMP residual increases: %g over 1000 patches x T=1..16; K-SVD recovered %g/32 atoms at |cos|>0.9",
              violations, recovered)};
}

// Shared by the descent criterion and the toy-checkpoint examples.
std::unique_ptr<TrainState> g_descent_state;
std::filesystem::path g_descent_data;

Outcome descent() {
  const auto dir = work_dir() / "descent";
  g_descent_data = dir / "data";
  generate_unpaired_dataset(16, 7, g_descent_data);
  TrainConfig c;
  c.width_scale = {1, 4};
  c.batch_size = 1;
  c.seed = 1;
  c.epochs = 1000;
  c.max_steps = 200;
  c.checkpoint_every = 0;
  std::vector<StepStats> steps;
  TrainOptions o;
  o.out_dir = dir / "run";
  o.on_step = [&](const StepStats& s) { steps.push_back(s); };
  const auto t0 = std::chrono::steady_clock::now();
  g_descent_state = train(c, load_unpaired_pools(g_descent_data), o);
  const double secs = seconds_since(t0);
  if (steps.size() != 200) return {false, "run stopped early"};
  double cyc_tail = 0.0, id_tail = 0.0;
  for (std::size_t i = 190; i < 200; ++i) {
    cyc_tail += steps[i].g.cyc / 10;
    id_tail += steps[i].g.id / 10;
  }
  const double cyc0 = steps[0].g.cyc, id0 = steps[0].g.id;
  const StepStats& last = steps.back();
  const bool ok = cyc_tail < 0.5 * cyc0 && id_tail < 0.5 * id0 && last.g.cyc < 0.5 * cyc0 && last.g.id < 0.5 * id0 &&
                  secs < 1800;
  return {ok, fmt("L_cyc %.4f -> %.4f (mean of last 10), L_id %.4f -> ", cyc0, cyc_tail, id0) +
                  fmt("%.4f (mean of last 10); final step cyc %.4f id %.4f; ", id_tail, steps.back().g.cyc,
                      steps.back().g.id) +
                  fmt("%.0f s", secs)};
}

Outcome toy_examples() {
  if (!g_descent_state) return {false, "needs criterion 6 to run first"};
  const auto test_dir = work_dir() / "descent" / "test";
  generate_unpaired_dataset(4, 8, test_dir);
  const auto pairs = load_eval_pairs(test_dir);
  const auto mri_pool = load_unpaired_pools(test_dir).mri;
  int better_than_input = 0, cycle_closer = 0;
  for (const auto& p : pairs) {
    const Image ct = load_image(test_dir / "ct" / p.ct_file), mri = load_image(test_dir / "mri" / p.mri_file);
    std::vector<Image> pool;
    for (const auto& m : mri_pool)
      if (support::pixels(m) != support::pixels(mri)) pool.push_back(m);
    const CycleResult r = cycle_translate(*g_descent_state, ct, Direction::CtToMri, pool, {});
    const Image syn = r.synthesized.to_unit(), back = r.back.to_unit();
    better_than_input += ssim(syn, mri) > ssim(ct, mri);
    cycle_closer += rmse(back, ct) < rmse(syn, ct);
  }
  const int n = static_cast<int>(pairs.size());
  return {better_than_input == n && cycle_closer == n,
          fmt("SSIM(translation, partner) > SSIM(input, partner) on %g/%g; RMSE(back, input) < RMSE(syn, input) on %g/%g",
              better_than_input, n, cycle_closer, n)};
}

Outcome ablation_ordering() {
  const auto dir = work_dir() / "ablation";
  generate_unpaired_dataset(16, 41, dir / "train");
  generate_unpaired_dataset(6, 42, dir / "test");
  RunConfig base;
  base.train.width_scale = {1, 8};
  base.train.batch_size = 1;
  base.train.seed = 1;
  base.train_dir = dir / "train";
  base.test_dir = dir / "test";
  AblationOptions o;
  o.steps_per_cell = 60;
  o.only = {"unconditional", "patch16"};
  o.out_dir = dir / "out";
  const AblationMatrix m = run_ablation(base, o);
  const AblationCell *uncond = nullptr, *p16 = nullptr, *p16_dil = nullptr;
  for (std::size_t r = 0; r < m.scenarios.size(); ++r) {
    if (m.scenarios[r] == "unconditional") uncond = &m.cell(r, false);
    if (m.scenarios[r] == "patch16") {
      p16 = &m.cell(r, false);
      p16_dil = &m.cell(r, true);
    }
  }
  if (!uncond || !p16 || !p16_dil || !uncond->ok || !p16->ok || !p16_dil->ok) return {false, "a cell failed"};
  const bool ok = p16->forward.ssim >= uncond->forward.ssim && p16_dil->forward.ssim >= p16->forward.ssim;
  return {ok, fmt("CT->MRI SSIM: unconditional %.4f, patch16 %.4f, patch16+DiL %.4f (60 steps/cell, width 1/8)",
                  uncond->forward.ssim, p16->forward.ssim, p16_dil->forward.ssim)};
}

Outcome determinism_and_resume() {
  const auto dir = work_dir() / "determinism";
  generate_unpaired_dataset(8, 51, dir / "data");
  const auto pools = load_unpaired_pools(dir / "data");
  TrainConfig c;
  c.width_scale = {1, 8};
  c.batch_size = 1;
  c.seed = 9;
  c.epochs = 1000;
  c.max_steps = 10;
  c.checkpoint_every = 0;
  TrainOptions o;
  o.out_dir = dir / "a";
  auto a = train(c, pools, o);
  o.out_dir = dir / "b";
  auto b = train(c, pools, o);
  const bool same = flat_params(*a) == flat_params(*b);

  TrainConfig first = c;
  first.max_steps = 5;
  o.out_dir = dir / "resumed";
  train(first, pools, o);
  o.resume = true;
  auto r = train(c, pools, o);
  const bool resumed = r->step == 10 && flat_params(*r) == flat_params(*a);
  std::ifstream sa(dir / "a" / kStepsFile), sr(dir / "resumed" / kStepsFile);
  std::stringstream ta, tr;
  ta << sa.rdbuf();
  tr << sr.rdbuf();
  const bool logs = ta.str() == tr.str();
  return {same && resumed && logs, std::string("rerun bit-identical: ") + (same ? "yes" : "no") +
                                       "; 5+5 resume equals 10 uninterrupted: " + (resumed ? "yes" : "no") +
                                       "; step logs identical: " + (logs ? "yes" : "no")};
}

Outcome architecture_audit() {
  const auto g = audit_generator(GeneratorSpec::full(), 2, 2);
  const auto d = audit_discriminator(DiscriminatorSpec::full());
  bool ok = g.size() == 32 && d.size() == 16;
  for (const auto& l : g) {
    const bool first = l.index <= 15;
    ok = ok && l.kernel == (first ? 5 : 3) && (l.index == 32 || l.out_channels == (first ? 128 : 256));
    const int expect_inj = l.index == 3 ? 2 : l.index == 15 ? 4 : l.index == 25 ? 2 : 0;
    ok = ok && l.injected_channels == expect_inj;
  }
  int d_conv = 0;
  for (const auto& l : d) {
    if (l.index == 0) continue;
    ++d_conv;
    const bool first = l.index <= 10;
    ok = ok && l.kernel == (first ? 5 : 3) && l.out_channels == (first ? 84 : 128);
  }
  ok = ok && d_conv == 15;

  // closed forms: conv in*out*k*k + out bias, BN 2*out, tanh output layer without BN,
  // discriminator head linear 128 -> 1
  long long gc = 0;
  auto gl = [&](long long in, long long out, long long k, bool bn) { gc += in * out * k * k + out + (bn ? 2 * out : 0); };
  gl(1, 128, 5, true);
  for (int l = 2; l <= 15; ++l) gl(128 + (l == 3 ? 2 : 0) + (l == 15 ? 4 : 0), 128, 5, true);
  gl(128, 256, 3, true);
  for (int l = 17; l <= 31; ++l) gl(256 + (l == 25 ? 2 : 0), 256, 3, true);
  gl(256, 1, 3, false);
  long long dc = 0;
  auto dl = [&](long long in, long long out, long long k) { dc += in * out * k * k + 3 * out; };
  dl(1, 84, 5);
  for (int l = 2; l <= 10; ++l) dl(84, 84, 5);
  dl(84, 128, 3);
  for (int l = 12; l <= 15; ++l) dl(128, 128, 3);
  dc += 128 + 1;
  ok = ok && count_parameters(g) == gc && count_parameters(d) == dc &&
       count_parameters(GeneratorSpec::full(), 2, 2) == gc && count_parameters(DiscriminatorSpec::full()) == dc;
  return {ok, fmt("generator 32 layers, %.0f parameters (closed form %.0f); discriminator 15 conv + head, "
                  "%.0f parameters (closed form %.0f)",
                  double(count_parameters(g)), double(gc), double(count_parameters(d)), double(dc))};
}

struct Criterion {
  std::string id;
  std::string title;
  bool soft;
  Outcome (*run)();
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {"1", "metrics agree with independent oracles", false, metrics_oracle},
      {"2", "interleave/deinterleave exact inverses; conditioning bit-exact", false, interleave_roundtrip},
      {"3", "every loss gradient matches central differences", false, gradients},
      {"4", "L_Total identity holds at every step of a 50-step run", false, total_identity},
      {"5", "OMP monotone in sparsity; K-SVD recovers a planted dictionary", false, dictionary_learning},
      {"6", "L_cyc and L_id halve within 200 steps on 16 phantom pairs", false, descent},
      {"6b", "trained toy checkpoint: translation and cycle examples", true, toy_examples},
      {"7", "ablation ordering patch16 >= unconditional, DiL >= no DiL", true, ablation_ordering},
      {"8", "seeded reruns and resumed runs are bit-identical", false, determinism_and_resume},
      {"9", "full-size architecture audit and parameter counts", false, architecture_audit},
  };
  std::set<std::string> selected(argv + 1, argv + argc);
  if (selected.count("6")) selected.insert("6b");
  int hard_failures = 0;
  for (const auto& c : all) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const char* tag = o.pass ? (c.soft ? "SOFT-PASS" : "PASS") : (c.soft ? "SOFT-FAIL" : "FAIL");
    std::cout << "[" << tag << "] criterion " << c.id << ": " << c.title << " | " << o.detail
              << fmt(" | %.1f s", seconds_since(t0)) << std::endl;
    if (!o.pass && !c.soft) ++hard_failures;
  }
  std::cout << (hard_failures == 0 ? "acceptance: all hard criteria passed" : "acceptance: hard failures = " +
                                                                                   std::to_string(hard_failures))
            << std::endl;
  return hard_failures == 0 ? 0 : 1;
}
