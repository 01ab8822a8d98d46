#include <doctest.h>

#include <cmath>
#include <fstream>

#include "gradcheck.hpp"
#include "pccgan/config.hpp"
#include "pccgan/losses.hpp"
#include "pccgan/trainer.hpp"
#include "support.hpp"

using namespace pccgan;

namespace {

Tensor<double> filled(int n, int h, int w, std::initializer_list<double> values) {
  Tensor<double> t(n, 1, h, w);
  std::copy(values.begin(), values.end(), t.data.begin());
  return t;
}

double brute_mean_abs(const Tensor<double>& a, const Tensor<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a.data[i] - b.data[i]);
  return s / a.size();
}

const UnpairedPools& tiny_pools() {
  static const UnpairedPools pools = [] {
    const auto dir = support::scratch_dir("train_pools");
    generate_unpaired_dataset(6, 3, dir);
    return load_unpaired_pools(dir);
  }();
  return pools;
}

TrainConfig tiny_config() {
  TrainConfig c;
  c.width_scale = {1, 8};
  c.batch_size = 1;
  c.seed = 5;
  c.epochs = 1;
  c.max_steps = 3;
  c.checkpoint_every = 0;
  return c;
}

std::vector<float> flat_params(TrainState& s) {
  std::vector<float> out;
  for (auto* net : {&s.g_fwd, &s.g_bwd})
    for (auto* p : net->parameters()) out.insert(out.end(), p->value.begin(), p->value.end());
  for (auto* net : {&s.d_mri, &s.d_ct})
    for (auto* p : net->parameters()) out.insert(out.end(), p->value.begin(), p->value.end());
  return out;
}

}  // namespace

TEST_CASE("least-squares adversarial examples") {
  const std::vector<double> ones{1.0, 1.0}, zeros{0.0, 0.0}, half{0.5, 0.5};
  auto t = least_squares_adversarial(ones, zeros);
  CHECK(t.discriminator == 0.0);
  CHECK(t.generator == 1.0);
  t = least_squares_adversarial(half, half);
  CHECK(t.discriminator == doctest::Approx(0.5));
  CHECK(t.generator == doctest::Approx(0.25));
  CHECK(least_squares_generator_term(ones) == 0.0);

  const std::vector<double> s{0.3, -0.7, 1.2};
  const auto g = least_squares_generator_gradient(s);
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(g[i] == doctest::Approx(2.0 * (s[i] - 1.0) / s.size()));
    auto up = s, down = s;
    up[i] += 1e-6;
    down[i] -= 1e-6;
    const double fd = (least_squares_generator_term(up) - least_squares_generator_term(down)) / 2e-6;
    CHECK(g[i] == doctest::Approx(fd).epsilon(1e-6));
  }
  const auto dg = least_squares_adversarial_gradients(s, s);
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(dg.discriminator_wrt_real[i] == doctest::Approx(2.0 * (s[i] - 1.0) / s.size()));
    CHECK(dg.discriminator_wrt_fake[i] == doctest::Approx(2.0 * s[i] / s.size()));
  }
}

TEST_CASE("cyclic and identity loss examples") {
  const auto x = filled(1, 2, 2, {0.1, 0.2, 0.3, 0.4});
  CHECK(cyclic_loss(x, x, x, x) == 0.0);
  CHECK(identity_loss(x, x, x, x) == 0.0);
  const auto z = filled(1, 2, 2, {0, 0, 0, 0});
  const auto off = filled(1, 2, 2, {0.5, -0.5, 0.5, -0.5});
  CHECK(cyclic_loss(z, off, z, z) == doctest::Approx(0.5));
  CHECK(cyclic_loss(z, off, z, off) == doctest::Approx(1.0));
  CHECK(cyclic_loss(z, off, z, off, ReconstructionNorm::L2) == doctest::Approx(0.5));

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 0; k < 5; ++k) {
    Tensor<double> a(2, 1, 5, 7), b(2, 1, 5, 7), c(2, 1, 5, 7), d(2, 1, 5, 7);
    for (auto* t : {&a, &b, &c, &d})
      for (auto& v : t->data) v = u(rng);
    CHECK(cyclic_loss(a, b, c, d) == doctest::Approx(brute_mean_abs(a, b) + brute_mean_abs(c, d)).epsilon(1e-12));
    CHECK(identity_loss(a, b, c, d) == doctest::Approx(brute_mean_abs(a, b) + brute_mean_abs(c, d)).epsilon(1e-12));
  }
  CHECK_THROWS(cyclic_loss(x, Tensor<double>(1, 1, 2, 3), x, x));
}

TEST_CASE("total loss combination") {
  LossComponents c{1.0, 2.0, 3.0, 4.0};
  CHECK(total_loss(c, LossWeights{}) == doctest::Approx(1.5 * 3.0 + 7.0));
  CHECK(total_loss(LossComponents{}, LossWeights{}) == 0.0);
  CHECK(total_loss(c, LossWeights{0.0}) == doctest::Approx(7.0));
  CHECK_THROWS(LossWeights{-1.0}.validate());
  CHECK_THROWS(LossWeights{NAN}.validate());
}

TEST_CASE("gradients match central differences") {
  for (const auto& check : gradcheck::all_checks(11)) {
    CAPTURE(check.name);
    const auto r = check.run();
    CHECK(r.analytic_norm > 1e-6);
    CHECK(r.relative_error <= 1e-3);
  }
}

TEST_CASE("scaling the whole objective scales the update, not its direction") {
  gradcheck::Micro a(21), b(21);
  const double c = 3.0;
  for (auto* m : {&a, &b}) {
    m->gf.zero_grad();
    m->gb.zero_grad();
  }
  {
    auto p = a.pass();
    p.forward(a.batch);
    p.generator_step(TermMask{}, true);
  }
  {
    auto p = b.pass();
    p.forward(b.batch);
    p.generator_step(TermMask{c, c, c, c}, true);
  }
  const auto ga = gradcheck::gathered_grads(a.generator_params());
  const auto gb = gradcheck::gathered_grads(b.generator_params());
  for (std::size_t i = 0; i < ga.size(); ++i) CHECK(gb[i] == doctest::Approx(c * ga[i]).epsilon(1e-9));
  sgd_step(a.generator_params(), 1e-2);
  sgd_step(b.generator_params(), 1e-2 / c);
  const auto pa = a.generator_params(), pb = b.generator_params();
  for (std::size_t k = 0; k < pa.size(); ++k)
    for (std::size_t i = 0; i < pa[k]->value.size(); ++i)
      CHECK(pa[k]->value[i] == doctest::Approx(pb[k]->value[i]).epsilon(1e-12));
}

TEST_CASE("training step bookkeeping") {
  const auto dir = support::scratch_dir("train_bookkeeping");
  TrainOptions o;
  o.out_dir = dir;
  std::vector<StepStats> steps;
  o.on_step = [&](const StepStats& s) { steps.push_back(s); };
  train(tiny_config(), tiny_pools(), o);
  REQUIRE(steps.size() == 3);
  for (const auto& s : steps) {
    CHECK(std::abs(s.total - (1.5 * (s.g.cgan1 + s.g.cgan2) + s.g.cyc + s.g.id)) < 1e-6);
    for (double v : {s.g.cgan1, s.g.cgan2, s.g.cyc, s.g.id, s.d.mri, s.d.ct}) {
      CHECK(std::isfinite(v));
      CHECK(v >= 0.0);
    }
  }
  CHECK(steps.back().step == 3);
  CHECK(std::filesystem::exists(dir / kCheckpointFile));
}

TEST_CASE("seeded runs are bit-identical; lr = 0 freezes parameters") {
  TrainOptions o;
  o.out_dir = support::scratch_dir("train_seed_a");
  auto a = train(tiny_config(), tiny_pools(), o);
  o.out_dir = support::scratch_dir("train_seed_b");
  auto b = train(tiny_config(), tiny_pools(), o);
  CHECK(flat_params(*a) == flat_params(*b));

  TrainConfig frozen = tiny_config();
  frozen.learning_rate = 0.0;
  const auto fresh = make_state(frozen, 64);
  o.out_dir = support::scratch_dir("train_frozen");
  auto f = train(frozen, tiny_pools(), o);
  CHECK(flat_params(*f) == flat_params(*fresh));
}

TEST_CASE("one epoch writes exactly one stats row") {
  TrainConfig c = tiny_config();
  c.max_steps = 0;
  c.batch_size = 3;  // 6 images -> 2 steps per epoch
  TrainOptions o;
  o.out_dir = support::scratch_dir("train_epoch");
  int epochs = 0;
  o.on_epoch = [&](const EpochStats&) { ++epochs; };
  auto s = train(c, tiny_pools(), o);
  CHECK(epochs == 1);
  CHECK(s->epoch == 1);
  CHECK(s->step == 2);
  std::ifstream in(o.out_dir / kStatsFile);
  int lines = 0;
  for (std::string line; std::getline(in, line);) lines += !line.empty();
  CHECK(lines == 2);  // header + one epoch
}

TEST_CASE("resume equals an uninterrupted run") {
  TrainConfig full = tiny_config();
  full.max_steps = 4;
  TrainOptions o;
  o.out_dir = support::scratch_dir("train_uninterrupted");
  auto a = train(full, tiny_pools(), o);

  TrainConfig half = full;
  half.max_steps = 2;
  o.out_dir = support::scratch_dir("train_resumed");
  train(half, tiny_pools(), o);
  o.resume = true;
  auto b = train(full, tiny_pools(), o);
  CHECK(b->step == 4);
  CHECK(flat_params(*a) == flat_params(*b));

  TrainConfig other = full;
  other.seed = 99;
  CHECK_THROWS(train(other, tiny_pools(), o));
}

TEST_CASE("checkpoint round trip reproduces the next step") {
  TrainOptions o;
  o.out_dir = support::scratch_dir("train_ckpt");
  auto s = train(tiny_config(), tiny_pools(), o);
  auto loaded = load_state(o.out_dir / kCheckpointFile);
  CHECK(flat_params(*loaded) == flat_params(*s));
  CHECK(loaded->step == s->step);
  const TrainingData data(tiny_pools(), s->config.conditioning);
  const StepStats x = train_step(*s, data), y = train_step(*loaded, data);
  CHECK(x.total == y.total);
  CHECK(flat_params(*loaded) == flat_params(*s));
}

TEST_CASE("translate contracts") {
  auto s = make_state(tiny_config(), 64);
  const auto& pools = tiny_pools();
  const std::vector<Image> cond{pools.mri[1]};
  const Image out = translate(*s, pools.ct[0], Direction::CtToMri, cond);
  CHECK(out.width() == 64);
  CHECK(out.height() == 64);
  CHECK(out.channels() == 1);
  for (float v : out.data()) {
    CHECK(v >= -1.0f);
    CHECK(v <= 1.0f);
  }
  const Image again = translate(*s, pools.ct[0], Direction::CtToMri, cond);
  CHECK(support::pixels(again) == support::pixels(out));
  CHECK_THROWS_AS(translate(*s, pools.ct[0], Direction::CtToMri, {}), MissingConditioning);

  const CycleResult r = cycle_translate(*s, pools.ct[0], Direction::CtToMri, cond, {});
  CHECK(r.synthesized.same_shape(out));
  CHECK(r.back.same_shape(out));

  TrainConfig u = tiny_config();
  u.conditioning = ConditioningSpec{Unconditional{}, 0};
  auto su = make_state(u, 64);
  CHECK(translate(*su, pools.mri[0], Direction::MriToCt, {}).same_shape(out));
}
