#include <doctest.h>

#include "pccgan/networks.hpp"
#include "support.hpp"

using namespace pccgan;

namespace {

// Hand-written parameter total for the generator schedule: conv weights and
// biases plus BN scale/shift on every layer but the last.
long long generator_formula(int f1, int f2, int cond, int residue) {
  long long total = 0;
  auto layer = [&](long long in, long long out, long long k, bool bn) {
    total += in * out * k * k + out + (bn ? 2 * out : 0);
  };
  layer(1, f1, 5, true);
  for (int l = 2; l <= 15; ++l) {
    long long in = f1;
    if (l == 3) in += cond;
    if (l == 15) in += cond + residue;
    layer(in, f1, 5, true);
  }
  layer(f1, f2, 3, true);
  for (int l = 17; l <= 31; ++l) layer(f2 + (l == 25 ? cond : 0), f2, 3, true);
  layer(f2, 1, 3, false);
  return total;
}

long long discriminator_formula(int f1, int f2) {
  long long total = 0;
  auto layer = [&](long long in, long long out, long long k) { total += in * out * k * k + out + 2 * out; };
  layer(1, f1, 5);
  for (int l = 2; l <= 10; ++l) layer(f1, f1, 5);
  layer(f1, f2, 3);
  for (int l = 12; l <= 15; ++l) layer(f2, f2, 3);
  return total + f2 + 1;  // linear head on the pooled features
}

Tensor<float> random_tensor(int n, int c, int h, int w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  Tensor<float> t(n, c, h, w);
  for (auto& v : t.data) v = u(rng);
  return t;
}

}  // namespace

TEST_CASE("generator audit: full schedule") {
  const auto a = audit_generator(GeneratorSpec::full(), 2, 2);
  REQUIRE(a.size() == 32);
  CHECK(a[0].conv_parameters() == 3328);
  for (const auto& l : a) {
    CHECK(l.kernel == (l.index <= 15 ? 5 : 3));
    if (l.index < 32) CHECK(l.out_channels == (l.index <= 15 ? 128 : 256));
    CHECK(l.batch_norm == (l.index < 32));
    CHECK(l.activation == (l.index < 32 ? "leaky_relu" : "tanh"));
  }
  CHECK(a[2].injected_channels == 2);
  CHECK(a[14].injected_channels == 4);
  CHECK(a[24].injected_channels == 2);
  CHECK(a[31].out_channels == 1);
  CHECK(count_parameters(a) == generator_formula(128, 256, 2, 2));
}

TEST_CASE("generator audit: unconditional has no injections") {
  const auto a = audit_generator(GeneratorSpec::full(), 0, 0);
  for (const auto& l : a) CHECK(l.injected_channels == 0);
  CHECK(a[2].in_channels == 128);
  CHECK(a[24].in_channels == 256);
  CHECK(count_parameters(a) < count_parameters(audit_generator(GeneratorSpec::full(), 2, 0)));
}

TEST_CASE("discriminator audit") {
  const auto a = audit_discriminator(DiscriminatorSpec::full());
  REQUIRE(a.size() == 16);  // 15 conv layers plus the scoring head
  CHECK(a[10].conv_parameters() == 96896);
  for (int l = 0; l < 15; ++l) {
    CHECK(a[l].kernel == (l < 10 ? 5 : 3));
    CHECK(a[l].out_channels == (l < 10 ? 84 : 128));
    CHECK(a[l].batch_norm);
  }
  CHECK(a[15].index == 0);
  CHECK(count_parameters(a) == discriminator_formula(84, 128));

  const auto q = audit_discriminator(DiscriminatorSpec::desk({1, 4}));
  CHECK(q[0].out_channels == 21);
  CHECK(q[10].out_channels == 32);
}

TEST_CASE("parameter counts: closed form equals instantiated") {
  for (WidthScale s : {WidthScale{1, 1}, WidthScale{1, 2}, WidthScale{1, 4}, WidthScale{1, 8}}) {
    const GeneratorSpec gs = GeneratorSpec::desk(s);
    Generator<float> g(gs, 2, 2, 1);
    CHECK(g.parameter_count() == count_parameters(gs, 2, 2));
    CHECK(count_parameters(gs, 2, 2) == generator_formula(s.apply(128), s.apply(256), 2, 2));
    const DiscriminatorSpec ds = DiscriminatorSpec::desk(s);
    Discriminator<float> d(ds, 1);
    CHECK(d.parameter_count() == count_parameters(ds));
    CHECK(count_parameters(ds) == discriminator_formula(s.apply(84), s.apply(128)));
  }
}

TEST_CASE("parameter counts: toy spec and width scaling") {
  GeneratorSpec toy;
  toy.total_layers = 1;
  toy.stages = {{1, 1, 4, 3}};
  toy.injection_layers = {};
  toy.residue_layer = 1;  // no residue channels are attached
  toy.dropout_layers = {};
  toy.skip_pairs = {};
  toy.width_scale = {1, 1};
  // single layer: 1 -> 1 output channel through tanh, 3x3
  CHECK(count_parameters(toy, 0, 0) == 1 * 1 * 9 + 1);

  // interior layers scale quadratically with width
  const auto full = audit_generator(GeneratorSpec::desk({1, 1}), 0, 0);
  const auto half = audit_generator(GeneratorSpec::desk({1, 2}), 0, 0);
  CHECK(full[5].in_channels * full[5].out_channels == 4 * half[5].in_channels * half[5].out_channels);
}

TEST_CASE("generator forward contract") {
  Generator<float> g(GeneratorSpec::desk({1, 8}), 2, 2, 3);
  const auto x = random_tensor(2, 1, 64, 64, 1);
  const auto c = random_tensor(2, 2, 64, 64, 2);
  const auto r = random_tensor(2, 2, 64, 64, 3);
  const auto y1 = g.forward(x, &c, &r, Mode::Infer, nullptr, nullptr);
  const auto y2 = g.forward(x, &c, &r, Mode::Infer, nullptr, nullptr);
  CHECK(y1.n == 2);
  CHECK(y1.c == 1);
  CHECK(y1.h == 64);
  CHECK(y1.w == 64);
  CHECK(y1.data == y2.data);
  for (float v : y1.data) {
    CHECK(v > -1.0f);
    CHECK(v < 1.0f);
  }
  const auto bad = random_tensor(2, 1, 64, 64, 4);
  CHECK_THROWS(g.forward(x, &bad, &r, Mode::Infer, nullptr, nullptr));

  Generator<float> u(GeneratorSpec::desk({1, 8}), 0, 0, 3);
  CHECK(u.forward(x, nullptr, nullptr, Mode::Infer, nullptr, nullptr).same_shape(y1));
}

TEST_CASE("discriminator forward contract") {
  Discriminator<float> d(DiscriminatorSpec::desk({1, 8}), 5);
  for (int side : {16, 32, 64}) {
    const auto x = random_tensor(3, 1, side, side, side);
    const auto s = d.forward(x, Mode::Infer, nullptr);
    REQUIRE(s.size() == 3);
    for (float v : s) CHECK(std::isfinite(v));
    CHECK(d.forward(x, Mode::Infer, nullptr) == s);
  }
  auto x = random_tensor(1, 1, 32, 32, 9);
  const auto s0 = d.forward(x, Mode::Infer, nullptr);
  for (int i = 0; i < 64; ++i) x.data[i] += 0.5f;
  CHECK(d.forward(x, Mode::Infer, nullptr)[0] != s0[0]);
}

TEST_CASE("spec validation") {
  GeneratorSpec g = GeneratorSpec::full();
  g.injection_layers = {3, 40};
  CHECK_THROWS(g.validate());
  g = GeneratorSpec::full();
  g.skip_pairs = {{15, 17}};  // 128 -> 256 channels
  CHECK_THROWS(g.validate());
  CHECK(WidthScale::parse("1/4") == WidthScale{1, 4});
  CHECK_THROWS(WidthScale::parse("0"));
  CHECK(WidthScale{1, 4}.apply(84) == 21);
}
