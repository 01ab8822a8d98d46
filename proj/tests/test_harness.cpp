#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "pccgan/ablation.hpp"
#include "pccgan/config.hpp"
#include "pccgan/evaluation.hpp"
#include "support.hpp"

using namespace pccgan;

namespace {

std::filesystem::path small_dataset(const std::string& name, int n, std::uint64_t seed) {
  const auto dir = support::scratch_dir(name);
  generate_unpaired_dataset(n, seed, dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PCCGAN_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config parsing") {
  const RunConfig c = parse_run_config("# comment\nseed = 9\n\nconditioning=unconditional\nwidth_scale = 1/8\n");
  CHECK(c.train.seed == 9);
  CHECK(c.train.conditioning.channels() == 0);
  CHECK(c.train.width_scale == WidthScale{1, 8});
  CHECK(parse_run_config("seed = 1\nseed = 2").train.seed == 2);

  try {
    parse_run_config("sede = 3");
    FAIL("unknown key accepted");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "sede");
    CHECK(e.unknown_key());
  }
  try {
    parse_run_config("batch_size = many");
    FAIL("bad value accepted");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "batch_size");
    CHECK_FALSE(e.unknown_key());
  }
  CHECK_THROWS_AS(parse_run_config("conditioning = patch7"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("no equals sign"), ConfigError);
}

TEST_CASE("config hash ignores formatting and run length") {
  const RunConfig a = parse_run_config("seed=4\ngamma=1.5\n");
  const RunConfig b = parse_run_config("  gamma   =   1.50  \n\n# x\nseed = 4   \n");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(canonical_text(a) == canonical_text(b));
  CHECK(config_hash(a) != config_hash(parse_run_config("seed=5")));
  CHECK(config_hash(a.train) == config_hash(parse_run_config("seed=4\nmax_steps=77\nepochs=3").train));
  CHECK(differing_keys(a, parse_run_config("seed=4\nrecon_norm=l2")) == std::vector<std::string>{"recon_norm"});
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("ablation scenarios and cell configs") {
  const auto s = ablation_scenarios(5, 3);
  REQUIRE(s.size() == 8);
  std::vector<std::string> names;
  for (const auto& c : s) names.push_back(scenario_label(c));
  CHECK(names.front() == scenario_label(ConditioningSpec{Unconditional{}, 0}));
  CHECK(s[4].channels() == 2);

  const RunConfig base = parse_run_config("seed=3");
  for (const auto& scenario : s) {
    const RunConfig off = cell_config(base, scenario, false), on = cell_config(base, scenario, true);
    CHECK(off.train.seed == on.train.seed);
    if (scenario.channels() == 0) continue;
    CHECK(config_hash(off) != config_hash(on));
    CHECK(differing_keys(off, on) == std::vector<std::string>{"dil"});
  }
}

TEST_CASE("ablation run produces a consistent matrix") {
  const auto train_dir = small_dataset("abl_train", 4, 11);
  const auto test_dir = small_dataset("abl_test", 3, 12);
  RunConfig base = parse_run_config("width_scale=1/8\nbatch_size=1\nseed=2");
  base.train_dir = train_dir;
  base.test_dir = test_dir;
  AblationOptions o;
  o.steps_per_cell = 1;
  o.only = {"patch32", "unconditional"};
  o.out_dir = support::scratch_dir("abl_out");
  const AblationMatrix m = run_ablation(base, o);
  REQUIRE(m.cells.size() == 2 * m.scenarios.size());
  int ran = 0;
  for (std::size_t row = 0; row < m.scenarios.size(); ++row)
    for (bool dil : {false, true}) {
      const auto& c = m.cell(row, dil);
      if (!c.ok) continue;
      ++ran;
      CHECK(std::isfinite(c.forward.rmse));
      CHECK(c.forward.ssim <= 1.0);
    }
  CHECK(ran == 3);  // unconditional runs without DiL only
  const auto text = slurp(o.out_dir / "ablation.tsv");
  CHECK(matrix_to_tsv(matrix_from_tsv(text)) == text);
  CHECK(std::filesystem::exists(o.out_dir / "cells.tsv"));
  CHECK(std::filesystem::exists(o.out_dir / "ablation_ssim.png"));
}

TEST_CASE("evaluation against an oracle translator") {
  const auto dir = small_dataset("eval_oracle", 4, 21);
  const auto pairs = load_eval_pairs(dir);
  std::map<std::vector<float>, Image> partner;
  for (const auto& p : pairs) {
    const Image ct = load_image(dir / "ct" / p.ct_file), mri = load_image(dir / "mri" / p.mri_file);
    partner.emplace(support::pixels(ct), mri);
    partner.emplace(support::pixels(mri), ct);
  }
  const CycleFn oracle = [&](const Image& in, Direction, std::span<const Image>, std::span<const Image>) {
    return CycleResult{partner.at(support::pixels(in)), in};
  };
  EvalOptions o;
  o.out_dir = support::scratch_dir("eval_oracle_out");
  const EvalSummary s = evaluate_dataset(dir, oracle, o);
  REQUIRE(s.rows.size() == 4);
  for (const auto* r : {&s.forward, &s.reverse, &s.cycle_ct, &s.cycle_mri}) {
    CHECK(r->rmse == 0.0);
    CHECK(r->ssim == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(std::filesystem::exists(o.out_dir / "eval.tsv"));

  const CycleFn echo = [](const Image& in, Direction, std::span<const Image>, std::span<const Image>) {
    return CycleResult{in, in};
  };
  EvalOptions limited;
  limited.max_pairs = 3;
  const EvalSummary e = evaluate_dataset(dir, echo, limited);
  REQUIRE(e.rows.size() == 3);
  double mean = 0.0;
  for (const auto& r : e.rows) mean += r.forward.ssim / 3.0;
  CHECK(e.forward.ssim == doctest::Approx(mean).epsilon(1e-12));
  CHECK(e.forward.ssim < 1.0);
  CHECK(e.cycle_ct.rmse == 0.0);

  const auto pool = pool_excluding({Image(2, 2, 1, IntensityRange::Unit, 0.f), Image(2, 2, 1, IntensityRange::Unit, 1.f),
                                    Image(2, 2, 1, IntensityRange::Unit, 0.5f)},
                                   1);
  REQUIRE(pool.size() == 2);
  CHECK(pool[0].at(0, 0) == 0.5f);
  CHECK(pool[1].at(0, 0) == 0.0f);
}

TEST_CASE("command line exit codes") {
  const auto root = support::scratch_dir("cli");
  CHECK(run_cli("dataset --n 3 --seed 1 --out " + (root / "data").string()) == 0);
  CHECK(run_cli("dataset --n 1 --seed 1 --out " + (root / "one").string()) == 1);
  CHECK(run_cli("train --set sede=1") == 2);
  CHECK(run_cli("train --set batch_size=x") == 2);
  const std::string run = (root / "run").string();
  CHECK(run_cli("train --set train_dir=" + (root / "data").string() + " --set out_dir=" + run +
                " --set width_scale=1/8 --set batch_size=1 --set max_steps=1") == 0);
  const std::string ckpt = run + "/checkpoint.ckpt";
  const std::string input = (root / "data" / "ct").string() + "/" +
                            std::filesystem::directory_iterator(root / "data" / "ct")->path().filename().string();
  CHECK(run_cli("translate --checkpoint " + ckpt + " --input " + input + " --direction ct2mri --out " +
                (root / "t.png").string()) == 3);
  CHECK(run_cli("translate --checkpoint " + ckpt + " --input " + input + " --direction ct2mri --cond-pool " +
                (root / "data" / "mri").string() + " --out " + (root / "t.png").string()) == 0);
  CHECK(std::filesystem::exists(root / "t.png"));
  CHECK(run_cli("translate --checkpoint " + (root / "nothing.ckpt").string() + " --input " + input +
                " --direction ct2mri --out " + (root / "u.png").string()) == 1);
}
