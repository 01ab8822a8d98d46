#include "pccgan/ablation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "pccgan/evaluation.hpp"
#include "pccgan/plot.hpp"

namespace pccgan {
namespace {

const char* kMetricNames[] = {"RMSE", "PSNR", "SSIM"};

double metric(const MetricReport& r, int k) { return k == 0 ? r.rmse : k == 1 ? r.psnr : r.ssim; }

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  return s;
}

}  // namespace

std::vector<ConditioningSpec> ablation_scenarios(int k, std::uint64_t seed) {
  std::vector<ConditioningSpec> out;
  for (ConditioningKind kind : std::vector<ConditioningKind>{Unconditional{}, RandomTarget{}, AverageTarget{k},
                                                             SamplePdf{k, 256}, PatchMosaic{8}, PatchMosaic{16},
                                                             PatchMosaic{32}, PatchMosaic{64}})
    out.push_back(ConditioningSpec{kind, seed});
  return out;
}

std::string scenario_label(const ConditioningSpec& spec) {
  return std::visit(
      [](const auto& k) -> std::string {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, PatchMosaic>)
          return "PATCH " + std::to_string(k.patch_size);
        else if constexpr (std::is_same_v<K, RandomTarget>)
          return "RANDOM";
        else if constexpr (std::is_same_v<K, AverageTarget>)
          return "AVG " + std::to_string(k.k);
        else if constexpr (std::is_same_v<K, SamplePdf>)
          return "PDF " + std::to_string(k.k);
        else
          return "UNCOND";
      },
      spec.kind);
}

RunConfig cell_config(const RunConfig& base, const ConditioningSpec& scenario, bool dil) {
  RunConfig c = base;
  c.train.conditioning.kind = scenario.kind;
  c.train.dil.enabled = dil;
  return c;
}

AblationMatrix run_ablation(const RunConfig& base, const AblationOptions& opts) {
  auto log = [&](const std::string& s) {
    if (opts.log) opts.log(s);
  };
  const UnpairedPools pools = load_unpaired_pools(base.train_dir);
  const auto test_pairs = load_eval_pairs(base.test_dir);
  // average/pdf need k images both in training and, excluding the partner, at test time
  const int k = static_cast<int>(std::min<std::size_t>(
      {100, pools.ct.size(), pools.mri.size(), test_pairs.empty() ? 0 : test_pairs.size() - 1}));
  const auto scenarios = ablation_scenarios(std::max(k, 1), base.train.conditioning.seed);

  AblationMatrix m;
  for (const auto& s : scenarios) {
    m.scenarios.push_back(to_string(s));
    for (bool dil : {false, true}) {
      AblationCell cell;
      cell.scenario = to_string(s);
      cell.dil = dil;
      m.cells.push_back(cell);
    }
  }
  const long long spe_guess = std::max<long long>(1, (std::max(pools.ct.size(), pools.mri.size()) +
                                                      base.train.batch_size - 1) / base.train.batch_size);
  for (std::size_t row = 0; row < scenarios.size(); ++row) {
    for (bool dil : {false, true}) {
      AblationCell& cell = m.cell(row, dil);
      const bool selected = (opts.only.empty() || std::find(opts.only.begin(), opts.only.end(), cell.scenario) !=
                                                      opts.only.end()) &&
                            (dil ? opts.run_with_dil : opts.run_without_dil);
      RunConfig cfg = cell_config(base, scenarios[row], dil);
      cfg.train.max_steps = opts.steps_per_cell;
      cfg.train.epochs = static_cast<int>((opts.steps_per_cell + spe_guess - 1) / spe_guess);
      cfg.train.checkpoint_every = 0;
      RunConfig audit_base = base;
      audit_base.train.max_steps = cfg.train.max_steps;
      audit_base.train.epochs = cfg.train.epochs;
      audit_base.train.checkpoint_every = 0;
      cell.config_hash = hash_hex(config_hash(cfg));
      cell.changed_keys = differing_keys(audit_base, cfg);
      if (!selected) {
        cell.failure = "not selected";
        continue;
      }
      if (dil && !scenarios[row].conditioned()) {
        cell.failure = "n/a without conditioning";  // would retrain the no-DiL cell unchanged
        continue;
      }
      if (k < 1 && (std::holds_alternative<AverageTarget>(scenarios[row].kind) ||
                    std::holds_alternative<SamplePdf>(scenarios[row].kind))) {
        cell.failure = "pool too small for a target summary";
        continue;
      }
      const auto cell_dir = opts.out_dir / "cells" / (cell.scenario + (dil ? "_dil" : "_nodil"));
      log("cell " + cell.scenario + (dil ? " +DiL" : " -DiL") + ": training " + std::to_string(opts.steps_per_cell) +
          " steps");
      const auto t0 = std::chrono::steady_clock::now();
      try {
        TrainOptions to;
        to.out_dir = cell_dir;
        auto state = train(cfg.train, pools, to);
        EvalOptions eo;
        eo.out_dir = cell_dir / "eval";
        eo.write_images = opts.write_images;
        eo.max_pairs = opts.max_eval_pairs;
        const EvalSummary es = evaluate_dataset(base.test_dir, *state, eo);
        cell.forward = es.forward;
        cell.reverse = es.reverse;
        cell.ok = true;
      } catch (const std::filesystem::filesystem_error&) {
        throw;
      } catch (const std::exception& e) {
        cell.failure = sanitize(e.what());
      }
      cell.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      log(cell.ok ? "  ssim fwd " + std::to_string(cell.forward.ssim) + " rev " + std::to_string(cell.reverse.ssim)
                  : "  failed: " + cell.failure);
    }
  }
  if (!opts.out_dir.empty()) {
    std::filesystem::create_directories(opts.out_dir);
    std::ofstream(opts.out_dir / "ablation.tsv") << matrix_to_tsv(m);
    std::ofstream(opts.out_dir / "cells.tsv") << cells_audit_tsv(m);
    write_ablation_plots(m, opts.out_dir);
  }
  return m;
}

std::string matrix_to_tsv(const AblationMatrix& m) {
  std::ostringstream o;
  o.precision(8);
  o << "scenario";
  for (const char* d : {"nodil", "dil"})
    for (const char* dir : {"fwd", "rev"})
      for (const char* k : kMetricNames) o << '\t' << d << '_' << dir << '_' << k;
  o << '\n';
  for (std::size_t row = 0; row < m.scenarios.size(); ++row) {
    o << m.scenarios[row];
    for (bool dil : {false, true}) {
      const AblationCell& c = m.cell(row, dil);
      for (int dir = 0; dir < 2; ++dir)
        for (int k = 0; k < 3; ++k) {
          o << '\t';
          if (c.ok)
            o << metric(dir == 0 ? c.forward : c.reverse, k);
          else
            o << "failed(" << c.failure << ")";
        }
    }
    o << '\n';
  }
  return o.str();
}

AblationMatrix matrix_from_tsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("ablation table is empty");
  AblationMatrix m;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream ls(line);
    std::string tok;
    while (std::getline(ls, tok, '\t')) f.push_back(tok);
    if (f.size() != 13) throw std::runtime_error("ablation row has " + std::to_string(f.size()) + " fields, expected 13");
    m.scenarios.push_back(f[0]);
    for (int dil = 0; dil < 2; ++dil) {
      AblationCell c;
      c.scenario = f[0];
      c.dil = dil == 1;
      c.ok = true;
      for (int dir = 0; dir < 2; ++dir)
        for (int k = 0; k < 3; ++k) {
          const std::string& v = f[1 + dil * 6 + dir * 3 + k];
          if (v.rfind("failed(", 0) == 0) {
            c.ok = false;
            c.failure = v.substr(7, v.size() - 8);
            continue;
          }
          MetricReport& r = dir == 0 ? c.forward : c.reverse;
          (k == 0 ? r.rmse : k == 1 ? r.psnr : r.ssim) = std::stod(v);
        }
      m.cells.push_back(c);
    }
  }
  return m;
}

std::string cells_audit_tsv(const AblationMatrix& m) {
  std::ostringstream o;
  o << "scenario\tdil\tconfig_hash\tchanged_keys\tstatus\tseconds\n";
  for (const auto& c : m.cells) {
    std::string keys;
    for (const auto& k : c.changed_keys) keys += (keys.empty() ? "" : ",") + k;
    o << c.scenario << '\t' << (c.dil ? "true" : "false") << '\t' << c.config_hash << '\t'
      << (keys.empty() ? "-" : keys) << '\t' << (c.ok ? "ok" : "failed(" + c.failure + ")") << '\t' << c.seconds
      << '\n';
  }
  return o.str();
}

void write_ablation_plots(const AblationMatrix& m, const std::filesystem::path& out_dir) {
  for (int k = 0; k < 3; ++k) {
    BarChart chart;
    chart.title = std::string("ABLATION ") + kMetricNames[k];
    chart.series = {"CT-MRI NO DIL", "CT-MRI DIL", "MRI-CT NO DIL", "MRI-CT DIL"};
    for (std::size_t row = 0; row < m.scenarios.size(); ++row) {
      ConditioningSpec spec;
      try {
        spec.kind = parse_conditioning_kind(m.scenarios[row]);
        chart.groups.push_back(scenario_label(spec));
      } catch (const std::exception&) {
        chart.groups.push_back(m.scenarios[row]);
      }
      std::vector<double> vals;
      for (int dir = 0; dir < 2; ++dir)
        for (bool dil : {false, true}) {
          const AblationCell& c = m.cell(row, dil);
          vals.push_back(c.ok ? metric(dir == 0 ? c.forward : c.reverse, k) : std::numeric_limits<double>::quiet_NaN());
        }
      chart.values.push_back(vals);
    }
    std::string name = kMetricNames[k];
    std::transform(name.begin(), name.end(), name.begin(), ::tolower);
    save_plot(render_bar_chart(chart, 900, 380), out_dir / ("ablation_" + name + ".png"));
  }
}

}  // namespace pccgan
