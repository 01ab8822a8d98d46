// pccgan: dataset | train | translate | evaluate | ablate | report
#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pccgan/ablation.hpp"
#include "pccgan/config.hpp"
#include "pccgan/evaluation.hpp"
#include "pccgan/plot.hpp"
#include "pccgan/trainer.hpp"

namespace fs = std::filesystem;
using namespace pccgan;

namespace {

constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitMissingConditioning = 3;

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Config file text followed by --set overrides (later lines win).
RunConfig config_with_overrides(const std::string& path, const std::vector<std::string>& sets) {
  std::string text = path.empty() ? std::string() : read_file(path);
  for (const auto& s : sets) {
    if (s.find('=') == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'", "", false);
    text += "\n" + s;
  }
  return parse_run_config(text);
}

std::vector<Image> load_dir_images(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && (e.path().extension() == ".png" || e.path().extension() == ".raw"))
      files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<Image> out;
  for (const auto& f : files) out.push_back(load_image(f));
  return out;
}

void print_eval(const EvalSummary& s) {
  std::cout.precision(6);
  auto line = [](const char* name, const MetricReport& r) {
    std::cout << name << "\trmse " << r.rmse << "\tpsnr " << r.psnr << "\tssim " << r.ssim << "\n";
  };
  line("ct2mri ", s.forward);
  line("mri2ct ", s.reverse);
  line("ct_cyc ", s.cycle_ct);
  line("mri_cyc", s.cycle_mri);
  std::cout << "pairs  \t" << s.rows.size() << "\n";
}

std::vector<std::vector<double>> read_columns(const fs::path& tsv, std::vector<std::string>& header) {
  std::istringstream in(read_file(tsv));
  std::string line;
  std::getline(in, line);
  header.clear();
  {
    std::istringstream hs(line);
    std::string h;
    while (std::getline(hs, h, '\t')) header.push_back(h);
  }
  std::vector<std::vector<double>> cols(header.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string f;
    for (std::size_t c = 0; c < header.size() && std::getline(ls, f, '\t'); ++c) cols[c].push_back(std::stod(f));
  }
  return cols;
}

void plot_losses(const fs::path& tsv, const fs::path& out, const std::string& title) {
  std::vector<std::string> header;
  const auto cols = read_columns(tsv, header);
  LineChart gen{title + " GENERATOR", {}, {}}, disc{title + " DISCRIMINATORS", {}, {}};
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c].rfind("L_", 0) == 0) {
      gen.names.push_back(header[c]);
      gen.series.push_back(cols[c]);
    } else if (header[c].rfind("D_", 0) == 0) {
      disc.names.push_back(header[c]);
      disc.series.push_back(cols[c]);
    }
  }
  if (!gen.series.empty() && !gen.series[0].empty()) save_plot(render_line_chart(gen), out.string() + "_generator.png");
  if (!disc.series.empty() && !disc.series[0].empty())
    save_plot(render_line_chart(disc), out.string() + "_discriminator.png");
}

void write_audits(const fs::path& dir) {
  fs::create_directories(dir);
  const auto g = audit_generator(GeneratorSpec::full(), 2, 2);
  const auto d = audit_discriminator(DiscriminatorSpec::full());
  std::ofstream(dir / "audit_generator_full.tsv") << audit_to_tsv(g);
  std::ofstream(dir / "audit_discriminator_full.tsv") << audit_to_tsv(d);
  std::cout << "generator (full, 2 conditioning + 2 residue channels): " << g.size() << " layers, "
            << count_parameters(g) << " parameters\n"
            << "discriminator (full): " << d.size() - 1 << " conv layers + head, " << count_parameters(d)
            << " parameters\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cyclic conditional GAN CT/MRI translation toolkit"};
  app.require_subcommand(1);

  // dataset
  auto* ds = app.add_subcommand("dataset", "Generate an unpaired phantom dataset");
  int ds_n = 0, ds_size = 64, ds_shapes = 6;
  std::uint64_t ds_seed = 0;
  double ds_noise = 0.01;
  std::string ds_out;
  ds->add_option("--n", ds_n, "Number of CT/MRI pairs (>= 2)")->required();
  ds->add_option("--seed", ds_seed, "Generator seed")->capture_default_str();
  ds->add_option("--out", ds_out, "Output directory")->required();
  ds->add_option("--size", ds_size, "Image side, a multiple of 64")->capture_default_str();
  ds->add_option("--shapes", ds_shapes, "Ellipses per phantom")->capture_default_str();
  ds->add_option("--noise", ds_noise, "Additive noise sigma")->capture_default_str();

  // train
  auto* tr = app.add_subcommand("train", "Train both generators and discriminators");
  std::string tr_config;
  std::vector<std::string> tr_sets;
  bool tr_resume = false;
  tr->add_option("--config", tr_config, "Config file (key = value)");
  tr->add_option("--set", tr_sets, "Override a config key, key=value (repeatable)");
  tr->add_flag("--resume", tr_resume, "Continue from out_dir/checkpoint.ckpt");
  {
    std::string keys = "\nConfig keys (default):\n";
    for (const auto& k : config_keys()) keys += "  " + k.name + " (" + k.default_value + ")  " + k.doc + "\n";
    tr->footer(keys);
  }

  // translate
  auto* tl = app.add_subcommand("translate", "Translate one image with a trained checkpoint");
  std::string tl_ckpt, tl_input, tl_dir = "ct2mri", tl_pool, tl_out, tl_back_out, tl_back_pool;
  std::vector<std::string> tl_cond_images;
  bool tl_cycle = false;
  tl->add_option("--checkpoint", tl_ckpt, "Checkpoint file")->required();
  tl->add_option("--input", tl_input, "Input image")->required();
  tl->add_option("--direction", tl_dir, "ct2mri or mri2ct")->capture_default_str();
  tl->add_option("--cond-pool", tl_pool, "Directory of target-modality images for conditioning");
  tl->add_option("--cond-image", tl_cond_images, "Target-modality conditioning image (repeatable)");
  tl->add_option("--out", tl_out, "Output PNG")->required();
  tl->add_flag("--cycle", tl_cycle, "Also back-translate the synthesized image");
  tl->add_option("--back-out", tl_back_out, "Back-translated output PNG (default: <out>_back.png)");
  tl->add_option("--back-pool", tl_back_pool, "Input-modality images conditioning the back hop");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Score a checkpoint against the hidden pairing");
  std::string ev_ckpt, ev_data, ev_out;
  int ev_max = 0;
  bool ev_no_images = false;
  ev->add_option("--checkpoint", ev_ckpt, "Checkpoint file")->required();
  ev->add_option("--data", ev_data, "Dataset directory with pairs.eval.tsv")->required();
  ev->add_option("--out", ev_out, "Output directory")->required();
  ev->add_option("--max-images", ev_max, "Evaluate only the first N pairs (0 = all)")->capture_default_str();
  ev->add_flag("--no-images", ev_no_images, "Skip per-image PNG output");

  // ablate
  auto* ab = app.add_subcommand("ablate", "Run the scenario x DiL ablation matrix");
  std::string ab_config, ab_out;
  std::vector<std::string> ab_sets, ab_scenarios;
  long long ab_steps = 200;
  int ab_max_eval = 0;
  bool ab_images = false;
  ab->add_option("--config", ab_config, "Base config file");
  ab->add_option("--set", ab_sets, "Override a base config key, key=value (repeatable)");
  ab->add_option("--steps", ab_steps, "Training steps per cell")->capture_default_str();
  ab->add_option("--out", ab_out, "Output directory")->required();
  ab->add_option("--scenarios", ab_scenarios, "Only run these rows (e.g. unconditional patch16)");
  ab->add_option("--max-eval", ab_max_eval, "Evaluate only the first N test pairs (0 = all)")->capture_default_str();
  ab->add_flag("--images", ab_images, "Write per-image evaluation PNGs for each cell");

  // report
  auto* rp = app.add_subcommand("report", "Render plots from a run or ablation directory");
  std::string rp_run;
  bool rp_audit = false;
  rp->add_option("--run", rp_run, "Run or ablation output directory")->required();
  rp->add_flag("--audit", rp_audit, "Also write full-size architecture audits");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ds) {
      if (ds_n < 2) {
        std::cerr << "dataset: --n must be at least 2 so the modalities can be shuffled apart\n";
        return kExitError;
      }
      PhantomSpec base;
      base.size = ds_size;
      base.num_shapes = ds_shapes;
      base.noise_sigma = ds_noise;
      const auto m = generate_unpaired_dataset(ds_n, ds_seed, ds_out, base);
      std::cout << "wrote " << m.ct_files.size() << " CT and " << m.mri_files.size() << " MRI images ("
                << ds_size << "x" << ds_size << ") to " << m.root.string() << "\n"
                << "hidden pairing: " << (m.root / kPairsFile).string() << "\n";
      return 0;
    }

    if (*tr) {
      RunConfig cfg;
      try {
        cfg = config_with_overrides(tr_config, tr_sets);
      } catch (const ConfigError& e) {
        std::cerr << "train: " << e.what() << "\n";
        if (!e.key().empty()) std::cerr << "key: " << e.key() << "\n";
        return kExitConfig;
      }
      std::cout << "config hash " << hash_hex(config_hash(cfg)) << ", training into " << cfg.out_dir.string()
                << "\n";
      const auto pools = load_unpaired_pools(cfg.train_dir);
      TrainOptions opts;
      opts.out_dir = cfg.out_dir;
      opts.resume = tr_resume;
      opts.on_epoch = [](const EpochStats& s) {
        std::cout << "epoch " << s.epoch << "  steps " << s.steps << "  L_Total " << s.total << "  L_cyc " << s.cyc
                  << "  L_id " << s.id << "\n";
      };
      auto state = train(cfg.train, pools, opts);
      std::cout << "finished at step " << state->step << "; checkpoint "
                << (cfg.out_dir / kCheckpointFile).string() << "\n";
      return 0;
    }

    if (*tl) {
      auto state = load_state(tl_ckpt);
      const Direction dir = parse_direction(tl_dir);
      std::vector<Image> pool;
      if (!tl_pool.empty()) pool = load_dir_images(tl_pool);
      for (const auto& p : tl_cond_images) pool.push_back(load_image(p));
      const Image input = load_image(tl_input);
      if (!tl_cycle) {
        save_image(translate(*state, input, dir, pool).to_unit(), tl_out);
        std::cout << "wrote " << tl_out << "\n";
        return 0;
      }
      std::vector<Image> back_pool;
      if (!tl_back_pool.empty()) back_pool = load_dir_images(tl_back_pool);
      const CycleResult r = cycle_translate(*state, input, dir, pool, back_pool);
      if (tl_back_out.empty()) tl_back_out = (fs::path(tl_out).replace_extension("").string() + "_back.png");
      save_image(r.synthesized.to_unit(), tl_out);
      save_image(r.back.to_unit(), tl_back_out);
      std::cout << "wrote " << tl_out << " and " << tl_back_out << "\n";
      return 0;
    }

    if (*ev) {
      auto state = load_state(ev_ckpt);
      EvalOptions opts;
      opts.out_dir = ev_out;
      opts.write_images = !ev_no_images;
      opts.max_pairs = ev_max;
      print_eval(evaluate_dataset(ev_data, *state, opts));
      return 0;
    }

    if (*ab) {
      RunConfig base;
      try {
        base = config_with_overrides(ab_config, ab_sets);
      } catch (const ConfigError& e) {
        std::cerr << "ablate: " << e.what() << "\n";
        if (!e.key().empty()) std::cerr << "key: " << e.key() << "\n";
        return kExitConfig;
      }
      AblationOptions opts;
      opts.steps_per_cell = ab_steps;
      opts.only = ab_scenarios;
      opts.max_eval_pairs = ab_max_eval;
      opts.write_images = ab_images;
      opts.out_dir = ab_out;
      opts.log = [](const std::string& s) { std::cout << s << std::endl; };
      const auto m = run_ablation(base, opts);
      std::cout << matrix_to_tsv(m);
      return 0;
    }

    if (*rp) {
      const fs::path run = rp_run;
      int made = 0;
      if (fs::exists(run / kStatsFile)) {
        plot_losses(run / kStatsFile, run / "loss_epochs", "EPOCH MEANS");
        ++made;
      }
      if (fs::exists(run / kStepsFile)) {
        plot_losses(run / kStepsFile, run / "loss_steps", "PER STEP");
        ++made;
      }
      if (fs::exists(run / "ablation.tsv")) {
        write_ablation_plots(matrix_from_tsv(read_file(run / "ablation.tsv")), run);
        ++made;
      }
      if (rp_audit) {
        write_audits(run);
        ++made;
      }
      if (made == 0) {
        std::cerr << "report: nothing to plot in " << run.string() << "\n";
        return kExitError;
      }
      std::cout << "plots written to " << run.string() << "\n";
      return 0;
    }
  } catch (const MissingConditioning& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitMissingConditioning;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return 0;
}
