#include "pccgan/evaluation.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "pccgan/plot.hpp"

namespace pccgan {

std::vector<Image> pool_excluding(const std::vector<Image>& images, std::size_t i) {
  std::vector<Image> out;
  for (std::size_t k = 1; k < images.size(); ++k) out.push_back(images[(i + k) % images.size()]);
  return out;
}

Image difference_image(const Image& a, const Image& b) {
  const Image ua = a.to_unit(), ub = b.to_unit();
  if (!ua.same_shape(ub)) throw std::invalid_argument("difference_image: shape mismatch");
  Image d(ua.width(), ua.height(), ua.channels(), IntensityRange::Unit);
  for (std::size_t i = 0; i < d.size(); ++i) d.data()[i] = std::abs(ua.data()[i] - ub.data()[i]);
  return d;
}

MetricReport mean_report(const std::vector<MetricReport>& reports) {
  MetricReport m;
  if (reports.empty()) return m;
  for (const auto& r : reports) {
    m.rmse += r.rmse;
    m.psnr += r.psnr;
    m.ssim += r.ssim;
  }
  const double n = static_cast<double>(reports.size());
  m.rmse /= n;
  m.psnr /= n;
  m.ssim /= n;
  return m;
}

namespace {

std::string stem(const std::string& file) { return std::filesystem::path(file).stem().string(); }

void fmt(std::ostream& o, const MetricReport& r) { o << r.rmse << '\t' << r.psnr << '\t' << r.ssim; }

}  // namespace

EvalSummary evaluate_dataset(const std::filesystem::path& root, const CycleFn& fn, const EvalOptions& opts) {
  const auto pairs = load_eval_pairs(root);
  if (pairs.empty()) throw std::runtime_error("evaluation manifest in " + root.string() + " lists no pairs");
  std::vector<Image> ct, mri;
  for (const auto& p : pairs) {
    ct.push_back(load_image(root / "ct" / p.ct_file));
    mri.push_back(load_image(root / "mri" / p.mri_file));
  }
  const std::size_t n = opts.max_pairs > 0 ? std::min<std::size_t>(opts.max_pairs, pairs.size()) : pairs.size();
  const bool write = !opts.out_dir.empty();
  const auto img_dir = opts.out_dir / "images";
  if (write && opts.write_images) std::filesystem::create_directories(img_dir);

  EvalSummary s;
  std::vector<MetricReport> f, r, cc, cm;
  std::vector<std::vector<Image>> grid;
  for (std::size_t i = 0; i < n; ++i) {
    const auto mri_pool = pool_excluding(mri, i);
    const auto ct_pool = pool_excluding(ct, i);
    const CycleResult a = fn(ct[i], Direction::CtToMri, mri_pool, ct_pool);
    const CycleResult b = fn(mri[i], Direction::MriToCt, ct_pool, mri_pool);
    EvalRow row;
    row.ct_file = pairs[i].ct_file;
    row.mri_file = pairs[i].mri_file;
    row.forward = compare(a.synthesized.to_unit(), mri[i]);
    row.reverse = compare(b.synthesized.to_unit(), ct[i]);
    row.cycle_ct = compare(a.back.to_unit(), ct[i]);
    row.cycle_mri = compare(b.back.to_unit(), mri[i]);
    f.push_back(row.forward);
    r.push_back(row.reverse);
    cc.push_back(row.cycle_ct);
    cm.push_back(row.cycle_mri);
    if (write && opts.write_images) {
      const std::string c = stem(row.ct_file), m = stem(row.mri_file);
      save_image(a.synthesized.to_unit(), img_dir / (c + "_syn_mri.png"));
      save_image(a.back.to_unit(), img_dir / (c + "_back_ct.png"));
      save_image(difference_image(a.synthesized, mri[i]), img_dir / (c + "_diff_mri.png"));
      save_image(b.synthesized.to_unit(), img_dir / (m + "_syn_ct.png"));
      save_image(b.back.to_unit(), img_dir / (m + "_back_mri.png"));
      save_image(difference_image(b.synthesized, ct[i]), img_dir / (m + "_diff_ct.png"));
      if (grid.size() < 4)
        grid.push_back({ct[i], a.synthesized, mri[i], difference_image(a.synthesized, mri[i]), a.back});
    }
    s.rows.push_back(std::move(row));
  }
  s.forward = mean_report(f);
  s.reverse = mean_report(r);
  s.cycle_ct = mean_report(cc);
  s.cycle_mri = mean_report(cm);
  if (write) {
    std::filesystem::create_directories(opts.out_dir);
    std::ofstream(opts.out_dir / "eval.tsv") << eval_rows_tsv(s);
    std::ofstream(opts.out_dir / "eval_summary.tsv") << eval_summary_tsv(s);
    // columns: input CT, synthesized MRI, true MRI, difference, back-translated CT
    if (!grid.empty()) save_plot(sample_grid(grid), opts.out_dir / "samples.png");
  }
  return s;
}

EvalSummary evaluate_dataset(const std::filesystem::path& root, TrainState& state, const EvalOptions& opts) {
  return evaluate_dataset(
      root,
      [&state](const Image& in, Direction d, std::span<const Image> cond, std::span<const Image> back) {
        return cycle_translate(state, in, d, cond, back);
      },
      opts);
}

std::string eval_rows_tsv(const EvalSummary& s) {
  std::ostringstream o;
  o.precision(10);
  o << "ct_file\tmri_file\tfwd_rmse\tfwd_psnr\tfwd_ssim\trev_rmse\trev_psnr\trev_ssim\t"
       "cyc_ct_rmse\tcyc_ct_psnr\tcyc_ct_ssim\tcyc_mri_rmse\tcyc_mri_psnr\tcyc_mri_ssim\n";
  for (const auto& r : s.rows) {
    o << r.ct_file << '\t' << r.mri_file << '\t';
    fmt(o, r.forward);
    o << '\t';
    fmt(o, r.reverse);
    o << '\t';
    fmt(o, r.cycle_ct);
    o << '\t';
    fmt(o, r.cycle_mri);
    o << '\n';
  }
  return o.str();
}

std::string eval_summary_tsv(const EvalSummary& s) {
  std::ostringstream o;
  o.precision(10);
  o << "measure\trmse\tpsnr\tssim\n";
  const std::pair<const char*, const MetricReport*> rows[] = {
      {"ct2mri", &s.forward}, {"mri2ct", &s.reverse}, {"ct_cycle", &s.cycle_ct}, {"mri_cycle", &s.cycle_mri}};
  for (const auto& [name, m] : rows) {
    o << name << '\t';
    fmt(o, *m);
    o << '\n';
  }
  o << "pairs\t" << s.rows.size() << "\t\t\n";
  return o.str();
}

}  // namespace pccgan
