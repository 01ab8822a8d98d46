#include "pccgan/trainer.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "pccgan/config.hpp"

namespace pccgan {
namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Tensor<float> image_tensor(const Image& img) {
  Tensor<float> t(1, img.channels(), img.height(), img.width());
  std::copy(img.data().begin(), img.data().end(), t.data.begin());
  return t;
}

Image sample_image(const Tensor<float>& t, int i) {
  std::vector<float> data(t.sample(i), t.sample(i) + t.sample_size());
  return Image(t.w, t.h, t.c, IntensityRange::Signed, std::move(data));
}

Tensor<float> batch_of(const std::vector<const Image*>& imgs) {
  const Image& first = *imgs.front();
  Tensor<float> t(static_cast<int>(imgs.size()), first.channels(), first.height(), first.width());
  for (std::size_t i = 0; i < imgs.size(); ++i) {
    if (!imgs[i]->same_shape(first)) throw std::invalid_argument("batch images differ in shape");
    std::copy(imgs[i]->data().begin(), imgs[i]->data().end(), t.sample(static_cast<int>(i)));
  }
  return t;
}

InterleavedPatchSequence dil_sequence(const Image& input, const Image& target, int p) {
  return interleave_alternate(extract_patches(input, p), extract_patches(target, p));
}

enum StatSlot { kCgan1, kCgan2, kCyc, kId, kTotal, kDMri, kDCt, kSlots };

}  // namespace

// ---------------------------------------------------------------------------

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw std::invalid_argument("learning_rate must be finite and >= 0");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (max_steps < 0) throw std::invalid_argument("max_steps must be >= 0");
  if (checkpoint_every < 0) throw std::invalid_argument("checkpoint_every must be >= 0");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
    throw std::invalid_argument("adam betas must lie in [0,1)");
  if (!(adam_eps > 0.0)) throw std::invalid_argument("adam_eps must be > 0");
  conditioning.validate();
  weights.validate();
  generator_spec().validate();
  discriminator_spec().validate();
  const DiLConfig d = resolved_dil();
  if (d.enabled) d.validate();
}

DiLConfig TrainConfig::resolved_dil() const {
  DiLConfig d = dil;
  if (!conditioning.conditioned()) d.enabled = false;
  if (const int p = conditioning.patch_size(); p > 0) d.patch_size = p;
  return d;
}

int TrainConfig::residue_channels() const {
  const DiLConfig d = resolved_dil();
  return d.enabled ? d.residue_channel_count() : 0;
}

TrainState::TrainState(const TrainConfig& cfg, int size) : config(cfg), image_size(size) {
  config.validate();
  config.conditioning.validate_for(size);
  const DiLConfig dil = config.resolved_dil();
  if (dil.enabled && size % dil.patch_size != 0)
    throw std::invalid_argument("DiL patch size " + std::to_string(dil.patch_size) + " does not divide image side " +
                                std::to_string(size));
  const int cond = config.conditioning.channels();
  const int res = config.residue_channels();
  g_fwd = Generator<float>(config.generator_spec(), cond, res, mix(config.seed, 1));
  g_bwd = Generator<float>(config.generator_spec(), cond, res, mix(config.seed, 2));
  d_mri = Discriminator<float>(config.discriminator_spec(), mix(config.seed, 3));
  d_ct = Discriminator<float>(config.discriminator_spec(), mix(config.seed, 4));
  if (dil.enabled) {
    dict_fwd = init_dictionary(dil.atom_dim(), dil.resolved_atoms());
    dict_bwd = dict_fwd;
  }
  const AdamOptions opt{config.learning_rate, config.adam_beta1, config.adam_beta2, config.adam_eps};
  opt_g_fwd = Adam<float>(g_fwd.parameters(), opt);
  opt_g_bwd = Adam<float>(g_bwd.parameters(), opt);
  opt_d_mri = Adam<float>(d_mri.parameters(), opt);
  opt_d_ct = Adam<float>(d_ct.parameters(), opt);
  rng.seed(mix(config.seed, 5));
  epoch_sums.assign(kSlots, 0.0);
}

std::unique_ptr<TrainState> make_state(const TrainConfig& config, int image_size) {
  return std::make_unique<TrainState>(config, image_size);
}

// ---------------------------------------------------------------------------

TrainingData::TrainingData(const UnpairedPools& pools, const ConditioningSpec& spec) {
  if (pools.ct.empty() || pools.mri.empty()) throw std::invalid_argument("training pools must not be empty");
  size_ = pools.ct.front().width();
  auto convert = [&](const std::vector<Image>& src, std::vector<Image>& dst, const char* what) {
    for (const auto& img : src) {
      if (img.channels() != 1 || img.width() != size_ || img.height() != size_)
        throw std::invalid_argument(std::string(what) + " pool images must be single-channel " + std::to_string(size_) +
                                    "x" + std::to_string(size_));
      dst.push_back(img.to_signed());
    }
  };
  convert(pools.ct, ct_, "CT");
  convert(pools.mri, mri_, "MRI");
  spec.validate_for(size_);
  if (!spec.conditioned()) return;
  per_sample_ = std::holds_alternative<PatchMosaic>(spec.kind);
  if (!per_sample_) {
    fixed_fwd_ = scenario_target_channel(spec, ct_.front(), mri_);
    fixed_bwd_ = scenario_target_channel(spec, mri_.front(), ct_);
  }
}

int TrainingData::steps_per_epoch(int batch_size) const {
  const std::size_t n = std::max(ct_.size(), mri_.size());
  return static_cast<int>((n + batch_size - 1) / batch_size);
}

const Image& TrainingData::target_channel(Direction dir, std::size_t draw) const {
  if (per_sample_) return dir == Direction::CtToMri ? mri_.at(draw) : ct_.at(draw);
  return dir == Direction::CtToMri ? fixed_fwd_ : fixed_bwd_;
}

Image inference_residue(const TrainState& state, Direction dir, const Image& input, const Image& target) {
  const DiLConfig dil = state.config.resolved_dil();
  const Dictionary& dict = dir == Direction::CtToMri ? state.dict_fwd : state.dict_bwd;
  return residue_only(dil_sequence(input.to_signed(), target.to_signed(), dil.patch_size), dil, dict);
}

// ---------------------------------------------------------------------------

StepStats train_step(TrainState& state, const TrainingData& data) {
  const TrainConfig& cfg = state.config;
  if (data.image_size() != state.image_size)
    throw std::invalid_argument("training data size " + std::to_string(data.image_size()) +
                                " does not match the model's " + std::to_string(state.image_size));
  const int B = cfg.batch_size;
  std::uniform_int_distribution<std::size_t> pick_ct(0, data.ct().size() - 1);
  std::uniform_int_distribution<std::size_t> pick_mri(0, data.mri().size() - 1);
  std::vector<std::size_t> ix(B), iy(B), tf(B, 0), tb(B, 0);
  for (int i = 0; i < B; ++i) ix[i] = pick_ct(state.rng);
  for (int i = 0; i < B; ++i) iy[i] = pick_mri(state.rng);
  if (data.per_sample_targets()) {
    for (int i = 0; i < B; ++i) tf[i] = pick_mri(state.rng);
    for (int i = 0; i < B; ++i) tb[i] = pick_ct(state.rng);
  }

  // (1) conditioning: [input, target channel] per generator call
  const bool conditioned = cfg.conditioning.conditioned();
  std::vector<const Image*> xs, ys, tfs, tbs;
  for (int i = 0; i < B; ++i) {
    xs.push_back(&data.ct()[ix[i]]);
    ys.push_back(&data.mri()[iy[i]]);
    if (conditioned) {
      tfs.push_back(&data.target_channel(Direction::CtToMri, tf[i]));
      tbs.push_back(&data.target_channel(Direction::MriToCt, tb[i]));
    }
  }
  CyclePass<float>::Batch batch;
  batch.ct = batch_of(xs);
  batch.mri = batch_of(ys);
  if (conditioned) {
    batch.target_fwd = batch_of(tfs);
    batch.target_bwd = batch_of(tbs);
  }

  // (2) DiL on the hop-1 interleaved sequences; dictionaries evolve here
  const DiLConfig dil = cfg.resolved_dil();
  CyclePass<float>::ResidueFn residue_fn;
  if (dil.enabled) {
    auto restore = [&](const std::vector<const Image*>& in, const std::vector<const Image*>& tg, Dictionary& dict) {
      std::vector<InterleavedPatchSequence> seqs;
      for (int i = 0; i < B; ++i) seqs.push_back(dil_sequence(*in[i], *tg[i], dil.patch_size));
      RestoreResult r = restore_step(seqs, dil, dict);
      dict = std::move(r.dictionary);
      return batch_of([&] {
        std::vector<const Image*> p;
        for (const auto& img : r.residues) p.push_back(&img);
        return p;
      }());
    };
    batch.residue_fwd = restore(xs, tfs, state.dict_fwd);
    batch.residue_bwd = restore(ys, tbs, state.dict_bwd);
    residue_fn = [&state, &dil](Direction dir, const Tensor<float>& input, const Tensor<float>& target) {
      const Dictionary& dict = dir == Direction::CtToMri ? state.dict_fwd : state.dict_bwd;
      std::vector<Image> res;
      std::vector<const Image*> ptrs;
      for (int i = 0; i < input.n; ++i)
        res.push_back(residue_only(dil_sequence(sample_image(input, i), sample_image(target, i), dil.patch_size), dil,
                                   dict));
      for (const auto& r : res) ptrs.push_back(&r);
      return batch_of(ptrs);
    };
  }

  // (3) both translation chains
  CyclePass<float> pass({&state.g_fwd, &state.g_bwd, &state.d_mri, &state.d_ct}, cfg.weights, cfg.norm, residue_fn,
                        &state.rng);
  pass.forward(std::move(batch));

  auto last_good = [&] {
    return " at step " + std::to_string(state.step + 1) + "; last good checkpoint is from epoch " +
           std::to_string(state.epoch);
  };

  // (4) discriminators, generators frozen
  state.d_mri.zero_grad();
  state.d_ct.zero_grad();
  StepStats st;
  st.d = pass.discriminator_step(true);
  if (!std::isfinite(st.d.mri) || !std::isfinite(st.d.ct)) throw NonFiniteLoss("non-finite discriminator loss" + last_good());
  state.opt_d_mri.step();
  state.opt_d_ct.step();

  // (5) generators, discriminators frozen
  state.g_fwd.zero_grad();
  state.g_bwd.zero_grad();
  try {
    st.g = pass.generator_step(TermMask{}, true);
    st.total = total_loss(st.g, cfg.weights);
  } catch (const std::domain_error& e) {
    throw NonFiniteLoss(std::string(e.what()) + last_good());
  }
  state.opt_g_fwd.step();
  state.opt_g_bwd.step();
  state.d_mri.zero_grad();
  state.d_ct.zero_grad();

  // (6) bookkeeping
  ++state.step;
  ++state.step_in_epoch;
  st.step = state.step;
  const double vals[kSlots] = {st.g.cgan1, st.g.cgan2, st.g.cyc, st.g.id, st.total, st.d.mri, st.d.ct};
  for (int k = 0; k < kSlots; ++k) state.epoch_sums[k] += vals[k];
  return st;
}

// ---------------------------------------------------------------------------

std::string stats_header() { return "epoch\tsteps\tL_CGAN1\tL_CGAN2\tL_cyc\tL_id\tL_Total\tD_MRI\tD_CT\n"; }

std::string stats_row(const EpochStats& s) {
  std::ostringstream o;
  o.precision(10);
  o << s.epoch << '\t' << s.steps << '\t' << s.cgan1 << '\t' << s.cgan2 << '\t' << s.cyc << '\t' << s.id << '\t'
    << s.total << '\t' << s.d_mri << '\t' << s.d_ct << '\n';
  return o.str();
}

namespace {

std::string step_header() { return "step\tL_CGAN1\tL_CGAN2\tL_cyc\tL_id\tL_Total\tD_MRI\tD_CT\n"; }

std::string step_row(const StepStats& s) {
  std::ostringstream o;
  o.precision(10);
  o << s.step << '\t' << s.g.cgan1 << '\t' << s.g.cgan2 << '\t' << s.g.cyc << '\t' << s.g.id << '\t' << s.total << '\t'
    << s.d.mri << '\t' << s.d.ct << '\n';
  return o.str();
}

// Drops rows whose first column exceeds `bound`, keeping the header.
void truncate_log(const std::filesystem::path& path, long long bound, const std::string& header) {
  std::vector<std::string> keep{header.substr(0, header.size() - 1)};
  std::ifstream in(path);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      first = false;
      continue;
    }
    if (line.empty()) continue;
    if (std::stoll(line.substr(0, line.find('\t'))) <= bound) keep.push_back(line);
  }
  in.close();
  std::ofstream out(path, std::ios::trunc);
  for (const auto& l : keep) out << l << '\n';
}

void append(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

std::unique_ptr<TrainState> train(const TrainConfig& config, const UnpairedPools& pools, const TrainOptions& opts) {
  config.validate();
  const TrainingData data(pools, config.conditioning);
  std::filesystem::create_directories(opts.out_dir);
  const auto ckpt = opts.out_dir / kCheckpointFile;
  const auto stats_path = opts.out_dir / kStatsFile;
  const auto steps_path = opts.out_dir / kStepsFile;

  std::unique_ptr<TrainState> state;
  if (opts.resume && std::filesystem::exists(ckpt)) {
    state = load_state(ckpt);
    TrainConfig merged = state->config;
    merged.epochs = config.epochs;
    merged.max_steps = config.max_steps;
    merged.checkpoint_every = config.checkpoint_every;
    if (config_hash(merged) != config_hash(config))
      throw std::runtime_error("cannot resume: checkpoint was trained with a different configuration");
    state->config = merged;
    truncate_log(stats_path, state->epoch, stats_header());
    truncate_log(steps_path, state->step, step_header());
  } else {
    state = make_state(config, data.image_size());
    std::ofstream(stats_path, std::ios::trunc) << stats_header();
    std::ofstream(steps_path, std::ios::trunc) << step_header();
  }
  if (data.image_size() != state->image_size)
    throw std::runtime_error("dataset image size does not match the checkpoint");

  const int spe = data.steps_per_epoch(config.batch_size);
  const long long cap = config.max_steps > 0 ? config.max_steps : static_cast<long long>(config.epochs) * spe;
  while (state->epoch < config.epochs && state->step < cap) {
    StepStats st;
    try {
      st = train_step(*state, data);
    } catch (const NonFiniteLoss&) {
      throw;
    } catch (const std::exception& e) {
      throw std::runtime_error("epoch " + std::to_string(state->epoch + 1) + ": " + e.what());
    }
    append(steps_path, step_row(st));
    if (opts.on_step) opts.on_step(st);
    if (state->step_in_epoch == spe) {
      EpochStats es;
      es.epoch = state->epoch + 1;
      es.steps = spe;
      const auto& s = state->epoch_sums;
      es.cgan1 = s[kCgan1] / spe;
      es.cgan2 = s[kCgan2] / spe;
      es.cyc = s[kCyc] / spe;
      es.id = s[kId] / spe;
      es.total = s[kTotal] / spe;
      es.d_mri = s[kDMri] / spe;
      es.d_ct = s[kDCt] / spe;
      state->epoch = es.epoch;
      state->step_in_epoch = 0;
      state->epoch_sums.assign(kSlots, 0.0);
      append(stats_path, stats_row(es));
      if (opts.on_epoch) opts.on_epoch(es);
      if (config.checkpoint_every > 0 && state->epoch % config.checkpoint_every == 0) {
        try {
          save_state(*state, ckpt);
        } catch (const std::exception& e) {
          throw std::runtime_error("epoch " + std::to_string(state->epoch) + ": " + e.what());
        }
      }
    }
  }
  save_state(*state, ckpt);
  return state;
}

// ---------------------------------------------------------------------------

namespace {

template <typename Net>
void put_net(Checkpoint& ck, const std::string& prefix, Net& net, Adam<float>& opt) {
  auto params = net.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::string n = prefix + "." + params[i]->name;
    ck.put(n, std::span<const float>(params[i]->value));
    ck.put("adam." + n + ".m", std::span<const float>(opt.first_moments()[i]));
    ck.put("adam." + n + ".v", std::span<const float>(opt.second_moments()[i]));
  }
  auto bufs = net.buffers();
  for (std::size_t i = 0; i < bufs.size(); ++i)
    ck.put(prefix + ".buffer" + std::to_string(i), std::span<const float>(*bufs[i]));
  ck.set_meta("adam_steps." + prefix, std::to_string(opt.steps()));
}

void assign(std::vector<float>& dst, std::vector<float> src, const std::string& name) {
  if (src.size() != dst.size())
    throw std::runtime_error("checkpoint: tensor '" + name + "' has " + std::to_string(src.size()) +
                             " values, expected " + std::to_string(dst.size()));
  dst = std::move(src);
}

template <typename Net>
void get_net(const Checkpoint& ck, const std::string& prefix, Net& net, Adam<float>& opt) {
  auto params = net.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::string n = prefix + "." + params[i]->name;
    assign(params[i]->value, ck.f32(n), n);
    assign(opt.first_moments()[i], ck.f32("adam." + n + ".m"), n);
    assign(opt.second_moments()[i], ck.f32("adam." + n + ".v"), n);
  }
  auto bufs = net.buffers();
  for (std::size_t i = 0; i < bufs.size(); ++i) {
    const std::string n = prefix + ".buffer" + std::to_string(i);
    assign(*bufs[i], ck.f32(n), n);
  }
  opt.set_steps(std::stoll(ck.meta("adam_steps." + prefix)));
}

void put_dict(Checkpoint& ck, const std::string& name, const Dictionary& d) {
  if (d.empty()) return;
  ck.set_meta(name + ".rows", std::to_string(d.atom_dim()));
  ck.set_meta(name + ".cols", std::to_string(d.num_atoms()));
  ck.put(name, std::span<const double>(d.atoms().data(), static_cast<std::size_t>(d.atoms().size())));
}

Dictionary get_dict(const Checkpoint& ck, const std::string& name) {
  if (!ck.has(name)) return {};
  const int rows = std::stoi(ck.meta(name + ".rows"));
  const int cols = std::stoi(ck.meta(name + ".cols"));
  const auto v = ck.f64(name);
  if (v.size() != static_cast<std::size_t>(rows) * cols) throw std::runtime_error("checkpoint: bad dictionary size");
  return Dictionary(Eigen::Map<const Eigen::MatrixXd>(v.data(), rows, cols));
}

}  // namespace

Checkpoint to_checkpoint(TrainState& s) {
  Checkpoint ck;
  ck.set_meta("config_hash", hash_hex(config_hash(s.config)));
  ck.set_meta("epoch", std::to_string(s.epoch));
  ck.set_meta("step", std::to_string(s.step));
  ck.set_meta("step_in_epoch", std::to_string(s.step_in_epoch));
  ck.set_meta("image_size", std::to_string(s.image_size));
  ck.set_meta("epochs", std::to_string(s.config.epochs));
  ck.set_meta("max_steps", std::to_string(s.config.max_steps));
  ck.set_meta("checkpoint_every", std::to_string(s.config.checkpoint_every));
  ck.put_text("config", canonical_text(s.config));
  std::ostringstream rng;
  rng << s.rng;
  ck.put_text("rng", rng.str());
  ck.put("epoch_sums", std::span<const double>(s.epoch_sums));
  put_net(ck, "g_fwd", s.g_fwd, s.opt_g_fwd);
  put_net(ck, "g_bwd", s.g_bwd, s.opt_g_bwd);
  put_net(ck, "d_mri", s.d_mri, s.opt_d_mri);
  put_net(ck, "d_ct", s.d_ct, s.opt_d_ct);
  put_dict(ck, "dict_fwd", s.dict_fwd);
  put_dict(ck, "dict_bwd", s.dict_bwd);
  return ck;
}

std::unique_ptr<TrainState> from_checkpoint(const Checkpoint& ck) {
  TrainConfig cfg = parse_train_config(ck.text("config"));
  cfg.epochs = std::stoi(ck.meta("epochs"));
  cfg.max_steps = std::stoll(ck.meta("max_steps"));
  cfg.checkpoint_every = std::stoi(ck.meta("checkpoint_every"));
  if (hash_hex(config_hash(cfg)) != ck.meta("config_hash"))
    throw std::runtime_error("checkpoint: config hash does not match its embedded configuration");
  auto s = make_state(cfg, std::stoi(ck.meta("image_size")));
  s->epoch = std::stoi(ck.meta("epoch"));
  s->step = std::stoll(ck.meta("step"));
  s->step_in_epoch = std::stoi(ck.meta("step_in_epoch"));
  std::istringstream rng(ck.text("rng"));
  rng >> s->rng;
  if (!rng) throw std::runtime_error("checkpoint: malformed RNG state");
  s->epoch_sums = ck.f64("epoch_sums");
  get_net(ck, "g_fwd", s->g_fwd, s->opt_g_fwd);
  get_net(ck, "g_bwd", s->g_bwd, s->opt_g_bwd);
  get_net(ck, "d_mri", s->d_mri, s->opt_d_mri);
  get_net(ck, "d_ct", s->d_ct, s->opt_d_ct);
  if (s->config.resolved_dil().enabled) {
    s->dict_fwd = get_dict(ck, "dict_fwd");
    s->dict_bwd = get_dict(ck, "dict_bwd");
    if (s->dict_fwd.empty() || s->dict_bwd.empty()) throw std::runtime_error("checkpoint: missing dictionary state");
  }
  return s;
}

void save_state(TrainState& state, const std::filesystem::path& path) { to_checkpoint(state).save(path); }

std::unique_ptr<TrainState> load_state(const std::filesystem::path& path) {
  return from_checkpoint(Checkpoint::load(path));
}

// ---------------------------------------------------------------------------

namespace {

Image run_generator(TrainState& state, const Image& input, Direction dir, const Image& target) {
  Generator<float>& g = dir == Direction::CtToMri ? state.g_fwd : state.g_bwd;
  const Tensor<float> in = image_tensor(input);
  Tensor<float> cond, res;
  if (g.cond_channels() > 0) {
    const Tensor<float> t = image_tensor(target);
    cond = concat_channels<float>({&in, &t});
  }
  if (g.residue_channels() > 0) res = image_tensor(inference_residue(state, dir, input, target));
  const Tensor<float> out = g.forward(in, cond.empty() ? nullptr : &cond, res.empty() ? nullptr : &res, Mode::Infer,
                                      nullptr, nullptr);
  return sample_image(out, 0);
}

Image target_from_pool(const TrainState& state, const Image& input, Direction dir, std::span<const Image> pool) {
  const ConditioningSpec& spec = state.config.conditioning;
  if (!spec.conditioned()) return {};
  const std::string side = dir == Direction::CtToMri ? "MRI" : "CT";
  if (pool.empty())
    throw MissingConditioning("scenario " + to_string(spec) + " needs " + side + " conditioning images for " +
                              to_string(dir));
  std::vector<Image> signed_pool;
  for (const auto& p : pool) signed_pool.push_back(p.to_signed());
  try {
    return scenario_target_channel(spec, input, signed_pool);
  } catch (const std::invalid_argument& e) {
    throw MissingConditioning("scenario " + to_string(spec) + ": " + e.what());
  }
}

void check_input(const TrainState& state, const Image& input) {
  if (input.channels() != 1) throw std::invalid_argument("translate: input must be single-channel");
  if (input.width() != state.image_size || input.height() != state.image_size)
    throw std::invalid_argument("translate: input is " + std::to_string(input.width()) + "x" +
                                std::to_string(input.height()) + ", model expects " +
                                std::to_string(state.image_size) + "x" + std::to_string(state.image_size));
}

}  // namespace

Image translate(TrainState& state, const Image& input, Direction dir, std::span<const Image> cond_pool) {
  check_input(state, input);
  const Image in = input.to_signed();
  return run_generator(state, in, dir, target_from_pool(state, in, dir, cond_pool));
}

CycleResult cycle_translate(TrainState& state, const Image& input, Direction dir, std::span<const Image> cond_pool,
                            std::span<const Image> back_pool) {
  check_input(state, input);
  const Image in = input.to_signed();
  CycleResult r;
  r.synthesized = run_generator(state, in, dir, target_from_pool(state, in, dir, cond_pool));
  const Direction back = dir == Direction::CtToMri ? Direction::MriToCt : Direction::CtToMri;
  Image back_target;
  if (state.config.conditioning.conditioned())
    back_target = back_pool.empty() ? in : target_from_pool(state, r.synthesized, back, back_pool);
  r.back = run_generator(state, r.synthesized, back, back_target);
  return r;
}

}  // namespace pccgan
