#include "pccgan/cycle.hpp"

#include <stdexcept>

namespace pccgan {

std::string to_string(Direction d) { return d == Direction::CtToMri ? "ct2mri" : "mri2ct"; }

Direction parse_direction(const std::string& text) {
  if (text == "ct2mri" || text == "CT->MRI" || text == "ct-mri") return Direction::CtToMri;
  if (text == "mri2ct" || text == "MRI->CT" || text == "mri-ct") return Direction::MriToCt;
  throw std::invalid_argument("unknown direction '" + text + "' (expected ct2mri or mri2ct)");
}

namespace {

template <typename T>
std::vector<double> widen(const std::vector<T>& v) {
  return {v.begin(), v.end()};
}

template <typename T>
std::vector<T> scaled(const std::vector<double>& v, double s) {
  std::vector<T> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<T>(s * v[i]);
  return out;
}

template <typename T>
void add_into(Tensor<T>& dst, const Tensor<T>& src) {
  if (src.empty()) return;
  if (dst.empty()) {
    dst = src;
    return;
  }
  for (std::size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += src.data[i];
}

template <typename T>
void check_image_batch(const Tensor<T>& t, const Tensor<T>& ref, const char* what) {
  if (t.c != 1 || !t.same_shape(ref))
    throw std::invalid_argument(std::string("CyclePass: ") + what + " has shape " + t.shape_string() +
                                ", expected " + ref.shape_string());
}

}  // namespace

template <typename T>
CyclePass<T>::CyclePass(Networks nets, LossWeights weights, ReconstructionNorm norm, ResidueFn residue_fn,
                        std::mt19937_64* rng)
    : nets_(nets), weights_(weights), norm_(norm), residue_fn_(std::move(residue_fn)), rng_(rng) {
  if (!nets_.forward || !nets_.backward || !nets_.d_mri || !nets_.d_ct)
    throw std::invalid_argument("CyclePass: all four networks are required");
  weights_.validate();
}

template <typename T>
Tensor<T> CyclePass<T>::run(Generator<T>& g, Direction dir, const Tensor<T>& input, const Tensor<T>& target,
                            const Tensor<T>* residue, typename Generator<T>::Trace* trace) {
  Tensor<T> cond;
  if (g.cond_channels() > 0) cond = concat_channels<T>({&input, &target});
  Tensor<T> res;
  if (g.residue_channels() > 0) {
    if (residue && !residue->empty()) {
      res = *residue;
    } else {
      if (!residue_fn_) throw std::invalid_argument("CyclePass: generator expects residues but none were supplied");
      res = residue_fn_(dir, input, target);
    }
  }
  return g.forward(input, cond.empty() ? nullptr : &cond, res.empty() ? nullptr : &res, Mode::Train, rng_, trace);
}

template <typename T>
Tensor<T> CyclePass<T>::input_gradient(Generator<T>& g, const typename Generator<T>::Trace& trace,
                                       const Tensor<T>& d_out) {
  auto grads = g.backward(trace, d_out);
  // conditioning channel 0 is the input itself
  if (!grads.cond.empty()) add_into(grads.input, slice_channels(grads.cond, 0, 1));
  return std::move(grads.input);
}

template <typename T>
void CyclePass<T>::forward(Batch batch) {
  if (batch.ct.empty() || batch.ct.c != 1) throw std::invalid_argument("CyclePass: CT batch must be single-channel");
  check_image_batch(batch.mri, batch.ct, "MRI batch");
  if (nets_.forward->cond_channels() > 0) {
    check_image_batch(batch.target_fwd, batch.ct, "forward target channel");
    check_image_batch(batch.target_bwd, batch.ct, "backward target channel");
  }
  batch_ = std::move(batch);
  auto& gf = *nets_.forward;
  auto& gb = *nets_.backward;
  syn_y_ = run(gf, Direction::CtToMri, batch_.ct, batch_.target_fwd, &batch_.residue_fwd, &t_syn_y_);
  cyc_x_ = run(gb, Direction::MriToCt, syn_y_, batch_.target_bwd, nullptr, &t_cyc_x_);
  syn_x_ = run(gb, Direction::MriToCt, batch_.mri, batch_.target_bwd, &batch_.residue_bwd, &t_syn_x_);
  cyc_y_ = run(gf, Direction::CtToMri, syn_x_, batch_.target_fwd, nullptr, &t_cyc_y_);
  ready_ = true;
}

template <typename T>
DiscriminatorTerms CyclePass<T>::discriminator_step(bool accumulate) {
  if (!ready_) throw std::logic_error("CyclePass: discriminator_step before forward");
  auto score = [&](Discriminator<T>& d, const Tensor<T>& real, const Tensor<T>& fake) {
    typename Discriminator<T>::Trace tr, tf;
    const auto sr = widen(d.forward(real, Mode::Train, accumulate ? &tr : nullptr));
    const auto sf = widen(d.forward(fake, Mode::Train, accumulate ? &tf : nullptr));
    const double term = least_squares_adversarial(sr, sf).discriminator;
    if (accumulate) {
      const auto g = least_squares_adversarial_gradients(sr, sf);
      d.backward(tr, scaled<T>(g.discriminator_wrt_real, 1.0));
      d.backward(tf, scaled<T>(g.discriminator_wrt_fake, 1.0));
    }
    return term;
  };
  DiscriminatorTerms out;
  out.mri = score(*nets_.d_mri, batch_.mri, syn_y_);
  out.ct = score(*nets_.d_ct, batch_.ct, cyc_x_);
  return out;
}

template <typename T>
LossComponents CyclePass<T>::generator_step(const TermMask& mask, bool accumulate) {
  if (!ready_) throw std::logic_error("CyclePass: generator_step before forward");
  auto& gf = *nets_.forward;
  auto& gb = *nets_.backward;
  LossComponents c;

  // Adversarial terms and their gradients w.r.t. the scored images.
  auto adversarial = [&](Discriminator<T>& d, const Tensor<T>& fake, double weight, Tensor<T>& d_fake) {
    typename Discriminator<T>::Trace tr;
    const auto s = widen(d.forward(fake, Mode::Train, accumulate ? &tr : nullptr));
    if (accumulate) d_fake = d.backward(tr, scaled<T>(least_squares_generator_gradient(s), weight));
    return least_squares_generator_term(s);
  };
  Tensor<T> d_syn_y, d_cyc_x, d_cyc_y;
  c.cgan1 = adversarial(*nets_.d_mri, syn_y_, weights_.gamma * mask.cgan1, d_syn_y);
  c.cgan2 = adversarial(*nets_.d_ct, cyc_x_, weights_.gamma * mask.cgan2, d_cyc_x);

  Tensor<T>* gx = accumulate ? &d_cyc_x : nullptr;
  Tensor<T>* gy = accumulate ? &d_cyc_y : nullptr;
  c.cyc = reconstruction_term(cyc_x_, batch_.ct, norm_, gx, mask.cyc) +
          reconstruction_term(cyc_y_, batch_.mri, norm_, gy, mask.cyc);

  if (accumulate) {
    add_into(d_syn_y, input_gradient(gb, t_cyc_x_, d_cyc_x));
    gf.backward(t_syn_y_, d_syn_y);
    const Tensor<T> d_syn_x = input_gradient(gf, t_cyc_y_, d_cyc_y);
    gb.backward(t_syn_x_, d_syn_x);
    t_syn_y_ = {};
    t_cyc_x_ = {};
    t_syn_x_ = {};
    t_cyc_y_ = {};
    ready_ = false;
  }

  // Identity passes, one generator at a time to bound trace memory.
  auto identity = [&](Generator<T>& g, Direction dir, const Tensor<T>& img, const Tensor<T>& target) {
    typename Generator<T>::Trace tr;
    const Tensor<T> out = run(g, dir, img, target, nullptr, accumulate ? &tr : nullptr);
    Tensor<T> grad;
    const double term = reconstruction_term(out, img, norm_, accumulate ? &grad : nullptr, mask.id);
    if (accumulate) g.backward(tr, grad);
    return term;
  };
  c.id = identity(gf, Direction::CtToMri, batch_.mri, batch_.target_fwd) +
         identity(gb, Direction::MriToCt, batch_.ct, batch_.target_bwd);
  return c;
}

template class CyclePass<float>;
template class CyclePass<double>;

}  // namespace pccgan
