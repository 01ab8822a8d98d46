#include "pccgan/networks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace pccgan {

int WidthScale::apply(int filters) const {
  if (num < 1 || den < 1) throw std::invalid_argument("WidthScale: numerator and denominator must be >= 1");
  const long long scaled = static_cast<long long>(filters) * num / den;
  if (scaled < 1)
    throw std::invalid_argument("width scale " + to_string() + " leaves fewer than one filter of " +
                                std::to_string(filters));
  return static_cast<int>(scaled);
}

std::string WidthScale::to_string() const {
  return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
}

WidthScale WidthScale::parse(const std::string& text) {
  WidthScale ws;
  const auto slash = text.find('/');
  try {
    std::size_t used = 0;
    if (slash == std::string::npos) {
      ws.num = std::stoi(text, &used);
      ws.den = 1;
      if (used != text.size()) throw std::invalid_argument(text);
    } else {
      ws.num = std::stoi(text.substr(0, slash), &used);
      if (used != slash) throw std::invalid_argument(text);
      const std::string rest = text.substr(slash + 1);
      ws.den = std::stoi(rest, &used);
      if (used != rest.size()) throw std::invalid_argument(text);
    }
  } catch (const std::logic_error&) {
    throw std::invalid_argument("malformed width scale: " + text);
  }
  if (ws.num < 1 || ws.den < 1) throw std::invalid_argument("malformed width scale: " + text);
  const int g = std::gcd(ws.num, ws.den);
  ws.num /= g;
  ws.den /= g;
  return ws;
}

namespace {

const ConvStage& find_stage(const std::vector<ConvStage>& stages, int layer) {
  for (const auto& s : stages)
    if (layer >= s.first_layer && layer <= s.last_layer) return s;
  throw std::invalid_argument("no stage covers layer " + std::to_string(layer));
}

void validate_stages(const std::vector<ConvStage>& stages, int total) {
  if (total < 1) throw std::invalid_argument("network needs at least one layer");
  int next = 1;
  for (const auto& s : stages) {
    if (s.first_layer != next || s.last_layer < s.first_layer)
      throw std::invalid_argument("stages must tile the layers contiguously from 1");
    if (s.filters < 1 || s.kernel < 1 || s.kernel % 2 == 0)
      throw std::invalid_argument("stage needs >= 1 filters and an odd kernel");
    next = s.last_layer + 1;
  }
  if (next != total + 1) throw std::invalid_argument("stages do not cover every layer");
}

bool contains(const std::vector<int>& v, int x) { return std::find(v.begin(), v.end(), x) != v.end(); }

}  // namespace

GeneratorSpec GeneratorSpec::full() { return desk(WidthScale{1, 1}); }

GeneratorSpec GeneratorSpec::desk(WidthScale scale) {
  GeneratorSpec s;
  s.width_scale = scale;
  return s;
}

const ConvStage& GeneratorSpec::stage_of(int layer) const { return find_stage(stages, layer); }

void GeneratorSpec::validate() const {
  validate_stages(stages, total_layers);
  for (int l : injection_layers)
    if (l < 1 || l > total_layers) throw std::invalid_argument("injection layer out of range");
  if (residue_layer < 1 || residue_layer > total_layers) throw std::invalid_argument("residue layer out of range");
  for (int l : dropout_layers)
    if (l < 1 || l >= total_layers) throw std::invalid_argument("dropout layer out of range");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw std::invalid_argument("dropout rate must lie in [0,1)");
  if (!(leaky_slope >= 0.0)) throw std::invalid_argument("leaky slope must be >= 0");
  if (input_channels < 1 || output_channels < 1) throw std::invalid_argument("generator channel counts must be >= 1");
  for (const auto& s : stages) width_scale.apply(s.filters);
  for (const auto& [from, to] : skip_pairs) {
    if (from < 1 || to <= from || to >= total_layers)
      throw std::invalid_argument("skip " + std::to_string(from) + "->" + std::to_string(to) +
                                  " must join two hidden layers in forward order");
    if (width_scale.apply(stage_of(from).filters) != width_scale.apply(stage_of(to).filters))
      throw std::invalid_argument("skip " + std::to_string(from) + "->" + std::to_string(to) +
                                  " joins layers of different channel counts");
  }
}

DiscriminatorSpec DiscriminatorSpec::full() { return desk(WidthScale{1, 1}); }

DiscriminatorSpec DiscriminatorSpec::desk(WidthScale scale) {
  DiscriminatorSpec s;
  s.width_scale = scale;
  return s;
}

const ConvStage& DiscriminatorSpec::stage_of(int layer) const { return find_stage(stages, layer); }

void DiscriminatorSpec::validate() const {
  validate_stages(stages, total_layers);
  if (input_channels < 1) throw std::invalid_argument("discriminator input channels must be >= 1");
  for (const auto& s : stages) width_scale.apply(s.filters);
}

long long LayerAudit::conv_parameters() const {
  return static_cast<long long>(in_channels) * out_channels * kernel * kernel + out_channels;
}

std::vector<LayerAudit> audit_generator(const GeneratorSpec& spec, int cond_channels, int residue_channels) {
  spec.validate();
  if (cond_channels < 0 || residue_channels < 0) throw std::invalid_argument("negative injected channel count");
  std::vector<LayerAudit> rows;
  int prev = spec.input_channels;
  for (int l = 1; l <= spec.total_layers; ++l) {
    const ConvStage& st = spec.stage_of(l);
    LayerAudit a;
    a.index = l;
    a.kernel = st.kernel;
    a.injected_channels = (contains(spec.injection_layers, l) ? cond_channels : 0) +
                          (l == spec.residue_layer ? residue_channels : 0);
    a.in_channels = prev + a.injected_channels;
    const bool last = l == spec.total_layers;
    a.out_channels = last ? spec.output_channels : spec.width_scale.apply(st.filters);
    a.batch_norm = !last;
    a.activation = last ? "tanh" : "leaky_relu";
    a.dropout = contains(spec.dropout_layers, l) && spec.dropout_rate > 0.0;
    for (const auto& [from, to] : spec.skip_pairs)
      if (to == l) {
        if (a.skip_from != 0) throw std::invalid_argument("two skips into layer " + std::to_string(l));
        a.skip_from = from;
      }
    prev = a.out_channels;
    rows.push_back(a);
  }
  return rows;
}

std::vector<LayerAudit> audit_discriminator(const DiscriminatorSpec& spec) {
  spec.validate();
  std::vector<LayerAudit> rows;
  int prev = spec.input_channels;
  for (int l = 1; l <= spec.total_layers; ++l) {
    const ConvStage& st = spec.stage_of(l);
    LayerAudit a;
    a.index = l;
    a.kernel = st.kernel;
    a.in_channels = prev;
    a.out_channels = spec.width_scale.apply(st.filters);
    a.batch_norm = true;
    a.activation = "leaky_relu";
    prev = a.out_channels;
    rows.push_back(a);
  }
  LayerAudit head;
  head.index = 0;
  head.in_channels = prev;
  head.out_channels = 1;
  head.kernel = 1;
  head.activation = "linear";
  rows.push_back(head);
  return rows;
}

long long count_parameters(const std::vector<LayerAudit>& audit) {
  long long total = 0;
  for (const auto& a : audit) total += a.parameters();
  return total;
}

long long count_parameters(const GeneratorSpec& spec, int cond_channels, int residue_channels) {
  return count_parameters(audit_generator(spec, cond_channels, residue_channels));
}

long long count_parameters(const DiscriminatorSpec& spec) { return count_parameters(audit_discriminator(spec)); }

std::string audit_to_tsv(const std::vector<LayerAudit>& audit) {
  std::ostringstream out;
  out << "layer\tin\tout\tkernel\tinjected\tbn\tactivation\tdropout\tskip_from\tparams\n";
  for (const auto& a : audit) {
    out << (a.index == 0 ? std::string("head") : std::to_string(a.index)) << '\t' << a.in_channels << '\t'
        << a.out_channels << '\t' << a.kernel << 'x' << a.kernel << '\t' << a.injected_channels << '\t'
        << (a.batch_norm ? "yes" : "no") << '\t' << a.activation << '\t' << (a.dropout ? "yes" : "no") << '\t'
        << a.skip_from << '\t' << a.parameters() << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Generator

template <typename T>
Generator<T>::Generator(const GeneratorSpec& spec, int cond_channels, int residue_channels, std::uint64_t seed)
    : spec_(spec),
      cond_channels_(cond_channels),
      residue_channels_(residue_channels),
      audit_(audit_generator(spec, cond_channels, residue_channels)) {
  std::mt19937_64 rng(seed);
  const double slope = spec_.leaky_slope;
  for (const auto& a : audit_) {
    const std::string name = "g" + std::to_string(a.index);
    convs_.emplace_back(name + ".conv", a.in_channels, a.out_channels, a.kernel);
    const double fan_in = static_cast<double>(a.in_channels) * a.kernel * a.kernel;
    const double stddev = a.batch_norm ? std::sqrt(2.0 / ((1.0 + slope * slope) * fan_in)) : std::sqrt(1.0 / fan_in);
    convs_.back().init(rng, stddev);
    if (a.batch_norm) norms_.emplace_back(name + ".bn", a.out_channels);
  }
}

template <typename T>
Tensor<T> Generator<T>::forward(const Tensor<T>& input, const Tensor<T>* cond, const Tensor<T>* residue, Mode mode,
                                std::mt19937_64* rng, Trace* trace) {
  if (input.c != spec_.input_channels) throw std::invalid_argument("Generator: input channel mismatch");
  auto check_side = [&](const Tensor<T>* t, int channels, const char* what) {
    if (channels == 0) return;
    if (!t || t->c != channels || t->n != input.n || t->h != input.h || t->w != input.w)
      throw std::invalid_argument(std::string("Generator: ") + what + " tensor does not match " +
                                  std::to_string(channels) + " channels at input resolution");
  };
  check_side(cond, cond_channels_, "conditioning");
  check_side(residue, residue_channels_, "residue");
  const bool train = mode == Mode::Train;
  const bool dropout_on = train && spec_.dropout_rate > 0.0;
  if (dropout_on && !rng) throw std::invalid_argument("Generator: train mode with dropout needs an RNG");
  if (trace) trace->layers.assign(audit_.size(), {});

  const int L = static_cast<int>(audit_.size());
  std::vector<Tensor<T>> skip_sources(L + 1);
  std::vector<char> is_source(L + 1, 0);
  for (const auto& sp : spec_.skip_pairs) is_source[sp.first] = 1;

  Tensor<T> h = input;
  for (int l = 1; l <= L; ++l) {
    const LayerAudit& a = audit_[l - 1];
    Tensor<T> x;
    if (a.injected_channels > 0) {
      const bool inject_cond = cond_channels_ > 0 && std::find(spec_.injection_layers.begin(),
                                                               spec_.injection_layers.end(), l) !=
                                                         spec_.injection_layers.end();
      const bool inject_res = residue_channels_ > 0 && l == spec_.residue_layer;
      x = concat_channels<T>({&h, inject_cond ? cond : nullptr, inject_res ? residue : nullptr});
    } else {
      x = std::move(h);
    }
    Tensor<T> z = convs_[l - 1].forward(x);
    if (l == L) {
      for (auto& v : z.data) v = std::tanh(v);
      if (trace) {
        trace->layers[l - 1].conv_in = std::move(x);
        trace->layers[l - 1].output = z;
      }
      return z;
    }
    auto* lt = trace ? &trace->layers[l - 1] : nullptr;
    Tensor<T> y = norms_[l - 1].forward(z, mode, lt ? &lt->bn : nullptr);
    leaky_relu_inplace(y, spec_.leaky_slope);
    if (a.skip_from > 0) {
      const Tensor<T>& src = skip_sources[a.skip_from];
      for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] += src.data[i];
    }
    if (a.dropout && dropout_on) {
      const T keep_scale = static_cast<T>(1.0 / (1.0 - spec_.dropout_rate));
      std::vector<T> scale(y.size());
      std::bernoulli_distribution keep(1.0 - spec_.dropout_rate);
      for (auto& s : scale) s = keep(*rng) ? keep_scale : T(0);
      for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] *= scale[i];
      if (lt) lt->dropout_scale = std::move(scale);
    }
    if (is_source[l]) skip_sources[l] = y;
    if (lt) lt->conv_in = std::move(x);
    h = std::move(y);
  }
  return h;
}

template <typename T>
typename Generator<T>::InputGrads Generator<T>::backward(const Trace& trace, const Tensor<T>& d_out) {
  const int L = static_cast<int>(audit_.size());
  if (static_cast<int>(trace.layers.size()) != L) throw std::invalid_argument("Generator::backward: bad trace");
  InputGrads grads;
  std::vector<Tensor<T>> pending(L + 1);  // gradients reaching skip sources
  Tensor<T> d = d_out;
  for (int l = L; l >= 1; --l) {
    const LayerAudit& a = audit_[l - 1];
    const LayerTrace& lt = trace.layers[l - 1];
    Tensor<T> dz;
    if (l == L) {
      dz = std::move(d);
      const auto& y = lt.output;
      for (std::size_t i = 0; i < dz.data.size(); ++i) dz.data[i] *= T(1) - y.data[i] * y.data[i];
    } else {
      if (!pending[l].empty())
        for (std::size_t i = 0; i < d.data.size(); ++i) d.data[i] += pending[l].data[i];
      if (!lt.dropout_scale.empty())
        for (std::size_t i = 0; i < d.data.size(); ++i) d.data[i] *= lt.dropout_scale[i];
      if (a.skip_from > 0) {
        auto& p = pending[a.skip_from];
        if (p.empty()) p = d;
        else
          for (std::size_t i = 0; i < d.data.size(); ++i) p.data[i] += d.data[i];
      }
      const Tensor<T> pre = norms_[l - 1].affine(lt.bn.xhat);
      leaky_relu_backward_inplace(d, pre, spec_.leaky_slope);
      dz = norms_[l - 1].backward(lt.bn, d);
    }
    Tensor<T> dx = convs_[l - 1].backward(lt.conv_in, dz, true);
    const int feature_channels = a.in_channels - a.injected_channels;
    if (a.injected_channels > 0) {
      int offset = feature_channels;
      const bool inject_cond = cond_channels_ > 0 && std::find(spec_.injection_layers.begin(),
                                                               spec_.injection_layers.end(), l) !=
                                                         spec_.injection_layers.end();
      if (inject_cond) {
        Tensor<T> dc = slice_channels(dx, offset, cond_channels_);
        if (grads.cond.empty()) grads.cond = std::move(dc);
        else
          for (std::size_t i = 0; i < dc.data.size(); ++i) grads.cond.data[i] += dc.data[i];
        offset += cond_channels_;
      }
      if (residue_channels_ > 0 && l == spec_.residue_layer) grads.residue = slice_channels(dx, offset, residue_channels_);
      d = slice_channels(dx, 0, feature_channels);
    } else {
      d = std::move(dx);
    }
  }
  grads.input = std::move(d);
  return grads;
}

template <typename T>
std::vector<Param<T>*> Generator<T>::parameters() {
  std::vector<Param<T>*> out;
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    out.push_back(&convs_[i].weight);
    out.push_back(&convs_[i].bias);
    if (i < norms_.size()) {
      out.push_back(&norms_[i].gamma);
      out.push_back(&norms_[i].beta);
    }
  }
  return out;
}

template <typename T>
std::vector<std::vector<T>*> Generator<T>::buffers() {
  std::vector<std::vector<T>*> out;
  for (auto& n : norms_) {
    out.push_back(&n.running_mean);
    out.push_back(&n.running_var);
  }
  return out;
}

template <typename T>
void Generator<T>::zero_grad() {
  for (auto* p : parameters()) p->zero_grad();
}

template <typename T>
long long Generator<T>::parameter_count() const {
  long long n = 0;
  for (const auto& c : convs_) n += static_cast<long long>(c.weight.value.size() + c.bias.value.size());
  for (const auto& b : norms_) n += static_cast<long long>(b.gamma.value.size() + b.beta.value.size());
  return n;
}

// ---------------------------------------------------------------------------
// Discriminator

template <typename T>
Discriminator<T>::Discriminator(const DiscriminatorSpec& spec, std::uint64_t seed)
    : spec_(spec), audit_(audit_discriminator(spec)) {
  std::mt19937_64 rng(seed);
  const double slope = spec_.leaky_slope;
  for (const auto& a : audit_) {
    if (a.index == 0) continue;
    const std::string name = "d" + std::to_string(a.index);
    convs_.emplace_back(name + ".conv", a.in_channels, a.out_channels, a.kernel);
    const double fan_in = static_cast<double>(a.in_channels) * a.kernel * a.kernel;
    convs_.back().init(rng, std::sqrt(2.0 / ((1.0 + slope * slope) * fan_in)));
    norms_.emplace_back(name + ".bn", a.out_channels);
  }
  const int c = audit_.back().in_channels;
  head_weight_.name = "dhead.weight";
  head_bias_.name = "dhead.bias";
  head_weight_.resize(c);
  head_bias_.resize(1);
  for (auto& v : head_weight_.value)
    v = static_cast<T>(std::normal_distribution<double>(0.0, std::sqrt(1.0 / c))(rng));
}

template <typename T>
std::vector<T> Discriminator<T>::forward(const Tensor<T>& input, Mode mode, Trace* trace) {
  if (input.c != spec_.input_channels) throw std::invalid_argument("Discriminator: input channel mismatch");
  const int L = static_cast<int>(convs_.size());
  if (trace) {
    trace->conv_in.assign(L, {});
    trace->bn.assign(L, {});
    trace->h = input.h;
    trace->w = input.w;
  }
  Tensor<T> h = input;
  for (int l = 0; l < L; ++l) {
    Tensor<T> z = convs_[l].forward(h);
    Tensor<T> y = norms_[l].forward(z, mode, trace ? &trace->bn[l] : nullptr);
    leaky_relu_inplace(y, spec_.leaky_slope);
    if (trace) trace->conv_in[l] = std::move(h);
    h = std::move(y);
  }
  const int C = h.c;
  const std::size_t plane = h.plane();
  std::vector<T> pooled(static_cast<std::size_t>(h.n) * C);
  std::vector<T> scores(h.n);
  for (int i = 0; i < h.n; ++i) {
    double s = head_bias_.value[0];
    for (int ch = 0; ch < C; ++ch) {
      const T* src = h.channel(i, ch);
      double m = 0.0;
      for (std::size_t p = 0; p < plane; ++p) m += src[p];
      m /= static_cast<double>(plane);
      pooled[static_cast<std::size_t>(i) * C + ch] = static_cast<T>(m);
      s += head_weight_.value[ch] * m;
    }
    scores[i] = static_cast<T>(s);
  }
  if (trace) trace->pooled = std::move(pooled);
  return scores;
}

template <typename T>
Tensor<T> Discriminator<T>::backward(const Trace& trace, const std::vector<T>& d_scores) {
  const int L = static_cast<int>(convs_.size());
  const int n = static_cast<int>(d_scores.size());
  const int C = audit_.back().in_channels;
  const std::size_t plane = static_cast<std::size_t>(trace.h) * trace.w;
  Tensor<T> d(n, C, trace.h, trace.w);
  for (int i = 0; i < n; ++i) {
    head_bias_.grad[0] += d_scores[i];
    for (int ch = 0; ch < C; ++ch) {
      head_weight_.grad[ch] += d_scores[i] * trace.pooled[static_cast<std::size_t>(i) * C + ch];
      const T g = static_cast<T>(d_scores[i] * head_weight_.value[ch] / static_cast<double>(plane));
      T* dst = d.channel(i, ch);
      std::fill(dst, dst + plane, g);
    }
  }
  for (int l = L - 1; l >= 0; --l) {
    const Tensor<T> pre = norms_[l].affine(trace.bn[l].xhat);
    leaky_relu_backward_inplace(d, pre, spec_.leaky_slope);
    Tensor<T> dz = norms_[l].backward(trace.bn[l], d);
    d = convs_[l].backward(trace.conv_in[l], dz, true);
  }
  return d;
}

template <typename T>
std::vector<Param<T>*> Discriminator<T>::parameters() {
  std::vector<Param<T>*> out;
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    out.push_back(&convs_[i].weight);
    out.push_back(&convs_[i].bias);
    out.push_back(&norms_[i].gamma);
    out.push_back(&norms_[i].beta);
  }
  out.push_back(&head_weight_);
  out.push_back(&head_bias_);
  return out;
}

template <typename T>
std::vector<std::vector<T>*> Discriminator<T>::buffers() {
  std::vector<std::vector<T>*> out;
  for (auto& n : norms_) {
    out.push_back(&n.running_mean);
    out.push_back(&n.running_var);
  }
  return out;
}

template <typename T>
void Discriminator<T>::zero_grad() {
  for (auto* p : parameters()) p->zero_grad();
}

template <typename T>
long long Discriminator<T>::parameter_count() const {
  long long n = static_cast<long long>(head_weight_.value.size() + head_bias_.value.size());
  for (const auto& c : convs_) n += static_cast<long long>(c.weight.value.size() + c.bias.value.size());
  for (const auto& b : norms_) n += static_cast<long long>(b.gamma.value.size() + b.beta.value.size());
  return n;
}

template class Generator<float>;
template class Generator<double>;
template class Discriminator<float>;
template class Discriminator<double>;

}  // namespace pccgan
