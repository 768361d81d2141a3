#include "pimrl/macro_net.hpp"

#include <cmath>

#include "pimrl/errors.hpp"
#include "pimrl/field_tensor.hpp"

namespace pimrl {

namespace {

// Param layout; order is the serialization and gradient order.
enum ParamIndex {
  kEnc1K, kEnc1B, kEnc2K, kEnc2B,
  kXiK, kXiB, kHiK,
  kXfK, kXfB, kHfK,
  kXcK, kXcB, kHcK,
  kXoK, kXoB, kHoK,
  kDec1K, kDec1B, kDec2K, kDec2B,
  kParamCount
};

Shape conv_shape(int out_c, int in_c, int k, int dims) {
  return dims == 1 ? Shape{out_c, in_c, k} : Shape{out_c, in_c, k, k};
}

void init_conv(Param& p, SplitMix64& rng, int in_c, int k, int dims) {
  const double fan_in = static_cast<double>(in_c) * (dims == 1 ? k : k * k);
  const double stddev = 0.1 / std::sqrt(fan_in);
  for (double& v : p.value) v = rng.normal() * stddev;
}

}  // namespace

std::vector<Param*> MacroModel::trainable() {
  std::vector<Param*> out;
  out.reserve(params.size());
  for (Param& p : params) out.push_back(&p);
  return out;
}

std::vector<const Param*> MacroModel::trainable() const {
  std::vector<const Param*> out;
  out.reserve(params.size());
  for (const Param& p : params) out.push_back(&p);
  return out;
}

MacroModel make_macro_model(const MacroConfig& cfg, SplitMix64& rng) {
  if (cfg.kernel_size % 2 == 0) throw ConfigError("macro: kernel_size must be odd");
  MacroModel m;
  m.cfg = cfg;
  const int nf = cfg.n_fields, c1 = cfg.enc_channels, lat = cfg.latent_channels;
  const int ks = cfg.kernel_size, d = cfg.dims;

  auto add_conv = [&](const char* name, int oc, int ic, bool bias) {
    Param k(std::string("macro.") + name + ".kernel", conv_shape(oc, ic, ks, d));
    init_conv(k, rng, ic, ks, d);
    m.params.push_back(std::move(k));
    if (bias) m.params.emplace_back(std::string("macro.") + name + ".bias", Shape{oc});
  };

  add_conv("enc1", c1, nf, true);
  add_conv("enc2", lat, c1, true);
  add_conv("xi", lat, lat, true);
  add_conv("hi", lat, lat, false);
  add_conv("xf", lat, lat, true);
  add_conv("hf", lat, lat, false);
  add_conv("xc", lat, lat, true);
  add_conv("hc", lat, lat, false);
  add_conv("xo", lat, lat, true);
  add_conv("ho", lat, lat, false);
  add_conv("dec1", c1, lat, true);
  add_conv("dec2", nf, c1, true);

  // Forget-gate bias opens the gate at init; zeroed final decoder conv
  // makes the residual block start as the identity map.
  for (double& v : m.params[kXfB].value) v = 1.0;
  for (double& v : m.params[kDec2K].value) v = 0.0;

  if (static_cast<int>(m.params.size()) != kParamCount)
    throw ConfigError("macro: internal param layout mismatch");
  return m;
}

ConvLstmState initial_state(const MacroModel& m, const std::vector<int>& extents) {
  std::vector<int> latent_ext;
  for (int e : extents) {
    if (e % 4 != 0)
      throw ConfigError("macro: spatial extent " + std::to_string(e) +
                        " must be divisible by 4 (two stride-2 stages)");
    latent_ext.push_back(e / 4);
  }
  ConvLstmState s;
  s.h = Field(m.cfg.latent_channels, latent_ext);
  s.c = Field(m.cfg.latent_channels, latent_ext);
  return s;
}

MacroBinding bind_macro(Graph& g, const MacroModel& m, bool trainable) {
  MacroBinding b;
  b.cfg = &m.cfg;
  b.t.reserve(m.params.size());
  for (const Param& p : m.params) b.t.push_back(g.leaf(p.shape, p.value, trainable));
  return b;
}

MacroGraphState bind_state(Graph& g, const ConvLstmState& s) {
  return MacroGraphState{field_leaf(g, s.h), field_leaf(g, s.c)};
}

Tensor encode(Graph& g, const MacroBinding& b, Tensor u) {
  const ConvOpts down{Padding::periodic, 2};
  Tensor z = conv(u, b.t[kEnc1K], b.t[kEnc1B], down);
  z = tanh(z);
  return conv(z, b.t[kEnc2K], b.t[kEnc2B], down);
}

Tensor decode(Graph& g, const MacroBinding& b, Tensor latent) {
  Tensor z = upsample2_nearest(latent);
  z = conv(z, b.t[kDec1K], b.t[kDec1B], ConvOpts{Padding::periodic, 1});
  z = tanh(z);
  z = upsample2_nearest(z);
  return conv(z, b.t[kDec2K], b.t[kDec2B], ConvOpts{Padding::periodic, 1});
}

MacroGraphState convlstm_cell(Graph& g, const MacroBinding& b, Tensor x,
                              const MacroGraphState& state) {
  if (x.shape() != state.h.shape())
    throw ShapeError("convlstm_cell: input " + shape_str(x.shape()) +
                     " does not match hidden state " + shape_str(state.h.shape()));
  const ConvOpts same{Padding::periodic, 1};
  auto gate = [&](int xk, int xb, int hk) {
    return add(conv(x, b.t[xk], b.t[xb], same), conv(state.h, b.t[hk], std::nullopt, same));
  };
  Tensor in_gate = sigmoid(gate(kXiK, kXiB, kHiK));
  Tensor forget_gate = sigmoid(gate(kXfK, kXfB, kHfK));
  Tensor candidate = tanh(gate(kXcK, kXcB, kHcK));
  Tensor out_gate = sigmoid(gate(kXoK, kXoB, kHoK));
  Tensor c_next = add(elementwise_mul(forget_gate, state.c),
                      elementwise_mul(in_gate, candidate));
  Tensor h_next = elementwise_mul(out_gate, tanh(c_next));
  return MacroGraphState{h_next, c_next};
}

std::pair<Tensor, MacroGraphState> macro_step(Graph& g, const MacroBinding& b, Tensor u,
                                              const MacroGraphState& state) {
  Tensor latent = encode(g, b, u);
  MacroGraphState next = convlstm_cell(g, b, latent, state);
  Tensor u_next = add(u, decode(g, b, next.h));
  for (double v : u_next.values())
    if (!std::isfinite(v))
      throw DivergenceError("macro", -1, "macro step produced non-finite values");
  return {u_next, next};
}

std::pair<Field, ConvLstmState> macro_step(const MacroModel& m, const Field& u,
                                           const ConvLstmState& state) {
  Graph g(false);
  MacroBinding b = bind_macro(g, m, false);
  MacroGraphState gs = bind_state(g, state);
  auto [out, next] = macro_step(g, b, field_leaf(g, u), gs);
  return {field_from(out), ConvLstmState{field_from(next.h), field_from(next.c)}};
}

}  // namespace pimrl
