#pragma once

#include <utility>
#include <vector>

#include "pimrl/field.hpp"
#include "pimrl/param.hpp"
#include "pimrl/rng.hpp"
#include "pimrl/tensor.hpp"

namespace pimrl {

struct MacroConfig {
  int n_fields = 2;
  int dims = 2;
  int enc_channels = 16;     // after the first stride-2 conv
  int latent_channels = 32;  // after the second stride-2 conv
  int kernel_size = 3;       // encoder/decoder/gate convs
};

struct ConvLstmState {
  Field h, c;  // identical shapes, fixed per model
};

// Encoder, eight gate convolutions, decoder. Spatial extents must be
// divisible by 4 (two stride-2 stages).
struct MacroModel {
  MacroConfig cfg;
  std::vector<Param> params;

  std::vector<Param*> trainable();
  std::vector<const Param*> trainable() const;
};

MacroModel make_macro_model(const MacroConfig& cfg, SplitMix64& rng);

// Zero recurrent state for a grid with the given spatial extents.
ConvLstmState initial_state(const MacroModel& m, const std::vector<int>& extents);

struct MacroBinding {
  const MacroConfig* cfg = nullptr;
  std::vector<Tensor> t;  // aligned with MacroModel::params
};

struct MacroGraphState {
  Tensor h, c;
};

MacroBinding bind_macro(Graph& g, const MacroModel& m, bool trainable);
MacroGraphState bind_state(Graph& g, const ConvLstmState& s);

Tensor encode(Graph& g, const MacroBinding& b, Tensor u);
Tensor decode(Graph& g, const MacroBinding& b, Tensor latent);
MacroGraphState convlstm_cell(Graph& g, const MacroBinding& b, Tensor x,
                              const MacroGraphState& state);

// u_next = u + decode(h') with (h', c') = cell(encode(u), state).
std::pair<Tensor, MacroGraphState> macro_step(Graph& g, const MacroBinding& b, Tensor u,
                                              const MacroGraphState& state);

// Plain-field inference.
std::pair<Field, ConvLstmState> macro_step(const MacroModel& m, const Field& u,
                                           const ConvLstmState& state);

}  // namespace pimrl
