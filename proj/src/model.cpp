#include "pimrl/model.hpp"

namespace pimrl {

PimrlModel make_model(const PdeCase& pde, const ModelConfig& cfg, std::uint64_t seed) {
  PimrlModel m;
  m.pde = pde;
  m.cfg = cfg;

  SplitMix64 root(seed);
  SplitMix64 micro_rng = root.split();
  SplitMix64 macro_rng = root.split();

  MicroConfig mc;
  mc.n_layers = cfg.n_layers;
  mc.n_channels = cfg.n_channels;
  mc.kernel_size = cfg.micro_kernel;
  mc.physics_enabled = cfg.physics_enabled;
  m.micro = make_micro_model(pde, mc, micro_rng);

  MacroConfig xc;
  xc.n_fields = pde.n_fields;
  xc.dims = pde.dims;
  xc.enc_channels = cfg.enc_channels;
  xc.latent_channels = cfg.latent_channels;
  m.macro = make_macro_model(xc, macro_rng);
  return m;
}

std::vector<Param*> all_params(PimrlModel& m) {
  std::vector<Param*> out = m.micro.trainable();
  for (Param* p : m.macro.trainable()) out.push_back(p);
  return out;
}

std::vector<const Param*> all_params(const PimrlModel& m) {
  std::vector<const Param*> out = m.micro.trainable();
  for (const Param* p : m.macro.trainable()) out.push_back(p);
  return out;
}

}  // namespace pimrl
