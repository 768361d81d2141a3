#pragma once

#include <cstdint>
#include <vector>

#include "pimrl/macro_net.hpp"
#include "pimrl/micro_net.hpp"
#include "pimrl/solvers.hpp"

namespace pimrl {

// Architecture knobs that are not dictated by the PDE case.
struct ModelConfig {
  int n_layers = 3;
  int n_channels = 16;
  int micro_kernel = 5;
  int enc_channels = 16;
  int latent_channels = 32;
  bool physics_enabled = true;
};

struct PimrlModel {
  PdeCase pde;
  ModelConfig cfg;
  MicroModel micro;
  MacroModel macro;
};

PimrlModel make_model(const PdeCase& pde, const ModelConfig& cfg, std::uint64_t seed);

// Weights in a fixed order: micro params then macro params.
std::vector<Param*> all_params(PimrlModel& m);
std::vector<const Param*> all_params(const PimrlModel& m);

}  // namespace pimrl
