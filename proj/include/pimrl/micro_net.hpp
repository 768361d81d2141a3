#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pimrl/field.hpp"
#include "pimrl/param.hpp"
#include "pimrl/physics.hpp"
#include "pimrl/rng.hpp"
#include "pimrl/solvers.hpp"
#include "pimrl/tensor.hpp"

namespace pimrl {

struct MicroConfig {
  int n_fields = 1;
  int dims = 1;
  int n_layers = 3;      // parallel conv layers in the product block
  int n_channels = 16;   // channels per parallel layer
  int kernel_size = 5;
  double dt_micro = 0.01;
  bool physics_enabled = true;
};

// Fixed (never trained) finite-difference conv encoding the known PDE term.
struct PhysicsTerm {
  int field = 0;
  Stencil stencil;
  double coeff = 1.0;
};

// Product block plus physics conv, advanced by forward Euler at dt_micro.
struct MicroModel {
  MicroConfig cfg;
  std::vector<Param> params;  // l{i}.kernel, l{i}.bias ..., combiner

  std::vector<PhysicsTerm> terms;
  // Grouped conv kernel [n_fields, n_fields, k...] assembled from `terms`;
  // empty when physics is disabled.
  Shape physics_kernel_shape;
  std::vector<double> physics_kernel;

  std::vector<Param*> trainable();
  std::vector<const Param*> trainable() const;
};

// Known-term assignment per case: diffusion for burgers2d/fn2d/gs2d,
// -u_xxx for kdv. Weights start at N(0, 0.1/sqrt(fan_in)), biases at zero.
MicroModel make_micro_model(const PdeCase& pde, const MicroConfig& cfg, SplitMix64& rng);
std::vector<PhysicsTerm> physics_terms_for(const PdeCase& pde);

// Graph-bound weights for one forward/backward pass. Tensors are ordered
// like MicroModel::params so gradients map back by index.
struct MicroBinding {
  const MicroConfig* cfg = nullptr;
  std::vector<Tensor> layer_kernels;
  std::vector<Tensor> layer_biases;
  Tensor combiner;
  std::optional<Tensor> physics_kernel;
};

MicroBinding bind_micro(Graph& g, const MicroModel& m, bool trainable);

// F_hat: combiner-conv over the elementwise product of the parallel
// periodic convolutions.
Tensor pi_block(Graph& g, const MicroBinding& b, Tensor u);

// u + dt * (pi_block(u) + physics(u)); throws DivergenceError when the
// result is not finite.
Tensor micro_step(Graph& g, const MicroBinding& b, Tensor u);

// k_steps autoregressive applications; returns [u1..u_k].
std::vector<Tensor> micro_rollout(Graph& g, const MicroBinding& b, Tensor u0, int k_steps);

// Plain-field inference (fresh non-recording graph per call).
Field micro_step(const MicroModel& m, const Field& u);
std::vector<Field> micro_rollout(const MicroModel& m, const Field& u0, int k_steps);

}  // namespace pimrl
