#pragma once

#include <cstdint>
#include <vector>

#include "pimrl/param.hpp"

namespace pimrl {

// Step-decay learning rate: lr(e) = lr0 * gamma^floor(e / step_size).
struct LrSchedule {
  double lr0 = 5e-3;
  int step_size = 200;
  double gamma = 0.98;
};

double lr_at(const LrSchedule& schedule, long epoch);

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long t = 0;
  std::vector<std::vector<double>> m;  // per-parameter, shapes match params
  std::vector<std::vector<double>> v;

  static AdamState init_for(const std::vector<Param*>& params);
};

// One bias-corrected Adam step over all parameters. Returns false (and
// mutates nothing, not even t) when any gradient entry is non-finite so
// the caller can skip the batch.
bool adam_step(const std::vector<Param*>& params,
               const std::vector<std::vector<double>>& grads, AdamState& state, double lr);

// Scales grads so the global L2 norm is at most max_norm; returns the norm
// observed before clipping.
double clip_global_norm(std::vector<std::vector<double>>& grads, double max_norm);

}  // namespace pimrl
