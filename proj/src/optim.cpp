#include "pimrl/optim.hpp"

#include <cmath>

#include "pimrl/errors.hpp"

namespace pimrl {

double lr_at(const LrSchedule& schedule, long epoch) {
  if (epoch < 0) throw ConfigError("lr_at: epoch must be >= 0");
  return schedule.lr0 * std::pow(schedule.gamma, static_cast<double>(epoch / schedule.step_size));
}

AdamState AdamState::init_for(const std::vector<Param*>& params) {
  AdamState s;
  s.m.reserve(params.size());
  s.v.reserve(params.size());
  for (const Param* p : params) {
    s.m.emplace_back(p->value.size(), 0.0);
    s.v.emplace_back(p->value.size(), 0.0);
  }
  return s;
}

bool adam_step(const std::vector<Param*>& params,
               const std::vector<std::vector<double>>& grads, AdamState& state, double lr) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw ShapeError("adam_step: parameter/gradient/state count mismatch");
  if (!(lr > 0.0) && lr != 0.0) throw ConfigError("adam_step: lr must be >= 0");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].size() != params[i]->value.size())
      throw ShapeError("adam_step: gradient size mismatch for '" + params[i]->name + "'");
    for (double gv : grads[i])
      if (!std::isfinite(gv)) return false;
  }

  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& m = state.m[i];
    auto& v = state.v[i];
    auto& w = params[i]->value;
    const auto& gr = grads[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * gr[j];
      v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * gr[j] * gr[j];
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      w[j] -= lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
  return true;
}

double clip_global_norm(std::vector<std::vector<double>>& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& g : grads)
    for (double v : g) sq += v * v;
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (auto& g : grads)
      for (double& v : g) v *= scale;
  }
  return norm;
}

}  // namespace pimrl
