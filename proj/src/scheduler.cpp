#include "pimrl/scheduler.hpp"

#include "pimrl/errors.hpp"
#include "pimrl/field_tensor.hpp"

namespace pimrl {

RolloutMode parse_rollout_mode(const std::string& s) {
  if (s == "full") return RolloutMode::full;
  if (s == "micro-only" || s == "micro_only") return RolloutMode::micro_only;
  if (s == "macro-only" || s == "macro_only") return RolloutMode::macro_only;
  throw ConfigError("unknown rollout mode '" + s + "' (expected full|micro-only|macro-only)");
}

std::string rollout_mode_str(RolloutMode m) {
  switch (m) {
    case RolloutMode::full: return "full";
    case RolloutMode::micro_only: return "micro-only";
    case RolloutMode::macro_only: return "macro-only";
  }
  return "?";
}

void ScheduleConfig::validate() const {
  if (k < 1) throw ConfigError("schedule: k must be >= 1");
  if (!(dt_micro > 0.0)) throw ConfigError("schedule: dt_micro must be > 0");
  if (n_corrected < 0 || n_free < 0)
    throw ConfigError("schedule: n_corrected and n_free must be >= 0");
  if (mode == RolloutMode::full && n_corrected == 0 && n_free == 0)
    throw ConfigError("schedule: n_corrected and n_free cannot both be 0");
}

std::vector<double> RolloutRecord::times() const {
  std::vector<double> out;
  out.reserve(step_indices.size());
  for (long s : step_indices) out.push_back(s * dt_macro);
  return out;
}

std::pair<Field, ConvLstmState> combined_step(const PimrlModel& m, const Field& u,
                                              const ConvLstmState& state,
                                              const ScheduleConfig& cfg) {
  Graph g(false);
  MicroBinding mb = bind_micro(g, m.micro, false);
  MacroBinding xb = bind_macro(g, m.macro, false);
  Tensor ut = field_leaf(g, u);
  Tensor v = cfg.no_connect ? ut : micro_rollout(g, mb, ut, cfg.k).back();
  auto [out, next] = macro_step(g, xb, v, bind_state(g, state));
  return {field_from(out), ConvLstmState{field_from(next.h), field_from(next.c)}};
}

CycleResult pimrl_cycle(const PimrlModel& m, const Field& u, const ConvLstmState& state,
                        const ScheduleConfig& cfg) {
  cfg.validate();
  CycleResult res;
  res.record.dt_macro = cfg.dt_macro();
  res.final_u = u;
  res.final_state = state;
  res.final_step = 0;
  for (int i = 0; i < cfg.n_corrected; ++i) {
    try {
      auto [next, st] = combined_step(m, res.final_u, res.final_state, cfg);
      res.final_u = std::move(next);
      res.final_state = std::move(st);
    } catch (const DivergenceError& e) {
      throw DivergenceError(e.phase, res.final_step,
                            "combined step " + std::to_string(i) + " diverged (" + e.what() + ")");
    }
    res.final_step += 2;
    res.record.step_indices.push_back(res.final_step);
    res.record.frames.push_back(res.final_u);
    res.record.provenance.push_back(Provenance::macro_after_micro);
  }
  for (int i = 0; i < cfg.n_free; ++i) {
    try {
      auto [next, st] = macro_step(m.macro, res.final_u, res.final_state);
      res.final_u = std::move(next);
      res.final_state = std::move(st);
    } catch (const DivergenceError& e) {
      throw DivergenceError(e.phase, res.final_step,
                            "free macro step " + std::to_string(i) + " diverged (" + e.what() + ")");
    }
    res.final_step += 1;
    res.record.step_indices.push_back(res.final_step);
    res.record.frames.push_back(res.final_u);
    res.record.provenance.push_back(Provenance::macro_free);
  }
  return res;
}

RolloutRecord rollout(const PimrlModel& m, const Field& u0, int horizon_frames,
                      const ScheduleConfig& cfg) {
  cfg.validate();
  if (horizon_frames < 1) throw ConfigError("rollout: horizon_frames must be >= 1");
  RolloutRecord rec;
  rec.dt_macro = cfg.dt_macro();

  if (cfg.mode == RolloutMode::micro_only) {
    Field u = u0;
    for (int f = 0; f < horizon_frames; ++f) {
      u = micro_rollout(m.micro, u, cfg.k).back();
      rec.step_indices.push_back(f + 1);
      rec.frames.push_back(u);
      rec.provenance.push_back(Provenance::micro_direct);
    }
    return rec;
  }
  if (cfg.mode == RolloutMode::macro_only) {
    Field u = u0;
    ConvLstmState state = initial_state(m.macro, u0.extents);
    for (int f = 0; f < horizon_frames; ++f) {
      auto [next, st] = macro_step(m.macro, u, state);
      u = std::move(next);
      state = std::move(st);
      rec.step_indices.push_back(f + 1);
      rec.frames.push_back(u);
      rec.provenance.push_back(Provenance::macro_free);
    }
    return rec;
  }

  Field u = u0;
  ConvLstmState state = initial_state(m.macro, u0.extents);
  long step = 0;
  long cycle = 0;
  while (static_cast<int>(rec.frames.size()) < horizon_frames) {
    CycleResult cr;
    try {
      cr = pimrl_cycle(m, u, state, cfg);
    } catch (const DivergenceError& e) {
      throw DivergenceError(e.phase, cycle,
                            "rollout diverged in cycle " + std::to_string(cycle) + " (" +
                                e.what() + ")");
    }
    for (std::size_t i = 0; i < cr.record.frames.size(); ++i) {
      if (static_cast<int>(rec.frames.size()) >= horizon_frames) break;
      rec.step_indices.push_back(step + cr.record.step_indices[i]);
      rec.frames.push_back(cr.record.frames[i]);
      rec.provenance.push_back(cr.record.provenance[i]);
    }
    u = cr.final_u;
    state = cr.final_state;
    step += cr.final_step;
    ++cycle;
  }
  return rec;
}

PimrlBinding bind_model(Graph& g, const PimrlModel& m, bool train_micro, bool train_macro) {
  return PimrlBinding{bind_micro(g, m.micro, train_micro), bind_macro(g, m.macro, train_macro)};
}

std::vector<EmittedTensor> rollout_graph(Graph& g, const PimrlBinding& b, Tensor u0,
                                         int horizon_frames, const ScheduleConfig& cfg) {
  cfg.validate();
  if (horizon_frames < 1) throw ConfigError("rollout_graph: horizon_frames must be >= 1");
  std::vector<EmittedTensor> out;
  out.reserve(static_cast<std::size_t>(horizon_frames));

  if (cfg.mode == RolloutMode::micro_only) {
    Tensor u = u0;
    for (int f = 0; f < horizon_frames; ++f) {
      u = micro_rollout(g, b.micro, u, cfg.k).back();
      out.push_back({u, f + 1, Provenance::micro_direct});
    }
    return out;
  }

  const Shape& us = u0.shape();
  Field h0(b.macro.cfg->latent_channels, [&] {
    std::vector<int> ext(us.begin() + 1, us.end());
    for (int& e : ext) {
      if (e % 4 != 0)
        throw ConfigError("rollout_graph: spatial extent must be divisible by 4");
      e /= 4;
    }
    return ext;
  }());
  MacroGraphState state{field_leaf(g, h0), field_leaf(g, h0)};

  if (cfg.mode == RolloutMode::macro_only) {
    Tensor u = u0;
    for (int f = 0; f < horizon_frames; ++f) {
      auto [next, st] = macro_step(g, b.macro, u, state);
      u = next;
      state = st;
      out.push_back({u, f + 1, Provenance::macro_free});
    }
    return out;
  }

  Tensor u = u0;
  long step = 0;
  while (static_cast<int>(out.size()) < horizon_frames) {
    for (int i = 0; i < cfg.n_corrected && static_cast<int>(out.size()) < horizon_frames; ++i) {
      Tensor v = cfg.no_connect ? u : micro_rollout(g, b.micro, u, cfg.k).back();
      auto [next, st] = macro_step(g, b.macro, v, state);
      u = next;
      state = st;
      step += 2;
      out.push_back({u, step, Provenance::macro_after_micro});
    }
    for (int i = 0; i < cfg.n_free && static_cast<int>(out.size()) < horizon_frames; ++i) {
      auto [next, st] = macro_step(g, b.macro, u, state);
      u = next;
      state = st;
      step += 1;
      out.push_back({u, step, Provenance::macro_free});
    }
  }
  return out;
}

}  // namespace pimrl
