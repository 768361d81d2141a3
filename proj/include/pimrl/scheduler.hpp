#pragma once

#include <utility>
#include <vector>

#include "pimrl/model.hpp"

namespace pimrl {

enum class RolloutMode { full, micro_only, macro_only };

RolloutMode parse_rollout_mode(const std::string& s);
std::string rollout_mode_str(RolloutMode m);

// Governs the alternating rollout: n_corrected combined steps (micro
// k-rollout feeding one macro step, advancing 2*dt_macro each) followed by
// n_free macro-only steps (dt_macro each).
struct ScheduleConfig {
  int k = 15;
  double dt_micro = 0.01;
  int n_corrected = 2;
  int n_free = 4;
  bool no_connect = false;
  bool no_physics_conv = false;
  RolloutMode mode = RolloutMode::full;

  double dt_macro() const { return k * dt_micro; }
  double zeta() const { return 1.0 / k; }
  void validate() const;
};

enum class Provenance { macro_after_micro, macro_free, micro_direct };

// Emitted frames with their time bookkeeping in integer multiples of
// dt_macro (exact by construction).
struct RolloutRecord {
  std::vector<long> step_indices;  // multiples of dt_macro since rollout start
  std::vector<Field> frames;
  std::vector<Provenance> provenance;
  double dt_macro = 0.0;

  std::vector<double> times() const;
};

// One combined step: v = micro^k(u) (discarded when no_connect), then the
// macro step from v. Emits the macro output at u's time + 2*dt_macro.
std::pair<Field, ConvLstmState> combined_step(const PimrlModel& m, const Field& u,
                                              const ConvLstmState& state,
                                              const ScheduleConfig& cfg);

struct CycleResult {
  RolloutRecord record;
  Field final_u;
  ConvLstmState final_state;
  long final_step = 0;  // in dt_macro units since cycle start
};

// n_corrected combined steps then n_free macro-only steps, emitting one
// frame per step.
CycleResult pimrl_cycle(const PimrlModel& m, const Field& u, const ConvLstmState& state,
                        const ScheduleConfig& cfg);

// Repeats cycles (recurrent state persists) until horizon_frames frames are
// emitted, then truncates. micro_only/macro_only run a single module
// autoregressively and emit at every dt_macro.
RolloutRecord rollout(const PimrlModel& m, const Field& u0, int horizon_frames,
                      const ScheduleConfig& cfg);

// ---- graph-bound variants for training ----

struct PimrlBinding {
  MicroBinding micro;
  MacroBinding macro;
};

PimrlBinding bind_model(Graph& g, const PimrlModel& m, bool train_micro, bool train_macro);

struct EmittedTensor {
  Tensor frame;
  long step_index = 0;
  Provenance prov = Provenance::macro_free;
};

// Rollout with gradients flowing through the whole chain. The recurrent
// state starts at zero and persists across cycles within the rollout.
std::vector<EmittedTensor> rollout_graph(Graph& g, const PimrlBinding& b, Tensor u0,
                                         int horizon_frames, const ScheduleConfig& cfg);

}  // namespace pimrl
