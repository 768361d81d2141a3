#pragma once

#include <set>
#include <string>

#include <json.hpp>

#include "pimrl/model.hpp"
#include "pimrl/scheduler.hpp"

namespace pimrl {

// Training hyperparameters for either phase.
struct TrainConfig {
  enum class Phase { pretrain, joint };
  Phase phase = Phase::pretrain;
  int epochs = 1000;
  int batches_per_epoch = 4;  // B in the rollout loss
  int batch_size = 4;         // N in the rollout loss
  int rollout_frames = 0;     // pretrain steps per sample; 0 = whole burst
  double lr0 = 1e-3;          // pretrain default; joint uses 5e-3
  int lr_step = 200;
  double lr_gamma = 0.98;
  std::uint64_t seed = 0;
  bool no_pretrain = false;
  bool no_connect = false;
  bool no_physics_conv = false;
  int val_interval = 10;  // epochs between validation passes
  int max_cycles = 4;     // joint rollout-length curriculum ceiling
  int val_frames = 12;    // emitted frames in the validation rollout
  int threads = 1;        // batch-element parallelism
  double clip_norm = 1.0;

  LrSchedule schedule() const { return LrSchedule{lr0, lr_step, lr_gamma}; }
};

void reject_unknown_keys(const nlohmann::json& obj, const std::set<std::string>& known,
                         const std::string& where);

nlohmann::json to_json(const PdeCase& c);
PdeCase pde_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ModelConfig& c);
ModelConfig model_cfg_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ScheduleConfig& c);
ScheduleConfig sched_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TrainConfig& c);
TrainConfig train_cfg_from_json(const nlohmann::json& j);

}  // namespace pimrl
