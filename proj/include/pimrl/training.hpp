#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pimrl/config.hpp"
#include "pimrl/data.hpp"
#include "pimrl/metrics.hpp"
#include "pimrl/optim.hpp"
#include "pimrl/scheduler.hpp"

namespace pimrl {

// Mean over frames of the per-frame elementwise MSE.
double mse_loss(const std::vector<Field>& pred, const std::vector<Field>& target);

using LogFn = std::function<void(const std::string&)>;

struct TrainResult {
  PimrlModel model;           // best-validation weights
  Checkpoint checkpoint;      // same weights plus optimizer state
  std::vector<double> train_loss;  // one entry per epoch
  std::vector<long> val_epochs;
  std::vector<double> val_loss;
  long skipped_batches = 0;
};

// Phase 1: only the micro module trains, on burst windows rolled
// autoregressively at dt_micro. Best-validation checkpoint wins.
TrainResult pretrain_micro(const std::vector<MultiScaleTrajectory>& train,
                           const std::vector<MultiScaleTrajectory>& val, const PimrlModel& init,
                           const TrainConfig& cfg, const LogFn& log = {});

// Phase 2: scheduler rollouts over macro windows; micro stays trainable,
// loss covers only emitted frames. sched.mode selects full PIMRL or the
// macro-only baseline.
TrainResult train_joint(const std::vector<MultiScaleTrajectory>& train,
                        const std::vector<MultiScaleTrajectory>& val, const PimrlModel& init,
                        const ScheduleConfig& sched, const TrainConfig& cfg, const LogFn& log = {});

struct EvalResult {
  std::vector<std::uint64_t> seeds;
  std::vector<MetricsReport> per_trajectory;
  double rmse_mean = 0.0;
  double mae_mean = 0.0;
  double hct_mean = 0.0;
};

// Rolls the model from each test trajectory's first frame across its
// horizon and scores emitted frames against the matching macro frames.
EvalResult evaluate(const std::vector<MultiScaleTrajectory>& test, const PimrlModel& model,
                    const ScheduleConfig& sched, int horizon_frames = 0);

nlohmann::json report_to_json(const MetricsReport& r);
MetricsReport report_from_json(const nlohmann::json& j);
nlohmann::json eval_to_json(const EvalResult& r, const ScheduleConfig& sched);

// ---- checkpoint glue ----

Checkpoint make_checkpoint(const PimrlModel& model, const std::vector<Param*>& trained,
                           const AdamState& opt, long epoch, double best_val,
                           nlohmann::json config);

// Copies entries into matching model params by name; returns the number
// loaded. require_all makes a missing model param an error.
int load_model_weights(PimrlModel& model, const Checkpoint& ckpt, bool require_all);

// Rebuilds case + architecture from the checkpoint's config snapshot and
// loads the stored weights.
PimrlModel model_from_checkpoint(const Checkpoint& ckpt);

}  // namespace pimrl
