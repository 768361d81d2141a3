#include "pimrl/training.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "pimrl/errors.hpp"
#include "pimrl/field_tensor.hpp"

namespace pimrl {

using nlohmann::json;

double mse_loss(const std::vector<Field>& pred, const std::vector<Field>& target) {
  if (pred.size() != target.size() || pred.empty())
    throw ShapeError("mse_loss: sequences misaligned (" + std::to_string(pred.size()) + " vs " +
                     std::to_string(target.size()) + " frames)");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    require_same_shape(pred[i], target[i], "mse_loss");
    double frame = 0.0;
    for (std::size_t j = 0; j < pred[i].data.size(); ++j) {
      const double d = pred[i].data[j] - target[i].data[j];
      frame += d * d;
    }
    acc += frame / static_cast<double>(pred[i].data.size());
  }
  return acc / static_cast<double>(pred.size());
}

namespace {

// Graph-side mean over per-frame mse nodes.
Tensor sequence_mse(Graph& g, const std::vector<Tensor>& pred,
                    const std::vector<const Field*>& target) {
  if (pred.size() != target.size() || pred.empty())
    throw ShapeError("sequence_mse: sequences misaligned");
  Tensor acc;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    Tensor t = mse(pred[i], field_leaf(g, *target[i]));
    acc = (i == 0) ? t : add(acc, t);
  }
  return scalar_mul(acc, 1.0 / static_cast<double>(pred.size()));
}

std::vector<Tensor> micro_binding_order(const MicroBinding& b) {
  std::vector<Tensor> out;
  for (std::size_t l = 0; l < b.layer_kernels.size(); ++l) {
    out.push_back(b.layer_kernels[l]);
    out.push_back(b.layer_biases[l]);
  }
  out.push_back(b.combiner);
  return out;
}

std::vector<Tensor> model_binding_order(const PimrlBinding& b) {
  std::vector<Tensor> out = micro_binding_order(b.micro);
  for (const Tensor& t : b.macro.t) out.push_back(t);
  return out;
}

std::vector<std::vector<double>> extract_grads(const std::vector<Tensor>& leaves) {
  std::vector<std::vector<double>> out;
  out.reserve(leaves.size());
  for (const Tensor& t : leaves) out.push_back(t.grad());
  return out;
}

struct SampleOut {
  bool ok = false;
  double loss = 0.0;
  std::vector<std::vector<double>> grads;
};

// Runs fn(i) for i in [0, n); sample order of the reduction is fixed by the
// output slots, so thread count never changes results.
void run_batch(int n, int threads, const std::function<SampleOut(int)>& fn,
               std::vector<SampleOut>& out) {
  out.assign(static_cast<std::size_t>(n), SampleOut{});
  const int workers = std::min(std::max(threads, 1), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        out[static_cast<std::size_t>(i)] = fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

// Accumulates per-sample grads (index order) into a batch mean.
bool reduce_batch(const std::vector<SampleOut>& outs, std::vector<std::vector<double>>& grads,
                  double& loss) {
  int ok_count = 0;
  for (const SampleOut& s : outs)
    if (s.ok) ++ok_count;
  if (ok_count != static_cast<int>(outs.size())) return false;  // divergence: skip batch
  loss = 0.0;
  const double inv = 1.0 / static_cast<double>(outs.size());
  for (std::size_t p = 0; p < grads.size(); ++p)
    std::fill(grads[p].begin(), grads[p].end(), 0.0);
  for (const SampleOut& s : outs) {
    loss += s.loss * inv;
    for (std::size_t p = 0; p < grads.size(); ++p)
      for (std::size_t j = 0; j < grads[p].size(); ++j) grads[p][j] += s.grads[p][j] * inv;
  }
  return true;
}

struct BestTracker {
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> weights;

  void consider(double val, const std::vector<Param*>& params) {
    if (val < best) {
      best = val;
      weights.clear();
      weights.reserve(params.size());
      for (const Param* p : params) weights.push_back(p->value);
    }
  }
  void restore(const std::vector<Param*>& params) const {
    if (weights.empty()) return;
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = weights[i];
  }
};

// ---- pretraining over burst windows ----

struct BurstWindow {
  const std::vector<Field>* frames;
};

std::vector<BurstWindow> collect_bursts(const std::vector<MultiScaleTrajectory>& set) {
  std::vector<BurstWindow> out;
  for (const MultiScaleTrajectory& t : set)
    for (const Burst& b : t.bursts)
      if (b.frames.size() >= 2) out.push_back(BurstWindow{&b.frames});
  return out;
}

SampleOut pretrain_sample(const PimrlModel& model, const std::vector<Field>& frames, int start,
                          int steps) {
  SampleOut s;
  Graph g;
  MicroBinding b = bind_micro(g, model.micro, true);
  Tensor u0 = field_leaf(g, frames[static_cast<std::size_t>(start)], false);
  std::vector<Tensor> preds;
  try {
    preds = micro_rollout(g, b, u0, steps);
  } catch (const DivergenceError&) {
    return s;  // !ok -> batch skipped
  }
  std::vector<const Field*> targets;
  targets.reserve(static_cast<std::size_t>(steps));
  for (int i = 1; i <= steps; ++i)
    targets.push_back(&frames[static_cast<std::size_t>(start + i)]);
  Tensor loss = sequence_mse(g, preds, targets);
  g.backward(loss);
  s.ok = true;
  s.loss = loss.values()[0];
  s.grads = extract_grads(micro_binding_order(b));
  return s;
}

double pretrain_validation(const PimrlModel& model, const std::vector<BurstWindow>& bursts,
                           int steps_cap) {
  double acc = 0.0;
  int count = 0;
  for (const BurstWindow& bw : bursts) {
    const int steps = std::min<int>(static_cast<int>(bw.frames->size()) - 1,
                                    steps_cap > 0 ? steps_cap : static_cast<int>(bw.frames->size()) - 1);
    std::vector<Field> preds;
    try {
      preds = micro_rollout(model.micro, (*bw.frames)[0], steps);
    } catch (const DivergenceError&) {
      return std::numeric_limits<double>::infinity();
    }
    std::vector<Field> targets(bw.frames->begin() + 1, bw.frames->begin() + 1 + steps);
    acc += mse_loss(preds, targets);
    ++count;
  }
  return count > 0 ? acc / count : std::numeric_limits<double>::infinity();
}

json run_config_json(const PimrlModel& model, const ScheduleConfig* sched,
                     const TrainConfig& cfg) {
  json j = {{"case", to_json(model.pde)}, {"model", to_json(model.cfg)}, {"train", to_json(cfg)}};
  if (sched) j["schedule"] = to_json(*sched);
  return j;
}

}  // namespace

Checkpoint make_checkpoint(const PimrlModel& model, const std::vector<Param*>& trained,
                           const AdamState& opt, long epoch, double best_val, json config) {
  Checkpoint ckpt;
  ckpt.config = std::move(config);
  ckpt.epoch = epoch;
  ckpt.adam_t = opt.t;
  ckpt.best_val_loss = best_val;
  for (const Param* p : trained) ckpt.entries.push_back(*p);
  for (std::size_t i = 0; i < trained.size(); ++i)
    ckpt.entries.emplace_back("adam.m." + trained[i]->name, trained[i]->shape, opt.m[i]);
  for (std::size_t i = 0; i < trained.size(); ++i)
    ckpt.entries.emplace_back("adam.v." + trained[i]->name, trained[i]->shape, opt.v[i]);
  return ckpt;
}

int load_model_weights(PimrlModel& model, const Checkpoint& ckpt, bool require_all) {
  int loaded = 0;
  for (Param* p : all_params(model)) {
    const Param* src = ckpt.find(p->name);
    if (!src) {
      if (require_all) throw ConfigError("checkpoint is missing parameter '" + p->name + "'");
      continue;
    }
    if (src->shape != p->shape)
      throw ConfigError("checkpoint parameter '" + p->name + "' has shape " +
                        shape_str(src->shape) + ", model expects " + shape_str(p->shape));
    p->value = src->value;
    ++loaded;
  }
  return loaded;
}

PimrlModel model_from_checkpoint(const Checkpoint& ckpt) {
  const PdeCase pde = pde_from_json(ckpt.config.at("case"));
  const ModelConfig mc = model_cfg_from_json(ckpt.config.at("model"));
  PimrlModel model = make_model(pde, mc, 0);
  load_model_weights(model, ckpt, false);
  return model;
}

TrainResult pretrain_micro(const std::vector<MultiScaleTrajectory>& train,
                           const std::vector<MultiScaleTrajectory>& val, const PimrlModel& init,
                           const TrainConfig& cfg, const LogFn& log) {
  const std::vector<BurstWindow> train_bursts = collect_bursts(train);
  if (train_bursts.empty()) throw ConfigError("pretrain: dataset contains no micro bursts");
  const std::vector<BurstWindow> val_bursts = collect_bursts(val);

  TrainResult res;
  res.model = init;
  std::vector<Param*> params = res.model.micro.trainable();
  AdamState opt = AdamState::init_for(params);
  SplitMix64 rng(cfg.seed);
  BestTracker best;
  const LrSchedule sched = cfg.schedule();

  std::vector<std::vector<double>> grads;
  for (const Param* p : params) grads.emplace_back(p->value.size(), 0.0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_at(sched, epoch);
    double epoch_loss = 0.0;
    int counted = 0;
    for (int batch = 0; batch < cfg.batches_per_epoch; ++batch) {
      struct Pick {
        const std::vector<Field>* frames;
        int start, steps;
      };
      std::vector<Pick> picks;
      picks.reserve(static_cast<std::size_t>(cfg.batch_size));
      for (int s = 0; s < cfg.batch_size; ++s) {
        const BurstWindow& bw =
            train_bursts[rng.below(static_cast<std::uint64_t>(train_bursts.size()))];
        const int max_steps = static_cast<int>(bw.frames->size()) - 1;
        int steps = cfg.rollout_frames > 0 ? std::min(cfg.rollout_frames, max_steps) : max_steps;
        const int start =
            (max_steps - steps > 0)
                ? static_cast<int>(rng.below(static_cast<std::uint64_t>(max_steps - steps + 1)))
                : 0;
        picks.push_back({bw.frames, start, steps});
      }
      std::vector<SampleOut> outs;
      run_batch(
          static_cast<int>(picks.size()), cfg.threads,
          [&](int i) {
            const Pick& p = picks[static_cast<std::size_t>(i)];
            return pretrain_sample(res.model, *p.frames, p.start, p.steps);
          },
          outs);
      double batch_loss = 0.0;
      if (!reduce_batch(outs, grads, batch_loss)) {
        ++res.skipped_batches;
        if (log) log("pretrain epoch " + std::to_string(epoch) + ": batch skipped (divergence)");
        continue;
      }
      clip_global_norm(grads, cfg.clip_norm);
      if (!adam_step(params, grads, opt, lr)) {
        ++res.skipped_batches;
        if (log) log("pretrain epoch " + std::to_string(epoch) + ": batch skipped (bad grads)");
        continue;
      }
      epoch_loss += batch_loss;
      ++counted;
    }
    res.train_loss.push_back(counted > 0 ? epoch_loss / counted
                                         : std::numeric_limits<double>::quiet_NaN());
    const bool last = (epoch == cfg.epochs - 1);
    if (!val_bursts.empty() && (last || (cfg.val_interval > 0 && epoch % cfg.val_interval == 0))) {
      const double v = pretrain_validation(res.model, val_bursts, cfg.rollout_frames);
      res.val_epochs.push_back(epoch);
      res.val_loss.push_back(v);
      best.consider(v, params);
      if (log)
        log("pretrain epoch " + std::to_string(epoch) + " lr " + std::to_string(lr) + " train " +
            std::to_string(res.train_loss.back()) + " val " + std::to_string(v));
    }
  }
  best.restore(params);
  const double best_val =
      res.val_loss.empty() ? std::numeric_limits<double>::quiet_NaN() : best.best;
  res.checkpoint = make_checkpoint(res.model, params, opt, cfg.epochs, best_val,
                                   run_config_json(res.model, nullptr, cfg));
  return res;
}

// ---------------------------------------------------------------------------

namespace {

// Emitted-frame span of one cycle in macro steps.
long cycle_span(const ScheduleConfig& s) { return 2L * s.n_corrected + s.n_free; }
int cycle_frames(const ScheduleConfig& s) { return s.n_corrected + s.n_free; }

// Largest emitted-frame count whose last emission stays at or before
// max_step (counted in dt_macro units).
int frames_within(const ScheduleConfig& cfg, long max_step) {
  if (max_step < 1) return 0;
  if (cfg.mode != RolloutMode::full) return static_cast<int>(max_step);
  long step = 0;
  int frames = 0;
  for (;;) {
    for (int i = 0; i < cfg.n_corrected; ++i) {
      step += 2;
      if (step > max_step) return frames;
      ++frames;
    }
    for (int i = 0; i < cfg.n_free; ++i) {
      step += 1;
      if (step > max_step) return frames;
      ++frames;
    }
  }
}

int curriculum_cycles(const TrainConfig& cfg, int epoch) {
  if (cfg.epochs <= 0) return 1;
  const int third = epoch * 3 / cfg.epochs;  // 0, 1, 2
  return std::min(cfg.max_cycles, 1 << third);
}

struct JointPick {
  const MultiScaleTrajectory* traj;
  long start;
  int cycles;
};

SampleOut joint_sample(const PimrlModel& model, const ScheduleConfig& sched,
                       const JointPick& pick) {
  SampleOut s;
  Graph g;
  PimrlBinding b = bind_model(g, model, true, true);
  Tensor u0 =
      field_leaf(g, pick.traj->macro_frames[static_cast<std::size_t>(pick.start)], false);
  const int horizon = pick.cycles * cycle_frames(sched);
  std::vector<EmittedTensor> emitted;
  try {
    emitted = rollout_graph(g, b, u0, horizon, sched);
  } catch (const DivergenceError&) {
    return s;
  }
  std::vector<Tensor> preds;
  std::vector<const Field*> targets;
  for (const EmittedTensor& e : emitted) {
    preds.push_back(e.frame);
    targets.push_back(&pick.traj->macro_frames[static_cast<std::size_t>(pick.start + e.step_index)]);
  }
  Tensor loss = sequence_mse(g, preds, targets);
  g.backward(loss);
  s.ok = true;
  s.loss = loss.values()[0];
  s.grads = extract_grads(model_binding_order(b));
  return s;
}

double joint_validation(const PimrlModel& model, const std::vector<MultiScaleTrajectory>& val,
                        const ScheduleConfig& sched, int val_frames) {
  double acc = 0.0;
  int count = 0;
  for (const MultiScaleTrajectory& t : val) {
    const long max_step = static_cast<long>(t.macro_frames.size()) - 1;
    const int frames = std::min(frames_within(sched, max_step), val_frames);
    if (frames < 1) continue;
    RolloutRecord rec;
    try {
      rec = rollout(model, t.macro_frames[0], frames, sched);
    } catch (const DivergenceError&) {
      return std::numeric_limits<double>::infinity();
    }
    std::vector<Field> truth;
    for (long idx : rec.step_indices)
      truth.push_back(t.macro_frames[static_cast<std::size_t>(idx)]);
    acc += mse_loss(rec.frames, truth);
    ++count;
  }
  return count > 0 ? acc / count : std::numeric_limits<double>::infinity();
}

}  // namespace

TrainResult train_joint(const std::vector<MultiScaleTrajectory>& train,
                        const std::vector<MultiScaleTrajectory>& val, const PimrlModel& init,
                        const ScheduleConfig& sched_in, const TrainConfig& cfg, const LogFn& log) {
  ScheduleConfig sched = sched_in;
  sched.no_connect = cfg.no_connect || sched.no_connect;
  sched.validate();
  if (train.empty()) throw ConfigError("train_joint: empty training set");

  // Longest window the data supports.
  long min_len = std::numeric_limits<long>::max();
  for (const MultiScaleTrajectory& t : train)
    min_len = std::min(min_len, static_cast<long>(t.macro_frames.size()));
  const long span1 = (sched.mode == RolloutMode::full) ? cycle_span(sched)
                                                       : static_cast<long>(cycle_frames(sched));
  if (min_len - 1 < span1)
    throw ConfigError("train_joint: trajectories shorter than one cycle emission (need " +
                      std::to_string(span1 + 1) + " frames, have " + std::to_string(min_len) +
                      ")");
  const int max_cycles_data = static_cast<int>((min_len - 1) / span1);

  TrainResult res;
  res.model = init;
  std::vector<Param*> params = all_params(res.model);
  AdamState opt = AdamState::init_for(params);
  SplitMix64 rng(cfg.seed);
  BestTracker best;
  const LrSchedule lrs = cfg.schedule();

  // Physics kernels must never move; remembered for the paranoia check.
  const std::vector<double> physics_before = res.model.micro.physics_kernel;

  std::vector<std::vector<double>> grads;
  for (const Param* p : params) grads.emplace_back(p->value.size(), 0.0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_at(lrs, epoch);
    const int cycles = std::min(curriculum_cycles(cfg, epoch), max_cycles_data);
    const long span = span1 * cycles;
    double epoch_loss = 0.0;
    int counted = 0;
    for (int batch = 0; batch < cfg.batches_per_epoch; ++batch) {
      std::vector<JointPick> picks;
      picks.reserve(static_cast<std::size_t>(cfg.batch_size));
      for (int s = 0; s < cfg.batch_size; ++s) {
        const MultiScaleTrajectory& t =
            train[rng.below(static_cast<std::uint64_t>(train.size()))];
        const long max_start = static_cast<long>(t.macro_frames.size()) - 1 - span;
        const long start =
            max_start > 0 ? static_cast<long>(rng.below(static_cast<std::uint64_t>(max_start + 1)))
                          : 0;
        picks.push_back({&t, start, cycles});
      }
      std::vector<SampleOut> outs;
      run_batch(
          static_cast<int>(picks.size()), cfg.threads,
          [&](int i) { return joint_sample(res.model, sched, picks[static_cast<std::size_t>(i)]); },
          outs);
      double batch_loss = 0.0;
      if (!reduce_batch(outs, grads, batch_loss)) {
        ++res.skipped_batches;
        if (log) log("joint epoch " + std::to_string(epoch) + ": batch skipped (divergence)");
        continue;
      }
      clip_global_norm(grads, cfg.clip_norm);
      if (!adam_step(params, grads, opt, lr)) {
        ++res.skipped_batches;
        if (log) log("joint epoch " + std::to_string(epoch) + ": batch skipped (bad grads)");
        continue;
      }
      epoch_loss += batch_loss;
      ++counted;
    }
    res.train_loss.push_back(counted > 0 ? epoch_loss / counted
                                         : std::numeric_limits<double>::quiet_NaN());
    const bool last = (epoch == cfg.epochs - 1);
    if (!val.empty() && (last || (cfg.val_interval > 0 && epoch % cfg.val_interval == 0))) {
      const double v = joint_validation(res.model, val, sched, cfg.val_frames);
      res.val_epochs.push_back(epoch);
      res.val_loss.push_back(v);
      best.consider(v, params);
      if (log)
        log("joint epoch " + std::to_string(epoch) + " cycles " + std::to_string(cycles) + " lr " +
            std::to_string(lr) + " train " + std::to_string(res.train_loss.back()) + " val " +
            std::to_string(v));
    }
  }
  best.restore(params);
  if (res.model.micro.physics_kernel != physics_before)
    throw std::logic_error("train_joint: physics kernel was mutated during training");

  const double best_val =
      res.val_loss.empty() ? std::numeric_limits<double>::quiet_NaN() : best.best;
  res.checkpoint = make_checkpoint(res.model, params, opt, cfg.epochs, best_val,
                                   run_config_json(res.model, &sched, cfg));
  return res;
}

// ---------------------------------------------------------------------------

EvalResult evaluate(const std::vector<MultiScaleTrajectory>& test, const PimrlModel& model,
                    const ScheduleConfig& sched, int horizon_frames) {
  EvalResult res;
  for (const MultiScaleTrajectory& t : test) {
    const long max_step = static_cast<long>(t.macro_frames.size()) - 1;
    int frames = frames_within(sched, max_step);
    if (horizon_frames > 0) frames = std::min(frames, horizon_frames);
    if (frames < 1) throw ConfigError("evaluate: trajectory too short for one emitted frame");
    const RolloutRecord rec = rollout(model, t.macro_frames[0], frames, sched);

    std::vector<Field> truth;
    std::vector<double> times, gaps;
    long prev = 0;
    for (long idx : rec.step_indices) {
      truth.push_back(t.macro_frames[static_cast<std::size_t>(idx)]);
      times.push_back(idx * rec.dt_macro);
      gaps.push_back((idx - prev) * rec.dt_macro);
      prev = idx;
    }
    res.seeds.push_back(t.seed);
    res.per_trajectory.push_back(
        compare_frames(rec.frames, truth, times, gaps, rec.dt_macro, 0.8));
  }
  if (!res.per_trajectory.empty()) {
    for (const MetricsReport& r : res.per_trajectory) {
      res.rmse_mean += r.rmse_mean;
      res.mae_mean += r.mae_mean;
      res.hct_mean += r.hct_seconds;
    }
    const double n = static_cast<double>(res.per_trajectory.size());
    res.rmse_mean /= n;
    res.mae_mean /= n;
    res.hct_mean /= n;
  }
  return res;
}

json report_to_json(const MetricsReport& r) {
  return json{{"times", r.times},
              {"frame_rmse", r.frame_rmse},
              {"frame_mae", r.frame_mae},
              {"frame_pcc", r.frame_pcc},
              {"rmse", r.rmse_mean},
              {"mae", r.mae_mean},
              {"hct", r.hct_seconds},
              {"pcc_threshold", r.pcc_threshold},
              {"dt_macro", r.dt_macro}};
}

MetricsReport report_from_json(const json& j) {
  MetricsReport r;
  r.times = j.at("times").get<std::vector<double>>();
  r.frame_rmse = j.at("frame_rmse").get<std::vector<double>>();
  r.frame_mae = j.at("frame_mae").get<std::vector<double>>();
  r.frame_pcc = j.at("frame_pcc").get<std::vector<double>>();
  r.rmse_mean = j.at("rmse").get<double>();
  r.mae_mean = j.at("mae").get<double>();
  r.hct_seconds = j.at("hct").get<double>();
  r.pcc_threshold = j.at("pcc_threshold").get<double>();
  r.dt_macro = j.at("dt_macro").get<double>();
  return r;
}

json eval_to_json(const EvalResult& r, const ScheduleConfig& sched) {
  json trajs = json::array();
  for (std::size_t i = 0; i < r.per_trajectory.size(); ++i) {
    json t = report_to_json(r.per_trajectory[i]);
    t["seed"] = r.seeds[i];
    trajs.push_back(std::move(t));
  }
  return json{{"schedule", to_json(sched)},
              {"trajectories", trajs},
              {"aggregate", {{"rmse", r.rmse_mean}, {"mae", r.mae_mean}, {"hct", r.hct_mean}}}};
}

}  // namespace pimrl
