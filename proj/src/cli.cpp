#include "pimrl/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pimrl/data.hpp"
#include "pimrl/errors.hpp"
#include "pimrl/training.hpp"

namespace pimrl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
  reject_unknown_keys(j, {"case", "model", "schedule", "train", "split", "generate"}, "config");
  return j;
}

json section(const json& cfg, const char* name) {
  return cfg.contains(name) ? cfg.at(name) : json::object();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
}

// Every command with outputs echoes its fully-resolved config.
void echo_config(const fs::path& out_dir, const std::string& command, const json& resolved) {
  fs::create_directories(out_dir);
  json j = resolved;
  j["command"] = command;
  write_text(out_dir / "config.json", j.dump(2) + "\n");
}

std::vector<fs::path> list_mstd(const std::string& dir) {
  std::vector<fs::path> files;
  if (!fs::is_directory(dir)) throw IoError("'" + dir + "' is not a directory");
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".mstd") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no .mstd files in '" + dir + "'");
  return files;
}

std::vector<MultiScaleTrajectory> load_all(const std::vector<fs::path>& files) {
  std::vector<MultiScaleTrajectory> out;
  out.reserve(files.size());
  for (const fs::path& f : files) out.push_back(read_mstd(f));
  return out;
}

SplitSpec split_from_json(const json& j, int file_count) {
  reject_unknown_keys(j, {"train", "val", "test"}, "split");
  SplitSpec s;
  s.n_train = j.value("train", std::max(file_count - 3, 1));
  s.n_val = j.value("val", file_count >= 2 ? 1 : 0);
  s.n_test = j.value("test", std::max(std::min(file_count - s.n_train - s.n_val, 2), 0));
  return s;
}

void log_line(const std::string& s) { std::cerr << s << "\n"; }

// ---- generate ----

int cmd_generate(const json& cfg, const std::string& out_dir) {
  const json gen = section(cfg, "generate");
  reject_unknown_keys(gen, {"t_end", "count", "seed_base", "n_bursts", "burst_len", "k"},
                      "generate");
  PdeCase pde = pde_from_json(section(cfg, "case"));
  const double t_end = gen.at("t_end").get<double>();
  const int count = gen.value("count", 1);
  const std::uint64_t seed_base = gen.value("seed_base", std::uint64_t{0});
  const int k = gen.value("k", 15);
  BurstSpec bursts;
  bursts.n_bursts = gen.value("n_bursts", 8);
  bursts.burst_len = gen.value("burst_len", 0);
  if (count < 1) throw ConfigError("generate: count must be >= 1");

  echo_config(out_dir, "generate", cfg);
  for (int i = 0; i < count; ++i) {
    const std::uint64_t seed = seed_base + static_cast<std::uint64_t>(i);
    const MultiScaleTrajectory traj = simulate(pde, seed, t_end, k, bursts);
    char name[64];
    std::snprintf(name, sizeof(name), "%s_seed%04llu.mstd", case_name_str(pde.name).c_str(),
                  static_cast<unsigned long long>(seed));
    write_mstd(traj, fs::path(out_dir) / name);
    std::cerr << "wrote " << (fs::path(out_dir) / name).string() << "\n";
  }
  return 0;
}

// ---- pretrain ----

int cmd_pretrain(const json& cfg, const std::string& data_dir, const std::string& out_dir) {
  const std::vector<fs::path> files = list_mstd(data_dir);
  const SplitSpec spec = split_from_json(section(cfg, "split"), static_cast<int>(files.size()));
  const SplitFiles split = split_dataset(files, spec);
  if (split.train.empty()) throw ConfigError("pretrain: empty training split");

  const std::vector<MultiScaleTrajectory> train = load_all(split.train);
  const std::vector<MultiScaleTrajectory> val = load_all(split.val);

  TrainConfig tc = train_cfg_from_json(section(cfg, "train"));
  tc.phase = TrainConfig::Phase::pretrain;
  ModelConfig mc = model_cfg_from_json(section(cfg, "model"));
  mc.physics_enabled = !tc.no_physics_conv && mc.physics_enabled;
  PimrlModel init = make_model(train[0].pde, mc, tc.seed);

  json resolved = cfg;
  resolved["case"] = to_json(train[0].pde);
  resolved["model"] = to_json(mc);
  resolved["train"] = to_json(tc);
  resolved["split"] = {{"train", spec.n_train}, {"val", spec.n_val}, {"test", spec.n_test}};
  echo_config(out_dir, "pretrain", resolved);

  const TrainResult res = pretrain_micro(train, val, init, tc, log_line);
  write_checkpoint(res.checkpoint, fs::path(out_dir) / "micro.pmck");

  std::string curve = "epoch,train_loss\n";
  for (std::size_t e = 0; e < res.train_loss.size(); ++e)
    curve += std::to_string(e) + "," + std::to_string(res.train_loss[e]) + "\n";
  write_text(fs::path(out_dir) / "train_loss.csv", curve);
  std::cerr << "pretrain done; skipped batches: " << res.skipped_batches << "\n";
  return 0;
}

// ---- train ----

int cmd_train(const json& cfg, const std::string& data_dir, const std::string& micro_ckpt,
              const std::string& out_dir, const std::string& mode) {
  const std::vector<fs::path> files = list_mstd(data_dir);
  const SplitSpec spec = split_from_json(section(cfg, "split"), static_cast<int>(files.size()));
  const SplitFiles split = split_dataset(files, spec);
  if (split.train.empty()) throw ConfigError("train: empty training split");

  const std::vector<MultiScaleTrajectory> train = load_all(split.train);
  const std::vector<MultiScaleTrajectory> val = load_all(split.val);

  TrainConfig tc = train_cfg_from_json(section(cfg, "train"));
  tc.phase = TrainConfig::Phase::joint;
  if (!section(cfg, "train").contains("lr0")) tc.lr0 = 5e-3;
  ModelConfig mc = model_cfg_from_json(section(cfg, "model"));
  mc.physics_enabled = !tc.no_physics_conv && mc.physics_enabled;

  ScheduleConfig sched = sched_from_json(section(cfg, "schedule"));
  sched.k = train[0].k;
  sched.dt_micro = train[0].pde.dt_micro;
  sched.mode = parse_rollout_mode(mode);
  if (sched.mode == RolloutMode::micro_only)
    throw ConfigError("train: micro-only training is the pretrain phase");

  PimrlModel init = make_model(train[0].pde, mc, tc.seed);
  if (!micro_ckpt.empty()) {
    if (tc.no_pretrain)
      throw ConfigError("train: --micro-ckpt and --no-pretrain are mutually exclusive");
    const Checkpoint ck = read_checkpoint(micro_ckpt);
    int n = 0;
    for (Param* p : init.micro.trainable()) {
      const Param* src = ck.find(p->name);
      if (!src) throw ConfigError("micro checkpoint is missing '" + p->name + "'");
      if (src->shape != p->shape)
        throw ConfigError("micro checkpoint shape mismatch for '" + p->name + "'");
      p->value = src->value;
      ++n;
    }
    std::cerr << "loaded " << n << " micro parameters from " << micro_ckpt << "\n";
  } else if (!tc.no_pretrain && sched.mode == RolloutMode::full) {
    throw ConfigError("train: provide --micro-ckpt or set --no-pretrain");
  }

  json resolved = cfg;
  resolved["case"] = to_json(train[0].pde);
  resolved["model"] = to_json(mc);
  resolved["train"] = to_json(tc);
  resolved["schedule"] = to_json(sched);
  resolved["split"] = {{"train", spec.n_train}, {"val", spec.n_val}, {"test", spec.n_test}};
  echo_config(out_dir, "train", resolved);

  const TrainResult res = train_joint(train, val, init, sched, tc, log_line);
  write_checkpoint(res.checkpoint, fs::path(out_dir) / "model.pmck");

  std::string curve = "epoch,train_loss\n";
  for (std::size_t e = 0; e < res.train_loss.size(); ++e)
    curve += std::to_string(e) + "," + std::to_string(res.train_loss[e]) + "\n";
  write_text(fs::path(out_dir) / "train_loss.csv", curve);
  std::cerr << "train done; skipped batches: " << res.skipped_batches << "\n";
  return 0;
}

// ---- eval ----

int cmd_eval(const json& cfg, const std::string& data_dir, const std::string& ckpt_path,
             const std::string& out_dir, const std::string& mode, int frames) {
  const std::vector<fs::path> files = list_mstd(data_dir);
  const SplitSpec spec = split_from_json(section(cfg, "split"), static_cast<int>(files.size()));
  const SplitFiles split = split_dataset(files, spec);
  if (split.test.empty()) throw ConfigError("eval: empty test split");
  const std::vector<MultiScaleTrajectory> test = load_all(split.test);

  const Checkpoint ckpt = read_checkpoint(ckpt_path);
  PimrlModel model = model_from_checkpoint(ckpt);

  ScheduleConfig sched;
  if (ckpt.config.contains("schedule")) sched = sched_from_json(ckpt.config.at("schedule"));
  if (cfg.contains("schedule")) {
    json merged = ckpt.config.contains("schedule") ? ckpt.config.at("schedule") : json::object();
    for (const auto& [k, v] : cfg.at("schedule").items()) merged[k] = v;
    sched = sched_from_json(merged);
  }
  sched.k = test[0].k;
  sched.dt_micro = test[0].pde.dt_micro;
  sched.mode = parse_rollout_mode(mode);

  json resolved = cfg;
  resolved["schedule"] = to_json(sched);
  resolved["split"] = {{"train", spec.n_train}, {"val", spec.n_val}, {"test", spec.n_test}};
  echo_config(out_dir, "eval", resolved);

  const EvalResult res = evaluate(test, model, sched, frames);
  write_text(fs::path(out_dir) / "report.json", eval_to_json(res, sched).dump(2) + "\n");
  std::cout << "rmse " << res.rmse_mean << " mae " << res.mae_mean << " hct " << res.hct_mean
            << "\n";
  return 0;
}

// ---- rollout ----

int cmd_rollout(const json& cfg, const std::string& ckpt_path, const std::string& init_path,
                long init_frame, int frames, const std::string& mode, const std::string& out) {
  const Checkpoint ckpt = read_checkpoint(ckpt_path);
  PimrlModel model = model_from_checkpoint(ckpt);
  const MultiScaleTrajectory init_traj = read_mstd(init_path);
  if (init_frame < 0 || init_frame >= static_cast<long>(init_traj.macro_frames.size()))
    throw ConfigError("rollout: --init-frame out of range");

  ScheduleConfig sched;
  if (ckpt.config.contains("schedule")) sched = sched_from_json(ckpt.config.at("schedule"));
  if (cfg.contains("schedule")) {
    json merged = ckpt.config.contains("schedule") ? ckpt.config.at("schedule") : json::object();
    for (const auto& [k, v] : cfg.at("schedule").items()) merged[k] = v;
    sched = sched_from_json(merged);
  }
  sched.k = init_traj.k;
  sched.dt_micro = init_traj.pde.dt_micro;
  sched.mode = parse_rollout_mode(mode);

  const RolloutRecord rec =
      rollout(model, init_traj.macro_frames[static_cast<std::size_t>(init_frame)], frames, sched);

  MultiScaleTrajectory out_traj;
  out_traj.pde = init_traj.pde;
  out_traj.seed = init_traj.seed;
  out_traj.k = init_traj.k;
  out_traj.macro_frames = rec.frames;
  for (long s : rec.step_indices) out_traj.frame_macro_indices.push_back(init_frame + s);
  write_mstd(out_traj, out);
  std::cerr << "wrote " << out << " (" << rec.frames.size() << " frames)\n";
  return 0;
}

// ---- plot ----

void write_pgm(const fs::path& path, const Field& f, int channel) {
  const int ny = f.extents.size() == 2 ? f.extents[0] : 1;
  const int nx = f.extents.back();
  const double* src = f.channel(channel);
  double lo = src[0], hi = src[0];
  for (long i = 0; i < static_cast<long>(ny) * nx; ++i) {
    lo = std::min(lo, src[i]);
    hi = std::max(hi, src[i]);
  }
  // min-max normalization: lo -> 0, hi -> 255; flat fields map to 0.
  std::string buf = "P5\n" + std::to_string(nx) + " " + std::to_string(ny) + "\n255\n";
  for (long i = 0; i < static_cast<long>(ny) * nx; ++i) {
    const double t = hi > lo ? (src[i] - lo) / (hi - lo) : 0.0;
    buf.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(t * 255.0))));
  }
  write_text(path, buf);
}

int cmd_plot(const std::string& traj_path, const std::string& truth_path, long frame,
             bool error_curve, const std::string& out_prefix) {
  const MultiScaleTrajectory traj = read_mstd(traj_path);
  const fs::path prefix(out_prefix);
  if (prefix.has_parent_path()) fs::create_directories(prefix.parent_path());

  if (error_curve) {
    if (truth_path.empty()) throw ConfigError("plot: --error-curve needs --truth");
    const MultiScaleTrajectory truth = read_mstd(truth_path);
    std::string csv = "t,rmse,mae,pcc\n";
    char line[160];
    for (std::size_t i = 0; i < traj.macro_frames.size(); ++i) {
      const long idx = traj.macro_index_of(i);
      if (idx >= static_cast<long>(truth.macro_frames.size()))
        throw ConfigError("plot: trajectory frame " + std::to_string(i) +
                          " lies beyond the truth horizon");
      const Field& p = traj.macro_frames[i];
      const Field& t = truth.macro_frames[static_cast<std::size_t>(idx)];
      std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g\n", idx * traj.dt_macro(),
                    rmse(p, t), mae(p, t), pcc(p, t));
      csv += line;
    }
    write_text(out_prefix + "_error.csv", csv);
    std::cerr << "wrote " << out_prefix << "_error.csv\n";
    return 0;
  }

  if (frame < 0 || frame >= static_cast<long>(traj.macro_frames.size()))
    throw ConfigError("plot: --frame out of range (have " +
                      std::to_string(traj.macro_frames.size()) + " frames)");
  const Field& f = traj.macro_frames[static_cast<std::size_t>(frame)];
  for (int c = 0; c < f.channels; ++c) {
    const fs::path p(out_prefix + "_f" + std::to_string(frame) + "_c" + std::to_string(c) +
                     ".pgm");
    write_pgm(p, f, c);
    std::cerr << "wrote " << p.string() << "\n";
  }
  return 0;
}

void merge_flag(json& cfg, const char* sec, const char* key, const std::optional<double>& v) {
  if (v) cfg[sec][key] = *v;
}
void merge_flag(json& cfg, const char* sec, const char* key, const std::optional<long>& v) {
  if (v) cfg[sec][key] = *v;
}
void merge_flag(json& cfg, const char* sec, const char* key, const std::optional<std::string>& v) {
  if (v) cfg[sec][key] = *v;
}
void merge_flag(json& cfg, const char* sec, const char* key, bool set) {
  if (set) cfg[sec][key] = true;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"PIMRL: physics-informed multi-scale recurrent learning for PDE forecasting"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON config; CLI flags override its keys")
      ->check(CLI::ExistingFile);

  // Flags shared by the training-style commands.
  std::optional<std::string> case_name, mode_flag;
  std::optional<long> grid, epochs, batches, batch_size, rollout_frames, seed, k_flag, n_bursts,
      burst_len, count, seed_base, n_corrected, n_free, threads, val_interval, max_cycles,
      latent_channels, n_channels, n_layers, enc_channels, split_train, split_val, split_test;
  std::optional<double> t_end, dt_micro, lr0;
  bool no_connect = false, no_pretrain = false, no_physics = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--case", case_name, "PDE case (kdv|burgers2d|fn2d|gs2d)");
    cmd->add_option("--grid", grid, "grid points per spatial dim");
    cmd->add_option("--k", k_flag, "micro steps per macro step");
    cmd->add_option("--dt-micro", dt_micro, "micro time step (s)");
    cmd->add_option("--seed", seed, "master seed");
    cmd->add_option("--epochs", epochs, "training epochs");
    cmd->add_option("--batches", batches, "batches per epoch");
    cmd->add_option("--batch-size", batch_size, "samples per batch");
    cmd->add_option("--rollout-frames", rollout_frames, "pretrain steps per sample (0 = burst)");
    cmd->add_option("--lr", lr0, "initial learning rate");
    cmd->add_option("--threads", threads, "batch-element worker threads");
    cmd->add_option("--val-interval", val_interval, "epochs between validation passes");
    cmd->add_option("--max-cycles", max_cycles, "rollout-curriculum ceiling (joint)");
    cmd->add_option("--n-corrected", n_corrected, "combined steps per cycle");
    cmd->add_option("--n-free", n_free, "macro-only steps per cycle");
    cmd->add_option("--n-channels", n_channels, "micro product-block channels");
    cmd->add_option("--n-layers", n_layers, "micro parallel conv layers");
    cmd->add_option("--enc-channels", enc_channels, "macro encoder channels");
    cmd->add_option("--latent", latent_channels, "macro latent channels");
    cmd->add_option("--train-count", split_train, "trajectories for training");
    cmd->add_option("--val-count", split_val, "trajectories for validation");
    cmd->add_option("--test-count", split_test, "trajectories for testing");
    cmd->add_flag("--no-connect", no_connect, "ablation: macro ignores the micro output");
    cmd->add_flag("--no-pretrain", no_pretrain, "ablation: skip the micro pretraining weights");
    cmd->add_flag("--no-physics-conv", no_physics, "ablation: drop the physics conv");
  };

  // generate
  auto* gen = app.add_subcommand("generate", "simulate trajectories into MSTD files");
  std::string out_dir;
  add_common(gen);
  gen->add_option("--tend", t_end, "trajectory length (s)");
  gen->add_option("--count", count, "number of trajectories");
  gen->add_option("--seed-base", seed_base, "first seed");
  gen->add_option("--bursts", n_bursts, "micro bursts per trajectory");
  gen->add_option("--burst-len", burst_len, "micro frames per burst (0 = 2k+1)");
  gen->add_option("--out-dir", out_dir, "output directory")->required();

  // pretrain
  auto* pre = app.add_subcommand("pretrain", "train the micro module on bursts");
  std::string data_dir;
  add_common(pre);
  pre->add_option("--data-dir", data_dir, "directory of MSTD files")->required();
  pre->add_option("--out-dir", out_dir, "output directory")->required();

  // train
  auto* tr = app.add_subcommand("train", "joint PIMRL training on macro sequences");
  std::string micro_ckpt;
  add_common(tr);
  tr->add_option("--data-dir", data_dir, "directory of MSTD files")->required();
  tr->add_option("--micro-ckpt", micro_ckpt, "pretrained micro checkpoint");
  tr->add_option("--out-dir", out_dir, "output directory")->required();
  tr->add_option("--mode", mode_flag, "full|macro-only");

  // eval
  auto* ev = app.add_subcommand("eval", "score a checkpoint on the test split");
  std::string ckpt_path;
  long eval_frames = 0;
  add_common(ev);
  ev->add_option("--data-dir", data_dir, "directory of MSTD files")->required();
  ev->add_option("--ckpt", ckpt_path, "checkpoint to evaluate")->required();
  ev->add_option("--out-dir", out_dir, "output directory")->required();
  ev->add_option("--mode", mode_flag, "full|micro-only|macro-only");
  ev->add_option("--frames", eval_frames, "cap on emitted frames (0 = whole horizon)");

  // rollout
  auto* ro = app.add_subcommand("rollout", "roll a checkpoint from a stored initial state");
  std::string init_path, out_path;
  long init_frame = 0, frames = 1;
  add_common(ro);
  ro->add_option("--ckpt", ckpt_path, "checkpoint")->required();
  ro->add_option("--init", init_path, "MSTD file providing the initial state")->required();
  ro->add_option("--init-frame", init_frame, "frame index inside --init");
  ro->add_option("--frames", frames, "emitted frames")->required();
  ro->add_option("--mode", mode_flag, "full|micro-only|macro-only");
  ro->add_option("--out", out_path, "output MSTD path")->required();

  // plot
  auto* pl = app.add_subcommand("plot", "emit PGM heatmaps / error CSV");
  std::string traj_path, truth_path, plot_out;
  long plot_frame = -1;
  bool error_curve = false;
  pl->add_option("--traj", traj_path, "trajectory MSTD")->required();
  pl->add_option("--truth", truth_path, "ground-truth MSTD");
  pl->add_option("--frame", plot_frame, "frame index to render as PGM");
  pl->add_flag("--error-curve", error_curve, "write t,rmse,mae,pcc CSV against --truth");
  pl->add_option("--out", plot_out, "output path prefix")->required();

  try {
    app.parse(argc, const_cast<char**>(argv));
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    json cfg = load_config_file(config_path);
    merge_flag(cfg, "case", "name", case_name);
    merge_flag(cfg, "case", "grid", grid);
    merge_flag(cfg, "case", "dt_micro", dt_micro);
    merge_flag(cfg, "schedule", "k", k_flag);
    merge_flag(cfg, "schedule", "n_corrected", n_corrected);
    merge_flag(cfg, "schedule", "n_free", n_free);
    merge_flag(cfg, "schedule", "no_connect", no_connect);
    merge_flag(cfg, "schedule", "no_physics_conv", no_physics);
    merge_flag(cfg, "train", "epochs", epochs);
    merge_flag(cfg, "train", "batches_per_epoch", batches);
    merge_flag(cfg, "train", "batch_size", batch_size);
    merge_flag(cfg, "train", "rollout_frames", rollout_frames);
    merge_flag(cfg, "train", "lr0", lr0);
    merge_flag(cfg, "train", "seed", seed);
    merge_flag(cfg, "train", "threads", threads);
    merge_flag(cfg, "train", "val_interval", val_interval);
    merge_flag(cfg, "train", "max_cycles", max_cycles);
    merge_flag(cfg, "train", "no_connect", no_connect);
    merge_flag(cfg, "train", "no_pretrain", no_pretrain);
    merge_flag(cfg, "train", "no_physics_conv", no_physics);
    merge_flag(cfg, "model", "n_channels", n_channels);
    merge_flag(cfg, "model", "n_layers", n_layers);
    merge_flag(cfg, "model", "enc_channels", enc_channels);
    merge_flag(cfg, "model", "latent_channels", latent_channels);
    merge_flag(cfg, "split", "train", split_train);
    merge_flag(cfg, "split", "val", split_val);
    merge_flag(cfg, "split", "test", split_test);
    if (gen->parsed()) {
      merge_flag(cfg, "generate", "t_end", t_end);
      merge_flag(cfg, "generate", "count", count);
      merge_flag(cfg, "generate", "seed_base", seed_base);
      merge_flag(cfg, "generate", "n_bursts", n_bursts);
      merge_flag(cfg, "generate", "burst_len", burst_len);
      merge_flag(cfg, "generate", "k", k_flag);
      if (seed) cfg["generate"]["seed_base"] = *seed;
      return cmd_generate(cfg, out_dir);
    }
    if (pre->parsed()) return cmd_pretrain(cfg, data_dir, out_dir);
    if (tr->parsed()) return cmd_train(cfg, data_dir, micro_ckpt, out_dir,
                                       mode_flag.value_or("full"));
    if (ev->parsed())
      return cmd_eval(cfg, data_dir, ckpt_path, out_dir, mode_flag.value_or("full"),
                      static_cast<int>(eval_frames));
    if (ro->parsed())
      return cmd_rollout(cfg, ckpt_path, init_path, init_frame, static_cast<int>(frames),
                         mode_flag.value_or("full"), out_path);
    if (pl->parsed()) return cmd_plot(traj_path, truth_path, plot_frame, error_curve, plot_out);
    throw ConfigError("no subcommand given");
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return 4;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const ShapeError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace pimrl
