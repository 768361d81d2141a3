#include "pimrl/config.hpp"

#include "pimrl/errors.hpp"

namespace pimrl {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& known,
                         const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (known.find(key) == known.end())
      throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

json to_json(const PdeCase& c) {
  return json{{"name", case_name_str(c.name)},
              {"grid", c.grid},
              {"dx", c.dx},
              {"dt_micro", c.dt_micro},
              {"substeps_per_micro", c.substeps_per_micro},
              {"params", c.params},
              {"warmup_micro_steps", c.warmup_micro_steps}};
}

PdeCase pde_from_json(const json& j) {
  reject_unknown_keys(
      j, {"name", "grid", "dx", "dt_micro", "substeps_per_micro", "params", "warmup_micro_steps"},
      "case");
  PdeCase c = make_case(j.at("name").get<std::string>(), j.at("grid").get<int>());
  if (j.contains("dx")) c.dx = j.at("dx").get<double>();
  if (j.contains("dt_micro")) c.dt_micro = j.at("dt_micro").get<double>();
  if (j.contains("substeps_per_micro")) c.substeps_per_micro = j.at("substeps_per_micro").get<int>();
  if (j.contains("params")) c.params = j.at("params").get<std::map<std::string, double>>();
  if (j.contains("warmup_micro_steps")) c.warmup_micro_steps = j.at("warmup_micro_steps").get<long>();
  validate_params(c);
  if (!(c.dx > 0.0) || !(c.dt_micro > 0.0) || c.substeps_per_micro < 1)
    throw ConfigError("case: dx, dt_micro and substeps_per_micro must be positive");
  return c;
}

json to_json(const ModelConfig& c) {
  return json{{"n_layers", c.n_layers},
              {"n_channels", c.n_channels},
              {"micro_kernel", c.micro_kernel},
              {"enc_channels", c.enc_channels},
              {"latent_channels", c.latent_channels},
              {"physics_enabled", c.physics_enabled}};
}

ModelConfig model_cfg_from_json(const json& j) {
  reject_unknown_keys(j,
                      {"n_layers", "n_channels", "micro_kernel", "enc_channels",
                       "latent_channels", "physics_enabled"},
                      "model");
  ModelConfig c;
  if (j.contains("n_layers")) c.n_layers = j.at("n_layers").get<int>();
  if (j.contains("n_channels")) c.n_channels = j.at("n_channels").get<int>();
  if (j.contains("micro_kernel")) c.micro_kernel = j.at("micro_kernel").get<int>();
  if (j.contains("enc_channels")) c.enc_channels = j.at("enc_channels").get<int>();
  if (j.contains("latent_channels")) c.latent_channels = j.at("latent_channels").get<int>();
  if (j.contains("physics_enabled")) c.physics_enabled = j.at("physics_enabled").get<bool>();
  if (c.n_layers < 1 || c.n_channels < 1 || c.enc_channels < 1 || c.latent_channels < 1)
    throw ConfigError("model: layer/channel counts must be >= 1");
  return c;
}

json to_json(const ScheduleConfig& c) {
  return json{{"k", c.k},
              {"dt_micro", c.dt_micro},
              {"n_corrected", c.n_corrected},
              {"n_free", c.n_free},
              {"no_connect", c.no_connect},
              {"no_physics_conv", c.no_physics_conv},
              {"mode", rollout_mode_str(c.mode)}};
}

ScheduleConfig sched_from_json(const json& j) {
  reject_unknown_keys(
      j, {"k", "dt_micro", "n_corrected", "n_free", "no_connect", "no_physics_conv", "mode"},
      "schedule");
  ScheduleConfig c;
  if (j.contains("k")) c.k = j.at("k").get<int>();
  if (j.contains("dt_micro")) c.dt_micro = j.at("dt_micro").get<double>();
  if (j.contains("n_corrected")) c.n_corrected = j.at("n_corrected").get<int>();
  if (j.contains("n_free")) c.n_free = j.at("n_free").get<int>();
  if (j.contains("no_connect")) c.no_connect = j.at("no_connect").get<bool>();
  if (j.contains("no_physics_conv")) c.no_physics_conv = j.at("no_physics_conv").get<bool>();
  if (j.contains("mode")) c.mode = parse_rollout_mode(j.at("mode").get<std::string>());
  c.validate();
  return c;
}

json to_json(const TrainConfig& c) {
  return json{{"phase", c.phase == TrainConfig::Phase::pretrain ? "pretrain" : "joint"},
              {"epochs", c.epochs},
              {"batches_per_epoch", c.batches_per_epoch},
              {"batch_size", c.batch_size},
              {"rollout_frames", c.rollout_frames},
              {"lr0", c.lr0},
              {"lr_step", c.lr_step},
              {"lr_gamma", c.lr_gamma},
              {"seed", c.seed},
              {"no_pretrain", c.no_pretrain},
              {"no_connect", c.no_connect},
              {"no_physics_conv", c.no_physics_conv},
              {"val_interval", c.val_interval},
              {"max_cycles", c.max_cycles},
              {"val_frames", c.val_frames},
              {"threads", c.threads},
              {"clip_norm", c.clip_norm}};
}

TrainConfig train_cfg_from_json(const json& j) {
  reject_unknown_keys(j,
                      {"phase", "epochs", "batches_per_epoch", "batch_size", "rollout_frames",
                       "lr0", "lr_step", "lr_gamma", "seed", "no_pretrain", "no_connect",
                       "no_physics_conv", "val_interval", "max_cycles", "val_frames", "threads",
                       "clip_norm"},
                      "train");
  TrainConfig c;
  if (j.contains("phase")) {
    const std::string p = j.at("phase").get<std::string>();
    if (p == "pretrain")
      c.phase = TrainConfig::Phase::pretrain;
    else if (p == "joint")
      c.phase = TrainConfig::Phase::joint;
    else
      throw ConfigError("train: unknown phase '" + p + "'");
  }
  if (j.contains("epochs")) c.epochs = j.at("epochs").get<int>();
  if (j.contains("batches_per_epoch")) c.batches_per_epoch = j.at("batches_per_epoch").get<int>();
  if (j.contains("batch_size")) c.batch_size = j.at("batch_size").get<int>();
  if (j.contains("rollout_frames")) c.rollout_frames = j.at("rollout_frames").get<int>();
  if (j.contains("lr0")) c.lr0 = j.at("lr0").get<double>();
  if (j.contains("lr_step")) c.lr_step = j.at("lr_step").get<int>();
  if (j.contains("lr_gamma")) c.lr_gamma = j.at("lr_gamma").get<double>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("no_pretrain")) c.no_pretrain = j.at("no_pretrain").get<bool>();
  if (j.contains("no_connect")) c.no_connect = j.at("no_connect").get<bool>();
  if (j.contains("no_physics_conv")) c.no_physics_conv = j.at("no_physics_conv").get<bool>();
  if (j.contains("val_interval")) c.val_interval = j.at("val_interval").get<int>();
  if (j.contains("max_cycles")) c.max_cycles = j.at("max_cycles").get<int>();
  if (j.contains("val_frames")) c.val_frames = j.at("val_frames").get<int>();
  if (j.contains("threads")) c.threads = j.at("threads").get<int>();
  if (j.contains("clip_norm")) c.clip_norm = j.at("clip_norm").get<double>();
  if (!(c.lr0 > 0.0)) throw ConfigError("train: lr0 must be > 0");
  if (c.epochs < 0 || c.batches_per_epoch < 1 || c.batch_size < 1)
    throw ConfigError("train: epochs must be >= 0 and batch settings >= 1");
  if (c.max_cycles < 1) throw ConfigError("train: max_cycles must be >= 1");
  return c;
}

}  // namespace pimrl
