#pragma once

#include <filesystem>
#include <limits>
#include <vector>

#include <json.hpp>

#include "pimrl/param.hpp"
#include "pimrl/solvers.hpp"

namespace pimrl {

// ---- MSTD: multi-scale trajectory container ----
// "MSTD" | version byte 1 | u32-LE header length | UTF-8 JSON header |
// payload: macro frames then burst frames, 32-bit LE floats, C-order.

void write_mstd(const MultiScaleTrajectory& traj, const std::filesystem::path& path);
MultiScaleTrajectory read_mstd(const std::filesystem::path& path);
nlohmann::json read_mstd_header(const std::filesystem::path& path);

// ---- PMCK: checkpoint container ----
// "PMCK" | version byte 1 | u32-LE header length | JSON header with config,
// epoch, optimizer step, best validation loss and a manifest of
// name/shape/offset entries | payload: 64-bit LE floats.

struct Checkpoint {
  nlohmann::json config;
  long epoch = 0;
  long adam_t = 0;
  double best_val_loss = std::numeric_limits<double>::quiet_NaN();  // NaN = none recorded
  std::vector<Param> entries;

  const Param* find(const std::string& name) const;
};

void write_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint read_checkpoint(const std::filesystem::path& path);

// ---- dataset splitting ----

struct SplitSpec {
  int n_train = 0;
  int n_val = 0;
  int n_test = 0;
};

struct SplitFiles {
  std::vector<std::filesystem::path> train, val, test;
};

// Disjoint partition by trajectory, in sorted file order. Rejects requests
// larger than the file count and duplicate seeds.
SplitFiles split_dataset(std::vector<std::filesystem::path> files, const SplitSpec& spec);

}  // namespace pimrl
