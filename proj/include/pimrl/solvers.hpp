#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pimrl/field.hpp"
#include "pimrl/rng.hpp"

namespace pimrl {

enum class CaseName { kdv, burgers2d, fn2d, gs2d };

std::string case_name_str(CaseName n);
CaseName parse_case_name(const std::string& s);

// One of the four benchmark PDE setups. dx is fixed per case family, so
// smaller grids shrink the domain instead of coarsening it.
struct PdeCase {
  CaseName name = CaseName::kdv;
  int n_fields = 1;
  int dims = 1;
  int grid = 256;                 // points per spatial dim
  double dx = 0.25;
  double dt_micro = 0.01;         // delta-t of the micro scale
  int substeps_per_micro = 100;   // reference integrator substeps per dt_micro
  std::map<std::string, double> params;
  long warmup_micro_steps = 0;    // integrated and discarded before frame 0

  double domain_length() const { return grid * dx; }
  double dt_sub() const { return dt_micro / substeps_per_micro; }
  std::vector<int> extents() const {
    return dims == 1 ? std::vector<int>{grid} : std::vector<int>{grid, grid};
  }
  std::vector<std::string> field_names() const {
    return n_fields == 1 ? std::vector<std::string>{"u"} : std::vector<std::string>{"u", "v"};
  }
};

PdeCase make_case(CaseName name, int grid);
PdeCase make_case(const std::string& name, int grid);

// Rejects a params map that is not exactly the case's named set.
void validate_params(const PdeCase& c);

// Deterministic initial condition per (case, seed). For fn2d this includes
// the warm-up integration, so the returned field is frame 0 of a dataset.
Field generate_ic(const PdeCase& c, std::uint64_t seed);

// RK4 integrator with preallocated stages; one instance per trajectory.
class ReferenceStepper {
 public:
  explicit ReferenceStepper(const PdeCase& c);

  // Advances state by one dt_sub in place. Throws DivergenceError with the
  // running substep index when the result is not finite.
  void substep(Field& state);

  long substeps_taken() const { return count_; }

 private:
  void rhs(const Field& s, Field& out) const;

  PdeCase case_;
  Field k1_, k2_, k3_, k4_, tmp_;
  long count_ = 0;
};

// One dt_sub step (convenience wrapper over ReferenceStepper).
Field step_reference(const PdeCase& c, const Field& state);

struct BurstSpec {
  int n_bursts = 8;
  int burst_len = 0;  // consecutive micro frames; 0 means 2k+1
};

struct Burst {
  long start_macro_index = 0;  // burst starts at micro index start_macro_index * k
  std::vector<Field> frames;   // burst_len frames, dt_micro apart
};

struct MultiScaleTrajectory {
  PdeCase pde;
  std::uint64_t seed = 0;
  int k = 15;
  std::vector<Field> macro_frames;        // at 0, dt_macro, ..., t_end
  std::vector<Burst> bursts;
  // Macro-frame time indices when frames are not uniformly spaced (rollout
  // outputs); empty for plain datasets (frame i is at i * dt_macro).
  std::vector<long> frame_macro_indices;

  double dt_macro() const { return k * pde.dt_micro; }
  long macro_index_of(std::size_t frame) const {
    return frame_macro_indices.empty() ? static_cast<long>(frame)
                                       : frame_macro_indices[frame];
  }
};

// Integrates one fine-grained run and subsamples macro frames plus micro
// bursts from it, so both views are mutually consistent.
MultiScaleTrajectory simulate(const PdeCase& c, std::uint64_t seed, double t_end, int k,
                              const BurstSpec& bursts);

}  // namespace pimrl
