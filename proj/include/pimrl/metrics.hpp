#pragma once

#include <vector>

#include "pimrl/field.hpp"

namespace pimrl {

double rmse(const Field& pred, const Field& truth);
double mae(const Field& pred, const Field& truth);

// Pearson correlation over all fields flattened together. NaN when either
// side has zero variance; NaN counts as below any HCT threshold.
double pcc(const Field& a, const Field& b);

// Appendix-style sum: dt_macro times the number of frames whose PCC with
// the truth exceeds the threshold (not first-crossing time).
double hct(const std::vector<Field>& pred, const std::vector<Field>& truth, double dt_macro,
           double threshold = 0.8);

// Same predicate, but each frame is weighted by the time it advanced; used
// when emitted frames are not uniformly spaced.
double hct_weighted(const std::vector<Field>& pred, const std::vector<Field>& truth,
                    const std::vector<double>& gaps_seconds, double threshold = 0.8);

// First-crossing variant: time until the first frame at or below threshold.
double hct_first_failure(const std::vector<Field>& pred, const std::vector<Field>& truth,
                         double dt_macro, double threshold = 0.8);

struct MetricsReport {
  std::vector<double> times;
  std::vector<double> frame_rmse;
  std::vector<double> frame_mae;
  std::vector<double> frame_pcc;
  double rmse_mean = 0.0;  // mean of frame_rmse
  double mae_mean = 0.0;   // mean of frame_mae
  double hct_seconds = 0.0;
  double pcc_threshold = 0.8;
  double dt_macro = 0.0;
};

// Frame-by-frame comparison; gaps[i] is the time advanced by frame i (all
// dt_macro for uniformly sampled rollouts).
MetricsReport compare_frames(const std::vector<Field>& pred, const std::vector<Field>& truth,
                             const std::vector<double>& times, const std::vector<double>& gaps,
                             double dt_macro, double threshold = 0.8);

}  // namespace pimrl
