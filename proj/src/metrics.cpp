#include "pimrl/metrics.hpp"

#include <cmath>
#include <limits>

#include "pimrl/errors.hpp"

namespace pimrl {

double rmse(const Field& pred, const Field& truth) {
  require_same_shape(pred, truth, "rmse");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.data.size(); ++i) {
    const double d = pred.data[i] - truth.data[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(pred.data.size()));
}

double mae(const Field& pred, const Field& truth) {
  require_same_shape(pred, truth, "mae");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.data.size(); ++i)
    acc += std::fabs(pred.data[i] - truth.data[i]);
  return acc / static_cast<double>(pred.data.size());
}

double pcc(const Field& a, const Field& b) {
  require_same_shape(a, b, "pcc");
  const std::size_t n = a.data.size();
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a.data[i];
    mb += b.data[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a.data[i] - ma;
    const double db = b.data[i] - mb;
    cov += da * db;
    va += da * da;
    vb += db * db;
  }
  if (va == 0.0 || vb == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return cov / std::sqrt(va * vb);
}

namespace {

void check_aligned(const std::vector<Field>& pred, const std::vector<Field>& truth,
                   const char* where) {
  if (pred.size() != truth.size())
    throw ShapeError(std::string(where) + ": " + std::to_string(pred.size()) + " vs " +
                     std::to_string(truth.size()) + " frames");
  for (std::size_t i = 0; i < pred.size(); ++i) require_same_shape(pred[i], truth[i], where);
}

}  // namespace

double hct(const std::vector<Field>& pred, const std::vector<Field>& truth, double dt_macro,
           double threshold) {
  check_aligned(pred, truth, "hct");
  long passing = 0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (pcc(pred[i], truth[i]) > threshold) ++passing;  // NaN fails the comparison
  return dt_macro * static_cast<double>(passing);
}

double hct_weighted(const std::vector<Field>& pred, const std::vector<Field>& truth,
                    const std::vector<double>& gaps_seconds, double threshold) {
  check_aligned(pred, truth, "hct_weighted");
  if (gaps_seconds.size() != pred.size())
    throw ShapeError("hct_weighted: gap count does not match frame count");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (pcc(pred[i], truth[i]) > threshold) acc += gaps_seconds[i];
  return acc;
}

double hct_first_failure(const std::vector<Field>& pred, const std::vector<Field>& truth,
                         double dt_macro, double threshold) {
  check_aligned(pred, truth, "hct_first_failure");
  long passing = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!(pcc(pred[i], truth[i]) > threshold)) break;
    ++passing;
  }
  return dt_macro * static_cast<double>(passing);
}

MetricsReport compare_frames(const std::vector<Field>& pred, const std::vector<Field>& truth,
                             const std::vector<double>& times, const std::vector<double>& gaps,
                             double dt_macro, double threshold) {
  check_aligned(pred, truth, "compare_frames");
  if (times.size() != pred.size() || gaps.size() != pred.size())
    throw ShapeError("compare_frames: time axis does not match frame count");
  MetricsReport r;
  r.times = times;
  r.dt_macro = dt_macro;
  r.pcc_threshold = threshold;
  r.frame_rmse.reserve(pred.size());
  r.frame_mae.reserve(pred.size());
  r.frame_pcc.reserve(pred.size());
  double sr = 0.0, sm = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double fr = rmse(pred[i], truth[i]);
    const double fm = mae(pred[i], truth[i]);
    r.frame_rmse.push_back(fr);
    r.frame_mae.push_back(fm);
    r.frame_pcc.push_back(pcc(pred[i], truth[i]));
    sr += fr;
    sm += fm;
  }
  const double n = pred.empty() ? 1.0 : static_cast<double>(pred.size());
  r.rmse_mean = sr / n;
  r.mae_mean = sm / n;
  r.hct_seconds = hct_weighted(pred, truth, gaps, threshold);
  return r;
}

}  // namespace pimrl
