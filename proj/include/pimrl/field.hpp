#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "pimrl/errors.hpp"

namespace pimrl {

// Multi-channel state on a uniform periodic grid, C-order [channel][y][x]
// (or [channel][x] in 1D). All compute is in 64-bit floats.
struct Field {
  int channels = 0;
  std::vector<int> extents;  // spatial extents; size 1 or 2 (ny, nx)
  std::vector<double> data;

  Field() = default;
  Field(int channels_, std::vector<int> extents_)
      : channels(channels_), extents(std::move(extents_)) {
    data.assign(static_cast<std::size_t>(size()), 0.0);
  }

  long spatial_size() const {
    long s = 1;
    for (int e : extents) s *= e;
    return s;
  }
  long size() const { return channels * spatial_size(); }

  double* channel(int c) { return data.data() + static_cast<std::size_t>(c) * spatial_size(); }
  const double* channel(int c) const {
    return data.data() + static_cast<std::size_t>(c) * spatial_size();
  }

  bool same_shape(const Field& o) const {
    return channels == o.channels && extents == o.extents;
  }

  bool all_finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

inline std::string field_shape_str(const Field& f) {
  std::string s = "[" + std::to_string(f.channels);
  for (int e : f.extents) s += "," + std::to_string(e);
  return s + "]";
}

inline void require_same_shape(const Field& a, const Field& b, const char* where) {
  if (!a.same_shape(b))
    throw ShapeError(std::string(where) + ": shape mismatch " + field_shape_str(a) + " vs " +
                     field_shape_str(b));
}

inline double rms_diff(const Field& a, const Field& b) {
  require_same_shape(a, b, "rms_diff");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(a.data.size()));
}

inline double max_abs_diff(const Field& a, const Field& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    m = std::max(m, std::fabs(a.data[i] - b.data[i]));
  return m;
}

inline double field_sum(const Field& f) {
  double acc = 0.0;
  for (double v : f.data) acc += v;
  return acc;
}

}  // namespace pimrl
