#pragma once

#include "pimrl/field.hpp"
#include "pimrl/tensor.hpp"

namespace pimrl {

inline Shape field_shape(const Field& f) {
  Shape s;
  s.reserve(1 + f.extents.size());
  s.push_back(f.channels);
  for (int e : f.extents) s.push_back(e);
  return s;
}

inline Tensor field_leaf(Graph& g, const Field& f, bool requires_grad = false) {
  return g.leaf(field_shape(f), f.data, requires_grad);
}

inline Field field_from(const Tensor& t) {
  const Shape& s = t.shape();
  Field f(s[0], std::vector<int>(s.begin() + 1, s.end()));
  f.data = t.values();
  return f;
}

}  // namespace pimrl
