#pragma once

#include <string>
#include <vector>

#include "pimrl/tensor.hpp"

namespace pimrl {

// Named trainable (or fixed) buffer; the unit of checkpoint serialization.
struct Param {
  std::string name;
  Shape shape;
  std::vector<double> value;

  Param() = default;
  Param(std::string name_, Shape shape_)
      : name(std::move(name_)), shape(std::move(shape_)) {
    value.assign(static_cast<std::size_t>(numel(shape)), 0.0);
  }
  Param(std::string name_, Shape shape_, std::vector<double> value_)
      : name(std::move(name_)), shape(std::move(shape_)), value(std::move(value_)) {}
};

}  // namespace pimrl
