#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace pimrl {

// Invalid user input or config; CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem problems; CLI maps this to exit code 3.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Container-format violations, one category per failure mode.
struct FormatError : IoError {
  enum class Kind { bad_magic, bad_version, truncated, inconsistent_header };

  FormatError(Kind k, const std::string& what) : IoError(what), kind(k) {}

  Kind kind;
};

// Non-finite values from an integrator or network; CLI exit code 4.
struct DivergenceError : std::runtime_error {
  DivergenceError(std::string phase_, long step_, const std::string& what)
      : std::runtime_error(what), phase(std::move(phase_)), step(step_) {}

  std::string phase;
  long step;
};

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace pimrl
