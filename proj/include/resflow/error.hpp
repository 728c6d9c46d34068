#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace resflow {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Raised by the forward/backward sweeps. `sample` and `layer` locate the
/// failure; layer is 1-based (the layer whose update failed).
class FlowError : public Error {
 public:
  FlowError(const std::string& what, std::size_t sample, std::size_t layer)
      : Error(what + " (sample " + std::to_string(sample) + ", layer " + std::to_string(layer) + ")"),
        sample_(sample),
        layer_(layer) {}

  std::size_t sample() const noexcept { return sample_; }
  std::size_t layer() const noexcept { return layer_; }

 private:
  std::size_t sample_;
  std::size_t layer_;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : Error(field + ": " + message), field_(field) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace resflow
