#pragma once

#include <stdexcept>
#include <string>

namespace restyle {

// Base for everything thrown by the library.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Tensor extents do not line up (messages name both shapes).
struct ShapeError : Error {
  using Error::Error;
};

// Math domain violation, e.g. log of a non-positive value. A collapsed
// probability reaching log() is a bug upstream, not something to paper over.
struct DomainError : Error {
  using Error::Error;
};

// API contract violation (non-scalar backward, out-of-range metric input...).
struct ContractError : Error {
  using Error::Error;
};

// Bad user input: empty corpus, empty sentence, single-class labels.
struct InputError : Error {
  using Error::Error;
};

// Invalid configuration: unknown schedule, ts phase without classifier.
struct ConfigError : Error {
  using Error::Error;
};

// File problems; messages name the offending path.
struct IoError : Error {
  using Error::Error;
};

// Divergence during optimization, e.g. NaN gradients.
struct TrainingError : Error {
  using Error::Error;
};

}  // namespace restyle
