#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mvts {

// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration: bad hyperparameters, incompatible strategy/data.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// API misuse, e.g. backward from a non-scalar or an empty graph.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Tensor extents that do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Dataset content that cannot satisfy a request.
class DataError : public Error {
 public:
  using Error::Error;
};

// Malformed binary file. Carries the byte offset where decoding failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace mvts
