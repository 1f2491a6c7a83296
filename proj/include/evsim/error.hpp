#pragma once

#include <stdexcept>
#include <string>

namespace evsim {

/// Invalid configuration or mismatched dimensions between pipeline stages.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed, truncated or undecodable input data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An event stream that violates ordering, completeness or payload rules.
class StreamError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace evsim
