#pragma once

#include <stdexcept>
#include <string>

namespace expeval {

/// Shape disagreement between tensors or between a tensor and a layer.
class ShapeError : public std::invalid_argument {
 public:
  explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

/// Input on which the requested quantity is mathematically undefined
/// (constant map for a rank correlation, zero-variance series, ...).
class DegenerateInputError : public std::domain_error {
 public:
  explicit DegenerateInputError(const std::string& what) : std::domain_error(what) {}
};

/// A metric whose preconditions are not met (e.g. empty separation set).
class UndefinedMetricError : public std::domain_error {
 public:
  explicit UndefinedMetricError(const std::string& what) : std::domain_error(what) {}
};

/// Malformed file contents (bad magic, truncated payload, ...).
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid configuration values.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Training produced a non-finite loss.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace expeval
