#pragma once

#include <stdexcept>
#include <string>

namespace echoforge {

// Each error family maps onto one CLI exit code (see tools/echoforge_cli.cpp).

/// Invalid user-facing configuration (sweep bands, durations, policies).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A filter specification that cannot be met with the requested tap count.
class DesignError : public std::runtime_error {
 public:
  DesignError(const std::string& what, double achieved_db)
      : std::runtime_error(what), achieved_db_(achieved_db) {}
  double achieved_db() const noexcept { return achieved_db_; }

 private:
  double achieved_db_;
};

/// Matrix/tensor dimensions that violate an operation's contract.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or missing data on disk (WAV, manifest, EPRF, checkpoints).
class IngestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values or a failed numeric assertion.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace echoforge
