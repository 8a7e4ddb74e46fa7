#pragma once

#include <stdexcept>
#include <string>

namespace klab {

/// Invalid parameters supplied by a caller or a configuration file.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A check that holds by proof failed. Always an implementation bug.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double achieved_error)
      : std::runtime_error(what), achieved_error_(achieved_error) {}
  double achieved_error() const noexcept { return achieved_error_; }

 private:
  double achieved_error_;
};

/// Raised when a closed-form asymptotic bound is not yet met at the
/// requested parameters. Carries both values so callers can report them.
class AsymptoticRegimeError : public std::runtime_error {
 public:
  AsymptoticRegimeError(const std::string& what, double numeric, double bound)
      : std::runtime_error(what), numeric_(numeric), bound_(bound) {}
  double numeric() const noexcept { return numeric_; }
  double bound() const noexcept { return bound_; }

 private:
  double numeric_;
  double bound_;
};

enum class TopologyErrorKind {
  boundary_degenerate,
  boundary_crossing,  // a certified sign change on a boundary circle
  resolution,
  inconsistent,
  zero_straddle,
  degenerate_point,
};

const char* to_string(TopologyErrorKind kind) noexcept;

/// Hypotheses of a topological computation fail numerically. Experiments
/// count these as indeterminate outcomes.
class TopologyError : public std::runtime_error {
 public:
  TopologyError(TopologyErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  TopologyErrorKind kind() const noexcept { return kind_; }

 private:
  TopologyErrorKind kind_;
};

}  // namespace klab
