#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace routh {

enum class ErrorKind {
  InvalidArgument,
  NonFiniteEvaluation,
  SingularJacobian,
  NoConvergence,
  InconsistentConstraint,
  InconsistentDynamics,
  AmbiguousDynamics,
  TooShort,
  NotMechanical,
  NotCompatiblePoints,
  NotInImage,
  NotFreeAction,
  NotReducible,
  NotInvariant,
  ConfigError,
};

const char* to_string(ErrorKind kind);

/// Base exception for every failure raised by the library. The kind is the
/// stable, testable part; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

  /// Time at which an integrator hit the failure, when raised inside a flow.
  const std::optional<double>& failing_time() const noexcept { return time_; }
  void set_failing_time(double t) { time_ = t; }

 private:
  ErrorKind kind_;
  std::optional<double> time_;
};

class NoConvergenceError : public Error {
 public:
  NoConvergenceError(const std::string& message, double last_residual)
      : Error(ErrorKind::NoConvergence, message), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

class AmbiguousDynamicsError : public Error {
 public:
  AmbiguousDynamicsError(const std::string& message, Eigen::MatrixXd kernel)
      : Error(ErrorKind::AmbiguousDynamics, message), kernel_(std::move(kernel)) {}
  const Eigen::MatrixXd& kernel_basis() const noexcept { return kernel_; }

 private:
  Eigen::MatrixXd kernel_;
};

class NotReducibleError : public Error {
 public:
  NotReducibleError(const std::string& message, int probe_index)
      : Error(ErrorKind::NotReducible, message), probe_(probe_index) {}
  int probe_index() const noexcept { return probe_; }

 private:
  int probe_;
};

}  // namespace routh
