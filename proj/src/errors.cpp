#include "routh/errors.hpp"

namespace routh {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NonFiniteEvaluation: return "NonFiniteEvaluation";
    case ErrorKind::SingularJacobian: return "SingularJacobian";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::InconsistentConstraint: return "InconsistentConstraint";
    case ErrorKind::InconsistentDynamics: return "InconsistentDynamics";
    case ErrorKind::AmbiguousDynamics: return "AmbiguousDynamics";
    case ErrorKind::TooShort: return "TooShort";
    case ErrorKind::NotMechanical: return "NotMechanical";
    case ErrorKind::NotCompatiblePoints: return "NotCompatiblePoints";
    case ErrorKind::NotInImage: return "NotInImage";
    case ErrorKind::NotFreeAction: return "NotFreeAction";
    case ErrorKind::NotReducible: return "NotReducible";
    case ErrorKind::NotInvariant: return "NotInvariant";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace routh
