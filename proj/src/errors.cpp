#include "frontlab/errors.hpp"

namespace frontlab {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_spec: return "InvalidSpec";
    case ErrorCode::evaluation_failure: return "EvaluationFailure";
    case ErrorCode::assembly_failure: return "AssemblyFailure";
    case ErrorCode::precondition_violation: return "PreconditionViolation";
    case ErrorCode::no_convergence: return "NoConvergence";
    case ErrorCode::positivity_loss: return "PositivityLoss";
    case ErrorCode::bracket_failure: return "BracketFailure";
    case ErrorCode::not_shear: return "NotShear";
    case ErrorCode::degenerate_region: return "DegenerateRegion";
    case ErrorCode::singular_mass: return "SingularMass";
    case ErrorCode::singular_stiffness: return "SingularStiffness";
    case ErrorCode::not_first_integral: return "NotFirstIntegral";
    case ErrorCode::not_divergence_free: return "NotDivergenceFree";
    case ErrorCode::tracing_failure: return "TracingFailure";
    case ErrorCode::no_channel: return "NoChannel";
    case ErrorCode::no_front: return "NoFront";
    case ErrorCode::cfl_violation: return "CFLViolation";
    case ErrorCode::config_error: return "ConfigError";
  }
  return "UnknownError";
}

}  // namespace frontlab
