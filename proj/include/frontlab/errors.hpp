#ifndef FRONTLAB_ERRORS_HPP
#define FRONTLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace frontlab {

/// Failure categories raised by the library. Codes map onto process exit
/// codes at the CLI boundary: config problems exit 2, solver failures exit 3.
enum class ErrorCode {
  invalid_spec,          ///< malformed cell specification
  evaluation_failure,    ///< field closure returned non-finite data
  assembly_failure,      ///< operator assembly produced an inconsistent matrix
  precondition_violation,///< caller broke a documented precondition
  no_convergence,        ///< iteration budget exhausted
  positivity_loss,       ///< eigen iterate left the positive cone
  bracket_failure,       ///< no interior minimum bracket found
  not_shear,             ///< drift is not a function of y alone
  degenerate_region,     ///< level-set region too thin to carry basis functions
  singular_mass,         ///< ansatz mass form not positive definite
  singular_stiffness,    ///< stiffness form singular beyond the constant mode
  not_first_integral,    ///< candidate function varies along streamlines
  not_divergence_free,   ///< stream solve input has a curl-free component
  tracing_failure,       ///< contour tracing did not close
  no_channel,            ///< no winding channel available for a witness
  no_front,              ///< direct simulation produced no traveling interface
  cfl_violation,         ///< explicit step size exceeds the stability bound
  config_error,          ///< unparseable or unknown configuration input
};

const char* error_code_name(ErrorCode code);

/// Library-wide exception carrying a typed code plus a human-readable detail.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + detail),
        code_(code) {}

  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& detail) {
  throw Error(code, detail);
}

}  // namespace frontlab

#endif
