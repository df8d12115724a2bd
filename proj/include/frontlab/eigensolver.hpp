#ifndef FRONTLAB_EIGENSOLVER_HPP
#define FRONTLAB_EIGENSOLVER_HPP

#include <string>
#include <vector>

#include "frontlab/operator.hpp"

namespace frontlab {

/// Principal (Perron) eigenpair of a DiscreteOperator.
struct EigenResult {
  double mu = 0.0;
  std::vector<double> psi;   ///< positive eigenvector, normalized to int psi^2 = 1
  double residual = 0.0;     ///< ||L psi - mu psi||_inf / ||psi||_inf
  int iterations = 0;
  int factorizations = 0;    ///< resolvent path only
  std::string method;        ///< "resolvent" or "power"
};

struct EigenOptions {
  /// Convergence when the residual drops below tol_rel * coeff_scale.
  double tol_rel = 1e-12;
  int max_iter = 400;          ///< resolvent iterations
  long power_max_iter = 400000;
  std::string method = "auto";  ///< auto | resolvent | power
};

/// Computes the eigenvalue of maximal real part together with its positive
/// eigenvector. The default path runs Perron iteration on the resolvent
/// (tau I - L)^{-1}, which is entrywise nonnegative for tau above the
/// Gershgorin row-sum bound whenever the matrix has nonnegative
/// off-diagonals, so positive iterates stay positive; tau is re-anchored
/// near the Rayleigh quotient when convergence stalls. The "power" path is
/// the plain shifted power iteration on L + sigma I. Both start from the
/// constant vector for reproducibility.
///
/// Throws NoConvergence when the budget runs out and PositivityLoss when an
/// iterate leaves the positive cone on a matrix whose off-diagonal pattern
/// cannot guarantee it (callers should refine the grid).
///
/// A strictly positive `start` vector of matching size seeds the iteration
/// instead of the constant vector; sweeps chain nearby eigenvectors this way.
EigenResult principal_eigenpair(const Grid& grid, const DiscreteOperator& op,
                                const EigenOptions& opts = {},
                                const std::vector<double>* start = nullptr);

}  // namespace frontlab

#endif
