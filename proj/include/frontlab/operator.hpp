#ifndef FRONTLAB_OPERATOR_HPP
#define FRONTLAB_OPERATOR_HPP

#include <Eigen/Sparse>
#include <vector>

#include "frontlab/fields.hpp"
#include "frontlab/grid.hpp"

namespace frontlab {

/// Sparse discretization of the rescaled eigenvalue operator
///
///   L psi = div(A grad psi) + [M q + 2 (l'/M) A e] . grad psi
///           + [(l'/M)^2 e.Ae + l' q.e + (l'/M) div(A e) + zeta] psi
///
/// on one periodicity cell, where l' is the rescaled decay rate lambda' and
/// e the front direction. Diffusion is centered in flux form, advection is
/// first-order upwind with the coupling on the downstream node so every
/// off-diagonal entry stays nonnegative for diagonal A, and strip walls carry
/// the oblique flux condition nu . A grad psi = -(l'/M) (nu . A e) psi
/// eliminated into the wall rows.
struct DiscreteOperator {
  Eigen::SparseMatrix<double, Eigen::RowMajor> L;
  double lambda_prime = 0.0;
  double M = 0.0;

  double sigma = 0.0;          ///< shift making L + sigma I entrywise nonnegative
  double offdiag_min = 0.0;    ///< most negative off-diagonal entry
  double row_sum_max = 0.0;    ///< Gershgorin bound on the principal eigenvalue
  double row_sum_min = 0.0;
  double zero_order_max = 0.0; ///< max of the zero-order coefficient
  double zero_order_min = 0.0;
  double coeff_scale = 0.0;    ///< max |entry|, used to scale tolerances
  double div_Ae_inf = 0.0;     ///< max |div(A e)| over nodes

  bool metzler(double rel_tol = 1e-13) const {
    return offdiag_min >= -rel_tol * coeff_scale;
  }
};

/// Assembles the operator for one (lambda', M) pair. Preconditions:
/// lambda' > 0 and M > 0, else PreconditionViolation; non-finite entries
/// raise AssemblyFailure.
DiscreteOperator assemble(const Grid& grid, const FieldSet& fields,
                          double lambda_prime, double M);

/// y = L x.
void apply_operator(const DiscreteOperator& op, const std::vector<double>& x,
                    std::vector<double>& y);

}  // namespace frontlab

#endif
