#ifndef FRONTLAB_VERIFY_HPP
#define FRONTLAB_VERIFY_HPP

#include <string>
#include <vector>

#include "frontlab/ansatz.hpp"
#include "frontlab/eigensolver.hpp"
#include "frontlab/fields.hpp"
#include "frontlab/grid.hpp"
#include "frontlab/speed.hpp"
#include "frontlab/topology.hpp"

namespace frontlab {

/// Relative residual of the speed decomposition identity at (lambda', M):
/// mu/lambda' int w^2 against the A-weighted square term over lambda' plus
/// the drift integral plus (growth minus Dirichlet energy) over lambda'.
/// w must be a first integral of the drift; the profile is checked first and
/// NotFirstIntegral is thrown otherwise.
double decomposition_identity_check(const Grid& grid, const FieldSet& fields,
                                    double lambda_prime, double M,
                                    const std::vector<double>& w,
                                    const EigenOptions& opt = {});

/// Decay table of r(M) = ||q . grad psi|| for the principal eigenfunction
/// psi at fixed lambda', over an increasing drift ladder.
struct FirstIntegralDecay {
  std::vector<double> M;
  std::vector<double> r;
  double noise_floor = 0.0;  ///< gradient-scale noise inherited from solver residuals
  bool decreasing_top_decade = false;
};

/// Measures how far the eigenfunction is from a first integral of q as the
/// drift grows; the table must decrease over the top decade of the ladder.
FirstIntegralDecay eigenfunction_first_integral_check(
    const Grid& grid, const FieldSet& fields, double lambda_prime,
    const std::vector<double>& M_ladder, const EigenOptions& opt = {});

/// Ladder comparison of the minimal speed under diffusion M A and drift
/// M^gamma q against the homogenized closed form.
struct HomogenizedComparison {
  double gamma = 0.0;
  std::vector<double> M;
  std::vector<double> ratio;  ///< c* / sqrt(M) per ladder entry
  double closed_form = 0.0;   ///< 2 sqrt(mean e.Ae) sqrt(mean zeta)
  double gap_at_top = 0.0;    ///< relative gap at the largest M
};

/// Requires div(A e) = 0 and gamma in [0, 1/2]; throws PreconditionViolation
/// otherwise. The drift exponent range is where the closed form is exact.
HomogenizedComparison homogenized_check(const CellSpec& cell, const FieldDefs& defs,
                                        double gamma,
                                        const std::vector<double>& M_ladder,
                                        const SpeedOptions& opt = {});

/// One named agreement check inside a consistency report.
struct CheckStatus {
  std::string name;
  bool enabled = true;
  bool pass = true;
  double value = 0.0;  ///< measured discrepancy
  double tolerance = 0.0;
  std::string detail;
};

/// Ladders and tolerances for the combined three-route comparison.
struct ConsistencyOptions {
  std::vector<double> M_ladder{1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024};
  std::vector<double> eps_ladder{1.0, 0.25, 0.0625, 0.015625};
  std::vector<double> B_ladder{1.0, 4.0, 16.0, 64.0};
  std::vector<double> mixed_M_ladder{1, 4, 16, 64, 256};
  double agree_rel = 0.05;  ///< eigen limit vs variational limit
  double mixed_rel = 0.10;  ///< pairwise tolerance among the three mixed limits
  bool run_mixed = true;
  bool run_identity = true;
  bool run_decay = true;
  double identity_lambda_prime = 1.0;
  double identity_M = 16.0;
  int knots = 64;  ///< level-set ansatz resolution when the drift is not a shear
  SpeedOptions speed;
};

/// Cross-validation of the eigenvalue sweep, the variational limits, and the
/// trajectory-topology verdict on one periodic medium.
struct ConsistencyReport {
  SpeedCurve drift;              ///< c*(M) ladder with extrapolated limit
  HLambdaProfile profile;        ///< variational h profile
  VariationalLimit variational;  ///< inf h with certification bracket
  PositivityVerdict verdict;
  AnsatzKind ansatz_kind = AnsatzKind::shear_exact;
  double eigen_limit = 0.0;   ///< extrapolated c*(M)/M
  double mixed_eps = 0.0;     ///< small-reaction outer limit
  double mixed_B = 0.0;       ///< large-diffusion outer limit
  double mixed_variational = 0.0;
  double identity_residual = 0.0;
  FirstIntegralDecay decay;
  std::vector<CheckStatus> checks;
  bool pass = true;  ///< every enabled check within tolerance
};

/// Runs all enabled routes and asserts their agreements; the report is
/// emitted even when a check fails. Solver errors propagate.
ConsistencyReport consistency_report(const CellSpec& cell, const FieldDefs& defs,
                                     const ConsistencyOptions& opt = {});

}  // namespace frontlab

#endif  // FRONTLAB_VERIFY_HPP
