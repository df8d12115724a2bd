#ifndef FRONTLAB_ANSATZ_HPP
#define FRONTLAB_ANSATZ_HPP

#include <Eigen/Dense>

#include <vector>

#include "frontlab/fields.hpp"
#include "frontlab/grid.hpp"
#include "frontlab/stream.hpp"
#include "frontlab/topology.hpp"

namespace frontlab {

/// Construction family of a drift-invariant ansatz space.
enum class AnsatzKind { shear_exact, level_set };

/// Finite-dimensional space of grid functions w with q . grad w = 0 up to
/// quadrature tolerance, together with the assembled quadratic forms that
/// the variational speed limits are evaluated on.
struct AnsatzSpace {
  AnsatzKind kind = AnsatzKind::shear_exact;
  std::vector<std::vector<double>> basis;  ///< node values, one vector per w_k
  Eigen::MatrixXd mass;                    ///< int w_i w_j
  Eigen::MatrixXd stiffness;               ///< int grad w_i . A grad w_j
  Eigen::MatrixXd growth;                  ///< int zeta w_i w_j
  Eigen::MatrixXd drift;                   ///< int (q . e) w_i w_j
  Eigen::VectorXd drift_linear;            ///< int (q . e) w_i
  double first_integral_defect = 0.0;      ///< max_k |q.grad w_k| / |w_k|_H1
  int regions = 0;                         ///< level-band regions represented
  int degenerate_regions = 0;              ///< regions skipped (range ~ 0)
  double zeta_mean = 0.0;
  double zeta_inf = 0.0;
  double q_e_inf = 0.0;
  double cell_measure = 0.0;
};

/// Shape of the drift-rate profile h on the sampled window.
enum class HCase { convex_decreasing, interior_min };

/// Sampled g and h = g / lambda along a log-spaced lambda grid, with the
/// infimum of h certified by a bracket.
struct HLambdaProfile {
  std::vector<double> lambda;
  std::vector<double> g;
  std::vector<double> h;
  HCase tag = HCase::convex_decreasing;
  double inf_h = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  double lambda_arg = 0.0;          ///< refined minimizer, or the last lambda
  double drift_quotient_sup = 0.0;  ///< top eigenvalue of (drift, mass)
};

/// Variational limit value with its certification bracket.
struct VariationalLimit {
  double value = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  HCase tag = HCase::convex_decreasing;
};

/// Drift integrals of a single admissible function.
struct DriftTerm {
  Vec2 vector{0.0, 0.0};  ///< int q w^2
  double along_e = 0.0;   ///< int (q . e) w^2
};

/// Exact first integrals of a unidirectional drift: hat functions of y alone.
/// Throws NotShear when q has x-dependence or a transverse component.
AnsatzSpace build_shear_space(const Grid& grid, const FieldSet& fields);

/// Per-region piecewise-linear functions of the stream value, zero at
/// separatrix boundaries, free (and continuity-coupled) at extremum
/// boundaries, plus the global constant. Regions are the connected
/// components of the bands between consecutive divider values of the
/// trajectory report. knots counts value nodes per region and is rounded
/// up to 2^m + 1 so that doubling refines the space exactly.
AnsatzSpace build_level_set_space(const Grid& grid, const FieldSet& fields,
                                  const StreamFunction& stream,
                                  const TrajectoryReport& report,
                                  int knots = 64);

/// Largest eigenvalue of the pencil (growth - stiffness + lambda drift, mass);
/// a lower bound for the continuum growth envelope. Throws SingularMass.
double g_of_lambda(const AnsatzSpace& space, double lambda);

/// Maximizer behind g_of_lambda; ties in the top eigenvalue are broken
/// toward the largest drift quotient.
Eigen::VectorXd g_maximizer(const AnsatzSpace& space, double lambda);

/// Log-spaced lambda window centered on sqrt(mean zeta) *
/// max(1, |q.e|_inf / mean zeta), spanning the requested decades.
std::vector<double> default_lambda_grid(const AnsatzSpace& space,
                                        int points = 25,
                                        double decades = 3.0);

/// Samples g and h over the grid (>= 16 log-spaced points over >= 3
/// decades), classifies the profile, refines an interior minimum by golden
/// section, and checks the convexity, floor, and sandwich invariants.
HLambdaProfile h_profile(const AnsatzSpace& space,
                         const std::vector<double>& lambda_grid);

/// inf_lambda h: the large-drift limit of c* / M restricted to the ansatz,
/// with the bracket certified by the profile case.
VariationalLimit large_drift_limit(const AnsatzSpace& space,
                                   const HLambdaProfile& profile);

/// (2 sqrt(int zeta) / |C|) * max_w int (q.e) w / sqrt(int grad w . A grad w)
/// over the constant-orthogonal complement: the shared limit of the
/// small-reaction and large-diffusion scalings. Throws SingularStiffness.
double mixed_limit(const AnsatzSpace& space);

/// Drift integrals of an explicit grid function, using the same node
/// quadrature as the topology channel witness. Throws NotFirstIntegral when
/// the centered-difference advective derivative of w is too large.
DriftTerm drift_term(const Grid& grid, const FieldSet& fields,
                     const std::vector<double>& w);

}  // namespace frontlab

#endif
