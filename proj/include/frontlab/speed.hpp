#ifndef FRONTLAB_SPEED_HPP
#define FRONTLAB_SPEED_HPP

#include <string>
#include <vector>

#include "frontlab/eigensolver.hpp"
#include "frontlab/fields.hpp"
#include "frontlab/grid.hpp"

namespace frontlab {

/// Knobs for the minimal-speed search and the asymptotic sweeps.
struct SpeedOptions {
  double lambda_rel_width = 1e-4;  ///< golden-section stop: bracket width / minimizer
  double lambda_init = 0.0;        ///< starting decay rate; 0 means sqrt(mean zeta)
  double probe_delta = 0.05;       ///< relative offset of the interior-minimum probes
  int max_bracket_doublings = 60;
  int grid_n = 64;                 ///< base resolution per direction for sweeps
  int grid_n_max = 256;            ///< ceiling for advection-driven refinement
  double peclet_limit = 0.5;       ///< refine while M |q|_inf max(h) / alpha1 exceeds this
  EigenOptions eigen;
};

/// One minimal-speed evaluation at fixed drift amplitude M.
struct SpeedPoint {
  double M = 0.0;
  double eps = 1.0;            ///< reaction scale in effect
  double B = 1.0;              ///< diffusion scale in effect
  double lambda_star = 0.0;    ///< argmin of k(lambda)/lambda, original units
  double c_star = 0.0;         ///< minimal front speed, = k_at_min / lambda_star
  double k_at_min = 0.0;       ///< principal eigenvalue at the minimizer
  double ratio = 0.0;          ///< sweep-normalized speed: c*/M, c*/(M sqrt(eps)), c* sqrt(B)/M
  int grid_n = 0;              ///< resolution actually used
  double residual = 0.0;       ///< eigensolver residual at the minimizer
  int eigen_evaluations = 0;
  bool interior_minimum = false;  ///< both probes at lambda*(1 +- delta) sit at or above c*
  bool unimodal = false;          ///< sampled k(lambda)/lambda has a single local minimum
};

/// Least-squares extrapolation of a normalized-speed sequence along a ladder.
struct LadderFit {
  double limit = 0.0;     ///< extrapolated value in the asymptotic direction
  double slope = 0.0;     ///< coefficient of the correction term
  double residual = 0.0;  ///< RMS misfit over the fitted points
  std::string model;      ///< "c+a/M", "c+b*sqrt(eps)", or "c+b/sqrt(B)"
  int points_used = 0;
};

/// Normalized speeds along one ladder plus the extrapolated limit.
struct SpeedCurve {
  std::vector<SpeedPoint> points;
  LadderFit fit;
  std::string regime;  ///< "drift", "small_reaction", or "large_diffusion"
};

/// Two-level sweep: one inner drift ladder per outer scaling parameter,
/// with an outer extrapolation of the inner limits.
struct MixedSweep {
  std::vector<double> outer_parameter;  ///< eps or B ladder, as given
  std::vector<SpeedCurve> inner;        ///< one normalized drift ladder per value
  std::vector<double> inner_limits;     ///< fit limit of each inner ladder
  LadderFit outer_fit;
  std::string regime;

  /// All points flattened in ladder order, for CSV emission.
  std::vector<SpeedPoint> all_points() const;
};

/// Minimizes k(lambda)/lambda over lambda > 0 on a fixed grid: bracket by
/// doubling from lambda_init, then golden section to the configured relative
/// width. Records the interior-minimum certificate and the unimodality of the
/// full probe set. Throws BracketFailure when doubling exhausts its budget
/// without enclosing a minimum.
SpeedPoint minimal_speed(const Grid& grid, const FieldSet& fields, double M,
                         const SpeedOptions& opt = {});

/// Minimal speeds over an increasing M ladder with advection-driven grid
/// refinement, normalized as c*(M)/M, plus the 1/M-model extrapolation over
/// the top decade of the ladder.
SpeedCurve drift_sweep(const CellSpec& cell, const FieldDefs& defs,
                       const std::vector<double>& M_ladder,
                       const SpeedOptions& opt = {});

/// Inner drift sweeps with reaction scaled by each eps, normalized as
/// c*(M)/(M sqrt(eps)); the outer fit extrapolates the inner limits in
/// sqrt(eps). The eps ladder must be decreasing within (0, 1].
MixedSweep small_reaction_sweep(const CellSpec& cell, const FieldDefs& defs,
                                const std::vector<double>& eps_ladder,
                                const std::vector<double>& M_ladder,
                                const SpeedOptions& opt = {});

/// Inner drift sweeps with diffusion scaled by each B, normalized as
/// c*(M) sqrt(B)/M; the outer fit extrapolates in 1/sqrt(B). The B ladder
/// must be increasing with B >= 1; the B = 1 ladder reproduces drift_sweep
/// bit for bit.
MixedSweep large_diffusion_sweep(const CellSpec& cell, const FieldDefs& defs,
                                 const std::vector<double>& B_ladder,
                                 const std::vector<double>& M_ladder,
                                 const SpeedOptions& opt = {});

/// Principal eigenvalue k(lambda, M) of the linearized front operator at a
/// prescribed exponential decay rate lambda (original, unrescaled units).
double linearized_growth_rate(const Grid& grid, const FieldSet& fields,
                              double lambda, double M,
                              const EigenOptions& opt = {},
                              double* residual = nullptr);

}  // namespace frontlab

#endif
