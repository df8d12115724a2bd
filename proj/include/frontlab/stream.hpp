#ifndef FRONTLAB_STREAM_HPP
#define FRONTLAB_STREAM_HPP

#include <utility>
#include <vector>

#include "frontlab/fields.hpp"
#include "frontlab/grid.hpp"

namespace frontlab {

/// Mean-zero stream potential with q = (-dphi/dy, dphi/dx), plus solve
/// diagnostics. Strip solves run on the doubled reflection-symmetrized torus
/// and are restricted back to the strip rows.
struct StreamFunction {
  std::vector<double> phi;         ///< node values in grid layout
  double residual_spectral = 0.0;  ///< ||q - grad_perp phi||_inf, spectral derivative
  double residual_centered = 0.0;  ///< same residual with centered differences
  double mean_abs = 0.0;           ///< |cell mean of phi|
  double wall_lo = 0.0;            ///< strip only: potential on the y = 0 wall
  double wall_hi = 0.0;            ///< strip only: potential on the y = L2 wall
  double wall_deviation = 0.0;     ///< strip only: max deviation from the wall constants
};

struct StreamOptions {
  /// Relative spectral reconstruction residual above which the input is
  /// rejected as not divergence-free (or not zero-mean / not tangential).
  /// Representable fields sit at rounding level when band-limited and below
  /// 1e-4 for merely piecewise-smooth reflections, while violations show up
  /// at order one, so the default separates the two regimes cleanly.
  double divergence_tol = 1e-3;
};

/// Solves for the stream potential of the sampled drift by a spectral
/// Poisson solve with true wavenumbers; the rotation convention is fixed to
/// q = (-dphi/dy, dphi/dx). Throws NotDivergenceFree when the reconstruction
/// residual shows the drift admits no such potential.
StreamFunction solve_stream(const Grid& grid, const FieldSet& fields,
                            const StreamOptions& opt = {});

/// Same solve on raw node samples of the drift components.
StreamFunction solve_stream_nodes(const Grid& grid,
                                  const std::vector<double>& q1,
                                  const std::vector<double>& q2,
                                  const StreamOptions& opt = {});

/// Spectral perpendicular gradient (-dphi/dy, dphi/dx) of a node field;
/// strips differentiate the even reflection onto the doubled torus.
std::pair<std::vector<double>, std::vector<double>> grad_perp_spectral(
    const Grid& grid, const std::vector<double>& phi);

}  // namespace frontlab

#endif
