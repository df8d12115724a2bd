#ifndef FRONTLAB_TOPOLOGY_HPP
#define FRONTLAB_TOPOLOGY_HPP

#include <vector>

#include "frontlab/fields.hpp"
#include "frontlab/grid.hpp"
#include "frontlab/stream.hpp"

namespace frontlab {

/// One traced contour component of a level set, closed on the torus.
struct ContourComponent {
  std::vector<double> xs;  ///< vertex x coordinates, wrapped into [0, L1)
  std::vector<double> ys;  ///< vertex y coordinates, wrapped into [0, L2)
  int wind_x = 0;          ///< signed x-period wraps accumulated at closure
  int wind_y = 0;          ///< signed y-period wraps (always 0 on a strip)
  double arclength = 0.0;
  int orientation = 0;     ///< loops: +1 counterclockwise; winding: sign of wrap
  double grad_min = 0.0;   ///< smallest |grad phi| met along the component
};

/// Classification of one sampled level.
struct LevelSet {
  double level = 0.0;
  bool regular = true;  ///< no visited crossing fell below the gradient floor
  std::vector<ContourComponent> components;
};

/// Maximal band of consecutive regular levels sharing a nonzero primitive
/// winding.
struct Channel {
  double t_lo = 0.0;
  double t_hi = 0.0;
  int wind_x = 0;  ///< primitive winding common to the band
  int wind_y = 0;
};

struct ClassifyOptions {
  int levels = 129;              ///< target count of regular levels
  double gradient_floor = 1e-3;  ///< regular iff |grad phi| >= floor * max
  int max_steps_per_cell = 4;    ///< tracing budget per grid cell
};

/// Topology of the level sets of a stream potential: sampled levels with
/// traced contour components, the bands carrying nonzero winding, and the
/// values treated as critical (gradient-floor rejections plus discrete
/// saddles).
struct TrajectoryReport {
  std::vector<LevelSet> levels;         ///< all surviving levels, ascending
  std::vector<double> critical_values;  ///< traced levels refused certification
  std::vector<double> saddle_values;    ///< values at saddle or flat critical nodes
  std::vector<Channel> channels;
  bool has_unbounded_periodic = false;
  int prim_x = 0;  ///< primitive winding, (0, 0) when no level winds
  int prim_y = 0;
  Vec2 a;          ///< period vector (prim_x * L1, prim_y * L2)
  int requested_levels = 0;  ///< regular-level target asked for
  int sampled_levels = 0;    ///< distinct levels actually traced
  double value_min = 0.0;    ///< smallest node value of phi
  double value_max = 0.0;    ///< largest node value of phi
  double gradient_max = 0.0; ///< max node |grad phi| backing the floor
};

/// Verdict of the large-drift positivity criterion for front direction e.
struct PositivityVerdict {
  bool limit_positive = false;
  bool has_a = false;
  Vec2 a;
  double e_dot_a = 0.0;
};

/// Compactly supported witness w0 = eta(phi) on one connected component of a
/// winding band, zero elsewhere, together with its drift vector.
struct ChannelWitness {
  std::vector<double> w;  ///< node values
  Vec2 drift;             ///< integral of q w^2 over the cell
  double t_lo = 0.0;      ///< support band in level value
  double t_hi = 0.0;
  int support_nodes = 0;
  double off_axis = 0.0;  ///< |drift component orthogonal to a| / |drift|
};

/// Samples equi-quantile levels of phi (snapped to midpoints of value gaps so
/// no node sits exactly on a level), traces every level set by marching
/// squares with larger values kept on the left, and accumulates signed seam
/// crossings until each contour returns to its starting edge. Verifies that
/// all nonzero windings share one primitive vector. Throws TracingFailure on
/// a non-closing contour or inconsistent windings.
TrajectoryReport classify_trajectories(const Grid& grid,
                                       const StreamFunction& stream,
                                       const ClassifyOptions& opt = {});

/// Positive large-drift limit iff some level band winds and the period
/// vector is not orthogonal to e.
PositivityVerdict positivity_criterion(const TrajectoryReport& report,
                                       const Vec2& e);

/// Builds the witness from the first winding channel: a tent profile in the
/// level value over the middle half of the band, restricted to one connected
/// component. Throws NoChannel when no level winds.
ChannelWitness channel_witness(const Grid& grid, const FieldSet& fields,
                               const StreamFunction& stream,
                               const TrajectoryReport& report);

/// Labels the connected components (edge adjacency, periodic in x and, on a
/// torus, in y) of the node set {v : lo + margin < phi[v] < hi - margin}.
/// labels[v] = component id in [0, count), -1 outside the band. Returns the
/// component count; enumeration order is deterministic in the node index.
int label_band_components(const Grid& grid, const std::vector<double>& phi,
                          double lo, double hi, double margin,
                          std::vector<int>& labels);

}  // namespace frontlab

#endif
