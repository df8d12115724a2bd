#ifndef FRONTLAB_GRID_HPP
#define FRONTLAB_GRID_HPP

#include <vector>

#include "frontlab/errors.hpp"

namespace frontlab {

/// Periodicity cell geometry. A torus is periodic in both coordinates; a
/// strip is periodic in x and bounded by impermeable walls at y = 0 and
/// y = L2.
enum class Geometry { torus, strip };

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }

/// Immutable description of the periodicity cell and its uniform tensor grid.
struct CellSpec {
  Geometry geometry = Geometry::torus;
  int d = 2;           ///< 1 = strip problem, 2 = torus problem
  double L1 = 1.0;     ///< cell length in x
  double L2 = 1.0;     ///< cell length in y
  int nx = 64;         ///< grid intervals in x (even, >= 8)
  int ny = 64;         ///< grid intervals in y (even, >= 8)
};

/// Uniform tensor grid over one periodicity cell. Nodes sit at
/// (i*hx, j*hy); on a torus the row j = ny coincides with j = 0 and is not
/// stored, on a strip both wall rows are stored.
class Grid {
public:
  CellSpec spec;
  double hx = 0.0;
  double hy = 0.0;
  int nx = 0;       ///< stored columns
  int rows = 0;     ///< stored rows: ny on a torus, ny + 1 on a strip

  bool periodic_y() const { return spec.geometry == Geometry::torus; }
  int node_count() const { return nx * rows; }
  double cell_measure() const { return spec.L1 * spec.L2; }

  double x(int i) const { return i * hx; }
  double y(int j) const { return j * hy; }

  int wrap_x(int i) const { return ((i % nx) + nx) % nx; }

  /// Flat index of node (i, j); x always wraps, y wraps only on a torus.
  int idx(int i, int j) const {
    if (periodic_y()) j = ((j % rows) + rows) % rows;
    return wrap_x(i) * rows + j;
  }

  bool is_wall(int j) const {
    return !periodic_y() && (j == 0 || j == rows - 1);
  }

  /// Quadrature weight of node (., j): hx*hy, halved on strip wall rows so
  /// that the weights sum exactly to |C| = L1*L2.
  double node_weight(int j) const {
    double w = hx * hy;
    return is_wall(j) ? 0.5 * w : w;
  }

  /// Sum of v over nodes against the node weights.
  double integrate(const std::vector<double>& v) const;
};

/// Validates the spec and derives grid quantities. Throws InvalidSpec.
Grid build_grid(const CellSpec& spec);

}  // namespace frontlab

#endif
