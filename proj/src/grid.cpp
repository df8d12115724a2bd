#include "frontlab/grid.hpp"

#include <cmath>
#include <string>

namespace frontlab {

double Grid::integrate(const std::vector<double>& v) const {
  double acc = 0.0;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < rows; ++j) acc += v[idx(i, j)] * node_weight(j);
  return acc;
}

Grid build_grid(const CellSpec& spec) {
  if (spec.d != 1 && spec.d != 2)
    fail(ErrorCode::invalid_spec, "d must be 1 or 2, got " + std::to_string(spec.d));
  if (spec.d == 2 && spec.geometry != Geometry::torus)
    fail(ErrorCode::invalid_spec, "d = 2 requires torus geometry");
  if (spec.d == 1 && spec.geometry != Geometry::strip)
    fail(ErrorCode::invalid_spec, "d = 1 requires strip geometry");
  if (!(spec.L1 > 0.0) || !(spec.L2 > 0.0))
    fail(ErrorCode::invalid_spec, "cell lengths must be positive");
  if (!std::isfinite(spec.L1) || !std::isfinite(spec.L2))
    fail(ErrorCode::invalid_spec, "cell lengths must be finite");
  auto check_n = [](int n, const char* name) {
    if (n < 8) fail(ErrorCode::invalid_spec, std::string(name) + " must be >= 8");
    if (n % 2 != 0) fail(ErrorCode::invalid_spec, std::string(name) + " must be even");
  };
  check_n(spec.nx, "nx");
  check_n(spec.ny, "ny");

  Grid g;
  g.spec = spec;
  g.nx = spec.nx;
  g.rows = spec.geometry == Geometry::torus ? spec.ny : spec.ny + 1;
  g.hx = spec.L1 / spec.nx;
  g.hy = spec.L2 / spec.ny;
  return g;
}

}  // namespace frontlab
