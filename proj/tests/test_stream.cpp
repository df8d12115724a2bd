/// Spectral stream-potential solves: anchors, idempotence, strip symmetry,
/// and rejection of fields without a potential.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "frontlab/catalog.hpp"
#include "frontlab/errors.hpp"
#include "frontlab/stream.hpp"

using namespace frontlab;

namespace {

constexpr double two_pi = 6.283185307179586476925286766559;

CellSpec square_cell(int n) {
  CellSpec spec;
  spec.nx = spec.ny = n;
  return spec;
}

FieldSet catalog_fields(const Grid& grid, const std::string& drift) {
  CatalogSelection sel;
  sel.drift = drift;
  return sample_fields(grid, make_fields(grid.spec, sel));
}

double sup_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("cosine shear maps to the closed-form potential") {
  Grid grid = build_grid(square_cell(64));
  FieldSet fields = catalog_fields(grid, "shear_cos");

  StreamFunction sf = solve_stream(grid, fields);

  double worst = 0.0;
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.rows; ++j) {
      double expect = -std::sin(two_pi * grid.y(j)) / two_pi;
      worst = std::max(worst, std::abs(sf.phi[grid.idx(i, j)] - expect));
    }
  CHECK(worst < 1e-12);
  CHECK(sf.residual_spectral < 1e-12);
  CHECK(sf.mean_abs < 1e-14);
}

TEST_CASE("cellular drift recovers the catalog potential") {
  Grid grid = build_grid(square_cell(64));
  CatalogSelection sel;
  sel.drift = "cellular";
  FieldDefs defs = make_fields(grid.spec, sel);
  FieldSet fields = sample_fields(grid, defs);

  StreamFunction sf = solve_stream(grid, fields);

  double worst = 0.0;
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.rows; ++j) {
      double expect = defs.phi(grid.x(i), grid.y(j));
      worst = std::max(worst, std::abs(sf.phi[grid.idx(i, j)] - expect));
    }
  CHECK(worst < 1e-10);
  CHECK(sf.residual_spectral < 1e-12);
  CHECK(sf.residual_centered > sf.residual_spectral);
  CHECK(sf.residual_centered < 1e-2);
}

TEST_CASE("solve and perpendicular gradient are mutually inverse") {
  for (std::string drift : {"shear_sin", "shear_cos", "cellular"}) {
    CAPTURE(drift);
    Grid grid = build_grid(square_cell(64));
    FieldSet fields = catalog_fields(grid, drift);

    StreamFunction first = solve_stream(grid, fields);
    auto [g1, g2] = grad_perp_spectral(grid, first.phi);
    StreamFunction second = solve_stream_nodes(grid, g1, g2);

    double diff = 0.0;
    for (std::size_t k = 0; k < first.phi.size(); ++k)
      diff = std::max(diff, std::abs(first.phi[k] - second.phi[k]));
    CHECK(diff < 1e-10 * std::max(1.0, sup_abs(first.phi)));
    CHECK(second.residual_spectral < 1e-10 * std::max(1.0, sup_abs(g1) + sup_abs(g2)));
  }
}

TEST_CASE("round trips become exact once the spectrum is projected") {
  Grid grid = build_grid(square_cell(64));
  FieldSet fields = catalog_fields(grid, "paper_nonperiodic");

  StreamFunction first = solve_stream(grid, fields);
  auto [g1, g2] = grad_perp_spectral(grid, first.phi);
  StreamFunction second = solve_stream_nodes(grid, g1, g2);
  auto [h1, h2] = grad_perp_spectral(grid, second.phi);
  StreamFunction third = solve_stream_nodes(grid, h1, h2);

  double first_trip = 0.0, second_trip = 0.0;
  for (std::size_t k = 0; k < first.phi.size(); ++k) {
    first_trip = std::max(first_trip, std::abs(first.phi[k] - second.phi[k]));
    second_trip = std::max(second_trip, std::abs(second.phi[k] - third.phi[k]));
  }
  CHECK(first_trip < 1e-8);
  CHECK(second_trip < 1e-12);
}

TEST_CASE("strip potential is constant along each wall") {
  CellSpec spec = square_cell(64);
  spec.geometry = Geometry::strip;
  spec.d = 1;
  Grid grid = build_grid(spec);

  FieldDefs defs;
  defs.A = [](double, double) { return SymMat2{}; };
  defs.q = [](double, double y) {
    return Vec2{std::sin(two_pi / 2.0 * y) - 2.0 / (two_pi / 2.0), 0.0};
  };
  defs.zeta = [](double, double) { return 1.0; };
  defs.f = [](double, double, double s) { return s * (1.0 - s); };
  defs.e = {1.0, 0.0};
  defs.name = "strip_half_sine";
  FieldSet fields = sample_fields(grid, defs);

  StreamFunction sf = solve_stream(grid, fields);

  CHECK(sf.wall_deviation < 1e-10);
  CHECK(sf.mean_abs < 1e-10);
  CHECK(sf.residual_spectral < 8e-4);

  // a zero-mean shear transports no net flux, so the wall constants agree
  // while the potential varies across the interior
  CHECK(std::abs(sf.wall_lo - sf.wall_hi) < 1e-10);
  double lo = sf.phi[0], hi = sf.phi[0];
  for (double v : sf.phi) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(hi - lo > 0.05);
}

TEST_CASE("fields without a potential are rejected") {
  Grid grid = build_grid(square_cell(32));

  std::vector<double> q1(grid.node_count()), q2(grid.node_count(), 0.0);

  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.rows; ++j)
      q1[grid.idx(i, j)] = std::sin(two_pi * grid.x(i));
  CHECK_THROWS_AS(solve_stream_nodes(grid, q1, q2), Error);
  try {
    solve_stream_nodes(grid, q1, q2);
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::not_divergence_free);
  }

  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.rows; ++j)
      q1[grid.idx(i, j)] = std::cos(two_pi * grid.y(j)) + 0.5;
  CHECK_THROWS_AS(solve_stream_nodes(grid, q1, q2), Error);
}

TEST_CASE("nonperiodic-trajectory field stays within the spectral tolerance") {
  Grid grid = build_grid(square_cell(128));
  FieldSet fields = catalog_fields(grid, "paper_nonperiodic");

  StreamFunction sf = solve_stream(grid, fields);
  CHECK(sf.residual_spectral < 1e-8 * fields.q_inf);
  CHECK(sf.mean_abs < 1e-12);

  double worst = 0.0;
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.rows; ++j) {
      double expect = fields.defs.phi(grid.x(i), grid.y(j));
      worst = std::max(worst, std::abs(sf.phi[grid.idx(i, j)] - expect));
    }
  CHECK(worst < 1e-8 * sup_abs(sf.phi));
}
