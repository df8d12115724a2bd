/// Grid construction, field sampling, catalog structure, and validation.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "frontlab/catalog.hpp"
#include "frontlab/fields.hpp"
#include "frontlab/grid.hpp"

using namespace frontlab;

static CellSpec torus_spec(int n) {
  CellSpec s;
  s.geometry = Geometry::torus;
  s.d = 2;
  s.nx = s.ny = n;
  return s;
}

static CellSpec strip_spec(int n) {
  CellSpec s;
  s.geometry = Geometry::strip;
  s.d = 1;
  s.nx = s.ny = n;
  return s;
}

TEST_CASE("unit torus at n=64 has 4096 nodes and hx=1/64") {
  Grid g = build_grid(torus_spec(64));
  CHECK(g.node_count() == 4096);
  CHECK(g.hx == doctest::Approx(1.0 / 64).epsilon(1e-15));
  CHECK(g.hy == doctest::Approx(1.0 / 64).epsilon(1e-15));
  CHECK(g.cell_measure() == 1.0);
}

TEST_CASE("strip stores both wall rows and weights sum to the cell measure") {
  CellSpec s = strip_spec(16);
  s.L1 = 2.0;
  s.L2 = 0.5;
  Grid g = build_grid(s);
  CHECK(g.rows == 17);
  CHECK(g.node_count() == 16 * 17);
  double total = 0.0;
  for (int j = 0; j < g.rows; ++j) total += g.node_weight(j) * g.nx;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("odd nx is rejected") {
  CellSpec s = torus_spec(64);
  s.nx = 63;
  CHECK_THROWS_AS(build_grid(s), Error);
  try {
    build_grid(s);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_spec);
  }
}

TEST_CASE("undersized and non-positive specs are rejected") {
  CellSpec s = torus_spec(6);
  CHECK_THROWS_AS(build_grid(s), Error);
  s = torus_spec(64);
  s.L1 = 0.0;
  CHECK_THROWS_AS(build_grid(s), Error);
  s = torus_spec(64);
  s.d = 1;  // torus geometry with d = 1 is inconsistent
  CHECK_THROWS_AS(build_grid(s), Error);
}

TEST_CASE("periodic index wrap is involutive") {
  Grid g = build_grid(torus_spec(8));
  for (int i = -8; i < 16; ++i)
    for (int j = -8; j < 16; ++j) CHECK(g.idx(i, j) == g.idx(i + 8, j + 8));
}

TEST_CASE("catalog closures are L-periodic at sampled nodes") {
  CellSpec spec = torus_spec(16);
  for (const char* name : {"shear_sin", "shear_cos", "cellular", "paper_nonperiodic"}) {
    CatalogSelection sel;
    sel.drift = name;
    FieldDefs defs = make_fields(spec, sel);
    Grid g = build_grid(spec);
    for (int i = 0; i < g.nx; ++i)
      for (int j = 0; j < g.rows; ++j) {
        Vec2 a = defs.q(g.x(i), g.y(j));
        Vec2 b = defs.q(g.x(i) + spec.L1, g.y(j) - spec.L2);
        CHECK(a.x == doctest::Approx(b.x).epsilon(1e-12));
        CHECK(a.y == doctest::Approx(b.y).epsilon(1e-12));
      }
  }
}

TEST_CASE("shear_sin on the unit torus validates cleanly") {
  CellSpec spec = torus_spec(32);
  CatalogSelection sel;
  sel.drift = "shear_sin";
  Grid g = build_grid(spec);
  FieldSet fs = sample_fields(g, make_fields(spec, sel));
  CHECK(fs.alpha1 == 1.0);
  CHECK(fs.alpha2 == 1.0);
  CHECK(fs.q_e_inf == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fs.zeta_mean == doctest::Approx(1.0).epsilon(1e-14));
  ValidationReport rep = validate_fields(g, fs);
  for (const auto& issue : rep.issues) {
    INFO(issue.condition, " residual=", issue.residual);
    CHECK(issue.pass);
  }
  CHECK(rep.ok);
}

TEST_CASE("all catalog drifts validate on the unit torus") {
  CellSpec spec = torus_spec(64);
  for (const char* name : {"zero", "shear_sin", "shear_cos", "cellular", "paper_nonperiodic"}) {
    CatalogSelection sel;
    sel.drift = name;
    Grid g = build_grid(spec);
    FieldSet fs = sample_fields(g, make_fields(spec, sel));
    ValidationReport rep = validate_fields(g, fs);
    INFO("drift family ", name);
    CHECK(rep.ok);
  }
}

TEST_CASE("sign-changing zeta fails validation with the offending condition") {
  CellSpec spec = torus_spec(16);
  CatalogSelection sel;
  sel.zeta = "cos_y:0,1";  // zeta = cos(2 pi y), negative on half the cell
  Grid g = build_grid(spec);
  FieldSet fs = sample_fields(g, make_fields(spec, sel));
  ValidationReport rep = validate_fields(g, fs);
  CHECK_FALSE(rep.ok);
  const ValidationIssue* issue = rep.find("zeta_positive");
  REQUIRE(issue != nullptr);
  CHECK_FALSE(issue->pass);
  // the reaction bound degrades alongside, but zeta_positive is the root cause
}

TEST_CASE("strip shear respects wall impermeability") {
  CellSpec spec = strip_spec(16);
  CatalogSelection sel;
  sel.drift = "shear_sin";
  Grid g = build_grid(spec);
  FieldSet fs = sample_fields(g, make_fields(spec, sel));
  ValidationReport rep = validate_fields(g, fs);
  const ValidationIssue* wall = rep.find("wall_impermeability");
  REQUIRE(wall != nullptr);
  CHECK(wall->pass);
}

TEST_CASE("non-finite closure raises EvaluationFailure") {
  CellSpec spec = torus_spec(8);
  CatalogSelection sel;
  FieldDefs defs = make_fields(spec, sel);
  defs.zeta = [](double x, double) { return x > 0.4 ? std::nan("") : 1.0; };
  Grid g = build_grid(spec);
  CHECK_THROWS_AS(sample_fields(g, defs), Error);
}

TEST_CASE("paper_nonperiodic drift is smooth across the flat zone") {
  CellSpec spec = torus_spec(8);
  CatalogSelection sel;
  sel.drift = "paper_nonperiodic";
  FieldDefs defs = make_fields(spec, sel);
  // at y integer the whole field vanishes with all derivatives
  Vec2 at_wall = defs.q(0.37, 0.0);
  CHECK(at_wall.x == 0.0);
  CHECK(at_wall.y == 0.0);
  // just off the flat zone values stay tiny
  Vec2 near_wall = defs.q(0.37, 0.02);
  CHECK(std::abs(near_wall.x) < 1e-100);
  CHECK(std::abs(near_wall.y) < 1e-100);
  // mid-channel the drift is order one
  Vec2 mid = defs.q(0.37, 0.5);
  CHECK((std::abs(mid.x) + std::abs(mid.y)) > 0.1);
}

TEST_CASE("fourier drift loads a coefficient file and validates") {
  const char* path = "fourier_modes_test.txt";
  {
    FILE* f = fopen(path, "w");
    REQUIRE(f != nullptr);
    fprintf(f, "# two-mode stream function\n1 0 0.3 0.0\n1 1 0.0 0.2\n");
    fclose(f);
  }
  CellSpec spec = torus_spec(32);
  CatalogSelection sel;
  sel.drift = std::string("fourier:") + path;
  Grid g = build_grid(spec);
  FieldSet fs = sample_fields(g, make_fields(spec, sel));
  ValidationReport rep = validate_fields(g, fs);
  CHECK(rep.ok);
  remove(path);
}

TEST_CASE("unknown catalog names raise ConfigError") {
  CellSpec spec = torus_spec(8);
  CatalogSelection sel;
  sel.drift = "vortex_street";
  CHECK_THROWS_AS(make_fields(spec, sel), Error);
  sel.drift = "zero";
  sel.zeta = "const";  // missing argument
  CHECK_THROWS_AS(make_fields(spec, sel), Error);
}
