/// Variational ansatz spaces: the exact shear reduction against a dense
/// one-dimensional oracle, level-set spaces on shear and cellular flows,
/// the lambda profile of the growth envelope, both variational limits, and
/// the shared drift-term quadrature.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "frontlab/ansatz.hpp"
#include "frontlab/catalog.hpp"
#include "frontlab/errors.hpp"
#include "frontlab/stream.hpp"
#include "frontlab/topology.hpp"

using namespace frontlab;

namespace {

constexpr double pi = 3.141592653589793238462643383279;
constexpr double two_pi = 2.0 * pi;

CellSpec square_cell(int n) {
  CellSpec spec;
  spec.nx = spec.ny = n;
  return spec;
}

FieldSet catalog_fields(const Grid& grid, const std::string& drift,
                        double amplitude = 1.0) {
  CatalogSelection sel;
  sel.drift = drift;
  sel.drift_amplitude = amplitude;
  return sample_fields(grid, make_fields(grid.spec, sel));
}

/// Dense periodic finite-difference operator d^2/dy^2 + zeta + lambda q1 on
/// the grid rows, the exact analogue of the shear reduction.
double shear_oracle(const Grid& grid, const FieldSet& fields, double lambda) {
  const int n = grid.rows;
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
  const double inv2 = 1.0 / (grid.hy * grid.hy);
  for (int j = 0; j < n; ++j) {
    const int v = grid.idx(0, j);
    H(j, j) = fields.zeta[v] + lambda * fields.qe(v) - 2.0 * inv2;
    H(j, (j + 1) % n) += inv2;
    H(j, (j + n - 1) % n) += inv2;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(n - 1);
}

FieldDefs strip_half_sine() {
  FieldDefs defs;
  defs.A = [](double, double) { return SymMat2{}; };
  defs.q = [](double, double y) {
    return Vec2{std::sin(pi * y) - 2.0 / pi, 0.0};
  };
  defs.zeta = [](double, double) { return 1.0; };
  defs.f = [](double, double, double s) { return s * (1.0 - s); };
  defs.div_q = [](double, double) { return 0.0; };
  defs.e = {1.0, 0.0};
  defs.name = "strip_half_sine";
  return defs;
}

}  // namespace

TEST_CASE("shear space reproduces the dense one-dimensional oracle") {
  Grid grid = build_grid(square_cell(64));
  FieldSet fields = catalog_fields(grid, "shear_sin");
  AnsatzSpace space = build_shear_space(grid, fields);

  CHECK(space.kind == AnsatzKind::shear_exact);
  CHECK(space.basis.size() == 64);
  CHECK(space.regions == 0);
  CHECK(space.first_integral_defect == 0.0);

  for (double lambda : {0.5, 2.0, 10.0}) {
    const double g = g_of_lambda(space, lambda);
    CHECK(g == doctest::Approx(shear_oracle(grid, fields, lambda))
                   .epsilon(1e-10));
  }

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(space.mass.rows());
  CHECK((space.stiffness * ones).cwiseAbs().maxCoeff() <=
        1e-12 * space.stiffness.cwiseAbs().maxCoeff());
  CHECK(g_of_lambda(space, 0.0) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("shear space without drift ignores lambda") {
  Grid grid = build_grid(square_cell(32));
  FieldSet fields = catalog_fields(grid, "zero");
  AnsatzSpace space = build_shear_space(grid, fields);
  CHECK(g_of_lambda(space, 3.0) ==
        doctest::Approx(g_of_lambda(space, 0.0)).epsilon(1e-12));
}

TEST_CASE("two-dimensional drift is rejected by the shear builder") {
  Grid grid = build_grid(square_cell(32));
  FieldSet fields = catalog_fields(grid, "cellular");
  try {
    build_shear_space(grid, fields);
    FAIL("expected not_shear");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::not_shear);
  }
}

TEST_CASE("level-set space on a shear flow matches the exact reduction") {
  Grid grid = build_grid(square_cell(64));
  FieldSet fields = catalog_fields(grid, "shear_sin");
  StreamFunction sf = solve_stream(grid, fields);
  TrajectoryReport report = classify_trajectories(grid, sf);
  AnsatzSpace shear = build_shear_space(grid, fields);
  AnsatzSpace level = build_level_set_space(grid, fields, sf, report, 64);

  CHECK(level.kind == AnsatzKind::level_set);
  CHECK(level.regions == 2);
  CHECK(level.degenerate_regions == 0);
  CHECK(level.first_integral_defect <= 1e-8);

  // Every node value lands on a knot here, so the level-set forms must
  // collapse onto the one-dimensional reduction to solver precision.
  for (double lambda : {0.5, 1.0, 10.0}) {
    const double gs = g_of_lambda(shear, lambda);
    const double gl = g_of_lambda(level, lambda);
    CHECK(gl == doctest::Approx(gs).epsilon(1e-9));
  }
}

TEST_CASE("cellular level-set regions carry no drift form") {
  Grid grid = build_grid(square_cell(64));
  FieldSet fields = catalog_fields(grid, "cellular");
  StreamFunction sf = solve_stream(grid, fields);
  TrajectoryReport report = classify_trajectories(grid, sf);
  AnsatzSpace space = build_level_set_space(grid, fields, sf, report, 33);

  CHECK(space.regions == 4);
  CHECK(space.basis.size() >= 100);
  CHECK(space.first_integral_defect <= 1e-8);
  CHECK(space.drift.cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(space.drift_linear.cwiseAbs().maxCoeff() <= 1e-12);

  const double range = report.value_max - report.value_min;
  std::vector<double> w(grid.node_count());
  for (int v = 0; v < grid.node_count(); ++v)
    w[v] = std::cos(two_pi * (sf.phi[v] - report.value_min) / range);
  const DriftTerm term = drift_term(grid, fields, w);
  CHECK(std::abs(term.along_e) <= 1e-12);
  CHECK(std::abs(term.vector.y) <= 1e-12);
}

TEST_CASE("a single knot reduces the space to constants") {
  Grid grid = build_grid(square_cell(32));
  FieldSet fields = catalog_fields(grid, "cellular");
  StreamFunction sf = solve_stream(grid, fields);
  TrajectoryReport report = classify_trajectories(grid, sf);
  AnsatzSpace space = build_level_set_space(grid, fields, sf, report, 1);

  CHECK(space.basis.size() == 1);
  CHECK(g_of_lambda(space, 7.0) ==
        doctest::Approx(space.zeta_mean).epsilon(1e-13));
}

TEST_CASE("knot refinement never lowers the growth envelope") {
  Grid grid = build_grid(square_cell(64));
  FieldSet fields = catalog_fields(grid, "cellular");
  StreamFunction sf = solve_stream(grid, fields);
  TrajectoryReport report = classify_trajectories(grid, sf);
  AnsatzSpace coarse = build_level_set_space(grid, fields, sf, report, 16);
  AnsatzSpace fine = build_level_set_space(grid, fields, sf, report, 32);

  for (double lambda : {0.3, 1.0, 3.0}) {
    const double gc = g_of_lambda(coarse, lambda);
    const double gf = g_of_lambda(fine, lambda);
    CHECK(gf >= gc - 1e-10 * std::max(1.0, std::abs(gc)));
  }
}

TEST_CASE("diffusion scaling rescales exactly the stiffness form") {
  Grid grid = build_grid(square_cell(32));
  FieldDefs defs = make_fields(square_cell(32), CatalogSelection{"shear_sin"});
  FieldSet fields = sample_fields(grid, defs);
  FieldSet doubled = sample_fields(grid, scale_diffusion(defs, 2.0));
  AnsatzSpace space = build_shear_space(grid, fields);
  AnsatzSpace space2 = build_shear_space(grid, doubled);

  CHECK((space2.stiffness - 2.0 * space.stiffness).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK((space2.mass - space.mass).cwiseAbs().maxCoeff() == 0.0);
  CHECK((space2.growth - space.growth).cwiseAbs().maxCoeff() == 0.0);
  CHECK((space2.drift - space.drift).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("shear profile finds the interior minimum of a dense scan") {
  Grid grid = build_grid(square_cell(64));
  FieldSet fields = catalog_fields(grid, "shear_sin");
  AnsatzSpace space = build_shear_space(grid, fields);

  std::vector<double> lgrid = default_lambda_grid(space);
  CHECK(lgrid.size() == 25);
  CHECK(lgrid[12] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(lgrid.back() / lgrid.front() == doctest::Approx(1.0e3).epsilon(1e-10));

  HLambdaProfile profile = h_profile(space, lgrid);
  CHECK(profile.tag == HCase::interior_min);

  double scan_min = std::numeric_limits<double>::infinity();
  double scan_arg = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double lambda =
        1e-3 * std::pow(1e7, static_cast<double>(k) / 999.0);
    const double h = g_of_lambda(space, lambda) / lambda;
    if (h < scan_min) {
      scan_min = h;
      scan_arg = lambda;
    }
  }
  CHECK(profile.inf_h <= scan_min + 1e-9);
  CHECK(profile.inf_h >= scan_min * (1.0 - 1e-3));
  CHECK(profile.lambda_arg == doctest::Approx(scan_arg).epsilon(0.05));
  CHECK(profile.bracket_lo <= scan_min + 1e-12);
  CHECK(profile.bracket_hi >= profile.inf_h - 1e-15);

  for (size_t i = 0; i < profile.h.size(); ++i) {
    CHECK(profile.h[i] >= profile.inf_h - 1e-10);
    CHECK(profile.h[i] <= space.zeta_inf / profile.lambda[i] +
                              profile.drift_quotient_sup + 1e-8);
  }

  const double lo = g_of_lambda(space, profile.lambda_arg / 1.1) /
                    (profile.lambda_arg / 1.1);
  const double hi = g_of_lambda(space, profile.lambda_arg * 1.1) /
                    (profile.lambda_arg * 1.1);
  CHECK(lo >= profile.inf_h - 1e-12);
  CHECK(hi >= profile.inf_h - 1e-12);
}

TEST_CASE("driftless profile decays like one over lambda") {
  Grid grid = build_grid(square_cell(32));
  FieldSet fields = catalog_fields(grid, "zero");
  AnsatzSpace space = build_shear_space(grid, fields);
  HLambdaProfile profile = h_profile(space, default_lambda_grid(space));

  CHECK(profile.tag == HCase::convex_decreasing);
  CHECK(profile.h.back() * profile.lambda.back() ==
        doctest::Approx(1.0).epsilon(1e-10));
  CHECK(profile.inf_h == profile.h.back());
  CHECK(profile.drift_quotient_sup == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(profile.bracket_lo == doctest::Approx(0.0).epsilon(1e-12));

  VariationalLimit limit = large_drift_limit(space, profile);
  CHECK(limit.value == profile.inf_h);
  CHECK(limit.tag == HCase::convex_decreasing);
}

TEST_CASE("cellular limit bracket pins the large-drift speed near zero") {
  Grid grid = build_grid(square_cell(64));
  FieldSet fields = catalog_fields(grid, "cellular");
  StreamFunction sf = solve_stream(grid, fields);
  TrajectoryReport report = classify_trajectories(grid, sf);
  AnsatzSpace space = build_level_set_space(grid, fields, sf, report, 33);

  HLambdaProfile profile = h_profile(space, default_lambda_grid(space));
  CHECK(profile.tag == HCase::convex_decreasing);

  VariationalLimit limit = large_drift_limit(space, profile);
  CHECK(limit.bracket_lo <= 1e-12);
  CHECK(limit.bracket_hi >= -1e-12);
  CHECK(limit.bracket_hi - limit.bracket_lo <=
        space.zeta_inf / profile.lambda.back() + 1e-12);
  CHECK(limit.value <= 0.05);
}

TEST_CASE("mixed scaling limit matches the analytic shear value") {
  Grid grid = build_grid(square_cell(64));
  FieldSet fields = catalog_fields(grid, "shear_sin");
  AnsatzSpace space = build_shear_space(grid, fields);

  const double value = mixed_limit(space);
  CHECK(value == doctest::Approx(std::sqrt(2.0) / two_pi).epsilon(2e-3));

  FieldSet tripled = catalog_fields(grid, "shear_sin", 3.0);
  AnsatzSpace space3 = build_shear_space(grid, tripled);
  CHECK(mixed_limit(space3) == doctest::Approx(3.0 * value).epsilon(1e-12));

  FieldSet still = catalog_fields(grid, "zero");
  CHECK(mixed_limit(build_shear_space(grid, still)) == 0.0);
}

TEST_CASE("constants-only spaces have no mixed limit") {
  Grid grid = build_grid(square_cell(32));
  FieldSet fields = catalog_fields(grid, "cellular");
  StreamFunction sf = solve_stream(grid, fields);
  TrajectoryReport report = classify_trajectories(grid, sf);
  AnsatzSpace space = build_level_set_space(grid, fields, sf, report, 1);
  try {
    mixed_limit(space);
    FAIL("expected singular_stiffness");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::singular_stiffness);
  }
}

TEST_CASE("drift term shares the witness quadrature bit for bit") {
  Grid grid = build_grid(square_cell(64));
  FieldSet fields = catalog_fields(grid, "shear_sin");
  StreamFunction sf = solve_stream(grid, fields);
  TrajectoryReport report = classify_trajectories(grid, sf);
  ChannelWitness witness = channel_witness(grid, fields, sf, report);

  DriftTerm term = drift_term(grid, fields, witness.w);
  CHECK(term.vector.x == witness.drift.x);
  CHECK(term.vector.y == witness.drift.y);
  CHECK(term.along_e == dot(term.vector, fields.defs.e));
}

TEST_CASE("smooth first integrals have a vanishing drift term") {
  Grid grid = build_grid(square_cell(64));
  FieldSet fields = catalog_fields(grid, "shear_sin");
  StreamFunction sf = solve_stream(grid, fields);

  DriftTerm phi_term = drift_term(grid, fields, sf.phi);
  CHECK(std::abs(phi_term.vector.x) <= 1e-12);
  CHECK(std::abs(phi_term.vector.y) <= 1e-12);

  std::vector<double> ones(grid.node_count(), 1.0);
  DriftTerm const_term = drift_term(grid, fields, ones);
  CHECK(std::abs(const_term.vector.x) <= 1e-13);
  CHECK(std::abs(const_term.vector.y) <= 1e-13);
}

TEST_CASE("functions varying along streamlines are rejected") {
  Grid grid = build_grid(square_cell(64));
  FieldSet fields = catalog_fields(grid, "shear_sin");
  std::vector<double> w(grid.node_count());
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.rows; ++j)
      w[grid.idx(i, j)] = std::sin(two_pi * grid.x(i));
  try {
    drift_term(grid, fields, w);
    FAIL("expected not_first_integral");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::not_first_integral);
  }
}

TEST_CASE("strip level sets split at the interior turning lines") {
  CellSpec spec = square_cell(64);
  spec.geometry = Geometry::strip;
  spec.d = 1;
  Grid grid = build_grid(spec);
  FieldSet fields = sample_fields(grid, strip_half_sine());
  StreamFunction sf = solve_stream(grid, fields);
  TrajectoryReport report = classify_trajectories(grid, sf);
  AnsatzSpace space = build_level_set_space(grid, fields, sf, report, 33);

  CHECK(space.regions >= 3);
  CHECK(space.regions <= 5);
  CHECK(space.first_integral_defect <= 1e-2);
  CHECK(g_of_lambda(space, 1.0) >= space.zeta_mean - 1e-8);
}

TEST_CASE("degenerate value bands are skipped and counted") {
  Grid grid = build_grid(square_cell(64));
  FieldSet fields = catalog_fields(grid, "shear_sin");
  StreamFunction sf = solve_stream(grid, fields);
  TrajectoryReport report = classify_trajectories(grid, sf);
  AnsatzSpace base = build_level_set_space(grid, fields, sf, report, 32);

  TrajectoryReport nicked = report;
  const double range = report.value_max - report.value_min;
  nicked.critical_values.push_back(report.value_max - 1.5e-9 * range);
  AnsatzSpace space = build_level_set_space(grid, fields, sf, nicked, 32);

  CHECK(space.degenerate_regions == 1);
  CHECK(space.regions == 2);
  const double g0 = g_of_lambda(base, 1.0);
  const double g1 = g_of_lambda(space, 1.0);
  CHECK(g1 <= g0 + 1e-10);
  CHECK(g1 >= space.zeta_mean - 1e-8);
}

TEST_CASE("the maximizer attains the reported envelope value") {
  Grid grid = build_grid(square_cell(64));
  FieldSet fields = catalog_fields(grid, "shear_sin");
  AnsatzSpace space = build_shear_space(grid, fields);

  const double lambda = 10.0;
  const double g = g_of_lambda(space, lambda);
  const Eigen::VectorXd v = g_maximizer(space, lambda);
  const Eigen::MatrixXd pencil =
      space.growth - space.stiffness + lambda * space.drift;
  const double quotient = v.dot(pencil * v) / v.dot(space.mass * v);
  CHECK(quotient == doctest::Approx(g).epsilon(1e-10));
}
