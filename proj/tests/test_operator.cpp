/// Operator assembly against the dense stencil reference.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "frontlab/catalog.hpp"
#include "frontlab/operator.hpp"
#include "oracles.hpp"

using namespace frontlab;

static std::pair<Grid, FieldSet> torus_fields(int n, const CatalogSelection& sel) {
  CellSpec spec;
  spec.nx = spec.ny = n;
  Grid g = build_grid(spec);
  return {g, sample_fields(g, make_fields(spec, sel))};
}

TEST_CASE("constant coefficients: constant vector is an exact eigenvector with mu = 2") {
  auto [g, f] = torus_fields(16, CatalogSelection{});
  DiscreteOperator op = assemble(g, f, 1.0, 1.0);
  std::vector<double> ones(g.node_count(), 1.0), y;
  apply_operator(op, ones, y);
  for (double v : y) CHECK(v == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("lambda' = 0 is rejected") {
  auto [g, f] = torus_fields(8, CatalogSelection{});
  CHECK_THROWS_AS(assemble(g, f, 0.0, 1.0), Error);
  try {
    assemble(g, f, 0.0, 1.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::precondition_violation);
  }
  CHECK_THROWS_AS(assemble(g, f, 1.0, 0.0), Error);
}

TEST_CASE("assembled matrix equals the dense stencil reference entry for entry") {
  CatalogSelection sel;
  sel.drift = "shear_sin";
  auto [g, f] = torus_fields(32, sel);
  DiscreteOperator op = assemble(g, f, 1.0, 10.0);
  Eigen::MatrixXd ref = oracles::dense_torus_operator(g, f, 1.0, 10.0);

  Eigen::MatrixXd dense = Eigen::MatrixXd(op.L);
  double max_diff = (dense - ref).cwiseAbs().maxCoeff();
  CHECK(max_diff <= 1e-12 * op.coeff_scale);
}

TEST_CASE("dense reference match holds for varying diagonal A and zeta") {
  CatalogSelection sel;
  sel.drift = "cellular";
  sel.diffusion = "yvar:2,0.5";
  sel.zeta = "sin_y:1,0.25";
  auto [g, f] = torus_fields(16, sel);
  DiscreteOperator op = assemble(g, f, 0.7, 3.0);
  Eigen::MatrixXd ref = oracles::dense_torus_operator(g, f, 0.7, 3.0);
  double max_diff = (Eigen::MatrixXd(op.L) - ref).cwiseAbs().maxCoeff();
  CHECK(max_diff <= 1e-12 * op.coeff_scale);
}

TEST_CASE("off-diagonal entries are nonnegative for every catalog drift") {
  for (const char* name : {"zero", "shear_sin", "cellular", "paper_nonperiodic"}) {
    CatalogSelection sel;
    sel.drift = name;
    auto [g, f] = torus_fields(16, sel);
    for (double M : {1.0, 64.0}) {
      DiscreteOperator op = assemble(g, f, 2.0, M);
      INFO(name, " M=", M, " offdiag_min=", op.offdiag_min);
      CHECK(op.metzler());
      CHECK(op.offdiag_min >= 0.0);
    }
  }
}

TEST_CASE("an A with off-diagonal entries is reported as non-Metzler") {
  CellSpec spec;
  spec.nx = spec.ny = 16;
  Grid g = build_grid(spec);
  CatalogSelection sel;
  FieldDefs defs = make_fields(spec, sel);
  defs.A = [](double, double) { return SymMat2{1.0, 0.6, 1.0}; };
  FieldSet f = sample_fields(g, defs);
  DiscreteOperator op = assemble(g, f, 1.0, 1.0);
  CHECK_FALSE(op.metzler());
}

TEST_CASE("row sums equal the zero-order coefficient on a torus") {
  CatalogSelection sel;
  sel.drift = "cellular";
  sel.zeta = "sin_y:2,0.5";
  auto [g, f] = torus_fields(16, sel);
  DiscreteOperator op = assemble(g, f, 1.5, 8.0);
  // transport stencils are conservative, so each row sums to c(z)
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(g.node_count());
  Eigen::VectorXd rs = op.L * ones;
  CHECK(rs.maxCoeff() == doctest::Approx(op.zero_order_max).epsilon(1e-10));
  CHECK(rs.minCoeff() == doctest::Approx(op.zero_order_min).epsilon(1e-10));
  CHECK(op.row_sum_max <= 1.5 * 1.5 / 64.0 + 1.5 * f.q_e_inf + f.zeta_inf +
                              1.5 / 8.0 * op.div_Ae_inf + 1e-10);
}

TEST_CASE("strip with identity A reduces to Neumann walls") {
  CellSpec spec;
  spec.geometry = Geometry::strip;
  spec.d = 1;
  spec.nx = spec.ny = 16;
  Grid g = build_grid(spec);
  CatalogSelection sel;
  sel.drift = "shear_sin";
  sel.e = {1.0, 0.0};
  FieldSet f = sample_fields(g, make_fields(spec, sel));
  DiscreteOperator op = assemble(g, f, 1.0, 2.0);
  CHECK(op.metzler());
  // constants see no flux through the walls, so row sums are the zero order
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(g.node_count());
  Eigen::VectorXd rs = op.L * ones;
  for (int i = 0; i < g.nx; ++i) {
    int k = g.idx(i, 0);
    double c = 1.0 / 4.0 + 1.0 * f.qe(k) + f.zeta[k];  // (l'/M)^2 + l' q.e + zeta
    CHECK(rs[k] == doctest::Approx(c).epsilon(1e-12));
  }
}
