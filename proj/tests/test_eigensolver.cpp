/// Principal eigenpair solver against dense eigendecomposition oracles.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "frontlab/catalog.hpp"
#include "frontlab/eigensolver.hpp"
#include "oracles.hpp"

using namespace frontlab;

static std::pair<Grid, FieldSet> torus_fields(int n, const CatalogSelection& sel) {
  CellSpec spec;
  spec.nx = spec.ny = n;
  Grid g = build_grid(spec);
  return {g, sample_fields(g, make_fields(spec, sel))};
}

TEST_CASE("constant-coefficient eigenpair is exact") {
  auto [g, f] = torus_fields(16, CatalogSelection{});
  DiscreteOperator op = assemble(g, f, 1.0, 1.0);
  EigenResult res = principal_eigenpair(g, op);
  CHECK(res.mu == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(res.residual <= 1e-10);
  // eigenvector is the constant with unit L2 mass over the unit cell
  for (double v : res.psi) CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("mu matches the dense eigendecomposition oracle at n=32") {
  CatalogSelection sel;
  sel.drift = "shear_sin";
  auto [g, f] = torus_fields(32, sel);
  DiscreteOperator op = assemble(g, f, 1.0, 10.0);
  EigenResult res = principal_eigenpair(g, op);
  double oracle = oracles::dense_principal_eigenvalue(Eigen::MatrixXd(op.L));
  CHECK(res.mu == doctest::Approx(oracle).epsilon(1e-8));
}

TEST_CASE("cellular drift at moderate M matches the dense oracle") {
  CatalogSelection sel;
  sel.drift = "cellular";
  auto [g, f] = torus_fields(24, sel);
  DiscreteOperator op = assemble(g, f, 2.0, 6.0);
  EigenResult res = principal_eigenpair(g, op);
  double oracle = oracles::dense_principal_eigenvalue(Eigen::MatrixXd(op.L));
  CHECK(res.mu == doctest::Approx(oracle).epsilon(1e-8));
  for (double v : res.psi) CHECK(v > 0.0);
}

TEST_CASE("power and resolvent paths agree") {
  CatalogSelection sel;
  sel.drift = "cellular";
  auto [g, f] = torus_fields(16, sel);
  DiscreteOperator op = assemble(g, f, 1.0, 4.0);
  EigenOptions opts;
  opts.method = "resolvent";
  EigenResult a = principal_eigenpair(g, op, opts);
  opts.method = "power";
  opts.tol_rel = 1e-11;
  EigenResult b = principal_eigenpair(g, op, opts);
  CHECK(a.mu == doctest::Approx(b.mu).epsilon(1e-8));
}

TEST_CASE("principal eigenvalue respects the zero-order bounds") {
  // discrete Perron root lies within the row-sum range; with identity A and
  // M >= 1 that is the classical bound l'^2 + l' |q.e| + |zeta|
  CatalogSelection sel;
  sel.drift = "shear_sin";
  auto [g, f] = torus_fields(32, sel);
  for (double lp : {0.5, 1.0, 3.0}) {
    for (double M : {1.0, 8.0, 64.0}) {
      DiscreteOperator op = assemble(g, f, lp, M);
      EigenResult res = principal_eigenpair(g, op);
      INFO("lp=", lp, " M=", M, " mu=", res.mu);
      CHECK(res.mu > 0.0);
      CHECK(res.mu <= op.row_sum_max + 1e-9 * op.coeff_scale);
      if (M >= 1.0)
        CHECK(res.mu <= lp * lp + lp * f.q_e_inf + f.zeta_inf + 1e-9);
    }
  }
}

TEST_CASE("k(lambda, M) is convex in lambda") {
  CatalogSelection sel;
  sel.drift = "shear_sin";
  auto [g, f] = torus_fields(24, sel);
  double M = 4.0;
  std::vector<double> lams, ks;
  for (int i = 0; i <= 8; ++i) {
    double lam = 0.25 * std::pow(2.0, i * 0.5);
    lams.push_back(lam);
    DiscreteOperator op = assemble(g, f, lam * M, M);
    ks.push_back(principal_eigenpair(g, op).mu);
  }
  for (size_t i = 1; i + 1 < lams.size(); ++i) {
    double d1 = (ks[i] - ks[i - 1]) / (lams[i] - lams[i - 1]);
    double d2 = (ks[i + 1] - ks[i]) / (lams[i + 1] - lams[i]);
    CHECK(d2 - d1 >= -1e-8 * (1.0 + std::abs(ks[i])));
  }
}

TEST_CASE("refining the grid shrinks the eigenvalue increments") {
  CatalogSelection sel;
  sel.drift = "cellular";
  double mu[3];
  int n[3] = {16, 32, 64};
  for (int t = 0; t < 3; ++t) {
    auto [g, f] = torus_fields(n[t], sel);
    DiscreteOperator op = assemble(g, f, 1.0, 4.0);
    mu[t] = principal_eigenpair(g, op).mu;
  }
  double d0 = std::abs(mu[1] - mu[0]);
  double d1 = std::abs(mu[2] - mu[1]);
  CHECK(d1 < d0);
  CHECK(d1 < 0.75 * d0);  // first-order upwind: increments shrink about linearly
}

TEST_CASE("exhausting the power budget raises NoConvergence") {
  CatalogSelection sel;
  sel.drift = "shear_sin";
  auto [g, f] = torus_fields(16, sel);
  DiscreteOperator op = assemble(g, f, 1.0, 10.0);
  EigenOptions opts;
  opts.method = "power";
  opts.power_max_iter = 3;
  CHECK_THROWS_AS(principal_eigenpair(g, op, opts), Error);
  try {
    principal_eigenpair(g, op, opts);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::no_convergence);
  }
}

TEST_CASE("strip principal eigenpair stays positive and bounded") {
  CellSpec spec;
  spec.geometry = Geometry::strip;
  spec.d = 1;
  spec.nx = spec.ny = 16;
  Grid g = build_grid(spec);
  CatalogSelection sel;
  sel.drift = "shear_sin";
  FieldSet f = sample_fields(g, make_fields(spec, sel));
  DiscreteOperator op = assemble(g, f, 1.0, 4.0);
  EigenResult res = principal_eigenpair(g, op);
  CHECK(res.mu > 0.0);
  CHECK(res.mu <= op.row_sum_max + 1e-9 * op.coeff_scale);
  for (double v : res.psi) CHECK(v > 0.0);
  double oracle = oracles::dense_principal_eigenvalue(Eigen::MatrixXd(op.L));
  CHECK(res.mu == doctest::Approx(oracle).epsilon(1e-8));
}
