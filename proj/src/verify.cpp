#include "frontlab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "frontlab/errors.hpp"
#include "frontlab/operator.hpp"
#include "frontlab/stream.hpp"

namespace frontlab {
namespace {

/// Centered node gradient, one-sided at strip walls.
void node_gradient(const Grid& grid, const std::vector<double>& w,
                   std::vector<double>& gx, std::vector<double>& gy) {
  const int n = grid.node_count();
  gx.assign(n, 0.0);
  gy.assign(n, 0.0);
  const bool strip = !grid.periodic_y();
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.rows; ++j) {
      const int v = grid.idx(i, j);
      gx[v] = (w[grid.idx(i + 1, j)] - w[grid.idx(i - 1, j)]) / (2.0 * grid.hx);
      if (!strip) {
        gy[v] = (w[grid.idx(i, j + 1)] - w[grid.idx(i, j - 1)]) / (2.0 * grid.hy);
      } else if (j == 0) {
        gy[v] = (w[grid.idx(i, 1)] - w[grid.idx(i, 0)]) / grid.hy;
      } else if (j == grid.rows - 1) {
        gy[v] = (w[grid.idx(i, j)] - w[grid.idx(i, j - 1)]) / grid.hy;
      } else {
        gy[v] = (w[grid.idx(i, j + 1)] - w[grid.idx(i, j - 1)]) / (2.0 * grid.hy);
      }
    }
}

/// Flux-form Dirichlet energy int grad w . A grad w, matching the operator
/// and ansatz stencils; the mixed entry is added by centered differences.
double dirichlet_energy(const Grid& grid, const FieldSet& fields,
                        const std::vector<double>& w) {
  const bool strip = !grid.periodic_y();
  double energy = 0.0;
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.rows; ++j) {
      const int v = grid.idx(i, j);
      const int vr = grid.idx(i + 1, j);
      const double dual = (strip && (j == 0 || j == grid.rows - 1)) ? 0.5 * grid.hy : grid.hy;
      const double cx = 0.5 * (fields.A[v].a11 + fields.A[vr].a11) * dual / grid.hx;
      const double dx = w[vr] - w[v];
      energy += cx * dx * dx;
      if (!strip || j + 1 < grid.rows) {
        const int vu = grid.idx(i, strip ? j + 1 : (j + 1) % grid.rows);
        const double cy = 0.5 * (fields.A[v].a22 + fields.A[vu].a22) * grid.hx / grid.hy;
        const double dy = w[vu] - w[v];
        energy += cy * dy * dy;
      }
    }
  bool any_mixed = false;
  for (int v = 0; v < grid.node_count() && !any_mixed; ++v)
    if (fields.A[v].a12 != 0.0) any_mixed = true;
  if (any_mixed) {
    std::vector<double> gx, gy;
    node_gradient(grid, w, gx, gy);
    for (int j = 0; j < grid.rows; ++j)
      for (int i = 0; i < grid.nx; ++i) {
        const int v = grid.idx(i, j);
        energy += grid.node_weight(j) * 2.0 * fields.A[v].a12 * gx[v] * gy[v];
      }
  }
  return energy;
}

void check_increasing_ladder(const std::vector<double>& ladder, const char* what) {
  if (ladder.size() < 2) {
    std::ostringstream msg;
    msg << what << " ladder needs at least 2 points";
    fail(ErrorCode::invalid_spec, msg.str());
  }
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    if (!(ladder[i] > 0.0) || !std::isfinite(ladder[i]))
      fail(ErrorCode::invalid_spec, "ladder entries must be positive and finite");
    if (i > 0 && ladder[i] <= ladder[i - 1]) {
      std::ostringstream msg;
      msg << what << " ladder must be strictly increasing";
      fail(ErrorCode::invalid_spec, msg.str());
    }
  }
}

double relative_gap(double x, double y) {
  const double scale = std::max({std::abs(x), std::abs(y), 1e-8});
  return std::abs(x - y) / scale;
}

}  // namespace

double decomposition_identity_check(const Grid& grid, const FieldSet& fields,
                                    double lambda_prime, double M,
                                    const std::vector<double>& w,
                                    const EigenOptions& opt) {
  if (int(w.size()) != grid.node_count())
    fail(ErrorCode::invalid_spec, "profile length does not match the grid");
  if (!(lambda_prime > 0.0) || !(M > 0.0))
    fail(ErrorCode::invalid_spec, "lambda' and M must be positive");
  double w_norm = 0.0;
  for (int j = 0; j < grid.rows; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const int v = grid.idx(i, j);
      w_norm += grid.node_weight(j) * w[v] * w[v];
    }
  if (!(w_norm > 0.0))
    fail(ErrorCode::invalid_spec, "profile must be nonzero");

  const DriftTerm drift = drift_term(grid, fields, w);

  const DiscreteOperator op = assemble(grid, fields, lambda_prime, M);
  const EigenResult eig = principal_eigenpair(grid, op, opt);
  const std::vector<double>& psi = eig.psi;
  for (int v = 0; v < grid.node_count(); ++v)
    if (!(psi[v] > 0.0))
      fail(ErrorCode::positivity_loss, "principal eigenfunction lost positivity");

  std::vector<double> gpx, gpy, gwx, gwy;
  node_gradient(grid, psi, gpx, gpy);
  node_gradient(grid, w, gwx, gwy);

  const Vec2 e = fields.defs.e;
  const double ratio = lambda_prime / M;
  double square_term = 0.0;
  double growth_term = 0.0;
  for (int j = 0; j < grid.rows; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const int v = grid.idx(i, j);
      const double wt = grid.node_weight(j);
      const double vx = ratio * w[v] * e.x + w[v] * gpx[v] / psi[v] - gwx[v];
      const double vy = ratio * w[v] * e.y + w[v] * gpy[v] / psi[v] - gwy[v];
      const SymMat2& A = fields.A[v];
      square_term += wt * (vx * (A.a11 * vx + A.a12 * vy) + vy * (A.a12 * vx + A.a22 * vy));
      growth_term += wt * fields.zeta[v] * w[v] * w[v];
    }
  const double energy = dirichlet_energy(grid, fields, w);

  const double lhs = eig.mu / lambda_prime * w_norm;
  const double rhs = square_term / lambda_prime + drift.along_e +
                     (growth_term - energy) / lambda_prime;
  return std::abs(lhs - rhs) / std::abs(lhs);
}

FirstIntegralDecay eigenfunction_first_integral_check(
    const Grid& grid, const FieldSet& fields, double lambda_prime,
    const std::vector<double>& M_ladder, const EigenOptions& opt) {
  if (!(lambda_prime > 0.0))
    fail(ErrorCode::invalid_spec, "lambda' must be positive");
  check_increasing_ladder(M_ladder, "drift");

  FirstIntegralDecay table;
  table.M = M_ladder;
  double max_residual = 0.0;
  std::vector<double> start;
  for (std::size_t k = 0; k < M_ladder.size(); ++k) {
    const DiscreteOperator op = assemble(grid, fields, lambda_prime, M_ladder[k]);
    const EigenResult eig =
        principal_eigenpair(grid, op, opt, k > 0 ? &start : nullptr);
    start = eig.psi;
    max_residual = std::max(max_residual, eig.residual);
    std::vector<double> gx, gy;
    node_gradient(grid, eig.psi, gx, gy);
    double r2 = 0.0;
    for (int j = 0; j < grid.rows; ++j)
      for (int i = 0; i < grid.nx; ++i) {
        const int v = grid.idx(i, j);
        const double adv = fields.q[v].x * gx[v] + fields.q[v].y * gy[v];
        r2 += grid.node_weight(j) * adv * adv;
      }
    table.r.push_back(std::sqrt(r2));
  }

  const double h_min = std::min(grid.hx, grid.hy);
  table.noise_floor = 10.0 * fields.q_inf * max_residual / h_min;
  table.decreasing_top_decade = true;
  const double cutoff = table.M.back() / 10.0;
  for (std::size_t k = 0; k + 1 < table.M.size(); ++k) {
    if (table.M[k] < cutoff) continue;
    if (table.r[k + 1] > table.r[k] && table.r[k + 1] > table.noise_floor)
      table.decreasing_top_decade = false;
  }
  return table;
}

HomogenizedComparison homogenized_check(const CellSpec& cell, const FieldDefs& defs,
                                        double gamma,
                                        const std::vector<double>& M_ladder,
                                        const SpeedOptions& opt) {
  if (!(gamma >= 0.0 && gamma <= 0.5)) {
    std::ostringstream msg;
    msg << "drift exponent " << gamma << " outside the homogenized range [0, 1/2]";
    fail(ErrorCode::precondition_violation, msg.str());
  }
  check_increasing_ladder(M_ladder, "diffusion");

  const Grid grid = build_grid(cell);
  const FieldSet base = sample_fields(grid, defs);
  const Vec2 e = base.defs.e;
  std::vector<double> flux_x(grid.node_count()), flux_y(grid.node_count());
  for (int v = 0; v < grid.node_count(); ++v) {
    flux_x[v] = base.A[v].a11 * e.x + base.A[v].a12 * e.y;
    flux_y[v] = base.A[v].a12 * e.x + base.A[v].a22 * e.y;
  }
  std::vector<double> gxx, gxy, gyx, gyy;
  node_gradient(grid, flux_x, gxx, gxy);
  node_gradient(grid, flux_y, gyx, gyy);
  double div_max = 0.0;
  for (int v = 0; v < grid.node_count(); ++v)
    div_max = std::max(div_max, std::abs(gxx[v] + gyy[v]));
  const double div_tol = 1e-8 * std::max(1.0, base.alpha2) / std::min(grid.hx, grid.hy);
  if (div_max > div_tol) {
    std::ostringstream msg;
    msg << "div(A e) reaches " << div_max << "; the homogenized closed form needs div(A e) = 0";
    fail(ErrorCode::precondition_violation, msg.str());
  }

  double mean_eAe = 0.0;
  double measure = 0.0;
  for (int j = 0; j < grid.rows; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const int v = grid.idx(i, j);
      const double wt = grid.node_weight(j);
      mean_eAe += wt * (e.x * flux_x[v] + e.y * flux_y[v]);
      measure += wt;
    }
  mean_eAe /= measure;

  HomogenizedComparison cmp;
  cmp.gamma = gamma;
  cmp.M = M_ladder;
  cmp.closed_form = 2.0 * std::sqrt(mean_eAe) * std::sqrt(base.zeta_mean);
  for (double M : M_ladder) {
    const FieldDefs scaled = scale_diffusion(defs, M);
    const FieldSet fields = sample_fields(grid, scaled);
    const SpeedPoint point = minimal_speed(grid, fields, std::pow(M, gamma), opt);
    cmp.ratio.push_back(point.c_star / std::sqrt(M));
  }
  cmp.gap_at_top = std::abs(cmp.ratio.back() - cmp.closed_form) / cmp.closed_form;
  return cmp;
}

ConsistencyReport consistency_report(const CellSpec& cell, const FieldDefs& defs,
                                     const ConsistencyOptions& opt) {
  ConsistencyReport report;
  const Grid grid = build_grid(cell);
  const FieldSet fields = sample_fields(grid, defs);

  report.drift = drift_sweep(cell, defs, opt.M_ladder, opt.speed);
  report.eigen_limit = report.drift.fit.limit;

  AnsatzSpace space;
  bool have_stream = false;
  StreamFunction stream;
  TrajectoryReport trajectories;
  try {
    space = build_shear_space(grid, fields);
  } catch (const Error& err) {
    if (err.code() != ErrorCode::not_shear) throw;
    stream = solve_stream(grid, fields);
    trajectories = classify_trajectories(grid, stream);
    have_stream = true;
    space = build_level_set_space(grid, fields, stream, trajectories, opt.knots);
  }
  report.ansatz_kind = space.kind;
  report.profile = h_profile(space, default_lambda_grid(space));
  report.variational = large_drift_limit(space, report.profile);

  if (fields.q_inf > 0.0) {
    if (!have_stream) {
      stream = solve_stream(grid, fields);
      trajectories = classify_trajectories(grid, stream);
    }
    report.verdict = positivity_criterion(trajectories, fields.defs.e);
  }

  const double eigen_floor = std::max(3.0 * std::abs(report.drift.fit.residual), 1e-8);
  const bool eigen_positive = report.eigen_limit > eigen_floor;
  const bool variational_positive = report.variational.bracket_lo > 1e-8;

  {
    CheckStatus check;
    check.name = "eigen_vs_variational";
    check.value = std::abs(report.eigen_limit - report.variational.value);
    check.tolerance = std::max(opt.agree_rel * std::abs(report.variational.value),
                               report.variational.bracket_hi - report.variational.bracket_lo);
    check.pass = check.value <= check.tolerance + 1e-12 * std::max(1.0, check.tolerance);
    std::ostringstream detail;
    detail << "eigen limit " << report.eigen_limit << " vs variational "
           << report.variational.value;
    check.detail = detail.str();
    report.checks.push_back(check);
  }
  {
    CheckStatus check;
    check.name = "verdict_consistency";
    check.value = report.verdict.limit_positive ? 1.0 : 0.0;
    check.tolerance = 0.0;
    check.pass = report.verdict.limit_positive == (eigen_positive && variational_positive);
    std::ostringstream detail;
    detail << "verdict " << (report.verdict.limit_positive ? "positive" : "null")
           << ", eigen limit " << (eigen_positive ? "positive" : "null")
           << ", variational bracket " << (variational_positive ? "positive" : "null");
    check.detail = detail.str();
    report.checks.push_back(check);
  }

  if (opt.run_mixed) {
    const MixedSweep eps_sweep =
        small_reaction_sweep(cell, defs, opt.eps_ladder, opt.mixed_M_ladder, opt.speed);
    const MixedSweep B_sweep =
        large_diffusion_sweep(cell, defs, opt.B_ladder, opt.mixed_M_ladder, opt.speed);
    report.mixed_eps = eps_sweep.outer_fit.limit;
    report.mixed_B = B_sweep.outer_fit.limit;
    report.mixed_variational = mixed_limit(space);
    CheckStatus check;
    check.name = "mixed_agreement";
    check.value = std::max({relative_gap(report.mixed_eps, report.mixed_B),
                            relative_gap(report.mixed_eps, report.mixed_variational),
                            relative_gap(report.mixed_B, report.mixed_variational)});
    check.tolerance = opt.mixed_rel;
    check.pass = check.value <= check.tolerance;
    std::ostringstream detail;
    detail << "eps " << report.mixed_eps << ", B " << report.mixed_B << ", variational "
           << report.mixed_variational;
    check.detail = detail.str();
    report.checks.push_back(check);
  }

  if (opt.run_identity) {
    CheckStatus check;
    check.name = "decomposition_identity";
    std::vector<double> w;
    if (space.kind == AnsatzKind::shear_exact) {
      const double lambda_w = opt.identity_lambda_prime / opt.identity_M;
      const Eigen::VectorXd coef = g_maximizer(space, lambda_w);
      w.assign(grid.node_count(), 0.0);
      for (int k = 0; k < coef.size(); ++k)
        for (int v = 0; v < grid.node_count(); ++v)
          w[v] += coef[k] * space.basis[std::size_t(k)][v];
      check.detail = "profile: variational maximizer";
    } else {
      w.assign(grid.node_count(), 1.0);
      check.detail = "profile: constant (composite maximizers are kinked)";
    }
    report.identity_residual = decomposition_identity_check(
        grid, fields, opt.identity_lambda_prime, opt.identity_M, w, opt.speed.eigen);
    check.value = report.identity_residual;
    check.tolerance = 5.0 * std::max(grid.hx, grid.hy);
    check.pass = check.value <= check.tolerance;
    report.checks.push_back(check);
  }

  if (opt.run_decay && fields.q_inf > 0.0) {
    const double h_max = std::max(grid.hx, grid.hy);
    const double M_cap = opt.speed.peclet_limit * fields.alpha1 / (fields.q_inf * h_max);
    std::vector<double> ladder;
    for (double M : opt.M_ladder)
      if (M <= M_cap) ladder.push_back(M);
    if (ladder.size() >= 2) {
      report.decay = eigenfunction_first_integral_check(
          grid, fields, opt.identity_lambda_prime, ladder, opt.speed.eigen);
      CheckStatus check;
      check.name = "first_integral_decay";
      check.value = report.decay.r.back();
      check.tolerance = report.decay.r.front() + report.decay.noise_floor;
      check.pass = report.decay.decreasing_top_decade;
      std::ostringstream detail;
      detail << "r(" << report.decay.M.front() << ") = " << report.decay.r.front() << ", r("
             << report.decay.M.back() << ") = " << report.decay.r.back();
      check.detail = detail.str();
      report.checks.push_back(check);
    }
  }

  report.pass = true;
  for (const CheckStatus& check : report.checks)
    if (check.enabled && !check.pass) report.pass = false;
  return report;
}

}  // namespace frontlab
