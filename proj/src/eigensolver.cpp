#include "frontlab/eigensolver.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>

namespace frontlab {
namespace {

using SpMat = Eigen::SparseMatrix<double>;

double rayleigh(const Eigen::SparseMatrix<double, Eigen::RowMajor>& L,
                const Eigen::VectorXd& x, Eigen::VectorXd& Lx) {
  Lx.noalias() = L * x;
  return x.dot(Lx) / x.dot(x);
}

double residual_inf(const Eigen::VectorXd& Lx, double mu, const Eigen::VectorXd& x) {
  double num = (Lx - mu * x).lpNorm<Eigen::Infinity>();
  return num / x.lpNorm<Eigen::Infinity>();
}

EigenResult finalize(const Grid& grid, const DiscreteOperator& op,
                     Eigen::VectorXd x, int iters, int factorizations,
                     const char* method) {
  Eigen::VectorXd Lx;
  double mu = rayleigh(op.L, x, Lx);

  // normalize to int psi^2 = 1 against the node quadrature weights
  double mass = 0.0;
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.rows; ++j) {
      double v = x[grid.idx(i, j)];
      mass += v * v * grid.node_weight(j);
    }
  x /= std::sqrt(mass);
  Lx /= std::sqrt(mass);

  EigenResult res;
  res.mu = mu;
  res.psi.assign(x.data(), x.data() + x.size());
  res.residual = residual_inf(Lx, mu, x);
  res.iterations = iters;
  res.factorizations = factorizations;
  res.method = method;
  return res;
}

Eigen::VectorXd initial_vector(int n, const std::vector<double>* start) {
  if (start && int(start->size()) == n) {
    Eigen::Map<const Eigen::VectorXd> s(start->data(), n);
    if (s.allFinite() && s.minCoeff() > 0.0) return s;
  }
  return Eigen::VectorXd::Ones(n);
}

EigenResult resolvent_iteration(const Grid& grid, const DiscreteOperator& op,
                                const EigenOptions& opts,
                                const std::vector<double>* start) {
  const int n = op.L.rows();
  const double tol = opts.tol_rel * op.coeff_scale;
  const bool metzler = op.metzler();

  double spread = op.row_sum_max - op.row_sum_min;
  double margin = std::max({1e-6 * spread, 1e-6 * std::abs(op.row_sum_max),
                            1e-8 * op.coeff_scale, 1e-12});
  double tau = op.row_sum_max + margin;

  SpMat I(n, n);
  I.setIdentity();
  Eigen::SparseLU<SpMat> lu;
  auto factor = [&](double t) {
    SpMat B = -SpMat(op.L);
    B += t * I;
    lu.compute(B);
    return lu.info() == Eigen::Success;
  };

  int factorizations = 0;
  if (!factor(tau)) fail(ErrorCode::no_convergence, "resolvent factorization failed");
  ++factorizations;

  Eigen::VectorXd x = initial_vector(n, start);
  Eigen::VectorXd Lx(n);
  double prev_res = -1.0;
  double last_safe_tau = tau;

  for (int k = 1; k <= opts.max_iter; ++k) {
    Eigen::VectorXd y = lu.solve(x);
    if (lu.info() != Eigen::Success)
      fail(ErrorCode::no_convergence, "resolvent solve failed");

    if (y.minCoeff() <= 0.0) {
      if (!metzler)
        fail(ErrorCode::positivity_loss,
             "iterate left the positive cone; off-diagonal pattern does not "
             "guarantee positivity at this resolution");
      // tau slipped at or below the spectral bound; move back toward the last
      // safe anchor and refactor
      if (factorizations > 12)
        fail(ErrorCode::no_convergence, "resolvent shift recovery exhausted");
      tau = 0.5 * (tau + last_safe_tau) + margin;
      factor(tau);
      ++factorizations;
      continue;
    }
    last_safe_tau = tau;

    y /= y.norm();
    double mu = rayleigh(op.L, y, Lx);
    double res = residual_inf(Lx, mu, y);
    x = y;
    if (res <= tol) return finalize(grid, op, x, k, factorizations, "resolvent");

    // re-anchor the shift when contraction is slow; keeps the resolvent gap
    // ratio small without a factorization per step
    bool slow = prev_res > 0.0 && res > 0.35 * prev_res;
    prev_res = res;
    if (slow && factorizations <= 12 && mu < tau) {
      double tau_new = mu + std::max(0.02 * (tau - mu), margin);
      if (tau_new < tau * (1.0 - 1e-15) || tau_new > tau) {
        tau = std::max(tau_new, mu + margin);
        factor(tau);
        ++factorizations;
      }
    }
  }
  fail(ErrorCode::no_convergence,
       "resolvent iteration did not reach tolerance in " +
           std::to_string(opts.max_iter) + " iterations");
}

EigenResult power_iteration(const Grid& grid, const DiscreteOperator& op,
                            const EigenOptions& opts,
                            const std::vector<double>* start) {
  const int n = op.L.rows();
  const double tol = opts.tol_rel * op.coeff_scale;

  Eigen::VectorXd x = initial_vector(n, start);
  Eigen::VectorXd Lx(n);

  for (long k = 1; k <= opts.power_max_iter; ++k) {
    Lx.noalias() = op.L * x;
    Eigen::VectorXd y = Lx + op.sigma * x;
    y /= y.lpNorm<Eigen::Infinity>();
    if (y.minCoeff() <= 0.0)
      fail(ErrorCode::positivity_loss,
           "power iterate left the positive cone; discretization is not "
           "positivity-preserving at this resolution");
    x = y;
    if (k % 16 == 0 || k == opts.power_max_iter) {
      double mu = rayleigh(op.L, x, Lx);
      if (residual_inf(Lx, mu, x) <= tol)
        return finalize(grid, op, x, int(std::min<long>(k, 1 << 30)), 0, "power");
    }
  }
  fail(ErrorCode::no_convergence, "power iteration did not reach tolerance");
}

}  // namespace

EigenResult principal_eigenpair(const Grid& grid, const DiscreteOperator& op,
                                const EigenOptions& opts,
                                const std::vector<double>* start) {
  if (op.L.rows() == 0)
    fail(ErrorCode::precondition_violation, "empty operator");
  if (opts.method == "power") return power_iteration(grid, op, opts, start);
  if (opts.method == "resolvent" || opts.method == "auto")
    return resolvent_iteration(grid, op, opts, start);
  fail(ErrorCode::precondition_violation, "unknown eigensolver method '" + opts.method + "'");
}

}  // namespace frontlab
