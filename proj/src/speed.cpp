#include "frontlab/speed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <utility>

#include "frontlab/operator.hpp"

namespace frontlab {
namespace {

constexpr double kGolden = 0.6180339887498949;

struct CostSample {
  double cost = 0.0;
  double mu = 0.0;
  double residual = 0.0;
};

/// Memoized evaluation of c(lambda') = M mu(lambda') / lambda', chaining the
/// eigenvector of each solve into the next as a warm start.
class CostEvaluator {
 public:
  CostEvaluator(const Grid& grid, const FieldSet& fields, double M,
                const EigenOptions& eigen, std::vector<double>* warm)
      : grid_(grid), fields_(fields), M_(M), eigen_(eigen), warm_(warm) {}

  const CostSample& at(double lambda_prime) {
    auto it = cache_.find(lambda_prime);
    if (it != cache_.end()) return it->second;
    DiscreteOperator op = assemble(grid_, fields_, lambda_prime, M_);
    const std::vector<double>* start =
        (warm_ && !warm_->empty()) ? warm_ : nullptr;
    EigenResult r = principal_eigenpair(grid_, op, eigen_, start);
    if (warm_) *warm_ = r.psi;
    ++evaluations_;
    CostSample s{M_ * r.mu / lambda_prime, r.mu, r.residual};
    return cache_.emplace(lambda_prime, s).first->second;
  }

  double cost(double lambda_prime) { return at(lambda_prime).cost; }
  int evaluations() const { return evaluations_; }
  const std::map<double, CostSample>& samples() const { return cache_; }

 private:
  const Grid& grid_;
  const FieldSet& fields_;
  double M_;
  const EigenOptions& eigen_;
  std::vector<double>* warm_;
  std::map<double, CostSample> cache_;
  int evaluations_ = 0;
};

struct Bracket {
  double lo = 0.0;
  double mid = 0.0;
  double hi = 0.0;
};

/// Walks a doubling ladder away from lp0 in the downhill direction until the
/// cost rises, yielding a triple that encloses a minimum.
Bracket enclose_minimum(CostEvaluator& eval, double lp0, int budget, double M) {
  double f0 = eval.cost(lp0);
  double f_up = eval.cost(2.0 * lp0);
  double f_down = eval.cost(0.5 * lp0);
  if (f0 <= f_up && f0 <= f_down) return {0.5 * lp0, lp0, 2.0 * lp0};

  bool downhill = f_down < f_up;
  double factor = downhill ? 0.5 : 2.0;
  double x_cur = lp0;
  double x_next = factor * lp0;
  double f_next = downhill ? f_down : f_up;

  for (int k = 0; k < budget; ++k) {
    double x_probe = factor * x_next;
    double f_probe = eval.cost(x_probe);
    if (f_probe >= f_next) {
      return {std::min(x_probe, x_cur), x_next, std::max(x_probe, x_cur)};
    }
    x_cur = x_next;
    x_next = x_probe;
    f_next = f_probe;
  }

  std::ostringstream msg;
  msg << "no interior minimum enclosed after " << budget
      << " doublings; cost " << eval.cost(x_cur) << " at decay rate "
      << (x_cur / M) << " vs " << f_next << " at " << (x_next / M);
  fail(ErrorCode::bracket_failure, msg.str());
}

struct GoldenResult {
  double x_min = 0.0;
  double f_min = 0.0;
};

/// Golden-section descent in log(lambda') until the bracket's relative width
/// drops below rel_width.
GoldenResult golden_minimize(CostEvaluator& eval, const Bracket& br,
                             double rel_width) {
  double lo = std::log(br.lo);
  double hi = std::log(br.hi);
  double x1 = hi - kGolden * (hi - lo);
  double x2 = lo + kGolden * (hi - lo);
  double e1 = std::exp(x1);
  double e2 = std::exp(x2);
  double f1 = eval.cost(e1);
  double f2 = eval.cost(e2);

  for (int k = 0; k < 200; ++k) {
    double width = std::exp(hi) - std::exp(lo);
    if (width <= rel_width * std::exp(0.5 * (lo + hi))) break;
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      e2 = e1;
      f2 = f1;
      x1 = hi - kGolden * (hi - lo);
      e1 = std::exp(x1);
      f1 = eval.cost(e1);
    } else {
      lo = x1;
      x1 = x2;
      e1 = e2;
      f1 = f2;
      x2 = lo + kGolden * (hi - lo);
      e2 = std::exp(x2);
      f2 = eval.cost(e2);
    }
  }
  return f1 <= f2 ? GoldenResult{e1, f1} : GoldenResult{e2, f2};
}

/// True when the sampled costs, ordered by lambda', dip below both neighbors
/// at no more than one interior point.
bool probe_set_unimodal(const std::map<double, CostSample>& samples) {
  std::vector<double> f;
  f.reserve(samples.size());
  double fmin = std::numeric_limits<double>::infinity();
  for (const auto& kv : samples) {
    f.push_back(kv.second.cost);
    fmin = std::min(fmin, kv.second.cost);
  }
  double tol = 1e-9 * (std::abs(fmin) + 1e-300);
  int minima = 0;
  for (std::size_t i = 1; i + 1 < f.size(); ++i)
    if (f[i] < f[i - 1] - tol && f[i] < f[i + 1] - tol) ++minima;
  return minima <= 1;
}

SpeedPoint minimal_speed_impl(const Grid& grid, const FieldSet& fields,
                              double M, const SpeedOptions& opt,
                              std::vector<double>* warm) {
  if (!(M > 0.0) || !std::isfinite(M))
    fail(ErrorCode::precondition_violation, "drift amplitude must be positive and finite");
  double lam0 = opt.lambda_init;
  if (!(lam0 > 0.0)) {
    if (!(fields.zeta_mean > 0.0))
      fail(ErrorCode::precondition_violation, "mean growth rate must be positive");
    lam0 = std::sqrt(fields.zeta_mean);
  }

  std::vector<double> local;
  CostEvaluator eval(grid, fields, M, opt.eigen, warm ? warm : &local);

  Bracket br = enclose_minimum(eval, lam0 * M, opt.max_bracket_doublings, M);
  GoldenResult gm = golden_minimize(eval, br, opt.lambda_rel_width);
  const CostSample best = eval.at(gm.x_min);

  double cost_tol = 1e-9 * (std::abs(best.cost) + 1e-300);
  double f_up = eval.cost(gm.x_min * (1.0 + opt.probe_delta));
  double f_down = eval.cost(gm.x_min * (1.0 - opt.probe_delta));

  SpeedPoint p;
  p.M = M;
  p.lambda_star = gm.x_min / M;
  p.k_at_min = best.mu;
  p.c_star = best.mu / p.lambda_star;
  p.ratio = p.c_star / M;
  p.grid_n = std::max(grid.spec.nx, grid.spec.ny);
  p.residual = best.residual;
  p.eigen_evaluations = eval.evaluations();
  p.interior_minimum =
      f_up >= best.cost - cost_tol && f_down >= best.cost - cost_tol;
  p.unimodal = probe_set_unimodal(eval.samples());
  if (!(p.c_star > 0.0))
    fail(ErrorCode::evaluation_failure, "minimal speed came out nonpositive");
  return p;
}

void check_drift_ladder(const std::vector<double>& M_ladder) {
  if (M_ladder.size() < 4)
    fail(ErrorCode::invalid_spec, "drift ladder needs at least 4 points");
  for (std::size_t i = 0; i < M_ladder.size(); ++i) {
    if (!(M_ladder[i] > 0.0) || !std::isfinite(M_ladder[i]))
      fail(ErrorCode::invalid_spec, "drift ladder entries must be positive and finite");
    if (i > 0 && M_ladder[i] <= M_ladder[i - 1])
      fail(ErrorCode::invalid_spec, "drift ladder must be strictly increasing");
  }
}

LadderFit fit_affine(const std::vector<double>& xs, const std::vector<double>& ys,
                     const std::string& model) {
  LadderFit fit;
  fit.model = model;
  fit.points_used = int(xs.size());
  if (xs.empty()) return fit;

  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= double(xs.size());
  my /= double(xs.size());

  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.limit = my - fit.slope * mx;

  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double r = ys[i] - fit.limit - fit.slope * xs[i];
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / double(xs.size()));
  return fit;
}

}  // namespace

SpeedPoint minimal_speed(const Grid& grid, const FieldSet& fields, double M,
                         const SpeedOptions& opt) {
  return minimal_speed_impl(grid, fields, M, opt, nullptr);
}

SpeedCurve drift_sweep(const CellSpec& cell, const FieldDefs& defs,
                       const std::vector<double>& M_ladder,
                       const SpeedOptions& opt) {
  check_drift_ladder(M_ladder);

  SpeedCurve out;
  out.regime = "drift";

  std::map<int, Grid> grids;
  std::map<int, FieldSet> fsets;
  std::map<int, std::vector<double>> warm;
  auto ensure = [&](int n) {
    auto it = grids.find(n);
    if (it == grids.end()) {
      CellSpec c = cell;
      c.nx = c.ny = n;
      it = grids.emplace(n, build_grid(c)).first;
      fsets.emplace(n, sample_fields(it->second, defs));
    }
    return n;
  };

  int base = ensure(opt.grid_n);
  const double q_inf = fsets.at(base).q_inf;
  const double alpha1 = fsets.at(base).alpha1;
  if (!(alpha1 > 0.0))
    fail(ErrorCode::precondition_violation, "diffusion must be elliptic");
  const double span = std::max(cell.L1, cell.L2);

  for (double M : M_ladder) {
    // keep the cell advection number M |q| h / alpha1 under the limit by
    // doubling the resolution, up to the configured ceiling
    int n = opt.grid_n;
    while (2 * n <= opt.grid_n_max &&
           M * q_inf * (span / n) / alpha1 > opt.peclet_limit)
      n *= 2;
    ensure(n);
    SpeedPoint p = minimal_speed_impl(grids.at(n), fsets.at(n), M, opt, &warm[n]);
    p.ratio = p.c_star / M;
    out.points.push_back(p);
  }

  // extrapolate the normalized speeds over the top decade of the ladder
  double M_max = M_ladder.back();
  std::vector<double> xs, ys;
  for (const SpeedPoint& p : out.points) {
    if (p.M >= 0.1 * M_max * (1.0 - 1e-12)) {
      xs.push_back(1.0 / p.M);
      ys.push_back(p.ratio);
    }
  }
  if (xs.size() < 2 && out.points.size() >= 2) {
    xs.clear();
    ys.clear();
    for (std::size_t i = out.points.size() - 2; i < out.points.size(); ++i) {
      xs.push_back(1.0 / out.points[i].M);
      ys.push_back(out.points[i].ratio);
    }
  }
  out.fit = fit_affine(xs, ys, "c+a/M");
  return out;
}

std::vector<SpeedPoint> MixedSweep::all_points() const {
  std::vector<SpeedPoint> flat;
  for (const SpeedCurve& c : inner)
    flat.insert(flat.end(), c.points.begin(), c.points.end());
  return flat;
}

MixedSweep small_reaction_sweep(const CellSpec& cell, const FieldDefs& defs,
                                const std::vector<double>& eps_ladder,
                                const std::vector<double>& M_ladder,
                                const SpeedOptions& opt) {
  if (eps_ladder.empty())
    fail(ErrorCode::invalid_spec, "reaction ladder must be nonempty");
  for (std::size_t i = 0; i < eps_ladder.size(); ++i) {
    if (!(eps_ladder[i] > 0.0) || eps_ladder[i] > 1.0)
      fail(ErrorCode::invalid_spec, "reaction scales must lie in (0, 1]");
    if (i > 0 && eps_ladder[i] >= eps_ladder[i - 1])
      fail(ErrorCode::invalid_spec, "reaction ladder must be strictly decreasing");
  }

  MixedSweep out;
  out.regime = "small_reaction";
  for (double eps : eps_ladder) {
    SpeedCurve curve = drift_sweep(cell, scale_reaction(defs, eps), M_ladder, opt);
    double s = std::sqrt(eps);
    for (SpeedPoint& p : curve.points) {
      p.eps = eps;
      p.ratio /= s;
    }
    curve.fit.limit /= s;
    curve.fit.slope /= s;
    curve.fit.residual /= s;
    out.outer_parameter.push_back(eps);
    out.inner_limits.push_back(curve.fit.limit);
    out.inner.push_back(std::move(curve));
  }

  // outer extrapolation in sqrt(eps), using the decade closest to the limit
  double s_min = std::sqrt(eps_ladder.back());
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < out.outer_parameter.size(); ++i) {
    double s = std::sqrt(out.outer_parameter[i]);
    if (s <= 10.0 * s_min * (1.0 + 1e-12)) {
      xs.push_back(s);
      ys.push_back(out.inner_limits[i]);
    }
  }
  out.outer_fit = fit_affine(xs, ys, "c+b*sqrt(eps)");
  return out;
}

MixedSweep large_diffusion_sweep(const CellSpec& cell, const FieldDefs& defs,
                                 const std::vector<double>& B_ladder,
                                 const std::vector<double>& M_ladder,
                                 const SpeedOptions& opt) {
  if (B_ladder.empty())
    fail(ErrorCode::invalid_spec, "diffusion ladder must be nonempty");
  for (std::size_t i = 0; i < B_ladder.size(); ++i) {
    if (!(B_ladder[i] >= 1.0) || !std::isfinite(B_ladder[i]))
      fail(ErrorCode::invalid_spec, "diffusion scales must be >= 1");
    if (i > 0 && B_ladder[i] <= B_ladder[i - 1])
      fail(ErrorCode::invalid_spec, "diffusion ladder must be strictly increasing");
  }

  MixedSweep out;
  out.regime = "large_diffusion";
  for (double B : B_ladder) {
    SpeedCurve curve = drift_sweep(cell, scale_diffusion(defs, B), M_ladder, opt);
    double s = std::sqrt(B);
    for (SpeedPoint& p : curve.points) {
      p.B = B;
      p.ratio *= s;
    }
    curve.fit.limit *= s;
    curve.fit.slope *= s;
    curve.fit.residual *= s;
    out.outer_parameter.push_back(B);
    out.inner_limits.push_back(curve.fit.limit);
    out.inner.push_back(std::move(curve));
  }

  // outer extrapolation in 1/sqrt(B), using the decade closest to the limit
  double x_min = 1.0 / std::sqrt(B_ladder.back());
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < out.outer_parameter.size(); ++i) {
    double x = 1.0 / std::sqrt(out.outer_parameter[i]);
    if (x <= 10.0 * x_min * (1.0 + 1e-12)) {
      xs.push_back(x);
      ys.push_back(out.inner_limits[i]);
    }
  }
  out.outer_fit = fit_affine(xs, ys, "c+b/sqrt(B)");
  return out;
}

double linearized_growth_rate(const Grid& grid, const FieldSet& fields,
                              double lambda, double M, const EigenOptions& opt,
                              double* residual) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    fail(ErrorCode::precondition_violation, "decay rate must be positive and finite");
  DiscreteOperator op = assemble(grid, fields, lambda * M, M);
  EigenResult r = principal_eigenpair(grid, op, opt);
  if (residual) *residual = r.residual;
  return r.mu;
}

}  // namespace frontlab
