#include "frontlab/front_sim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "frontlab/errors.hpp"

namespace frontlab {
namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
};

LineFit fit_line(const std::vector<double>& t, const std::vector<double>& p) {
  const std::size_t n = t.size();
  double st = 0.0, sp = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    st += t[k];
    sp += p[k];
  }
  const double tm = st / double(n);
  const double pm = sp / double(n);
  double stt = 0.0, stp = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    stt += (t[k] - tm) * (t[k] - tm);
    stp += (t[k] - tm) * (p[k] - pm);
  }
  LineFit fit;
  fit.slope = stp / stt;
  fit.intercept = pm - fit.slope * tm;
  double ss = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = p[k] - fit.slope * t[k] - fit.intercept;
    ss += r * r;
  }
  fit.rms = std::sqrt(ss / double(n));
  return fit;
}

}  // namespace

FrontSimResult direct_front_speed(const CellSpec& cell, const FieldDefs& defs,
                                  double M, const FrontSimOptions& opt) {
  if (!(M >= 0.0) || !std::isfinite(M))
    fail(ErrorCode::invalid_spec, "drift amplitude must be nonnegative and finite");
  if (opt.domain_repeats < 6)
    fail(ErrorCode::precondition_violation,
         "direct_front_speed needs domain_repeats >= 6 to separate the interface from both ends");
  if (!(opt.crossing_level > 0.0 && opt.crossing_level < 1.0))
    fail(ErrorCode::precondition_violation, "crossing level must lie strictly between 0 and 1");
  if (!defs.f)
    fail(ErrorCode::precondition_violation, "direct_front_speed needs a reaction closure, not just a growth rate");

  const Grid grid = build_grid(cell);
  const FieldSet fields = sample_fields(grid, defs);
  for (int v = 0; v < grid.node_count(); ++v)
    if (fields.A[v].a12 != 0.0)
      fail(ErrorCode::precondition_violation,
           "the time stepper supports diagonal diffusion only; mixed entries present");

  const double hx = grid.hx;
  const double hy = grid.hy;
  const double h_max = std::max(hx, hy);
  const double peclet = M * fields.q_inf * h_max / fields.alpha1;
  if (peclet > opt.peclet_limit) {
    std::ostringstream msg;
    msg << "advective cell Peclet number " << peclet << " exceeds " << opt.peclet_limit
        << "; refine the grid or reduce M";
    fail(ErrorCode::cfl_violation, msg.str());
  }

  const int nx = grid.nx;
  const int rows = grid.rows;
  const int cols = opt.domain_repeats * nx;
  const int n_ext = cols * rows;
  const double L1 = cell.L1;
  auto vid = [rows](int i, int j) { return i * rows + j; };

  std::vector<double> a11e(n_ext), a22e(n_ext), qxe, qye;
  const bool advect = M > 0.0 && fields.q_inf > 0.0;
  if (advect) {
    qxe.resize(n_ext);
    qye.resize(n_ext);
  }
  for (int i = 0; i < cols; ++i) {
    const int ib = i % nx;
    for (int j = 0; j < rows; ++j) {
      const int v = vid(i, j);
      const int b = grid.idx(ib, j);
      a11e[v] = fields.A[b].a11;
      a22e[v] = fields.A[b].a22;
      if (advect) {
        qxe[v] = fields.q[b].x;
        qye[v] = fields.q[b].y;
      }
    }
  }
  std::vector<double> x_mod(cols), y_of(rows);
  for (int i = 0; i < cols; ++i) x_mod[i] = std::fmod(double(i) * hx, L1);
  for (int j = 0; j < rows; ++j) y_of[j] = grid.y(j);

  double adv_rate = 0.0;
  if (advect)
    for (int v = 0; v < n_ext; ++v)
      adv_rate = std::max(adv_rate, M * (std::abs(qxe[v]) / hx + std::abs(qye[v]) / hy));
  const double react_rate = fields.zeta_inf;
  const double c_est = 2.0 * std::sqrt(fields.zeta_inf * fields.alpha2) + M * fields.q_inf;
  if (!(c_est > 0.0))
    fail(ErrorCode::precondition_violation, "fields carry no propagation scale: zeta and M q both vanish");

  const double h_min = std::min(hx, hy);
  double dt = opt.dt;
  if (dt <= 0.0) {
    dt = 2.0 * opt.cfl_fraction * h_min / c_est;
    if (react_rate > 0.0) dt = std::min(dt, opt.cfl_fraction / react_rate);
    if (adv_rate > 0.0) dt = std::min(dt, opt.cfl_fraction / adv_rate);
  }
  if (adv_rate > 0.0 && dt * adv_rate > 1.0 + 1e-12) {
    std::ostringstream msg;
    msg << "time step " << dt << " exceeds the explicit advection bound " << 1.0 / adv_rate;
    fail(ErrorCode::cfl_violation, msg.str());
  }
  const double T_final = opt.T_final > 0.0 ? opt.T_final : 120.0 * L1 / c_est;
  const int steps = int(std::ceil(T_final / dt));

  const bool strip = !grid.periodic_y();
  const double ihx2 = 1.0 / (hx * hx);
  const double ihy2 = 1.0 / (hy * hy);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(std::size_t(n_ext) * 5);
  for (int i = 0; i < cols; ++i)
    for (int j = 0; j < rows; ++j) {
      const int v = vid(i, j);
      if (i == 0 || i == cols - 1) {
        trips.emplace_back(v, v, 1.0);
        continue;
      }
      double diag = 0.0;
      const int vw = vid(i - 1, j);
      const int ve = vid(i + 1, j);
      const double fw = 0.5 * (a11e[v] + a11e[vw]) * ihx2;
      const double fe = 0.5 * (a11e[v] + a11e[ve]) * ihx2;
      diag += fw + fe;
      trips.emplace_back(v, vw, -dt * fw);
      trips.emplace_back(v, ve, -dt * fe);
      if (!strip) {
        const int vn = vid(i, (j + 1) % rows);
        const int vs = vid(i, (j - 1 + rows) % rows);
        const double fn = 0.5 * (a22e[v] + a22e[vn]) * ihy2;
        const double fs = 0.5 * (a22e[v] + a22e[vs]) * ihy2;
        diag += fn + fs;
        trips.emplace_back(v, vn, -dt * fn);
        trips.emplace_back(v, vs, -dt * fs);
      } else if (j == 0) {
        const int vn = vid(i, 1);
        const double fn = (a22e[v] + a22e[vn]) * ihy2;
        diag += fn;
        trips.emplace_back(v, vn, -dt * fn);
      } else if (j == rows - 1) {
        const int vs = vid(i, j - 1);
        const double fs = (a22e[v] + a22e[vs]) * ihy2;
        diag += fs;
        trips.emplace_back(v, vs, -dt * fs);
      } else {
        const int vn = vid(i, j + 1);
        const int vs = vid(i, j - 1);
        const double fn = 0.5 * (a22e[v] + a22e[vn]) * ihy2;
        const double fs = 0.5 * (a22e[v] + a22e[vs]) * ihy2;
        diag += fn + fs;
        trips.emplace_back(v, vn, -dt * fn);
        trips.emplace_back(v, vs, -dt * fs);
      }
      trips.emplace_back(v, v, 1.0 + dt * diag);
    }
  Eigen::SparseMatrix<double> imp(n_ext, n_ext);
  imp.setFromTriplets(trips.begin(), trips.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(imp);
  if (lu.info() != Eigen::Success)
    fail(ErrorCode::assembly_failure, "implicit diffusion factorization failed");

  Eigen::VectorXd u(n_ext);
  for (int i = 0; i < cols; ++i)
    for (int j = 0; j < rows; ++j)
      u[vid(i, j)] = double(i) * hx < 2.0 * L1 ? 1.0 : 0.0;

  const double level = opt.crossing_level;
  auto mean_crossing = [&]() {
    double sum = 0.0;
    for (int j = 0; j < rows; ++j) {
      double pos = double(cols - 1) * hx;
      for (int i = 0; i + 1 < cols; ++i) {
        const double a = u[vid(i, j)];
        const double b = u[vid(i + 1, j)];
        if (a >= level && b < level) {
          pos = double(i) * hx + hx * (a - level) / (a - b);
          break;
        }
      }
      sum += pos;
    }
    return sum / double(rows);
  };

  const double recycle_at = 4.0 * L1;
  double offset = 0.0;
  int recycles = 0;
  std::vector<double> times_all, pos_all;
  times_all.reserve(std::size_t(steps));
  pos_all.reserve(std::size_t(steps));
  Eigen::VectorXd rhs(n_ext);
  const double inv_hx = 1.0 / hx;
  const double inv_hy = 1.0 / hy;

  for (int step = 0; step < steps; ++step) {
    rhs = u;
    for (int i = 1; i + 1 < cols; ++i)
      for (int j = 0; j < rows; ++j) {
        const int v = vid(i, j);
        double rate = defs.f(x_mod[i], y_of[j], u[v]);
        if (advect) {
          const double a = M * qxe[v];
          if (a > 0.0)
            rate += a * (u[vid(i + 1, j)] - u[v]) * inv_hx;
          else if (a < 0.0)
            rate += a * (u[v] - u[vid(i - 1, j)]) * inv_hx;
          const double b = M * qye[v];
          if (b != 0.0 && (!strip || (j > 0 && j + 1 < rows))) {
            const int vn = vid(i, strip ? j + 1 : (j + 1) % rows);
            const int vs = vid(i, strip ? j - 1 : (j - 1 + rows) % rows);
            rate += b > 0.0 ? b * (u[vn] - u[v]) * inv_hy : b * (u[v] - u[vs]) * inv_hy;
          }
        }
        rhs[v] += dt * rate;
      }
    for (int j = 0; j < rows; ++j) {
      rhs[vid(0, j)] = 1.0;
      rhs[vid(cols - 1, j)] = 0.0;
    }
    u = lu.solve(rhs);

    const double raw = mean_crossing();
    times_all.push_back(double(step + 1) * dt);
    pos_all.push_back(raw + offset);
    if (raw > recycle_at) {
      for (int i = 0; i + nx < cols; ++i)
        for (int j = 0; j < rows; ++j) u[vid(i, j)] = u[vid(i + nx, j)];
      for (int i = cols - nx; i < cols; ++i)
        for (int j = 0; j < rows; ++j) u[vid(i, j)] = 0.0;
      for (int j = 0; j < rows; ++j) {
        u[vid(0, j)] = 1.0;
        u[vid(cols - 1, j)] = 0.0;
      }
      offset += L1;
      ++recycles;
    }
  }

  FrontSimResult result;
  result.dt = dt;
  result.T_final = double(steps) * dt;
  result.steps = steps;
  result.recycles = recycles;
  const double t_cut = 0.5 * result.T_final;
  for (std::size_t k = 0; k < times_all.size(); ++k)
    if (times_all[k] >= t_cut) {
      result.times.push_back(times_all[k]);
      result.positions.push_back(pos_all[k]);
    }
  if (result.times.size() < 8)
    fail(ErrorCode::no_front, "measurement window too short to fit an interface speed");
  const LineFit fit = fit_line(result.times, result.positions);
  const double travel = result.positions.back() - result.positions.front();
  if (!(fit.slope > 0.0) || travel < L1) {
    std::ostringstream msg;
    msg << "no traveling interface: the level crossing advanced " << travel
        << " over the fit window, less than one period " << L1;
    fail(ErrorCode::no_front, msg.str());
  }
  result.speed = fit.slope;
  result.fit_residual = fit.rms;
  return result;
}

}  // namespace frontlab
