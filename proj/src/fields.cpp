#include "frontlab/fields.hpp"

#include <algorithm>
#include <cmath>

namespace frontlab {

double SymMat2::eig_min() const {
  double tr = a11 + a22;
  double gap = std::sqrt((a11 - a22) * (a11 - a22) + 4.0 * a12 * a12);
  return 0.5 * (tr - gap);
}

double SymMat2::eig_max() const {
  double tr = a11 + a22;
  double gap = std::sqrt((a11 - a22) * (a11 - a22) + 4.0 * a12 * a12);
  return 0.5 * (tr + gap);
}

const ValidationIssue* ValidationReport::find(const std::string& condition) const {
  for (const auto& issue : issues)
    if (issue.condition == condition) return &issue;
  return nullptr;
}

FieldSet sample_fields(const Grid& grid, const FieldDefs& defs) {
  if (!defs.A || !defs.q || !defs.zeta || !defs.f)
    fail(ErrorCode::evaluation_failure, "field definitions incomplete");

  FieldSet fs;
  fs.defs = defs;
  int n = grid.node_count();
  fs.A.resize(n);
  fs.q.resize(n);
  fs.zeta.resize(n);

  bool first = true;
  double zeta_sum = 0.0;
  for (int i = 0; i < grid.nx; ++i) {
    for (int j = 0; j < grid.rows; ++j) {
      int k = grid.idx(i, j);
      double x = grid.x(i), y = grid.y(j);
      SymMat2 A = defs.A(x, y);
      Vec2 q = defs.q(x, y);
      double z = defs.zeta(x, y);
      if (!std::isfinite(A.a11) || !std::isfinite(A.a12) || !std::isfinite(A.a22) ||
          !std::isfinite(q.x) || !std::isfinite(q.y) || !std::isfinite(z))
        fail(ErrorCode::evaluation_failure,
             "non-finite sample at (" + std::to_string(x) + ", " + std::to_string(y) + ")");
      fs.A[k] = A;
      fs.q[k] = q;
      fs.zeta[k] = z;

      double lo = A.eig_min(), hi = A.eig_max();
      double qn = std::sqrt(q.x * q.x + q.y * q.y);
      double qe = std::abs(dot(q, defs.e));
      if (first) {
        fs.alpha1 = lo;
        fs.alpha2 = hi;
        first = false;
      } else {
        fs.alpha1 = std::min(fs.alpha1, lo);
        fs.alpha2 = std::max(fs.alpha2, hi);
      }
      fs.q_inf = std::max(fs.q_inf, qn);
      fs.q_e_inf = std::max(fs.q_e_inf, qe);
      fs.zeta_inf = std::max(fs.zeta_inf, std::abs(z));
      zeta_sum += z * grid.node_weight(j);
    }
  }
  fs.cell_measure = grid.cell_measure();
  fs.zeta_mean = zeta_sum / fs.cell_measure;
  return fs;
}

double discrete_divergence(const Grid& grid, const std::vector<Vec2>& q,
                           int i, int j) {
  double dqx = (q[grid.idx(i + 1, j)].x - q[grid.idx(i - 1, j)].x) / (2.0 * grid.hx);
  double dqy;
  if (grid.periodic_y()) {
    dqy = (q[grid.idx(i, j + 1)].y - q[grid.idx(i, j - 1)].y) / (2.0 * grid.hy);
  } else if (j == 0) {
    dqy = (q[grid.idx(i, 1)].y - q[grid.idx(i, 0)].y) / grid.hy;
  } else if (j == grid.rows - 1) {
    dqy = (q[grid.idx(i, j)].y - q[grid.idx(i, j - 1)].y) / grid.hy;
  } else {
    dqy = (q[grid.idx(i, j + 1)].y - q[grid.idx(i, j - 1)].y) / (2.0 * grid.hy);
  }
  return dqx + dqy;
}

ValidationReport validate_fields(const Grid& grid, const FieldSet& fields,
                                 const ValidationTolerances& tol) {
  ValidationReport report;
  auto add = [&](const std::string& cond, bool pass, double residual,
                 const std::string& detail) {
    report.issues.push_back({cond, pass, residual, detail});
    report.ok = report.ok && pass;
  };

  add("ellipticity", fields.alpha1 > 0.0, fields.alpha1,
      "min eigenvalue of A over nodes");

  {
    double mx = 0.0, my = 0.0;
    for (int i = 0; i < grid.nx; ++i)
      for (int j = 0; j < grid.rows; ++j) {
        int k = grid.idx(i, j);
        double w = grid.node_weight(j);
        mx += fields.q[k].x * w;
        my += fields.q[k].y * w;
      }
    double scale = std::max(fields.q_inf * fields.cell_measure, 1e-300);
    double res = std::max(std::abs(mx), std::abs(my)) / scale;
    add("drift_zero_mean", fields.q_inf == 0.0 || res <= tol.q_mean_rel, res,
        "|mean q| relative to |q|inf * |C|");
  }

  {
    double res = 0.0;
    if (fields.defs.div_q) {
      for (int i = 0; i < grid.nx; ++i)
        for (int j = 0; j < grid.rows; ++j)
          res = std::max(res, std::abs(fields.defs.div_q(grid.x(i), grid.y(j))));
    } else {
      for (int i = 0; i < grid.nx; ++i)
        for (int j = 0; j < grid.rows; ++j)
          res = std::max(res, std::abs(discrete_divergence(grid, fields.q, i, j)));
    }
    double rel = fields.q_inf > 0.0 ? res / fields.q_inf : 0.0;
    add("drift_divergence_free", rel <= tol.div_rel, rel,
        fields.defs.div_q ? "analytic divergence" : "centered-difference divergence");
  }

  if (grid.spec.geometry == Geometry::strip) {
    double res = 0.0;
    for (int i = 0; i < grid.nx; ++i) {
      res = std::max(res, std::abs(fields.q[grid.idx(i, 0)].y));
      res = std::max(res, std::abs(fields.q[grid.idx(i, grid.rows - 1)].y));
    }
    double rel = fields.q_inf > 0.0 ? res / fields.q_inf : 0.0;
    add("wall_impermeability", rel <= tol.wall_flux_rel, rel, "max |q.nu| on walls");
  }

  {
    double zmin = fields.zeta.empty() ? 0.0 : fields.zeta[0];
    for (double z : fields.zeta) zmin = std::min(zmin, z);
    add("zeta_positive", zmin > 0.0, zmin, "min zeta over nodes");
  }

  {
    bool ends_ok = true, bounds_ok = true;
    double worst = 0.0;
    for (int i = 0; i < grid.nx && ends_ok && bounds_ok; ++i) {
      for (int j = 0; j < grid.rows; ++j) {
        int k = grid.idx(i, j);
        double x = grid.x(i), y = grid.y(j);
        double f0 = fields.defs.f(x, y, 0.0);
        double f1 = fields.defs.f(x, y, 1.0);
        if (std::abs(f0) > 1e-14 || std::abs(f1) > 1e-14) {
          ends_ok = false;
          worst = std::max(std::abs(f0), std::abs(f1));
          break;
        }
        for (int s_i = 1; s_i <= tol.reaction_s_samples; ++s_i) {
          double s = double(s_i) / (tol.reaction_s_samples + 1);
          double fv = fields.defs.f(x, y, s);
          double cap = fields.zeta[k] * s;
          if (!(fv > 0.0) || fv > cap * (1.0 + 1e-12)) {
            bounds_ok = false;
            worst = fv - cap;
            break;
          }
        }
        if (!bounds_ok) break;
      }
    }
    add("reaction_end_states", ends_ok, worst, "f(., 0) = f(., 1) = 0");
    add("reaction_kpp_bound", bounds_ok, worst, "0 < f(z, s) <= zeta(z) s on the s-grid");
  }

  return report;
}

FieldDefs scale_reaction(const FieldDefs& defs, double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps))
    fail(ErrorCode::invalid_spec, "reaction scale must be positive and finite");
  if (eps == 1.0) return defs;
  FieldDefs out = defs;
  auto zeta = defs.zeta;
  out.zeta = [zeta, eps](double x, double y) { return eps * zeta(x, y); };
  if (defs.f) {
    auto f = defs.f;
    out.f = [f, eps](double x, double y, double s) { return eps * f(x, y, s); };
  }
  return out;
}

FieldDefs scale_diffusion(const FieldDefs& defs, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor))
    fail(ErrorCode::invalid_spec, "diffusion scale must be positive and finite");
  if (factor == 1.0) return defs;
  FieldDefs out = defs;
  auto A = defs.A;
  out.A = [A, factor](double x, double y) {
    SymMat2 m = A(x, y);
    return SymMat2{factor * m.a11, factor * m.a12, factor * m.a22};
  };
  return out;
}

FieldDefs scale_drift(const FieldDefs& defs, double factor) {
  if (!(factor >= 0.0) || !std::isfinite(factor))
    fail(ErrorCode::invalid_spec, "drift scale must be nonnegative and finite");
  if (factor == 1.0) return defs;
  FieldDefs out = defs;
  auto q = defs.q;
  out.q = [q, factor](double x, double y) {
    Vec2 v = q(x, y);
    return Vec2{factor * v.x, factor * v.y};
  };
  if (defs.phi) {
    auto phi = defs.phi;
    out.phi = [phi, factor](double x, double y) { return factor * phi(x, y); };
  }
  return out;
}

}  // namespace frontlab
