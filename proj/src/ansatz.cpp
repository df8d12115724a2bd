#include "frontlab/ansatz.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "frontlab/errors.hpp"

namespace frontlab {

namespace {

constexpr double kMassNullTol = 1e-12;
constexpr double kDividerTol = 1e-9;      ///< divider clustering, vs value range
constexpr double kDegenerateTol = 1e-12;  ///< region value range, vs value range
constexpr double kAdvectiveTol = 1e-2;    ///< |q.Dw| vs |q|_inf |w|_H1
constexpr double kInvPhi = 0.61803398874989485;

void copy_field_bounds(AnsatzSpace& space, const Grid& grid,
                       const FieldSet& fields) {
  space.zeta_mean = fields.zeta_mean;
  space.zeta_inf = fields.zeta_inf;
  space.q_e_inf = fields.q_e_inf;
  space.cell_measure = grid.cell_measure();
}

/// Rounds a knot request up to 2^m + 1 so that doubling the request yields
/// a strictly nested knot set and refinement is monotone by construction.
int dyadic_knots(int knots) {
  int pow2 = 1;
  while (pow2 < knots - 1) pow2 *= 2;
  return pow2 + 1;
}

struct RegionEnd {
  bool zero_trace = false;
  std::vector<int> line_nodes;  ///< flat boundary nodes carrying the end value
};

struct Region {
  std::vector<int> nodes;
  std::vector<double> knots;
  std::vector<int> dof;  ///< per knot; -1 when pinned to zero
  RegionEnd end[2];      ///< 0 = bottom of the band, 1 = top
  double lo = 0.0;       ///< band edges enclosing the region
  double hi = 0.0;
};

int uf_find(std::vector<int>& parent, int a) {
  while (parent[a] != a) {
    parent[a] = parent[parent[a]];
    a = parent[a];
  }
  return a;
}

void uf_unite(std::vector<int>& parent, int a, int b) {
  a = uf_find(parent, a);
  b = uf_find(parent, b);
  if (a != b) parent[std::max(a, b)] = std::min(a, b);
}

/// Hat values active at a quadrature node.
struct ValueEntry {
  int dof;
  double w;
};

/// One linear piece of the profile crossing the node, with its share of the
/// node's quadrature weight. A node sitting exactly on an interior knot
/// splits its weight between the two adjacent pieces.
struct SlopeGroup {
  double frac;
  int n;
  int dof[2];
  double dw[2];
};

/// Merges up to four weighted coefficients, combining repeated indices.
struct Accum {
  int dof[4];
  double w[4];
  int m = 0;

  void push(int d, double x) {
    if (d < 0 || x == 0.0) return;
    for (int t = 0; t < m; ++t)
      if (dof[t] == d) {
        w[t] += x;
        return;
      }
    dof[m] = d;
    w[m] = x;
    ++m;
  }
};

Eigen::VectorXd mass_eigenvalues(const Eigen::MatrixXd& mass) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mass,
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

void check_mass(const AnsatzSpace& space) {
  if (space.mass.rows() == 0)
    fail(ErrorCode::singular_mass, "ansatz space is empty");
  const Eigen::VectorXd ev = mass_eigenvalues(space.mass);
  if (!(ev(0) > kMassNullTol * ev(ev.size() - 1)))
    fail(ErrorCode::singular_mass, "mass form is numerically singular");
}

/// Eigenpairs of (growth - stiffness + lambda drift, mass), ascending.
Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solve_pencil(
    const AnsatzSpace& space, double lambda) {
  if (!(lambda >= 0.0))
    fail(ErrorCode::precondition_violation, "lambda must be nonnegative");
  check_mass(space);
  const Eigen::MatrixXd pencil =
      space.growth - space.stiffness + lambda * space.drift;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(
      pencil, space.mass, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (ges.info() != Eigen::Success)
    fail(ErrorCode::evaluation_failure, "generalized eigensolve failed");
  return ges;
}

double top_drift_quotient(const AnsatzSpace& space) {
  check_mass(space);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(
      space.drift, space.mass, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  if (ges.info() != Eigen::Success)
    fail(ErrorCode::evaluation_failure, "drift quotient eigensolve failed");
  return ges.eigenvalues()(ges.eigenvalues().size() - 1);
}

}  // namespace

AnsatzSpace build_shear_space(const Grid& grid, const FieldSet& fields) {
  const double tol = 1e-12 * std::max(1.0, fields.q_inf);
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.rows; ++j) {
      const Vec2 qv = fields.q[grid.idx(i, j)];
      const Vec2 q0 = fields.q[grid.idx(0, j)];
      if (std::abs(qv.x - q0.x) > tol || std::abs(qv.y) > tol)
        fail(ErrorCode::not_shear,
             "drift is not a unidirectional function of y");
    }

  const int n = grid.rows;
  AnsatzSpace space;
  space.kind = AnsatzKind::shear_exact;
  copy_field_bounds(space, grid, fields);
  space.basis.assign(n, std::vector<double>(grid.node_count(), 0.0));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < grid.nx; ++i) space.basis[k][grid.idx(i, k)] = 1.0;

  space.mass = Eigen::MatrixXd::Zero(n, n);
  space.stiffness = Eigen::MatrixXd::Zero(n, n);
  space.growth = Eigen::MatrixXd::Zero(n, n);
  space.drift = Eigen::MatrixXd::Zero(n, n);
  space.drift_linear = Eigen::VectorXd::Zero(n);

  for (int j = 0; j < n; ++j) {
    double m = 0.0, g = 0.0, d = 0.0;
    for (int i = 0; i < grid.nx; ++i) {
      const int v = grid.idx(i, j);
      const double weight = grid.node_weight(j);
      m += weight;
      g += weight * fields.zeta[v];
      d += weight * fields.qe(v);
    }
    space.mass(j, j) = m;
    space.growth(j, j) = g;
    space.drift(j, j) = d;
    space.drift_linear(j) = d;
  }

  const int cells = grid.periodic_y() ? n : n - 1;
  for (int c = 0; c < cells; ++c) {
    const int j0 = c;
    const int j1 = (c + 1) % n;
    double a = 0.0;
    for (int i = 0; i < grid.nx; ++i)
      a += 0.5 *
           (fields.A[grid.idx(i, j0)].a22 + fields.A[grid.idx(i, j1)].a22) *
           grid.hx;
    const double s = a / grid.hy;
    space.stiffness(j0, j0) += s;
    space.stiffness(j1, j1) += s;
    space.stiffness(j0, j1) -= s;
    space.stiffness(j1, j0) -= s;
  }

  space.first_integral_defect = 0.0;
  return space;
}

AnsatzSpace build_level_set_space(const Grid& grid, const FieldSet& fields,
                                  const StreamFunction& stream,
                                  const TrajectoryReport& report, int knots) {
  if (knots < 1) fail(ErrorCode::invalid_spec, "knot count must be positive");
  if (static_cast<int>(stream.phi.size()) != grid.node_count())
    fail(ErrorCode::precondition_violation, "stream size does not match grid");

  AnsatzSpace space;
  space.kind = AnsatzKind::level_set;
  copy_field_bounds(space, grid, fields);

  const std::vector<double>& phi = stream.phi;
  const double range = report.value_max - report.value_min;

  auto constants_only = [&]() {
    space.basis.assign(1, std::vector<double>(grid.node_count(), 1.0));
    space.mass = Eigen::MatrixXd::Zero(1, 1);
    space.growth = Eigen::MatrixXd::Zero(1, 1);
    space.stiffness = Eigen::MatrixXd::Zero(1, 1);
    space.drift = Eigen::MatrixXd::Zero(1, 1);
    space.drift_linear = Eigen::VectorXd::Zero(1);
    for (int i = 0; i < grid.nx; ++i)
      for (int j = 0; j < grid.rows; ++j) {
        const int v = grid.idx(i, j);
        const double weight = grid.node_weight(j);
        space.mass(0, 0) += weight;
        space.growth(0, 0) += weight * fields.zeta[v];
        space.drift(0, 0) += weight * fields.qe(v);
      }
    space.drift_linear(0) = space.drift(0, 0);
    return space;
  };
  if (knots == 1 || !(range > 0.0)) return constants_only();

  const int K = dyadic_knots(knots);
  const double margin = kDividerTol * range;

  std::vector<double> dividers = {report.value_min, report.value_max};
  dividers.insert(dividers.end(), report.saddle_values.begin(),
                  report.saddle_values.end());
  dividers.insert(dividers.end(), report.critical_values.begin(),
                  report.critical_values.end());
  std::sort(dividers.begin(), dividers.end());
  std::vector<double> edges;
  for (double d : dividers)
    if (edges.empty() || d > edges.back() + margin) edges.push_back(d);

  std::vector<Region> regions;
  std::vector<int> region_of(grid.node_count(), -1);
  for (size_t b = 0; b + 1 < edges.size(); ++b) {
    const double lo = edges[b];
    const double hi = edges[b + 1];
    if (!(hi - lo > 2.0 * margin)) {
      ++space.degenerate_regions;
      continue;
    }
    std::vector<int> labels;
    const int nc = label_band_components(grid, phi, lo, hi, margin, labels);
    std::vector<Region> bands(nc);
    for (int v = 0; v < grid.node_count(); ++v)
      if (labels[v] >= 0) bands[labels[v]].nodes.push_back(v);
    for (Region& r : bands) {
      r.lo = lo;
      r.hi = hi;
      double vmin = phi[r.nodes.front()];
      double vmax = vmin;
      for (int v : r.nodes) {
        vmin = std::min(vmin, phi[v]);
        vmax = std::max(vmax, phi[v]);
      }
      if (r.nodes.size() < 2 || !(vmax - vmin > kDegenerateTol * range)) {
        ++space.degenerate_regions;
        continue;
      }

      // Ends: a boundary node of the band is a crossing (separatrix) when
      // values continue past the divider behind it, and a flat extremum
      // line when they do not.
      const int rows = grid.rows;
      bool cross[2] = {false, false};
      std::vector<int> line[2];
      auto visit_outside = [&](int u) {
        const double vu = phi[u];
        if (vu > hi + margin) {
          cross[1] = true;
        } else if (vu < lo - margin) {
          cross[0] = true;
        } else if (vu >= hi - margin || vu <= lo + margin) {
          const int side = vu >= hi - margin ? 1 : 0;
          line[side].push_back(u);
        }
      };
      const int rid = labels[r.nodes.front()];
      auto outside = [&](int u) { return labels[u] != rid; };
      for (int v : r.nodes) {
        const int i = v / rows;
        const int j = v % rows;
        const int nb[4] = {grid.idx(i + 1, j), grid.idx(i - 1, j),
                           j + 1 < rows ? grid.idx(i, j + 1)
                                        : (grid.periodic_y() ? grid.idx(i, 0)
                                                             : -1),
                           j > 0 ? grid.idx(i, j - 1)
                                 : (grid.periodic_y() ? grid.idx(i, rows - 1)
                                                      : -1)};
        for (int u : nb)
          if (u >= 0 && outside(u)) visit_outside(u);
      }
      for (int side = 0; side < 2; ++side) {
        std::sort(line[side].begin(), line[side].end());
        line[side].erase(std::unique(line[side].begin(), line[side].end()),
                         line[side].end());
        for (int u : line[side]) {
          const int i = u / rows;
          const int j = u % rows;
          const int nb[4] = {grid.idx(i + 1, j), grid.idx(i - 1, j),
                             j + 1 < rows ? grid.idx(i, j + 1)
                                          : (grid.periodic_y() ? grid.idx(i, 0)
                                                               : -1),
                             j > 0 ? grid.idx(i, j - 1)
                                   : (grid.periodic_y()
                                          ? grid.idx(i, rows - 1)
                                          : -1)};
          for (int u2 : nb) {
            if (u2 < 0) continue;
            if (side == 1 && phi[u2] > hi + margin) cross[1] = true;
            if (side == 0 && phi[u2] < lo - margin) cross[0] = true;
          }
        }
        r.end[side].zero_trace = cross[side];
        if (!cross[side]) r.end[side].line_nodes = std::move(line[side]);
      }
      regions.push_back(std::move(r));
    }
  }

  space.regions = static_cast<int>(regions.size());
  if (regions.empty()) return constants_only();

  for (size_t r = 0; r < regions.size(); ++r)
    for (int v : regions[r].nodes) region_of[v] = static_cast<int>(r);

  // Free ends that share a flat boundary line carry one common value, so
  // the span stays inside H1 across degenerate extremum lines.
  std::vector<int> parent(2 * regions.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::unordered_map<int, int> claim;
  for (size_t r = 0; r < regions.size(); ++r)
    for (int side = 0; side < 2; ++side) {
      if (regions[r].end[side].zero_trace) continue;
      const int end_id = static_cast<int>(2 * r + side);
      for (int u : regions[r].end[side].line_nodes) {
        auto it = claim.find(u);
        if (it == claim.end())
          claim.emplace(u, end_id);
        else
          uf_unite(parent, end_id, it->second);
      }
    }

  // Knots: equal-measure quantiles of each region's own node values. An end
  // whose trace lives on the band edge (a pinned separatrix or a flat
  // extremum line) extends the knot vector to the edge value itself, so the
  // profile keeps varying across the last bin instead of freezing there.
  for (Region& r : regions) {
    std::vector<double> vals;
    vals.reserve(r.nodes.size());
    for (int v : r.nodes) vals.push_back(phi[v]);
    std::sort(vals.begin(), vals.end());
    const double m1 = static_cast<double>(vals.size() - 1);
    for (int p = 0; p < K; ++p) {
      const double t =
          vals[static_cast<size_t>(std::llround(p * m1 / (K - 1)))];
      if (r.knots.empty() || t > r.knots.back()) r.knots.push_back(t);
    }
    if (r.end[0].zero_trace || !r.end[0].line_nodes.empty())
      r.knots.insert(r.knots.begin(), r.lo);
    if (r.end[1].zero_trace || !r.end[1].line_nodes.empty())
      r.knots.push_back(r.hi);
  }

  int ndof = 0;
  std::unordered_map<int, int> class_dof;
  for (size_t r = 0; r < regions.size(); ++r) {
    Region& reg = regions[r];
    const int nk = static_cast<int>(reg.knots.size());
    reg.dof.assign(nk, -1);
    for (int p = 0; p < nk; ++p) {
      const int side = p == 0 ? 0 : (p == nk - 1 ? 1 : -1);
      if (side < 0) {
        reg.dof[p] = ndof++;
        continue;
      }
      if (reg.end[side].zero_trace) continue;
      const int root = uf_find(parent, static_cast<int>(2 * r + side));
      auto it = class_dof.find(root);
      if (it == class_dof.end()) {
        reg.dof[p] = ndof++;
        class_dof.emplace(root, reg.dof[p]);
      } else {
        reg.dof[p] = it->second;
      }
    }
  }
  std::vector<int> line_dof(grid.node_count(), -1);
  for (const auto& [node, end_id] : claim)
    line_dof[node] = class_dof.at(uf_find(parent, end_id));

  const int constant_dof = ndof;
  const int total = ndof + 1;
  space.basis.assign(total, std::vector<double>(grid.node_count(), 0.0));
  space.mass = Eigen::MatrixXd::Zero(total, total);
  space.stiffness = Eigen::MatrixXd::Zero(total, total);
  space.growth = Eigen::MatrixXd::Zero(total, total);
  space.drift = Eigen::MatrixXd::Zero(total, total);
  space.drift_linear = Eigen::VectorXd::Zero(total);
  std::vector<double> defect_num(total, 0.0), defect_den(total, 0.0);

  auto [gp1, gp2] = grad_perp_spectral(grid, phi);

  std::vector<ValueEntry> values;
  std::vector<SlopeGroup> groups;
  std::vector<ValueEntry> pool(2 * grid.node_count(), ValueEntry{-1, 0.0});
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.rows; ++j) {
      const int v = grid.idx(i, j);
      values.clear();
      groups.clear();
      const int rid = region_of[v];
      if (rid >= 0) {
        const Region& reg = regions[rid];
        const std::vector<double>& s = reg.knots;
        const int last = static_cast<int>(s.size()) - 1;
        const double t = phi[v];
        const auto it = std::lower_bound(s.begin(), s.end(), t);
        const int k = static_cast<int>(it - s.begin());
        if (k <= last && s[k] == t) {
          values.push_back({reg.dof[k], 1.0});
          if (k > 0) {
            const double inv = 1.0 / (s[k] - s[k - 1]);
            groups.push_back({k == last ? 1.0 : 0.5,
                              2,
                              {reg.dof[k - 1], reg.dof[k]},
                              {-inv, inv}});
          }
          if (k < last) {
            const double inv = 1.0 / (s[k + 1] - s[k]);
            groups.push_back({k == 0 ? 1.0 : 0.5,
                              2,
                              {reg.dof[k], reg.dof[k + 1]},
                              {-inv, inv}});
          }
        } else {
          const double inv = 1.0 / (s[k] - s[k - 1]);
          const double f = (t - s[k - 1]) * inv;
          values.push_back({reg.dof[k - 1], 1.0 - f});
          values.push_back({reg.dof[k], f});
          groups.push_back(
              {1.0, 2, {reg.dof[k - 1], reg.dof[k]}, {-inv, inv}});
        }
      } else if (line_dof[v] >= 0) {
        values.push_back({line_dof[v], 1.0});
      }
      for (std::size_t t = 0; t < values.size() && t < 2; ++t)
        pool[2 * v + t] = values[t];
      values.push_back({constant_dof, 1.0});

      const double weight = grid.node_weight(j);
      const double zeta = fields.zeta[v];
      const double qe = fields.qe(v);
      const double dphix = gp2[v];
      const double dphiy = -gp1[v];
      const double gg = dphix * dphix + dphiy * dphiy;
      const double qg = fields.q[v].x * dphix + fields.q[v].y * dphiy;

      for (const ValueEntry& ea : values) {
        if (ea.dof < 0) continue;
        space.basis[ea.dof][v] += ea.w;
        space.drift_linear(ea.dof) += weight * qe * ea.w;
        defect_den[ea.dof] += weight * ea.w * ea.w;
        for (const ValueEntry& eb : values) {
          if (eb.dof < 0) continue;
          space.mass(ea.dof, eb.dof) += weight * ea.w * eb.w;
          space.growth(ea.dof, eb.dof) += weight * zeta * ea.w * eb.w;
          space.drift(ea.dof, eb.dof) += weight * qe * ea.w * eb.w;
        }
      }
      for (const SlopeGroup& piece : groups)
        for (int a = 0; a < piece.n; ++a) {
          if (piece.dof[a] < 0) continue;
          const double share = weight * piece.frac;
          defect_num[piece.dof[a]] +=
              share * (piece.dw[a] * qg) * (piece.dw[a] * qg);
          defect_den[piece.dof[a]] += share * piece.dw[a] * piece.dw[a] * gg;
        }
    }

  // The Dirichlet form is assembled against the grid flux stencil rather
  // than through the chain rule, so composite profiles and plain node
  // functions meet the same discrete energy. Pointwise |grad phi|^2 samples
  // misweight the cells adjacent to flat extremum lines, where the gradient
  // vanishes quadratically.
  const bool strip_walls = !grid.periodic_y();
  auto add_edge = [&](int va, int vb, double coeff) {
    Accum acc;
    acc.push(pool[2 * va].dof, pool[2 * va].w);
    acc.push(pool[2 * va + 1].dof, pool[2 * va + 1].w);
    acc.push(pool[2 * vb].dof, -pool[2 * vb].w);
    acc.push(pool[2 * vb + 1].dof, -pool[2 * vb + 1].w);
    for (int t = 0; t < acc.m; ++t)
      for (int u = 0; u < acc.m; ++u)
        space.stiffness(acc.dof[t], acc.dof[u]) += coeff * acc.w[t] * acc.w[u];
  };
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.rows; ++j) {
      const int v = grid.idx(i, j);
      const int vr = grid.idx(i + 1, j);
      const double dual = (strip_walls && (j == 0 || j == grid.rows - 1))
                              ? 0.5 * grid.hy
                              : grid.hy;
      add_edge(v, vr,
               0.5 * (fields.A[v].a11 + fields.A[vr].a11) * dual / grid.hx);
      if (!strip_walls || j + 1 < grid.rows) {
        const int vu = grid.idx(i, j + 1);
        add_edge(v, vu,
                 0.5 * (fields.A[v].a22 + fields.A[vu].a22) * grid.hx /
                     grid.hy);
      }
    }
  bool offdiag = false;
  for (const SymMat2& A : fields.A)
    if (A.a12 != 0.0) {
      offdiag = true;
      break;
    }
  if (offdiag) {
    auto difference = [&](int vp, int vm, double inv) {
      Accum acc;
      acc.push(pool[2 * vp].dof, inv * pool[2 * vp].w);
      acc.push(pool[2 * vp + 1].dof, inv * pool[2 * vp + 1].w);
      acc.push(pool[2 * vm].dof, -inv * pool[2 * vm].w);
      acc.push(pool[2 * vm + 1].dof, -inv * pool[2 * vm + 1].w);
      return acc;
    };
    for (int i = 0; i < grid.nx; ++i)
      for (int j = 0; j < grid.rows; ++j) {
        const int v = grid.idx(i, j);
        const double a12 = fields.A[v].a12;
        if (a12 == 0.0) continue;
        const Accum dx =
            difference(grid.idx(i + 1, j), grid.idx(i - 1, j), 0.5 / grid.hx);
        Accum dy;
        if (!strip_walls)
          dy = difference(grid.idx(i, j + 1), grid.idx(i, j - 1),
                          0.5 / grid.hy);
        else if (j == 0)
          dy = difference(grid.idx(i, 1), grid.idx(i, 0), 1.0 / grid.hy);
        else if (j == grid.rows - 1)
          dy = difference(grid.idx(i, j), grid.idx(i, j - 1), 1.0 / grid.hy);
        else
          dy = difference(grid.idx(i, j + 1), grid.idx(i, j - 1),
                          0.5 / grid.hy);
        const double s = grid.node_weight(j) * a12;
        for (int t = 0; t < dx.m; ++t)
          for (int u = 0; u < dy.m; ++u) {
            space.stiffness(dx.dof[t], dy.dof[u]) += s * dx.w[t] * dy.w[u];
            space.stiffness(dy.dof[u], dx.dof[t]) += s * dy.w[u] * dx.w[t];
          }
      }
  }

  for (int d = 0; d < ndof; ++d)
    if (defect_den[d] > 0.0)
      space.first_integral_defect = std::max(
          space.first_integral_defect, std::sqrt(defect_num[d] / defect_den[d]));

  // The constant is dropped when the region functions already span it.
  const Eigen::VectorXd ev = mass_eigenvalues(space.mass);
  if (ev(0) < kMassNullTol * ev(ev.size() - 1)) {
    space.mass.conservativeResize(ndof, ndof);
    space.stiffness.conservativeResize(ndof, ndof);
    space.growth.conservativeResize(ndof, ndof);
    space.drift.conservativeResize(ndof, ndof);
    space.drift_linear.conservativeResize(ndof);
    space.basis.pop_back();
  }
  return space;
}

double g_of_lambda(const AnsatzSpace& space, double lambda) {
  const auto ges = solve_pencil(space, lambda);
  return ges.eigenvalues()(ges.eigenvalues().size() - 1);
}

Eigen::VectorXd g_maximizer(const AnsatzSpace& space, double lambda) {
  const auto ges = solve_pencil(space, lambda);
  const Eigen::VectorXd& vals = ges.eigenvalues();
  const int n = static_cast<int>(vals.size());
  const double top = vals(n - 1);
  const double tol = 1e-10 * std::max(1.0, std::abs(top));
  int best = n - 1;
  double best_quotient = 0.0;
  for (int k = n - 1; k >= 0 && vals(k) >= top - tol; --k) {
    const Eigen::VectorXd v = ges.eigenvectors().col(k);
    const double quotient =
        v.dot(space.drift * v) / v.dot(space.mass * v);
    if (k == n - 1 || quotient > best_quotient) {
      best = k;
      best_quotient = quotient;
    }
  }
  return ges.eigenvectors().col(best);
}

std::vector<double> default_lambda_grid(const AnsatzSpace& space, int points,
                                        double decades) {
  if (points < 2 || !(decades > 0.0))
    fail(ErrorCode::precondition_violation, "degenerate lambda window");
  if (!(space.zeta_mean > 0.0))
    fail(ErrorCode::precondition_violation, "mean growth must be positive");
  const double center = std::sqrt(space.zeta_mean) *
                        std::max(1.0, space.q_e_inf / space.zeta_mean);
  const double half = 0.5 * decades * std::log(10.0);
  std::vector<double> grid(points);
  for (int k = 0; k < points; ++k)
    grid[k] = center *
              std::exp(-half + 2.0 * half * k / (points - 1));
  return grid;
}

HLambdaProfile h_profile(const AnsatzSpace& space,
                         const std::vector<double>& lambda_grid) {
  const int n = static_cast<int>(lambda_grid.size());
  if (n < 16)
    fail(ErrorCode::precondition_violation,
         "lambda grid needs at least 16 points");
  for (int i = 0; i < n; ++i) {
    if (!(lambda_grid[i] > 0.0))
      fail(ErrorCode::precondition_violation, "lambda grid must be positive");
    if (i > 0 && !(lambda_grid[i] > lambda_grid[i - 1]))
      fail(ErrorCode::precondition_violation, "lambda grid must be ascending");
  }
  if (!(lambda_grid.back() / lambda_grid.front() >= 1.0e3 * (1.0 - 1e-12)))
    fail(ErrorCode::precondition_violation,
         "lambda grid must span three decades");

  HLambdaProfile profile;
  profile.lambda = lambda_grid;
  profile.g.resize(n);
  profile.h.resize(n);
  for (int i = 0; i < n; ++i) {
    profile.g[i] = g_of_lambda(space, lambda_grid[i]);
    profile.h[i] = profile.g[i] / lambda_grid[i];
  }
  profile.drift_quotient_sup = top_drift_quotient(space);

  double scale_g = 0.0;
  for (double g : profile.g) scale_g = std::max(scale_g, std::abs(g));
  for (int i = 0; i < n; ++i) {
    if (!(profile.g[i] >= space.zeta_mean - 1e-8 * scale_g))
      fail(ErrorCode::evaluation_failure,
           "growth envelope fell below the constant-function floor");
    const double upper = space.zeta_inf / profile.lambda[i] +
                         profile.drift_quotient_sup;
    if (!(profile.h[i] <= upper + 1e-8 * std::max(scale_g, upper)))
      fail(ErrorCode::evaluation_failure,
           "drift-rate profile violated its sandwich upper bound");
  }
  for (int i = 1; i + 1 < n; ++i) {
    const double dl = profile.lambda[i] - profile.lambda[i - 1];
    const double dr = profile.lambda[i + 1] - profile.lambda[i];
    const double second = (profile.g[i + 1] - profile.g[i]) * dl -
                          (profile.g[i] - profile.g[i - 1]) * dr;
    if (!(second >= -1e-8 * scale_g * (dl + dr)))
      fail(ErrorCode::evaluation_failure,
           "growth envelope lost convexity across the sampled window");
  }

  int min_at = -1;
  for (int i = 1; i + 1 < n; ++i)
    if (profile.h[i] < profile.h[i - 1] && profile.h[i] < profile.h[i + 1]) {
      min_at = i;
      break;
    }
  if (min_at < 0 && profile.h[0] < profile.h[1])
    fail(ErrorCode::bracket_failure,
         "profile minimum sits at the window start; widen the lambda grid");

  if (min_at >= 0) {
    profile.tag = HCase::interior_min;
    auto hval = [&](double lambda) { return g_of_lambda(space, lambda) / lambda; };
    double lo = std::log(profile.lambda[min_at - 1]);
    double hi = std::log(profile.lambda[min_at + 1]);
    double x1 = hi - kInvPhi * (hi - lo);
    double x2 = lo + kInvPhi * (hi - lo);
    double f1 = hval(std::exp(x1));
    double f2 = hval(std::exp(x2));
    double best = std::min({profile.h[min_at], f1, f2});
    for (int k = 0; k < 200 && hi - lo > 1e-7; ++k) {
      if (f1 <= f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - kInvPhi * (hi - lo);
        f1 = hval(std::exp(x1));
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + kInvPhi * (hi - lo);
        f2 = hval(std::exp(x2));
      }
      best = std::min({best, f1, f2});
    }
    profile.inf_h = best;
    profile.lambda_arg = std::exp(0.5 * (lo + hi));
    const double slack =
        std::abs(f1 - f2) + 1e-12 * (std::abs(best) + 1e-300);
    profile.bracket_lo = best - slack;
    profile.bracket_hi = best;
  } else {
    profile.tag = HCase::convex_decreasing;
    profile.inf_h = profile.h.back();
    profile.lambda_arg = profile.lambda.back();
    profile.bracket_lo =
        profile.h.back() - space.zeta_inf / profile.lambda.back();
    profile.bracket_hi = profile.h.back();
  }
  return profile;
}

VariationalLimit large_drift_limit(const AnsatzSpace& space,
                                   const HLambdaProfile& profile) {
  (void)space;
  VariationalLimit limit;
  limit.value = profile.inf_h;
  limit.bracket_lo = profile.bracket_lo;
  limit.bracket_hi = profile.bracket_hi;
  limit.tag = profile.tag;
  return limit;
}

double mixed_limit(const AnsatzSpace& space) {
  if (space.mass.rows() == 0)
    fail(ErrorCode::singular_stiffness, "ansatz space is empty");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(space.stiffness);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double smax = ev(ev.size() - 1);
  if (!(smax > 0.0))
    fail(ErrorCode::singular_stiffness,
         "ansatz space has no nonconstant direction");
  const Eigen::VectorXd& b = space.drift_linear;
  const double bnorm = b.norm();
  if (bnorm == 0.0) return 0.0;
  const double thresh = kMassNullTol * smax;
  const double drift_scale =
      std::max(bnorm, space.q_e_inf * space.cell_measure);
  double acc = 0.0;
  bool nontrivial = false;
  for (int k = 0; k < ev.size(); ++k) {
    const double proj = es.eigenvectors().col(k).dot(b);
    if (ev(k) > thresh) {
      acc += proj * proj / ev(k);
      nontrivial = true;
    } else if (std::abs(proj) > 1e-8 * drift_scale) {
      fail(ErrorCode::evaluation_failure,
           "drift functional has a component in the stiffness kernel");
    }
  }
  if (!nontrivial)
    fail(ErrorCode::singular_stiffness,
         "ansatz space has no nonconstant direction");
  return 2.0 * std::sqrt(space.zeta_mean / space.cell_measure) *
         std::sqrt(acc);
}

DriftTerm drift_term(const Grid& grid, const FieldSet& fields,
                     const std::vector<double>& w) {
  if (static_cast<int>(w.size()) != grid.node_count())
    fail(ErrorCode::precondition_violation, "w size does not match grid");

  if (fields.q_inf > 0.0) {
    double num = 0.0, den = 0.0;
    for (int i = 0; i < grid.nx; ++i)
      for (int j = 0; j < grid.rows; ++j) {
        const int v = grid.idx(i, j);
        const double dwx =
            (w[grid.idx(i + 1, j)] - w[grid.idx(i - 1, j)]) / (2.0 * grid.hx);
        double dwy;
        if (grid.periodic_y()) {
          const int jp = (j + 1) % grid.rows;
          const int jm = (j + grid.rows - 1) % grid.rows;
          dwy = (w[grid.idx(i, jp)] - w[grid.idx(i, jm)]) / (2.0 * grid.hy);
        } else if (j == 0) {
          dwy = (w[grid.idx(i, 1)] - w[v]) / grid.hy;
        } else if (j == grid.rows - 1) {
          dwy = (w[v] - w[grid.idx(i, j - 1)]) / grid.hy;
        } else {
          dwy = (w[grid.idx(i, j + 1)] - w[grid.idx(i, j - 1)]) /
                (2.0 * grid.hy);
        }
        const double adv = fields.q[v].x * dwx + fields.q[v].y * dwy;
        const double weight = grid.node_weight(j);
        num += weight * adv * adv;
        den += weight * (w[v] * w[v] + dwx * dwx + dwy * dwy);
      }
    if (num > kAdvectiveTol * kAdvectiveTol * fields.q_inf * fields.q_inf * den)
      fail(ErrorCode::not_first_integral,
           "advective derivative of w is too large");
  }

  DriftTerm term;
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.rows; ++j) {
      const int v = grid.idx(i, j);
      const double w2 = w[v] * w[v];
      if (w2 == 0.0) continue;
      const double weight = grid.node_weight(j) * w2;
      term.vector.x += weight * fields.q[v].x;
      term.vector.y += weight * fields.q[v].y;
    }
  term.along_e = dot(term.vector, fields.defs.e);
  return term;
}

}  // namespace frontlab
