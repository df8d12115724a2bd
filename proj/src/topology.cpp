#include "frontlab/topology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

#include "frontlab/errors.hpp"

namespace frontlab {

namespace {

enum Side { kS = 0, kE = 1, kN = 2, kW = 3 };

/// Cell-edge identifier: horizontal edges join (i, j)-(i+1, j), vertical
/// edges join (i, j)-(i, j+1); indices are stored wrapped.
struct EdgeRef {
  bool horizontal = false;
  int i = 0;
  int j = 0;
};

bool same_edge(const EdgeRef& a, const EdgeRef& b) {
  return a.horizontal == b.horizontal && a.i == b.i && a.j == b.j;
}

/// Exit side of a marching-squares cell entered through `entry`, for the
/// corner-class mask SW | SE<<1 | NE<<2 | NW<<3, keeping larger values on
/// the left. Saddle cells (5, 10) disambiguate by the center average.
int exit_side(int mask, int entry, bool center_inside) {
  switch (mask) {
    case 1:  return entry == kS ? kW : -1;
    case 14: return entry == kW ? kS : -1;
    case 2:  return entry == kE ? kS : -1;
    case 13: return entry == kS ? kE : -1;
    case 4:  return entry == kN ? kE : -1;
    case 11: return entry == kE ? kN : -1;
    case 8:  return entry == kW ? kN : -1;
    case 7:  return entry == kN ? kW : -1;
    case 3:  return entry == kE ? kW : -1;
    case 12: return entry == kW ? kE : -1;
    case 6:  return entry == kN ? kS : -1;
    case 9:  return entry == kS ? kN : -1;
    case 5:
      if (center_inside) return entry == kS ? kE : entry == kN ? kW : -1;
      return entry == kS ? kW : entry == kN ? kE : -1;
    case 10:
      if (center_inside) return entry == kW ? kS : entry == kE ? kN : -1;
      return entry == kE ? kS : entry == kW ? kN : -1;
    default:
      return -1;
  }
}

/// Equi-quantile levels of the sorted node values at the given sampling
/// density, snapped into the interior of the value gaps so that no node sits
/// exactly on a level; exact duplicates produced by flat value runs are
/// merged. `uniq` holds the distinct sorted values.
std::vector<double> sample_levels(const std::vector<double>& sorted,
                                  const std::vector<double>& uniq, int m) {
  const int n = static_cast<int>(sorted.size());
  if (uniq.size() < 2) return {};

  std::vector<double> out;
  out.reserve(m);
  for (int k = 0; k < m; ++k) {
    double pos = (k + 0.5) / m * (n - 1);
    int i0 = std::min(static_cast<int>(pos), n - 2);
    double v = sorted[i0] + (pos - i0) * (sorted[i0 + 1] - sorted[i0]);
    auto it = std::lower_bound(uniq.begin(), uniq.end(), v);
    if (it != uniq.end() && *it == v) {
      if (it + 1 != uniq.end()) v = 0.5 * (*it + *(it + 1));
      else v = 0.5 * (*(it - 1) + *it);
    }
    out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Values of discrete saddle nodes: interior nodes whose 8-neighbor ring of
/// value differences changes sign at least four times, ties broken by node
/// index. The sorted values are clustered within a relative tolerance.
std::vector<double> detect_saddles(const Grid& grid,
                                   const std::vector<double>& phi,
                                   double value_range) {
  static const int di[8] = {1, 1, 0, -1, -1, -1, 0, 1};
  static const int dj[8] = {0, 1, 1, 1, 0, -1, -1, -1};

  std::vector<double> values;
  const int j_lo = grid.periodic_y() ? 0 : 1;
  const int j_hi = grid.periodic_y() ? grid.rows : grid.rows - 1;
  for (int i = 0; i < grid.nx; ++i) {
    for (int j = j_lo; j < j_hi; ++j) {
      const int v = grid.idx(i, j);
      int s[8];
      for (int k = 0; k < 8; ++k) {
        const int w = grid.idx(i + di[k], j + dj[k]);
        const double d = phi[w] - phi[v];
        s[k] = d > 0.0 ? 1 : d < 0.0 ? -1 : (w > v ? 1 : -1);
      }
      int alternations = 0;
      for (int k = 0; k < 8; ++k)
        if (s[k] != s[(k + 1) % 8]) ++alternations;
      if (alternations >= 4) values.push_back(phi[v]);
    }
  }

  std::sort(values.begin(), values.end());
  std::vector<double> clustered;
  const double tol = 1e-12 * value_range;
  for (double v : values)
    if (clustered.empty() || v - clustered.back() > tol) clustered.push_back(v);
  return clustered;
}

/// Marching-squares tracer for one level over one grid. Owns the per-level
/// inside flags and visited-edge marks.
class LevelTracer {
public:
  LevelTracer(const Grid& grid, const std::vector<double>& phi,
              const std::vector<double>& gmag, double level, long long budget)
      : grid_(grid),
        phi_(phi),
        gmag_(gmag),
        t_(level),
        budget_(budget),
        cell_rows_(grid.periodic_y() ? grid.rows : grid.rows - 1),
        inside_(grid.node_count()),
        hvis_(static_cast<size_t>(grid.nx) * grid.rows, 0),
        vvis_(static_cast<size_t>(grid.nx) * cell_rows_, 0) {
    for (int v = 0; v < grid.node_count(); ++v) inside_[v] = phi_[v] > t_;
  }

  LevelSet run() {
    LevelSet out;
    out.level = t_;
    for (int i = 0; i < grid_.nx; ++i)
      for (int j = 0; j < grid_.rows; ++j)
        if (h_crossed(i, j) && !hvis_[h_id(i, j)])
          out.components.push_back(trace_from({true, i, j}));
    for (int i = 0; i < grid_.nx; ++i)
      for (int j = 0; j < cell_rows_; ++j)
        if (v_crossed(i, j) && !vvis_[v_id(i, j)])
          out.components.push_back(trace_from({false, i, j}));
    return out;
  }

private:
  size_t h_id(int i, int j) const {
    return static_cast<size_t>(i) * grid_.rows + j;
  }
  size_t v_id(int i, int j) const {
    return static_cast<size_t>(i) * cell_rows_ + j;
  }
  bool h_crossed(int i, int j) const {
    return inside_[grid_.idx(i, j)] != inside_[grid_.idx(i + 1, j)];
  }
  bool v_crossed(int i, int j) const {
    return inside_[grid_.idx(i, j)] != inside_[grid_.idx(i, j + 1)];
  }

  [[noreturn]] void abort_trace(const std::string& what) const {
    std::ostringstream os;
    os << what << " at level " << t_;
    fail(ErrorCode::tracing_failure, os.str());
  }

  /// Edge of cell (ci, cj) on the given side, wrapped.
  EdgeRef cell_edge(int ci, int cj, int side) const {
    switch (side) {
      case kS: return {true, ci, cj};
      case kN:
        return {true, ci, grid_.periodic_y() ? (cj + 1) % grid_.rows : cj + 1};
      case kW: return {false, ci, cj};
      default: return {false, (ci + 1) % grid_.nx, cj};
    }
  }

  bool edge_visited(const EdgeRef& e) const {
    return e.horizontal ? hvis_[h_id(e.i, e.j)] != 0 : vvis_[v_id(e.i, e.j)] != 0;
  }
  void mark_edge(const EdgeRef& e) {
    (e.horizontal ? hvis_[h_id(e.i, e.j)] : vvis_[v_id(e.i, e.j)]) = 1;
  }

  /// Crossing data on an edge: interpolation fraction from the low-corner
  /// node and the interpolated gradient magnitude.
  void edge_crossing(const EdgeRef& e, double& f, double& gm) const {
    const int a = grid_.idx(e.i, e.j);
    const int b = e.horizontal ? grid_.idx(e.i + 1, e.j) : grid_.idx(e.i, e.j + 1);
    f = (t_ - phi_[a]) / (phi_[b] - phi_[a]);
    gm = (1.0 - f) * gmag_[a] + f * gmag_[b];
  }

  ContourComponent trace_from(const EdgeRef& start) {
    // Direction with larger values on the left fixes which adjacent cell the
    // trace enters first.
    long long uci = 0, ucj = 0;
    int side = 0;
    if (start.horizontal) {
      const bool low_inside = inside_[grid_.idx(start.i, start.j)];
      if (low_inside) {
        if (!grid_.periodic_y() && start.j >= cell_rows_)
          abort_trace("contour would leave the strip through a wall");
        uci = start.i;
        ucj = start.j;
        side = kS;
      } else {
        if (!grid_.periodic_y() && start.j == 0)
          abort_trace("contour would leave the strip through a wall");
        uci = start.i;
        ucj = start.j - 1;
        side = kN;
      }
    } else {
      const bool high_inside = inside_[grid_.idx(start.i, start.j + 1)];
      if (high_inside) {
        uci = start.i;
        ucj = start.j;
        side = kW;
      } else {
        uci = start.i - 1;
        ucj = start.j;
        side = kE;
      }
    }

    const EdgeRef start_edge = start;
    const int start_side = side;
    const long long uci0 = uci, ucj0 = ucj;

    ContourComponent comp;
    comp.grad_min = std::numeric_limits<double>::infinity();
    std::vector<double> ux, uy;  // unwrapped vertex coordinates

    long long steps = 0;
    while (true) {
      const int ci = grid_.wrap_x(static_cast<int>(((uci % grid_.nx) + grid_.nx)));
      int cj;
      if (grid_.periodic_y()) {
        cj = static_cast<int>(((ucj % grid_.rows) + grid_.rows) % grid_.rows);
      } else {
        if (ucj < 0 || ucj >= cell_rows_)
          abort_trace("contour would leave the strip through a wall");
        cj = static_cast<int>(ucj);
      }

      const EdgeRef entry = cell_edge(ci, cj, side);
      mark_edge(entry);

      double f, gm;
      edge_crossing(entry, f, gm);
      comp.grad_min = std::min(comp.grad_min, gm);
      switch (side) {
        case kS:
          ux.push_back((uci + f) * grid_.hx);
          uy.push_back(static_cast<double>(ucj) * grid_.hy);
          break;
        case kN:
          ux.push_back((uci + f) * grid_.hx);
          uy.push_back(static_cast<double>(ucj + 1) * grid_.hy);
          break;
        case kW:
          ux.push_back(static_cast<double>(uci) * grid_.hx);
          uy.push_back((ucj + f) * grid_.hy);
          break;
        default:
          ux.push_back(static_cast<double>(uci + 1) * grid_.hx);
          uy.push_back((ucj + f) * grid_.hy);
          break;
      }

      const int mask = (inside_[grid_.idx(ci, cj)] ? 1 : 0) |
                       (inside_[grid_.idx(ci + 1, cj)] ? 2 : 0) |
                       (inside_[grid_.idx(ci + 1, cj + 1)] ? 4 : 0) |
                       (inside_[grid_.idx(ci, cj + 1)] ? 8 : 0);
      const double center = 0.25 * (phi_[grid_.idx(ci, cj)] + phi_[grid_.idx(ci + 1, cj)] +
                                    phi_[grid_.idx(ci + 1, cj + 1)] + phi_[grid_.idx(ci, cj + 1)]);
      const int exit = exit_side(mask, side, center > t_);
      if (exit < 0) abort_trace("contour entered a cell with no matching segment");

      switch (exit) {
        case kS: ucj -= 1; side = kN; break;
        case kN: ucj += 1; side = kS; break;
        case kE: uci += 1; side = kW; break;
        default: uci -= 1; side = kE; break;
      }

      if (++steps > budget_) abort_trace("contour did not close within the step budget");

      const int nci = grid_.wrap_x(static_cast<int>(((uci % grid_.nx) + grid_.nx)));
      int ncj;
      if (grid_.periodic_y()) {
        ncj = static_cast<int>(((ucj % grid_.rows) + grid_.rows) % grid_.rows);
      } else {
        if (ucj < 0 || ucj >= cell_rows_)
          abort_trace("contour would leave the strip through a wall");
        ncj = static_cast<int>(ucj);
      }
      const EdgeRef next = cell_edge(nci, ncj, side);
      if (same_edge(next, start_edge)) {
        if (side != start_side)
          abort_trace("contour returned to its starting edge against orientation");
        break;
      }
      if (edge_visited(next))
        abort_trace("contour ran onto an already traced edge");
    }

    comp.wind_x = static_cast<int>((uci - uci0) / grid_.nx);
    comp.wind_y = grid_.periodic_y() ? static_cast<int>((ucj - ucj0) / grid_.rows) : 0;

    const double span_x = comp.wind_x * grid_.spec.L1;
    const double span_y = comp.wind_y * grid_.spec.L2;
    const size_t k = ux.size();
    double arclen = 0.0, area2 = 0.0;
    for (size_t v = 0; v + 1 < k; ++v) {
      arclen += std::hypot(ux[v + 1] - ux[v], uy[v + 1] - uy[v]);
      area2 += ux[v] * uy[v + 1] - ux[v + 1] * uy[v];
    }
    const double cx = ux[0] + span_x, cy = uy[0] + span_y;
    arclen += std::hypot(cx - ux[k - 1], cy - uy[k - 1]);
    area2 += ux[k - 1] * cy - cx * uy[k - 1];
    comp.arclength = arclen;
    if (comp.wind_x != 0)
      comp.orientation = comp.wind_x > 0 ? 1 : -1;
    else if (comp.wind_y != 0)
      comp.orientation = comp.wind_y > 0 ? 1 : -1;
    else
      comp.orientation = area2 > 0.0 ? 1 : -1;

    comp.xs.resize(k);
    comp.ys.resize(k);
    for (size_t v = 0; v < k; ++v) {
      double x = std::fmod(ux[v], grid_.spec.L1);
      if (x < 0.0) x += grid_.spec.L1;
      double y = uy[v];
      if (grid_.periodic_y()) {
        y = std::fmod(y, grid_.spec.L2);
        if (y < 0.0) y += grid_.spec.L2;
      }
      comp.xs[v] = x;
      comp.ys[v] = y;
    }
    return comp;
  }

  const Grid& grid_;
  const std::vector<double>& phi_;
  const std::vector<double>& gmag_;
  const double t_;
  const long long budget_;
  const int cell_rows_;
  std::vector<char> inside_;
  std::vector<char> hvis_;
  std::vector<char> vvis_;
};

int gcd_pair(int a, int b) { return std::gcd(std::abs(a), std::abs(b)); }

}  // namespace

TrajectoryReport classify_trajectories(const Grid& grid,
                                       const StreamFunction& stream,
                                       const ClassifyOptions& opt) {
  if (opt.levels < 1)
    fail(ErrorCode::precondition_violation, "level count must be positive");
  if (static_cast<int>(stream.phi.size()) != grid.node_count())
    fail(ErrorCode::precondition_violation,
         "stream potential does not match the grid");

  const std::vector<double>& phi = stream.phi;
  TrajectoryReport report;
  report.requested_levels = opt.levels;
  report.value_min = *std::min_element(phi.begin(), phi.end());
  report.value_max = *std::max_element(phi.begin(), phi.end());

  auto [g1, g2] = grad_perp_spectral(grid, phi);
  std::vector<double> gmag(phi.size());
  for (size_t v = 0; v < phi.size(); ++v) gmag[v] = std::hypot(g1[v], g2[v]);
  report.gradient_max = *std::max_element(gmag.begin(), gmag.end());

  if (report.value_max <= report.value_min) return report;

  report.saddle_values =
      detect_saddles(grid, phi, report.value_max - report.value_min);

  std::vector<double> sorted = phi;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> uniq;
  uniq.reserve(sorted.size());
  for (double v : sorted)
    if (uniq.empty() || v != uniq.back()) uniq.push_back(v);

  const double floor = opt.gradient_floor * report.gradient_max;
  // A level indistinguishable from a saddle value threads the separatrix web
  // on the noise of the node values, so it cannot be certified regular.
  const double saddle_tol = 1e-9 * (report.value_max - report.value_min);
  const long long budget =
      static_cast<long long>(opt.max_steps_per_cell) * grid.nx * grid.rows + 16;

  // Sample at increasing quantile density until the requested number of
  // levels is certified regular, or no new values appear.
  std::vector<double> traced;
  int regular_count = 0;
  for (int round = 0; round < 6 && regular_count < opt.levels; ++round) {
    const std::vector<double> candidates =
        sample_levels(sorted, uniq, opt.levels << round);
    bool progress = false;
    for (double t : candidates) {
      auto it = std::lower_bound(traced.begin(), traced.end(), t);
      if (it != traced.end() && *it == t) continue;
      traced.insert(it, t);
      progress = true;

      LevelTracer tracer(grid, phi, gmag, t, budget);
      LevelSet ls = tracer.run();
      ls.regular = true;
      for (double sv : report.saddle_values)
        if (std::abs(t - sv) <= saddle_tol) ls.regular = false;
      for (const ContourComponent& c : ls.components)
        if (!(c.grad_min >= floor)) ls.regular = false;
      if (ls.regular) ++regular_count;
      else report.critical_values.push_back(t);
      report.levels.push_back(std::move(ls));
    }
    if (!progress) break;
  }
  std::sort(report.levels.begin(), report.levels.end(),
            [](const LevelSet& a, const LevelSet& b) { return a.level < b.level; });
  std::sort(report.critical_values.begin(), report.critical_values.end());
  report.sampled_levels = static_cast<int>(report.levels.size());

  // Shared-primitive invariant over the regular levels.
  int px = 0, py = 0;
  for (const LevelSet& ls : report.levels) {
    if (!ls.regular) continue;
    for (const ContourComponent& c : ls.components) {
      if (c.wind_x == 0 && c.wind_y == 0) continue;
      if (px == 0 && py == 0) {
        const int g = gcd_pair(c.wind_x, c.wind_y);
        px = c.wind_x / g;
        py = c.wind_y / g;
        if (px < 0 || (px == 0 && py < 0)) {
          px = -px;
          py = -py;
        }
      }
      const long long cross = static_cast<long long>(c.wind_x) * py -
                              static_cast<long long>(c.wind_y) * px;
      if (cross != 0) {
        std::ostringstream os;
        os << "winding (" << c.wind_x << ", " << c.wind_y
           << ") at level " << ls.level << " is not a multiple of the primitive ("
           << px << ", " << py << ")";
        fail(ErrorCode::tracing_failure, os.str());
      }
    }
  }
  report.prim_x = px;
  report.prim_y = py;
  report.a = {px * grid.spec.L1, py * grid.spec.L2};

  // Channels: maximal runs of regular winding levels.
  bool open = false;
  for (const LevelSet& ls : report.levels) {
    bool winds = false;
    if (ls.regular)
      for (const ContourComponent& c : ls.components)
        if (c.wind_x != 0 || c.wind_y != 0) winds = true;
    if (winds) {
      if (!open) {
        report.channels.push_back({ls.level, ls.level, px, py});
        open = true;
      } else {
        report.channels.back().t_hi = ls.level;
      }
    } else {
      open = false;
    }
  }
  report.has_unbounded_periodic = !report.channels.empty();

  if (report.has_unbounded_periodic && !grid.periodic_y() &&
      !(report.prim_x == 1 && report.prim_y == 0)) {
    std::ostringstream os;
    os << "strip primitive winding must be (1, 0), traced (" << report.prim_x
       << ", " << report.prim_y << ")";
    fail(ErrorCode::tracing_failure, os.str());
  }
  return report;
}

PositivityVerdict positivity_criterion(const TrajectoryReport& report,
                                       const Vec2& e) {
  PositivityVerdict verdict;
  verdict.has_a = report.has_unbounded_periodic;
  if (verdict.has_a) {
    verdict.a = report.a;
    verdict.e_dot_a = dot(e, report.a);
    const double scale = std::hypot(report.a.x, report.a.y);
    verdict.limit_positive = std::abs(verdict.e_dot_a) > 1e-12 * scale;
  }
  return verdict;
}

ChannelWitness channel_witness(const Grid& grid, const FieldSet& fields,
                               const StreamFunction& stream,
                               const TrajectoryReport& report) {
  if (!report.has_unbounded_periodic || report.channels.empty())
    fail(ErrorCode::no_channel, "no winding level band to support a witness");
  if (static_cast<int>(stream.phi.size()) != grid.node_count() ||
      static_cast<int>(fields.q.size()) != grid.node_count())
    fail(ErrorCode::precondition_violation,
         "stream potential or fields do not match the grid");

  const Channel& channel = report.channels.front();
  double lo = channel.t_lo, hi = channel.t_hi;
  if (!(hi > lo)) {
    // Single-level channel: widen into the gaps toward the nearest sampled
    // neighbors, falling back to the full value range.
    double gap = report.value_max - report.value_min;
    for (const LevelSet& ls : report.levels)
      if (ls.level != lo) gap = std::min(gap, std::abs(ls.level - lo));
    lo -= 0.5 * gap;
    hi += 0.5 * gap;
  }
  const double band_lo = lo + 0.25 * (hi - lo);
  const double band_hi = hi - 0.25 * (hi - lo);

  std::vector<int> labels;
  const int count =
      label_band_components(grid, stream.phi, band_lo, band_hi, 0.0, labels);
  if (count == 0)
    fail(ErrorCode::no_channel, "winding band contains no grid nodes");

  int chosen = -1;
  for (int v = 0; v < grid.node_count() && chosen < 0; ++v)
    if (labels[v] >= 0) chosen = labels[v];

  ChannelWitness witness;
  witness.t_lo = band_lo;
  witness.t_hi = band_hi;
  witness.w.assign(grid.node_count(), 0.0);
  const double mid = 0.5 * (band_lo + band_hi);
  const double half = 0.5 * (band_hi - band_lo);
  for (int v = 0; v < grid.node_count(); ++v) {
    if (labels[v] != chosen) continue;
    const double eta = 1.0 - std::abs(stream.phi[v] - mid) / half;
    if (eta > 0.0) {
      witness.w[v] = eta;
      ++witness.support_nodes;
    }
  }

  Vec2 drift{0.0, 0.0};
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.rows; ++j) {
      const int v = grid.idx(i, j);
      const double w2 = witness.w[v] * witness.w[v];
      if (w2 == 0.0) continue;
      const double weight = grid.node_weight(j) * w2;
      drift.x += weight * fields.q[v].x;
      drift.y += weight * fields.q[v].y;
    }
  witness.drift = drift;

  const double a_norm = std::hypot(report.a.x, report.a.y);
  const double d_norm = std::hypot(drift.x, drift.y);
  if (a_norm > 0.0 && d_norm > 0.0) {
    const double along = (drift.x * report.a.x + drift.y * report.a.y) / a_norm;
    const double ox = drift.x - along * report.a.x / a_norm;
    const double oy = drift.y - along * report.a.y / a_norm;
    witness.off_axis = std::hypot(ox, oy) / d_norm;
  }
  return witness;
}

int label_band_components(const Grid& grid, const std::vector<double>& phi,
                          double lo, double hi, double margin,
                          std::vector<int>& labels) {
  if (static_cast<int>(phi.size()) != grid.node_count())
    fail(ErrorCode::precondition_violation,
         "node field does not match the grid");
  labels.assign(phi.size(), -1);
  const double lo_eff = lo + margin, hi_eff = hi - margin;
  auto member = [&](int v) { return phi[v] > lo_eff && phi[v] < hi_eff; };

  int count = 0;
  std::vector<int> stack;
  for (int i0 = 0; i0 < grid.nx; ++i0)
    for (int j0 = 0; j0 < grid.rows; ++j0) {
      const int v0 = grid.idx(i0, j0);
      if (labels[v0] >= 0 || !member(v0)) continue;
      const int id = count++;
      labels[v0] = id;
      stack.assign(1, i0 * grid.rows + j0);
      while (!stack.empty()) {
        const int packed = stack.back();
        stack.pop_back();
        const int i = packed / grid.rows, j = packed % grid.rows;
        const int ni[4] = {i + 1, i - 1, i, i};
        const int nj[4] = {j, j, j + 1, j - 1};
        for (int k = 0; k < 4; ++k) {
          if (!grid.periodic_y() && (nj[k] < 0 || nj[k] >= grid.rows)) continue;
          const int w = grid.idx(ni[k], nj[k]);
          if (labels[w] >= 0 || !member(w)) continue;
          labels[w] = id;
          stack.push_back(grid.wrap_x(ni[k]) * grid.rows +
                          ((nj[k] % grid.rows) + grid.rows) % grid.rows);
        }
      }
    }
  return count;
}

}  // namespace frontlab
