#include "frontlab/operator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace frontlab {
namespace {

struct RowBuilder {
  std::vector<Eigen::Triplet<double>>* out;
  int row = 0;

  void add(int col, double v) {
    if (v != 0.0) out->emplace_back(row, col, v);
  }
};

}  // namespace

DiscreteOperator assemble(const Grid& grid, const FieldSet& fields,
                          double lambda_prime, double M) {
  if (!(lambda_prime > 0.0))
    fail(ErrorCode::precondition_violation,
         "lambda' must be positive, got " + std::to_string(lambda_prime));
  if (!(M > 0.0))
    fail(ErrorCode::precondition_violation, "M must be positive");

  const int n = grid.node_count();
  const double hx = grid.hx, hy = grid.hy;
  const double lam_over_M = lambda_prime / M;
  const Vec2 e = fields.defs.e;
  const bool strip = grid.spec.geometry == Geometry::strip;

  bool has_offdiag_A = false;
  for (const auto& A : fields.A)
    if (A.a12 != 0.0) {
      has_offdiag_A = true;
      break;
    }

  // A e as a sampled vector field, reused for the drift augmentation, the
  // zero-order divergence term, and the wall flux condition.
  std::vector<Vec2> Ae(n);
  for (int k = 0; k < n; ++k) Ae[k] = apply(fields.A[k], e);

  // centered-difference div(A e); one-sided in y on strip walls
  std::vector<double> divAe(n);
  double divAe_inf = 0.0;
  for (int i = 0; i < grid.nx; ++i) {
    for (int j = 0; j < grid.rows; ++j) {
      double dx = (Ae[grid.idx(i + 1, j)].x - Ae[grid.idx(i - 1, j)].x) / (2.0 * hx);
      double dy;
      if (!strip) {
        dy = (Ae[grid.idx(i, j + 1)].y - Ae[grid.idx(i, j - 1)].y) / (2.0 * hy);
      } else if (j == 0) {
        dy = (Ae[grid.idx(i, 1)].y - Ae[grid.idx(i, 0)].y) / hy;
      } else if (j == grid.rows - 1) {
        dy = (Ae[grid.idx(i, j)].y - Ae[grid.idx(i, j - 1)].y) / hy;
      } else {
        dy = (Ae[grid.idx(i, j + 1)].y - Ae[grid.idx(i, j - 1)].y) / (2.0 * hy);
      }
      divAe[grid.idx(i, j)] = dx + dy;
      divAe_inf = std::max(divAe_inf, std::abs(dx + dy));
    }
  }

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(size_t(n) * (has_offdiag_A ? 12 : 6));
  RowBuilder row{&trips};

  DiscreteOperator op;
  op.lambda_prime = lambda_prime;
  op.M = M;
  op.div_Ae_inf = divAe_inf;

  double zmin = 0.0, zmax = 0.0;
  bool first_zero_order = true;

  for (int i = 0; i < grid.nx; ++i) {
    for (int j = 0; j < grid.rows; ++j) {
      const int k = grid.idx(i, j);
      row.row = k;
      const bool bottom = strip && j == 0;
      const bool top = strip && j == grid.rows - 1;

      // ---- diffusion, flux form ------------------------------------------
      auto face_a11 = [&](int ia, int ja, int ib, int jb) {
        return 0.5 * (fields.A[grid.idx(ia, ja)].a11 + fields.A[grid.idx(ib, jb)].a11);
      };
      auto face_a22 = [&](int ia, int ja, int ib, int jb) {
        return 0.5 * (fields.A[grid.idx(ia, ja)].a22 + fields.A[grid.idx(ib, jb)].a22);
      };

      {  // x-fluxes exist for every row, walls included
        double aE = face_a11(i, j, i + 1, j) / (hx * hx);
        double aW = face_a11(i - 1, j, i, j) / (hx * hx);
        row.add(grid.idx(i + 1, j), aE);
        row.add(grid.idx(i - 1, j), aW);
        row.add(k, -aE - aW);
      }

      if (!strip || (!bottom && !top)) {
        double aN = face_a22(i, j, i, j + 1) / (hy * hy);
        double aS = face_a22(i, j - 1, i, j) / (hy * hy);
        row.add(grid.idx(i, j + 1), aN);
        row.add(grid.idx(i, j - 1), aS);
        row.add(k, -aN - aS);
      } else {
        // half-cell balance at a wall: interior face flux against the oblique
        // wall flux (A grad psi).y = -(l'/M) (A e).y psi
        double half = 2.0 / hy;  // 1 / (hy / 2)
        double wall_flux_coeff = -lam_over_M * Ae[k].y;
        if (bottom) {
          double aN = face_a22(i, 0, i, 1) / hy;
          row.add(grid.idx(i, 1), half * aN);
          row.add(k, -half * aN - half * wall_flux_coeff);
        } else {
          double aS = face_a22(i, j - 1, i, j) / hy;
          row.add(grid.idx(i, j - 1), half * aS);
          row.add(k, -half * aS + half * wall_flux_coeff);
        }
      }

      if (has_offdiag_A) {
        // mixed fluxes d/dx (A12 dpsi/dy) + d/dy (A12 dpsi/dx), centered with
        // face-averaged gradients; breaks the nonnegativity pattern, which the
        // metzler() query then reports
        auto face_a12_x = [&](int il) {
          return 0.5 * (fields.A[grid.idx(il, j)].a12 + fields.A[grid.idx(il + 1, j)].a12);
        };
        auto add_dy_avg = [&](int il, double coeff) {
          // average over the two columns il, il+1 of centered dpsi/dy
          for (int ic : {il, il + 1}) {
            if (!strip) {
              row.add(grid.idx(ic, j + 1), coeff / (4.0 * hy));
              row.add(grid.idx(ic, j - 1), -coeff / (4.0 * hy));
            } else if (bottom) {
              row.add(grid.idx(ic, 1), coeff / (2.0 * hy));
              row.add(grid.idx(ic, 0), -coeff / (2.0 * hy));
            } else if (top) {
              row.add(grid.idx(ic, j), coeff / (2.0 * hy));
              row.add(grid.idx(ic, j - 1), -coeff / (2.0 * hy));
            } else {
              row.add(grid.idx(ic, j + 1), coeff / (4.0 * hy));
              row.add(grid.idx(ic, j - 1), -coeff / (4.0 * hy));
            }
          }
        };
        add_dy_avg(i, face_a12_x(i) / hx);
        add_dy_avg(i - 1, -face_a12_x(i - 1) / hx);

        if (!strip || (!bottom && !top)) {
          auto face_a12_y = [&](int jl) {
            return 0.5 * (fields.A[grid.idx(i, jl)].a12 + fields.A[grid.idx(i, jl + 1)].a12);
          };
          auto add_dx_avg = [&](int jl, double coeff) {
            for (int jc : {jl, jl + 1}) {
              row.add(grid.idx(i + 1, jc), coeff / (4.0 * hx));
              row.add(grid.idx(i - 1, jc), -coeff / (4.0 * hx));
            }
          };
          add_dx_avg(j, face_a12_y(j) / hy);
          add_dx_avg(j - 1, -face_a12_y(j - 1) / hy);
        } else {
          // wall half-cell: the wall-side mixed flux is part of the oblique
          // condition already; keep the interior face only
          double coeff = (bottom ? 1.0 : -1.0) * 2.0 / hy;
          int jl = bottom ? 0 : j - 1;
          double a12f = 0.5 * (fields.A[grid.idx(i, jl)].a12 + fields.A[grid.idx(i, jl + 1)].a12);
          for (int jc : {jl, jl + 1}) {
            row.add(grid.idx(i + 1, jc), coeff * a12f / (4.0 * hx));
            row.add(grid.idx(i - 1, jc), -coeff * a12f / (4.0 * hx));
          }
        }
      }

      // ---- advection, first-order upwind ---------------------------------
      const double V1 = M * fields.q[k].x + 2.0 * lam_over_M * Ae[k].x;
      const double V2 = M * fields.q[k].y + 2.0 * lam_over_M * Ae[k].y;

      if (V1 >= 0.0) {
        row.add(grid.idx(i + 1, j), V1 / hx);
        row.add(k, -V1 / hx);
      } else {
        row.add(grid.idx(i - 1, j), -V1 / hx);
        row.add(k, V1 / hx);
      }

      if (bottom) {  // wall-normal drift is one-sided into the domain
        row.add(grid.idx(i, 1), V2 / hy);
        row.add(k, -V2 / hy);
      } else if (top) {
        row.add(grid.idx(i, j - 1), -V2 / hy);
        row.add(k, V2 / hy);
      } else if (V2 >= 0.0) {
        row.add(grid.idx(i, j + 1), V2 / hy);
        row.add(k, -V2 / hy);
      } else {
        row.add(grid.idx(i, j - 1), -V2 / hy);
        row.add(k, V2 / hy);
      }

      // ---- zero order -----------------------------------------------------
      double eAe = dot(e, Ae[k]);
      double c = lam_over_M * lam_over_M * eAe + lambda_prime * fields.qe(k) +
                 lam_over_M * divAe[k] + fields.zeta[k];
      row.add(k, c);
      if (first_zero_order) {
        zmin = zmax = c;
        first_zero_order = false;
      } else {
        zmin = std::min(zmin, c);
        zmax = std::max(zmax, c);
      }
    }
  }

  op.zero_order_min = zmin;
  op.zero_order_max = zmax;

  op.L.resize(n, n);
  op.L.setFromTriplets(trips.begin(), trips.end());
  op.L.makeCompressed();

  double offdiag_min = 0.0, scale = 0.0, diag_max = 0.0;
  double rs_max = 0.0, rs_min = 0.0;
  bool first_row = true;
  for (int r = 0; r < op.L.outerSize(); ++r) {
    double rs = 0.0;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(op.L, r); it; ++it) {
      double v = it.value();
      if (!std::isfinite(v))
        fail(ErrorCode::assembly_failure, "non-finite matrix entry in row " + std::to_string(r));
      rs += v;
      scale = std::max(scale, std::abs(v));
      if (it.col() == r)
        diag_max = std::max(diag_max, std::abs(v));
      else
        offdiag_min = std::min(offdiag_min, v);
    }
    if (first_row) {
      rs_max = rs_min = rs;
      first_row = false;
    } else {
      rs_max = std::max(rs_max, rs);
      rs_min = std::min(rs_min, rs);
    }
  }
  op.offdiag_min = offdiag_min;
  op.coeff_scale = scale;
  op.row_sum_max = rs_max;
  op.row_sum_min = rs_min;
  op.sigma = fields.zeta_inf + lam_over_M * lam_over_M * fields.alpha2 +
             lambda_prime * fields.q_e_inf + lam_over_M * divAe_inf + diag_max;
  return op;
}

void apply_operator(const DiscreteOperator& op, const std::vector<double>& x,
                    std::vector<double>& y) {
  Eigen::Map<const Eigen::VectorXd> xv(x.data(), x.size());
  y.resize(x.size());
  Eigen::Map<Eigen::VectorXd> yv(y.data(), y.size());
  yv = op.L * xv;
}

}  // namespace frontlab
