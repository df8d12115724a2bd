#include "frontlab/stream.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

namespace frontlab {
namespace {

constexpr double two_pi = 6.283185307179586476925286766559;

using Cplx = std::complex<double>;

/// Periodic box the transforms run on; strips double L2 and ny.
struct TorusBox {
  int nx = 0;
  int ny = 0;
  double L1 = 0.0;
  double L2 = 0.0;

  std::size_t real_size() const { return std::size_t(nx) * ny; }
  std::size_t spec_size() const { return std::size_t(nx) * (ny / 2 + 1); }
  std::size_t at(int i, int j) const { return std::size_t(i) * ny + j; }
};

std::vector<Cplx> forward_fft(const TorusBox& box, std::vector<double> data) {
  std::vector<Cplx> out(box.spec_size());
  fftw_plan plan = fftw_plan_dft_r2c_2d(
      box.nx, box.ny, data.data(),
      reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  return out;
}

std::vector<double> inverse_fft(const TorusBox& box, std::vector<Cplx> spec) {
  std::vector<double> out(box.real_size());
  fftw_plan plan = fftw_plan_dft_c2r_2d(
      box.nx, box.ny, reinterpret_cast<fftw_complex*>(spec.data()),
      out.data(), FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  double scale = 1.0 / double(box.real_size());
  for (double& v : out) v *= scale;
  return out;
}

double wavenumber(int index, int n, double length) {
  int s = index <= n / 2 ? index : index - n;
  return two_pi * double(s) / length;
}

struct SpectralSolve {
  std::vector<double> phi;
  std::vector<double> g1;  ///< -dphi/dy, spectral
  std::vector<double> g2;  ///< dphi/dx, spectral
};

/// Inverts the Laplacian against the curl of (q1, q2) and differentiates the
/// result back; derivative factors vanish on the Nyquist lines so real output
/// stays exact.
SpectralSolve poisson_on_torus(const TorusBox& box,
                               const std::vector<double>& q1,
                               const std::vector<double>& q2) {
  std::vector<Cplx> q1h = forward_fft(box, q1);
  std::vector<Cplx> q2h = forward_fft(box, q2);

  const int nyh = box.ny / 2 + 1;
  std::vector<Cplx> phih(box.spec_size());
  std::vector<Cplx> g1h(box.spec_size());
  std::vector<Cplx> g2h(box.spec_size());

  for (int m = 0; m < box.nx; ++m) {
    double kx = wavenumber(m, box.nx, box.L1);
    bool nyq_x = (m == box.nx / 2);
    for (int l = 0; l < nyh; ++l) {
      double ky = two_pi * double(l) / box.L2;
      bool nyq_y = (l == box.ny / 2);
      std::size_t id = std::size_t(m) * nyh + l;
      double k2 = kx * kx + ky * ky;
      Cplx ph = k2 > 0.0
                    ? Cplx(0.0, 1.0) * (ky * q1h[id] - kx * q2h[id]) / k2
                    : Cplx(0.0, 0.0);
      phih[id] = ph;
      Cplx dx = nyq_x ? Cplx(0.0, 0.0) : Cplx(0.0, kx);
      Cplx dy = nyq_y ? Cplx(0.0, 0.0) : Cplx(0.0, ky);
      g1h[id] = -dy * ph;
      g2h[id] = dx * ph;
    }
  }

  SpectralSolve out;
  out.phi = inverse_fft(box, std::move(phih));
  out.g1 = inverse_fft(box, std::move(g1h));
  out.g2 = inverse_fft(box, std::move(g2h));
  return out;
}

/// Reflects strip samples onto the doubled torus: q1 evenly, q2 oddly,
/// scalars evenly.
void reflect_to_double(const Grid& grid, const std::vector<double>& v,
                       double parity, std::vector<double>& out) {
  const int ny = grid.spec.ny;
  const int nyt = 2 * ny;
  out.assign(std::size_t(grid.nx) * nyt, 0.0);
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < nyt; ++j) {
      int src = j <= ny ? j : nyt - j;
      double sign = j <= ny ? 1.0 : parity;
      out[std::size_t(i) * nyt + j] = sign * v[grid.idx(i, src)];
    }
}

TorusBox box_for(const Grid& grid) {
  TorusBox box;
  box.nx = grid.nx;
  box.L1 = grid.spec.L1;
  if (grid.spec.geometry == Geometry::torus) {
    box.ny = grid.rows;
    box.L2 = grid.spec.L2;
  } else {
    box.ny = 2 * grid.spec.ny;
    box.L2 = 2.0 * grid.spec.L2;
  }
  return box;
}

}  // namespace

StreamFunction solve_stream_nodes(const Grid& grid,
                                  const std::vector<double>& q1,
                                  const std::vector<double>& q2,
                                  const StreamOptions& opt) {
  const std::size_t nodes = std::size_t(grid.node_count());
  if (q1.size() != nodes || q2.size() != nodes)
    fail(ErrorCode::precondition_violation, "drift samples do not match the grid");

  const bool strip = grid.spec.geometry == Geometry::strip;
  TorusBox box = box_for(grid);

  std::vector<double> a1, a2;
  if (strip) {
    reflect_to_double(grid, q1, 1.0, a1);
    reflect_to_double(grid, q2, -1.0, a2);
  } else {
    a1 = q1;
    a2 = q2;
  }

  SpectralSolve sol = poisson_on_torus(box, a1, a2);

  double q_scale = 0.0;
  double res_spectral = 0.0;
  for (std::size_t k = 0; k < box.real_size(); ++k) {
    q_scale = std::max({q_scale, std::abs(a1[k]), std::abs(a2[k])});
    res_spectral = std::max({res_spectral, std::abs(a1[k] - sol.g1[k]),
                             std::abs(a2[k] - sol.g2[k])});
  }

  double res_centered = 0.0;
  const double hx = box.L1 / box.nx;
  const double hy = box.L2 / box.ny;
  for (int i = 0; i < box.nx; ++i) {
    int ie = (i + 1) % box.nx;
    int iw = (i + box.nx - 1) % box.nx;
    for (int j = 0; j < box.ny; ++j) {
      int jn = (j + 1) % box.ny;
      int js = (j + box.ny - 1) % box.ny;
      double g1c = -(sol.phi[box.at(i, jn)] - sol.phi[box.at(i, js)]) / (2.0 * hy);
      double g2c = (sol.phi[box.at(ie, j)] - sol.phi[box.at(iw, j)]) / (2.0 * hx);
      res_centered = std::max({res_centered, std::abs(a1[box.at(i, j)] - g1c),
                               std::abs(a2[box.at(i, j)] - g2c)});
    }
  }

  StreamFunction out;
  out.residual_spectral = res_spectral;
  out.residual_centered = res_centered;

  if (strip) {
    out.phi.assign(nodes, 0.0);
    for (int i = 0; i < grid.nx; ++i)
      for (int j = 0; j < grid.rows; ++j)
        out.phi[grid.idx(i, j)] = sol.phi[box.at(i, j)];

    double lo = 0.0, hi = 0.0;
    for (int i = 0; i < grid.nx; ++i) {
      lo += out.phi[grid.idx(i, 0)];
      hi += out.phi[grid.idx(i, grid.rows - 1)];
    }
    lo /= grid.nx;
    hi /= grid.nx;
    double dev = 0.0;
    for (int i = 0; i < grid.nx; ++i) {
      dev = std::max(dev, std::abs(out.phi[grid.idx(i, 0)] - lo));
      dev = std::max(dev, std::abs(out.phi[grid.idx(i, grid.rows - 1)] - hi));
    }
    out.wall_lo = lo;
    out.wall_hi = hi;
    out.wall_deviation = dev;
  } else {
    out.phi = std::move(sol.phi);
  }

  double mean = grid.integrate(out.phi) / grid.cell_measure();
  out.mean_abs = std::abs(mean);

  if (res_spectral > opt.divergence_tol * std::max(q_scale, 1e-300)) {
    std::ostringstream msg;
    msg << "drift is not the perpendicular gradient of any potential: "
        << "reconstruction residual " << res_spectral << " vs scale " << q_scale;
    fail(ErrorCode::not_divergence_free, msg.str());
  }
  return out;
}

StreamFunction solve_stream(const Grid& grid, const FieldSet& fields,
                            const StreamOptions& opt) {
  std::vector<double> q1(fields.q.size());
  std::vector<double> q2(fields.q.size());
  for (std::size_t k = 0; k < fields.q.size(); ++k) {
    q1[k] = fields.q[k].x;
    q2[k] = fields.q[k].y;
  }
  return solve_stream_nodes(grid, q1, q2, opt);
}

std::pair<std::vector<double>, std::vector<double>> grad_perp_spectral(
    const Grid& grid, const std::vector<double>& phi) {
  const std::size_t nodes = std::size_t(grid.node_count());
  if (phi.size() != nodes)
    fail(ErrorCode::precondition_violation, "potential samples do not match the grid");

  const bool strip = grid.spec.geometry == Geometry::strip;
  TorusBox box = box_for(grid);

  std::vector<double> data;
  if (strip) reflect_to_double(grid, phi, 1.0, data);
  else data = phi;

  std::vector<Cplx> ph = forward_fft(box, std::move(data));
  const int nyh = box.ny / 2 + 1;
  std::vector<Cplx> g1h(box.spec_size());
  std::vector<Cplx> g2h(box.spec_size());
  for (int m = 0; m < box.nx; ++m) {
    double kx = wavenumber(m, box.nx, box.L1);
    bool nyq_x = (m == box.nx / 2);
    for (int l = 0; l < nyh; ++l) {
      double ky = two_pi * double(l) / box.L2;
      bool nyq_y = (l == box.ny / 2);
      std::size_t id = std::size_t(m) * nyh + l;
      Cplx dx = nyq_x ? Cplx(0.0, 0.0) : Cplx(0.0, kx);
      Cplx dy = nyq_y ? Cplx(0.0, 0.0) : Cplx(0.0, ky);
      g1h[id] = -dy * ph[id];
      g2h[id] = dx * ph[id];
    }
  }
  std::vector<double> g1 = inverse_fft(box, std::move(g1h));
  std::vector<double> g2 = inverse_fft(box, std::move(g2h));

  if (!strip) return {std::move(g1), std::move(g2)};

  std::vector<double> r1(nodes), r2(nodes);
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.rows; ++j) {
      r1[grid.idx(i, j)] = g1[box.at(i, j)];
      r2[grid.idx(i, j)] = g2[box.at(i, j)];
    }
  return {std::move(r1), std::move(r2)};
}

}  // namespace frontlab
