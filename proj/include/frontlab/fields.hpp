#ifndef FRONTLAB_FIELDS_HPP
#define FRONTLAB_FIELDS_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "frontlab/grid.hpp"

namespace frontlab {

/// Symmetric 2x2 matrix; symmetry is enforced by the representation.
struct SymMat2 {
  double a11 = 1.0;
  double a12 = 0.0;
  double a22 = 1.0;

  double eig_min() const;
  double eig_max() const;
};

inline Vec2 apply(const SymMat2& A, const Vec2& v) {
  return {A.a11 * v.x + A.a12 * v.y, A.a12 * v.x + A.a22 * v.y};
}

/// Analytic field definitions over one periodicity cell. Closures take cell
/// coordinates (x, y). The optional analytic divergence closure, when
/// present, is the authority for the divergence-free check; otherwise the
/// check falls back to centered differences of the samples.
struct FieldDefs {
  std::function<SymMat2(double, double)> A;
  std::function<Vec2(double, double)> q;
  std::function<double(double, double)> zeta;
  std::function<double(double, double, double)> f;  ///< reaction f(x, y, s)
  std::function<double(double, double)> div_q;      ///< optional, may be null
  std::function<double(double, double)> phi;        ///< stream function, optional
  Vec2 e;             ///< front direction, unit vector; strip: (+-1, 0)
  std::string name;   ///< catalog tag used in reports
};

/// Fields sampled on a grid, plus cached bounds used throughout the solvers.
/// Immutable after construction; the defining closures are retained so that
/// sweeps can resample on refined grids.
struct FieldSet {
  std::vector<SymMat2> A;
  std::vector<Vec2> q;
  std::vector<double> zeta;
  FieldDefs defs;

  double alpha1 = 0.0;      ///< min over nodes of the smallest eigenvalue of A
  double alpha2 = 0.0;      ///< max over nodes of the largest eigenvalue of A
  double q_inf = 0.0;       ///< max |q| over nodes
  double q_e_inf = 0.0;     ///< max |q . e| over nodes
  double zeta_inf = 0.0;
  double zeta_mean = 0.0;   ///< mean of zeta over the cell
  double cell_measure = 0.0;

  double qe(int node) const { return dot(q[node], defs.e); }
};

/// Samples the closures at every node and caches the derived bounds.
/// Throws EvaluationFailure on non-finite values; deeper validation is
/// deferred to validate_fields.
FieldSet sample_fields(const Grid& grid, const FieldDefs& defs);

/// Returns defs with zeta and f multiplied by eps (reaction scaling).
/// eps = 1 returns defs unchanged so downstream results stay bit-identical.
FieldDefs scale_reaction(const FieldDefs& defs, double eps);

/// Returns defs with the diffusion matrix multiplied by factor.
/// factor = 1 returns defs unchanged.
FieldDefs scale_diffusion(const FieldDefs& defs, double factor);

/// Returns defs with the drift field multiplied by factor.
/// factor = 1 returns defs unchanged.
FieldDefs scale_drift(const FieldDefs& defs, double factor);

struct ValidationIssue {
  std::string condition;
  bool pass = true;
  double residual = 0.0;
  std::string detail;
};

struct ValidationReport {
  bool ok = true;
  std::vector<ValidationIssue> issues;

  const ValidationIssue* find(const std::string& condition) const;
};

struct ValidationTolerances {
  double q_mean_rel = 1e-12;       ///< zero-mean drift, relative to |q|*|C|
  double div_rel = 1e-8;           ///< divergence residual, relative to |q|
  double wall_flux_rel = 1e-12;    ///< strip: q . nu at walls, relative to |q|
  int reaction_s_samples = 19;     ///< s-grid resolution for the KPP bound
};

/// Report-only structural validation: ellipticity of A, zero-mean and
/// divergence-free drift, wall impermeability on strips, positivity of zeta,
/// and the KPP bounds 0 < f(z, s) <= zeta(z) s with f(z, 0) = f(z, 1) = 0.
ValidationReport validate_fields(const Grid& grid, const FieldSet& fields,
                                 const ValidationTolerances& tol = {});

/// Centered-difference divergence of the sampled drift at node (i, j).
/// Strip wall rows use one-sided differences in y.
double discrete_divergence(const Grid& grid, const std::vector<Vec2>& q,
                           int i, int j);

}  // namespace frontlab

#endif
