#ifndef FRONTLAB_CATALOG_HPP
#define FRONTLAB_CATALOG_HPP

#include <string>

#include "frontlab/fields.hpp"

namespace frontlab {

/// Named field selection resolved against the built-in catalog.
///
/// Drift families: "zero", "shear_sin", "shear_cos", "cellular",
/// "paper_nonperiodic", "fourier:<coeff-file>". All are mean-zero and
/// divergence-free by construction; the coefficient file lists one mode per
/// line as "kx ky a_cos a_sin" defining a stream function.
///
/// Diffusion families: "identity", "scaled:<b>", "diag:<a11>,<a22>",
/// "yvar:<base>,<amp>" (isotropic, varying in y), "xvar:<base>,<amp>"
/// (A11 varying in x; deliberately has div(A e1) != 0).
///
/// Zeta families: "const:<v>", "sin_y:<base>,<amp>", "cos_y:<base>,<amp>".
///
/// Reaction families: "kpp" (f = zeta * s * (1 - s)).
struct CatalogSelection {
  std::string drift = "zero";
  double drift_amplitude = 1.0;
  std::string diffusion = "identity";
  std::string zeta = "const:1";
  std::string reaction = "kpp";
  Vec2 e{1.0, 0.0};
};

/// Resolves a selection into analytic closures. Throws ConfigError for
/// unknown names, malformed arguments, or unreadable coefficient files.
FieldDefs make_fields(const CellSpec& spec, const CatalogSelection& sel);

}  // namespace frontlab

#endif
