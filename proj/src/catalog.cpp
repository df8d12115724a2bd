#include "frontlab/catalog.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace frontlab {
namespace {

constexpr double two_pi = 6.283185307179586476925286766559;

/// Splits "name:a,b" into the name and numeric arguments.
struct NamedArgs {
  std::string name;
  std::vector<double> args;
};

NamedArgs parse_named(const std::string& text) {
  NamedArgs out;
  auto colon = text.find(':');
  out.name = text.substr(0, colon);
  if (colon == std::string::npos) return out;
  std::string rest = text.substr(colon + 1);
  std::stringstream ss(rest);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      size_t used = 0;
      double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      out.args.push_back(v);
    } catch (const std::exception&) {
      fail(ErrorCode::config_error, "bad numeric argument '" + tok + "' in '" + text + "'");
    }
  }
  return out;
}

double arg_at(const NamedArgs& na, size_t i, const std::string& what) {
  if (i >= na.args.size())
    fail(ErrorCode::config_error, what + " needs " + std::to_string(i + 1) + " argument(s)");
  return na.args[i];
}

struct FourierMode {
  int kx = 0;
  int ky = 0;
  double a_cos = 0.0;
  double a_sin = 0.0;
};

std::vector<FourierMode> load_fourier_modes(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::config_error, "cannot open coefficient file '" + path + "'");
  std::vector<FourierMode> modes;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::stringstream ss(line);
    FourierMode m;
    if (!(ss >> m.kx)) continue;  // blank or comment-only line
    if (!(ss >> m.ky >> m.a_cos >> m.a_sin))
      fail(ErrorCode::config_error, path + ":" + std::to_string(line_no) +
                                        ": expected 'kx ky a_cos a_sin'");
    if (m.kx == 0 && m.ky == 0)
      fail(ErrorCode::config_error, path + ":" + std::to_string(line_no) +
                                        ": mode (0,0) has no stream content");
    modes.push_back(m);
  }
  if (modes.empty())
    fail(ErrorCode::config_error, path + ": no modes found");
  return modes;
}

/// Flat-bottomed periodic envelope exp(-1/sin^2(pi t)), zero at integers.
/// Returns the pair (E, dE/dt); both vanish to all orders at integers.
void envelope(double t, double* E, double* dE) {
  double s = std::sin(M_PI * t);
  double s2 = s * s;
  if (s2 < 1.45e-3) {  // exponent below -690: underflows to an exact flat zero
    *E = 0.0;
    *dE = 0.0;
    return;
  }
  double e = std::exp(-1.0 / s2);
  *E = e;
  *dE = e * 2.0 * M_PI * std::cos(M_PI * t) / (s2 * s);
}

}  // namespace

FieldDefs make_fields(const CellSpec& spec, const CatalogSelection& sel) {
  FieldDefs defs;
  defs.e = sel.e;
  defs.name = sel.drift;
  double L1 = spec.L1, L2 = spec.L2;
  double amp = sel.drift_amplitude;

  std::string drift_family = sel.drift.substr(0, sel.drift.find(':'));
  NamedArgs drift;
  drift.name = drift_family;
  if (drift_family != "fourier") drift = parse_named(sel.drift);
  if (drift.name == "zero") {
    defs.q = [](double, double) { return Vec2{0.0, 0.0}; };
    defs.phi = [](double, double) { return 0.0; };
    defs.div_q = [](double, double) { return 0.0; };
  } else if (drift.name == "shear_sin" || drift.name == "shear_cos") {
    bool use_sin = drift.name == "shear_sin";
    defs.q = [=](double, double y) {
      double u = two_pi * y / L2;
      return Vec2{amp * (use_sin ? std::sin(u) : std::cos(u)), 0.0};
    };
    defs.phi = [=](double, double y) {
      double u = two_pi * y / L2;
      double c = amp * L2 / two_pi;
      return use_sin ? c * std::cos(u) : -c * std::sin(u);
    };
    defs.div_q = [](double, double) { return 0.0; };
  } else if (drift.name == "cellular") {
    defs.phi = [=](double x, double y) {
      return amp / two_pi * std::sin(two_pi * x / L1) * std::sin(two_pi * y / L2);
    };
    defs.q = [=](double x, double y) {
      double sx = std::sin(two_pi * x / L1), cx = std::cos(two_pi * x / L1);
      double sy = std::sin(two_pi * y / L2), cy = std::cos(two_pi * y / L2);
      return Vec2{-amp * sx * cy / L2, amp * cx * sy / L1};
    };
    defs.div_q = [](double, double) { return 0.0; };
  } else if (drift.name == "paper_nonperiodic") {
    // Stream function E(y) sin(2 pi (x + ln(frac y))) in cell coordinates;
    // smooth because the envelope flattens to all orders at y in Z, with an
    // unbounded non-periodic trajectory inside each channel.
    auto phi_and_grad = [=](double x, double y, double* phi, Vec2* grad) {
      double xh = x / L1, yh = y / L2;
      double fy = yh - std::floor(yh);
      double E, dE;
      envelope(fy, &E, &dE);
      if (E == 0.0) {
        *phi = 0.0;
        if (grad) *grad = Vec2{0.0, 0.0};
        return;
      }
      double theta = two_pi * (xh + std::log(fy));
      double s = std::sin(theta), c = std::cos(theta);
      *phi = amp * E * s;
      if (grad) {
        grad->x = amp * E * c * two_pi / L1;
        grad->y = amp * (dE * s + E * c * two_pi / fy) / L2;
      }
    };
    defs.phi = [=](double x, double y) {
      double p;
      phi_and_grad(x, y, &p, nullptr);
      return p;
    };
    defs.q = [=](double x, double y) {
      double p;
      Vec2 g;
      phi_and_grad(x, y, &p, &g);
      return Vec2{-g.y, g.x};
    };
    defs.div_q = [](double, double) { return 0.0; };
  } else if (drift.name == "fourier") {
    auto colon = sel.drift.find(':');
    if (colon == std::string::npos)
      fail(ErrorCode::config_error, "fourier drift needs a coefficient file: fourier:<path>");
    auto modes = load_fourier_modes(sel.drift.substr(colon + 1));
    defs.phi = [=](double x, double y) {
      double acc = 0.0;
      for (const auto& m : modes) {
        double u = two_pi * (m.kx * x / L1 + m.ky * y / L2);
        acc += m.a_cos * std::cos(u) + m.a_sin * std::sin(u);
      }
      return amp * acc;
    };
    defs.q = [=](double x, double y) {
      double gx = 0.0, gy = 0.0;
      for (const auto& m : modes) {
        double u = two_pi * (m.kx * x / L1 + m.ky * y / L2);
        double du = -m.a_cos * std::sin(u) + m.a_sin * std::cos(u);
        gx += du * two_pi * m.kx / L1;
        gy += du * two_pi * m.ky / L2;
      }
      return Vec2{-amp * gy, amp * gx};
    };
    defs.div_q = [](double, double) { return 0.0; };
  } else {
    fail(ErrorCode::config_error, "unknown drift family '" + sel.drift + "'");
  }

  NamedArgs diff = parse_named(sel.diffusion);
  if (diff.name == "identity") {
    defs.A = [](double, double) { return SymMat2{1.0, 0.0, 1.0}; };
  } else if (diff.name == "scaled") {
    double b = arg_at(diff, 0, "scaled diffusion");
    defs.A = [=](double, double) { return SymMat2{b, 0.0, b}; };
  } else if (diff.name == "diag") {
    double a11 = arg_at(diff, 0, "diag diffusion");
    double a22 = arg_at(diff, 1, "diag diffusion");
    defs.A = [=](double, double) { return SymMat2{a11, 0.0, a22}; };
  } else if (diff.name == "yvar") {
    double base = arg_at(diff, 0, "yvar diffusion");
    double da = arg_at(diff, 1, "yvar diffusion");
    defs.A = [=](double, double y) {
      double a = base + da * std::sin(two_pi * y / L2);
      return SymMat2{a, 0.0, a};
    };
  } else if (diff.name == "xvar") {
    double base = arg_at(diff, 0, "xvar diffusion");
    double da = arg_at(diff, 1, "xvar diffusion");
    defs.A = [=](double x, double) {
      return SymMat2{base + da * std::sin(two_pi * x / L1), 0.0, base};
    };
  } else {
    fail(ErrorCode::config_error, "unknown diffusion family '" + sel.diffusion + "'");
  }

  NamedArgs zdef = parse_named(sel.zeta);
  if (zdef.name == "const") {
    double v = arg_at(zdef, 0, "const zeta");
    defs.zeta = [=](double, double) { return v; };
  } else if (zdef.name == "sin_y" || zdef.name == "cos_y") {
    double base = arg_at(zdef, 0, zdef.name + " zeta");
    double dz = arg_at(zdef, 1, zdef.name + " zeta");
    bool use_sin = zdef.name == "sin_y";
    defs.zeta = [=](double, double y) {
      double u = two_pi * y / L2;
      return base + dz * (use_sin ? std::sin(u) : std::cos(u));
    };
  } else {
    fail(ErrorCode::config_error, "unknown zeta family '" + sel.zeta + "'");
  }

  if (sel.reaction == "kpp") {
    auto zeta = defs.zeta;
    defs.f = [=](double x, double y, double s) { return zeta(x, y) * s * (1.0 - s); };
  } else {
    fail(ErrorCode::config_error, "unknown reaction family '" + sel.reaction + "'");
  }

  return defs;
}

}  // namespace frontlab
