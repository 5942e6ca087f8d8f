#pragma once

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "helios/errors.hpp"
#include "helios/io.hpp"

namespace helios {

inline double celsius_to_kelvin(double t_c) { return t_c + 273.15; }
inline double kelvin_to_celsius(double t_k) { return t_k - 273.15; }

/// Electrical constants of one PV module: the single-diode equivalent
/// circuit parameters plus the physical constants the equations use.
struct ModuleParams {
  int ns = 54;               // series-connected cells
  double isc_ref = 8.21;     // short-circuit current at STC, A
  double voc_ref = 32.9;     // open-circuit voltage at STC, V
  double rs = 0.2210;        // series resistance, ohm
  double rsh = 415.4050;     // shunt resistance, ohm
  double ki = 0.0032;        // short-circuit current temperature coefficient, A/K
  double ideality = 1.3;     // diode ideality factor
  double eg0 = 1.1;          // band-gap energy, eV
  double t_ref = 298.15;     // reference temperature, K
  double g_ref = 1000.0;     // reference irradiance, W/m^2
  double q = 1.6e-19;        // electron charge, C
  double k_b = 1.3805e-23;   // Boltzmann constant, J/K

  void validate() const {
    if (ns < 1) throw InvalidArgument("ModuleParams: ns must be >= 1");
    if (isc_ref <= 0.0) throw InvalidArgument("ModuleParams: isc_ref must be > 0");
    if (voc_ref <= 0.0) throw InvalidArgument("ModuleParams: voc_ref must be > 0");
    if (rs < 0.0) throw InvalidArgument("ModuleParams: rs must be >= 0");
    if (rsh <= 0.0) throw InvalidArgument("ModuleParams: rsh must be > 0");
    if (ideality < 0.5 || ideality > 2.5)
      throw InvalidArgument("ModuleParams: ideality outside [0.5, 2.5]");
    if (g_ref <= 0.0) throw InvalidArgument("ModuleParams: g_ref must be > 0");
    if (t_ref <= 0.0) throw InvalidArgument("ModuleParams: t_ref must be > 0");
  }

  /// Table-style defaults for the 200 W module this library is calibrated to.
  static ModuleParams table1() { return {}; }
};

inline void to_json(nlohmann::json& j, const ModuleParams& p) {
  j = nlohmann::json{{"ns", p.ns},           {"isc_ref", p.isc_ref},
                     {"voc_ref", p.voc_ref}, {"rs", p.rs},
                     {"rsh", p.rsh},         {"ki", p.ki},
                     {"ideality", p.ideality}, {"eg0", p.eg0},
                     {"t_ref", p.t_ref},     {"g_ref", p.g_ref},
                     {"q", p.q},             {"k_b", p.k_b}};
}

inline void from_json(const nlohmann::json& j, ModuleParams& p) {
  for (const char* key : {"ns", "isc_ref", "voc_ref", "rs", "rsh", "ki", "ideality",
                          "eg0", "t_ref", "g_ref", "q", "k_b"}) {
    if (!j.contains(key))
      throw SchemaError(std::string("module params: missing field '") + key + "'");
  }
  j.at("ns").get_to(p.ns);
  j.at("isc_ref").get_to(p.isc_ref);
  j.at("voc_ref").get_to(p.voc_ref);
  j.at("rs").get_to(p.rs);
  j.at("rsh").get_to(p.rsh);
  j.at("ki").get_to(p.ki);
  j.at("ideality").get_to(p.ideality);
  j.at("eg0").get_to(p.eg0);
  j.at("t_ref").get_to(p.t_ref);
  j.at("g_ref").get_to(p.g_ref);
  j.at("q").get_to(p.q);
  j.at("k_b").get_to(p.k_b);
}

/// Cell temperature (K) and irradiance (W/m^2).
struct EnvConditions {
  double t_k = 298.15;
  double g = 1000.0;

  void validate() const {
    if (t_k <= 0.0) throw InvalidArgument("EnvConditions: t_k must be > 0");
    if (g < 0.0) throw InvalidArgument("EnvConditions: g must be >= 0");
  }

  static EnvConditions from_celsius(double t_c, double g) {
    return {celsius_to_kelvin(t_c), g};
  }
};

struct OperatingPoint {
  double v = 0.0;
  double i = 0.0;
  double p = 0.0;
};

struct IVCurve {
  std::vector<OperatingPoint> points;
  EnvConditions env;

  /// Structural invariants every emitted curve satisfies. The full-coverage
  /// clause (last point past the zero crossing) additionally needs the voc
  /// estimate, checked by validate_full().
  void validate() const {
    if (points.empty()) throw InvalidArgument("IVCurve: empty");
    if (points.front().v != 0.0) throw InvalidArgument("IVCurve: first point must have v = 0");
    for (std::size_t k = 1; k < points.size(); ++k)
      if (!(points[k].v > points[k - 1].v))
        throw InvalidArgument("IVCurve: voltages must be strictly increasing");
  }

  void validate_full(double voc_estimate) const {
    validate();
    const OperatingPoint& last = points.back();
    if (!(last.i <= 0.0 || last.v >= voc_estimate))
      throw InvalidArgument("IVCurve: sweep stops short of the open-circuit voltage");
  }
};

/// Tolerances for the implicit output-current solve.
struct SolverConfig {
  double residual_tol = 1e-9;  // A
  int max_iterations = 200;
  double exp_cap = 700.0;      // argument cap before exp() is declared overflowed
};

/// Photo-current, linear in irradiance with a temperature correction.
/// Raw formula; no clamping at zero.
inline double photo_current(const ModuleParams& p, const EnvConditions& env) {
  return (p.isc_ref + p.ki * (env.t_k - p.t_ref)) * env.g / p.g_ref;
}

/// Diode reverse-saturation current at the given temperature.
inline double reverse_saturation_current(const ModuleParams& p, double t_k,
                                         const SolverConfig& cfg = {}) {
  if (t_k <= 0.0) throw InvalidArgument("reverse_saturation_current: t_k must be > 0");
  const double exponent = p.q * p.voc_ref / (p.ideality * p.ns * p.k_b * t_k);
  if (exponent > cfg.exp_cap)
    throw NumericOverflow("reverse_saturation_current: exponent " +
                          std::to_string(exponent) + " exceeds cap");
  const double denom = std::expm1(exponent);
  const double result = p.isc_ref / denom;
  if (!std::isfinite(result) || denom <= 0.0)
    throw NumericOverflow("reverse_saturation_current: denominator degenerate");
  return result;
}

/// Saturation current: reverse-saturation current scaled by the cubic
/// temperature factor and the band-gap exponential. eg0 enters in eV and is
/// converted to Joules through the electron charge.
inline double saturation_current(const ModuleParams& p, double t_k,
                                 const SolverConfig& cfg = {}) {
  if (t_k <= 0.0) throw InvalidArgument("saturation_current: t_k must be > 0");
  const double irs = reverse_saturation_current(p, t_k, cfg);
  const double ratio = (t_k / p.t_ref);
  const double exponent = p.q * p.eg0 * (1.0 / p.t_ref - 1.0 / t_k) / (p.ideality * p.k_b);
  if (std::abs(exponent) > cfg.exp_cap)
    throw NumericOverflow("saturation_current: exponent " + std::to_string(exponent) +
                          " exceeds cap");
  const double result = irs * ratio * ratio * ratio * std::exp(exponent);
  if (!std::isfinite(result))
    throw NumericOverflow("saturation_current: non-finite result");
  return result;
}

/// Thermal voltage of the whole series string, n*k*Ns*T/q.
inline double thermal_voltage(const ModuleParams& p, double t_k) {
  return p.ideality * p.k_b * p.ns * t_k / p.q;
}

namespace detail {

struct ImplicitCurrent {
  double iph;
  double i0;
  double vt;
  double v;
  double rs;
  double rsh;
  double exp_cap;

  // F(I) = Iph - I0*(exp((V + I*Rs)/vt) - 1) - (V + I*Rs)/Rsh - I
  double residual(double i) const {
    const double arg = (v + i * rs) / vt;
    const double e = arg > exp_cap ? std::exp(exp_cap) : std::exp(arg);
    return iph - i0 * (e - 1.0) - (v + i * rs) / rsh - i;
  }

  double derivative(double i) const {
    const double arg = (v + i * rs) / vt;
    const double e = arg > exp_cap ? std::exp(exp_cap) : std::exp(arg);
    return -i0 * e * rs / vt - rs / rsh - 1.0;
  }
};

}  // namespace detail

/// Solves the implicit single-diode output equation F(I) = 0 for the terminal
/// current at voltage v. Safeguarded Newton: the iterate always stays inside a
/// live sign-changing bracket, steps that leave it or grow the residual are
/// replaced by damping/bisection.
inline double solve_output_current(const ModuleParams& p, const EnvConditions& env, double v,
                                   const SolverConfig& cfg = {}) {
  if (v < 0.0) throw InvalidArgument("solve_output_current: v must be >= 0");
  env.validate();

  detail::ImplicitCurrent f{photo_current(p, env),
                            saturation_current(p, env.t_k, cfg),
                            thermal_voltage(p, env.t_k),
                            v,
                            p.rs,
                            p.rsh,
                            cfg.exp_cap};

  // F is strictly decreasing in I. Bracket endpoints: at I = -V/Rs - 1 the
  // diode exponent argument is negative, so F > 0 there; the upper endpoint
  // makes the linear terms dominate negative.
  double lo = -0.1;
  double hi = 1.5 * f.iph + 1.0;
  double flo = f.residual(lo);
  if (flo < 0.0) {
    lo = -v / p.rs - 1.0;
    flo = f.residual(lo);
  }
  double fhi = f.residual(hi);
  if (!(flo >= 0.0 && fhi <= 0.0))
    throw NoConvergence("solve_output_current: cannot bracket root at v=" +
                        std::to_string(v), std::min(std::abs(flo), std::abs(fhi)));

  double i = f.iph > 0.0 ? f.iph : 0.0;
  if (i < lo || i > hi) i = 0.5 * (lo + hi);
  double fi = f.residual(i);

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    if (std::abs(fi) <= cfg.residual_tol) return i;

    // shrink the bracket around the current iterate
    if (fi > 0.0) {
      lo = i;
    } else {
      hi = i;
    }

    const double d = f.derivative(i);
    double next = i - fi / d;
    if (!std::isfinite(next) || next <= lo || next >= hi)
      next = 0.5 * (lo + hi);  // bisection fallback

    double fnext = f.residual(next);
    // damp by halving toward the old iterate while the residual grows
    int halvings = 0;
    while (std::abs(fnext) > std::abs(fi) && halvings < 60) {
      next = 0.5 * (next + i);
      fnext = f.residual(next);
      ++halvings;
    }
    i = next;
    fi = fnext;
  }
  if (std::abs(fi) <= cfg.residual_tol) return i;
  throw NoConvergence("solve_output_current: no convergence at v=" + std::to_string(v),
                      std::abs(fi));
}

/// Sweeps n_points evenly spaced voltages over [0, v_max].
inline IVCurve sweep_iv(const ModuleParams& p, const EnvConditions& env, double v_max,
                        int n_points, const SolverConfig& cfg = {}) {
  if (n_points < 2) throw InvalidArgument("sweep_iv: n_points must be >= 2");
  if (v_max <= 0.0) throw InvalidArgument("sweep_iv: v_max must be > 0");
  IVCurve curve;
  curve.env = env;
  curve.points.reserve(static_cast<std::size_t>(n_points));
  for (int k = 0; k < n_points; ++k) {
    const double v = v_max * static_cast<double>(k) / static_cast<double>(n_points - 1);
    try {
      const double i = solve_output_current(p, env, v, cfg);
      curve.points.push_back({v, i, v * i});
    } catch (const NoConvergence& e) {
      throw NoConvergence("sweep_iv: solver failed at v=" + std::to_string(v) + ": " +
                          e.what(), e.last_residual);
    }
  }
  curve.validate();
  return curve;
}

inline void write_iv_csv(const IVCurve& curve, std::ostream& out) {
  out << "v_V,i_A,p_W\n";
  for (const OperatingPoint& pt : curve.points)
    out << io::format_double(pt.v) << ',' << io::format_double(pt.i) << ','
        << io::format_double(pt.p) << '\n';
}

}  // namespace helios
