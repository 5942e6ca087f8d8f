#pragma once

#include <cmath>

#include "helios/errors.hpp"
#include "helios/pv_model.hpp"

namespace helios {

struct MppConfig {
  double v_tol = 1e-4;     // golden-section interval width at termination, V
  int coarse_points = 200; // sweep resolution before refinement
};

struct MppResult {
  double v_mp = 0.0;
  double i_mp = 0.0;
  double p_max = 0.0;
  int solver_evals = 0;
  EnvConditions env;
};

/// Open-circuit voltage: the zero crossing of I(V), found by bisection. The
/// upper bracket starts at voc_ref and doubles until the current is negative.
inline double open_circuit_voltage(const ModuleParams& p, const EnvConditions& env,
                                   double v_tol = 1e-6, const SolverConfig& cfg = {}) {
  env.validate();
  if (photo_current(p, env) <= 0.0)
    throw DegenerateCurve("open_circuit_voltage: no photo-current generated");

  double lo = 0.0;
  double hi = p.voc_ref;
  double ihi = solve_output_current(p, env, hi, cfg);
  int doublings = 0;
  while (ihi > 0.0) {
    if (++doublings > 16)
      throw DegenerateCurve("open_circuit_voltage: no zero crossing below " +
                            std::to_string(hi) + " V");
    lo = hi;
    hi *= 2.0;
    ihi = solve_output_current(p, env, hi, cfg);
  }
  while (hi - lo > v_tol) {
    const double mid = 0.5 * (lo + hi);
    if (solve_output_current(p, env, mid, cfg) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

/// True maximum power point: coarse sweep over [0, voc] to isolate the
/// unimodal peak, then golden-section refinement of P(V) down to v_tol.
inline MppResult find_mpp(const ModuleParams& p, const EnvConditions& env,
                          const MppConfig& mcfg = {}, const SolverConfig& cfg = {}) {
  env.validate();
  if (mcfg.coarse_points < 3)
    throw InvalidArgument("find_mpp: coarse_points must be >= 3");

  MppResult result;
  result.env = env;
  int evals = 0;
  auto current_at = [&](double v) {
    ++evals;
    return solve_output_current(p, env, v, cfg);
  };

  const double i_sc = current_at(0.0);
  if (i_sc <= 0.0)
    throw DegenerateCurve("find_mpp: short-circuit current is not positive");

  const double voc = open_circuit_voltage(p, env, 1e-6, cfg);

  int best = 0;
  double best_p = 0.0;
  const int n = mcfg.coarse_points;
  for (int k = 0; k < n; ++k) {
    const double v = voc * static_cast<double>(k) / static_cast<double>(n - 1);
    const double pw = v * current_at(v);
    if (pw > best_p) {
      best_p = pw;
      best = k;
    }
  }

  const double dv = voc / static_cast<double>(n - 1);
  double a = best > 0 ? (best - 1) * dv : 0.0;
  double b = best < n - 1 ? (best + 1) * dv : voc;

  auto power_at = [&](double v) { return v * current_at(v); };

  // golden-section search for the maximum of P(V) on [a, b]
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double pc = power_at(c);
  double pd = power_at(d);
  while (b - a > mcfg.v_tol) {
    if (pc > pd) {
      b = d;
      d = c;
      pd = pc;
      c = b - invphi * (b - a);
      pc = power_at(c);
    } else {
      a = c;
      c = d;
      pc = pd;
      d = a + invphi * (b - a);
      pd = power_at(d);
    }
  }

  result.v_mp = 0.5 * (a + b);
  result.i_mp = current_at(result.v_mp);
  result.p_max = result.v_mp * result.i_mp;
  result.solver_evals = evals;
  return result;
}

}  // namespace helios
