#pragma once

#include <algorithm>
#include <cmath>

#include "helios/errors.hpp"
#include "helios/pv_model.hpp"

namespace helios {

/// State threaded through the hill-climbing step functions. Pure value type:
/// every step takes a state and returns the updated copy.
struct ControllerState {
  double v_ref = 15.0;        // commanded operating voltage
  double v_max = 40.0;        // command clamp ceiling
  double last_v = 0.0;
  double last_i = 0.0;
  double last_p = 0.0;
  int direction = 1;          // +1 or -1
  bool primed = false;        // at least one measurement stored
  bool bootstrapped = false;  // one-time forced exploration step taken
  double ic_epsilon = 0.01;   // conductance hold band, A/V
  double focv_k = 0.80;       // open-circuit voltage fraction
};

namespace detail {
inline double clamp_ref(double v, double v_max) { return std::clamp(v, 0.0, v_max); }
}

/// Perturb & Observe: keep walking while power rises, reverse when it falls.
/// The first call takes a forced positive step so the climb has a slope to
/// measure. Never freezes: a clamp that blocks movement flips the direction.
inline ControllerState po_step(ControllerState s, const OperatingPoint& measured,
                               double step_v) {
  if (step_v <= 0.0) throw InvalidArgument("po_step: step_v must be > 0");
  if (s.primed) {
    const double dp = measured.p - s.last_p;
    if (dp <= 0.0) s.direction = -s.direction;
  } else {
    s.direction = 1;
    s.primed = true;
  }
  double next = detail::clamp_ref(s.v_ref + s.direction * step_v, s.v_max);
  if (next == s.v_ref) {
    s.direction = -s.direction;
    next = detail::clamp_ref(s.v_ref + s.direction * step_v, s.v_max);
  }
  s.v_ref = next;
  s.last_v = measured.v;
  s.last_i = measured.i;
  s.last_p = measured.p;
  s.bootstrapped = true;
  return s;
}

/// Incremental Conductance: compare dI/dV with -I/V from divided differences
/// and hold inside the epsilon band. The first call only stores the
/// measurement; the first zero-dV call after that takes one forced positive
/// step so the differences become defined.
inline ControllerState ic_step(ControllerState s, const OperatingPoint& measured,
                               double step_v, double epsilon) {
  if (step_v <= 0.0) throw InvalidArgument("ic_step: step_v must be > 0");
  if (epsilon < 0.0) throw InvalidArgument("ic_step: epsilon must be >= 0");

  if (!s.primed) {
    s.primed = true;
    s.last_v = measured.v;
    s.last_i = measured.i;
    s.last_p = measured.p;
    return s;  // initialize and hold
  }

  const double dv = measured.v - s.last_v;
  const double di = measured.i - s.last_i;
  int move = 0;  // -1 decrease, 0 hold, +1 increase

  if (dv == 0.0) {
    if (!s.bootstrapped) {
      move = 1;
      s.bootstrapped = true;
    } else if (di > 0.0) {
      move = 1;
    } else if (di < 0.0) {
      move = -1;
    }
  } else {
    s.bootstrapped = true;
    const double didv = di / dv;
    if (measured.v <= 0.0) {
      move = 1;  // left edge of the curve
    } else {
      const double target = -measured.i / measured.v;
      if (std::abs(didv - target) <= epsilon)
        move = 0;
      else if (didv > target)
        move = 1;
      else
        move = -1;
    }
  }

  if (move != 0) {
    s.direction = move;
    s.v_ref = detail::clamp_ref(s.v_ref + move * step_v, s.v_max);
  }
  s.last_v = measured.v;
  s.last_i = measured.i;
  s.last_p = measured.p;
  return s;
}

/// Fractional open-circuit voltage rule: a fixed fraction of the measured
/// open-circuit voltage is the reference.
inline double focv_reference(double voc_measured, double k) {
  if (!(k > 0.0 && k < 1.0))
    throw InvalidArgument("focv_reference: k must lie strictly inside (0, 1)");
  return k * voc_measured;
}

}  // namespace helios
