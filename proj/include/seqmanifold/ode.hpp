#pragma once

// Fixed-step classical fourth-order Runge-Kutta.

#include <utility>

namespace seqmanifold {

/// One RK4 step of y' = field(t, y). `State` needs +, scalar * and copy.
template <class Field, class State>
State rk4_step(const Field& field, double t, const State& y, double h) {
  const State k1 = field(t, y);
  const State k2 = field(t + 0.5 * h, State(y + (0.5 * h) * k1));
  const State k3 = field(t + 0.5 * h, State(y + (0.5 * h) * k2));
  const State k4 = field(t + h, State(y + h * k3));
  return State(y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

/// Integrates from t0 to t1 with `steps` equal steps.
template <class Field, class State>
State rk4_integrate(const Field& field, State y, double t0, double t1, int steps) {
  if (steps <= 0) return y;
  const double h = (t1 - t0) / steps;
  for (int i = 0; i < steps; ++i) y = rk4_step(field, t0 + i * h, y, h);
  return y;
}

}  // namespace seqmanifold
