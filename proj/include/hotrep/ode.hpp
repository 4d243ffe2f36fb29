#pragma once

// Dormand-Prince 5(4) integrator for small complex systems, with the
// standard fourth-order continuous extension for dense output.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <sstream>
#include <string>

#include "hotrep/errors.hpp"

namespace hotrep::ode {

template <std::size_t N>
using State = std::array<std::complex<double>, N>;

struct Tolerances {
  double rtol = 1e-8;
  double atol = 1e-12;
  double fixed_step = 0.0;  // > 0 disables adaptivity
  double max_step = 0.0;    // 0 = unlimited
  double initial_step = 0.0;
  std::size_t max_steps = 50'000'000;
};

struct StepStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  /// Sum of local error norms (absolute, max-norm) over accepted steps: a
  /// conservative estimate of the global error of any component.
  double error_estimate = 0.0;
};

namespace detail {
template <std::size_t N>
State<N> axpy(const State<N>& y, double h, std::initializer_list<std::pair<double, const State<N>*>> terms) {
  State<N> out = y;
  for (const auto& [c, k] : terms) {
    if (c == 0.0) continue;
    for (std::size_t i = 0; i < N; ++i) out[i] += h * c * (*k)[i];
  }
  return out;
}

template <std::size_t N>
bool finite(const State<N>& y) {
  for (const auto& v : y)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}
}  // namespace detail

/// Continuous extension over one accepted step [t, t + h].
template <std::size_t N>
struct DenseStep {
  double t = 0.0;
  double h = 0.0;
  std::array<State<N>, 5> r{};

  State<N> operator()(double at) const {
    const double th = (at - t) / h;
    const double th1 = 1.0 - th;
    State<N> y;
    for (std::size_t i = 0; i < N; ++i)
      y[i] = r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
    return y;
  }
};

/// Integrates y' = f(t, y) from t0 to t1. `on_step` sees every accepted step
/// with its dense interpolant. `rate_hint` is appended to step-underflow
/// diagnostics so the caller can name the rate that made the system stiff.
template <std::size_t N, class Rhs, class OnStep>
State<N> integrate(Rhs&& f, State<N> y, double t0, double t1, const Tolerances& tol, StepStats& stats,
                   OnStep&& on_step, const std::string& rate_hint = {}) {
  // Dormand-Prince tableau.
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                   a76 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;
  constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                   d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                   d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

  const double span = t1 - t0;
  if (!(span > 0.0)) return y;
  if (!detail::finite(y)) throw IntegrationError("ode: non-finite initial state");

  const bool fixed = tol.fixed_step > 0.0;
  double h = fixed ? tol.fixed_step : (tol.initial_step > 0.0 ? tol.initial_step : span * 1e-6);
  if (tol.max_step > 0.0) h = std::min(h, tol.max_step);
  const double h_min = 1e-14 * std::max(std::abs(t0), std::abs(t1)) + 1e-300;

  double t = t0;
  State<N> k1 = f(t, y);
  std::size_t steps = 0;
  while (t < t1) {
    if (++steps > tol.max_steps) throw IntegrationError("ode: step budget exhausted");
    bool last = false;
    if (t + h >= t1 || (t1 - (t + h)) < 1e-12 * span) {
      h = t1 - t;
      last = true;
    }
    using detail::axpy;
    const State<N> k2 = f(t + c2 * h, axpy<N>(y, h, {{a21, &k1}}));
    const State<N> k3 = f(t + c3 * h, axpy<N>(y, h, {{a31, &k1}, {a32, &k2}}));
    const State<N> k4 = f(t + c4 * h, axpy<N>(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const State<N> k5 =
        f(t + c5 * h, axpy<N>(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const State<N> k6 =
        f(t + h, axpy<N>(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    const State<N> y_new =
        axpy<N>(y, h, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}});
    const State<N> k7 = f(t + h, y_new);

    double err = 0.0;
    double err_abs = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const std::complex<double> e =
          h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double scale = tol.atol + tol.rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
      err = std::max(err, std::abs(e) / scale);
      err_abs = std::max(err_abs, std::abs(e));
    }
    if (!std::isfinite(err) || !detail::finite(y_new)) {
      if (fixed) {
        std::ostringstream os;
        os << "ode: non-finite state at t = " << t + h;
        throw IntegrationError(os.str());
      }
      err = 1e10;  // shrink and retry; a genuine blow-up ends in step underflow
    }

    if (fixed || err <= 1.0) {
      DenseStep<N> dense;
      dense.t = t;
      dense.h = h;
      for (std::size_t i = 0; i < N; ++i) {
        const auto dy = y_new[i] - y[i];
        const auto bspl = h * k1[i] - dy;
        dense.r[0][i] = y[i];
        dense.r[1][i] = dy;
        dense.r[2][i] = bspl;
        dense.r[3][i] = dy - h * k7[i] - bspl;
        dense.r[4][i] =
            h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      }
      const double t_new = last ? t1 : t + h;
      if (!detail::finite(y_new)) {
        std::ostringstream os;
        os << "ode: non-finite state at t = " << t_new;
        throw IntegrationError(os.str());
      }
      on_step(dense, t_new, y_new);
      ++stats.accepted;
      stats.error_estimate += err_abs;
      t = t_new;
      y = y_new;
      k1 = k7;
      if (last) break;
      if (!fixed) {
        const double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        h *= std::clamp(fac, 0.2, 5.0);
      }
    } else {
      ++stats.rejected;
      h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
    }
    if (tol.max_step > 0.0) h = std::min(h, tol.max_step);
    if (h < h_min) {
      std::ostringstream os;
      os << "ode: step size underflow at t = " << t << " (h = " << h << ")";
      if (!rate_hint.empty()) os << "; fastest rate: " << rate_hint;
      throw IntegrationError(os.str());
    }
  }
  return y;
}

}  // namespace hotrep::ode
