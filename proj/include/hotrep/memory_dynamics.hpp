#pragma once

// Time-domain intracavity Maxwell-Bloch dynamics of the hybrid memory:
//
//   s' = -kt_s s + i sqrt(d ge/tau) (W/G_s) b   + e^{-i phi_s} t_r/(mu_s sqrt(tau)) S_in
//   a' = -kt_a a + i sqrt(d ge/tau) (W/G_a) b*  + e^{-i phi_a} t_r/(mu_a sqrt(tau)) A_in
//   b' = -gamma_s b + i sqrt(d ge/tau) (-(W*/G_s) s + (W/G_a) a*)
//        - (1/G_s + 1/G_a*) |W|^2 b - i J k
//   k' = -(gamma_k + i delta_k) k - i J b
//
// with kt = cavity-enhanced decay (see physics.hpp). The anti-Stokes mode is
// driven by b* (parametric FWM coupling).
//
// The optical equations are integrated after multiplying their right-hand
// side by the roundtrip phase e^{i phi}. This leaves every stationary point
// (hence the adiabatic limit) unchanged, but turns the anti-resonant rate
// kt_a = -(1 + mu_a) / (tau mu_a), which would make a' grow, into the decay
// (1 + mu_a) / (tau mu_a). At phi_s = 0 the signal equation is untouched.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hotrep/errors.hpp"
#include "hotrep/ode.hpp"
#include "hotrep/physics.hpp"

namespace hotrep {

using cplx = std::complex<double>;

struct MemoryState {
  cplx s{}, a{}, b{}, k{};
};

enum class PulseShape { Constant, Gaussian, Table };

/// Control Rabi frequency Omega(t), real and non-negative, zero outside
/// [t_on, t_off].
struct ControlPulse {
  PulseShape shape = PulseShape::Constant;
  double amplitude = 0.0;  // peak Omega, s^-1
  double center = 0.0;
  double width = 0.0;  // gaussian standard deviation
  double t_on = 0.0;
  double t_off = 0.0;
  std::vector<std::pair<double, double>> table;  // (t, Omega), piecewise linear

  double operator()(double t) const {
    if (t < t_on || t > t_off) return 0.0;
    switch (shape) {
      case PulseShape::Constant:
        return amplitude;
      case PulseShape::Gaussian: {
        const double u = (t - center) / width;
        return amplitude * std::exp(-0.5 * u * u);
      }
      case PulseShape::Table:
        return interpolate(t);
    }
    return 0.0;
  }

  double peak() const {
    if (shape != PulseShape::Table) return amplitude;
    double p = 0.0;
    for (const auto& [t, v] : table) p = std::max(p, v);
    return p;
  }

  void validate() const {
    if (!(t_off >= t_on)) throw ValidationError("control pulse: t_off < t_on");
    if (shape == PulseShape::Table) {
      if (table.size() < 2) throw ValidationError("control pulse: table needs >= 2 points");
      for (std::size_t i = 0; i < table.size(); ++i) {
        if (table[i].second < 0.0) throw ValidationError("control pulse: negative Omega in table");
        if (i > 0 && !(table[i].first > table[i - 1].first))
          throw ValidationError("control pulse: table times must increase");
      }
    } else if (!(amplitude >= 0.0)) {
      throw ValidationError("control pulse: amplitude must be >= 0");
    }
    if (shape == PulseShape::Gaussian && !(width > 0.0))
      throw ValidationError("control pulse: gaussian width must be positive");
  }

 private:
  double interpolate(double t) const {
    if (t <= table.front().first) return table.front().second;
    if (t >= table.back().first) return table.back().second;
    auto it = std::upper_bound(table.begin(), table.end(), t,
                               [](double x, const auto& p) { return x < p.first; });
    const auto& [t1, v1] = *it;
    const auto& [t0, v0] = *(it - 1);
    return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
  }
};

enum class EnvelopeShape { None, Gaussian, RisingExponential, Table };

/// Input signal envelope S_in(t) on [t_begin, t_end], normalised so that
/// integral |S_in|^2 dt equals `photons`.
struct InputSignal {
  EnvelopeShape shape = EnvelopeShape::None;
  double center = 0.0;  // gaussian centre
  double width = 0.0;   // gaussian standard deviation
  double rate = 0.0;    // rising exponential: S ~ exp(rate (t - t_end))
  double t_begin = 0.0;
  double t_end = 0.0;
  double photons = 1.0;
  std::vector<std::pair<double, cplx>> table;

  cplx operator()(double t) const {
    if (shape == EnvelopeShape::None || photons == 0.0 || t < t_begin || t > t_end) return 0.0;
    return scale_ * raw(t);
  }

  double duration() const { return t_end - t_begin; }
  bool active() const { return shape != EnvelopeShape::None && photons > 0.0; }

  /// Rescale so the envelope carries `photons` photons (Simpson quadrature).
  void normalize() {
    if (!active()) {
      scale_ = 0.0;
      return;
    }
    if (!(t_end > t_begin)) throw ValidationError("input signal: empty window");
    constexpr int kIntervals = 20000;
    const double h = (t_end - t_begin) / kIntervals;
    double sum = 0.0;
    for (int i = 0; i <= kIntervals; ++i) {
      const double w = (i == 0 || i == kIntervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      sum += w * std::norm(raw(t_begin + i * h));
    }
    const double energy = sum * h / 3.0;
    if (!(energy > 0.0)) throw ValidationError("input signal: envelope has zero energy");
    scale_ = std::sqrt(photons / energy);
  }

  /// Sequential storage needs T << 1/gamma_s; flagged when T gamma_s > 0.01.
  bool short_pulse(double gamma_s) const { return duration() * gamma_s <= 0.01; }

 private:
  double scale_ = 1.0;

  cplx raw(double t) const {
    switch (shape) {
      case EnvelopeShape::None:
        return 0.0;
      case EnvelopeShape::Gaussian: {
        const double u = (t - center) / width;
        return std::exp(-0.5 * u * u);
      }
      case EnvelopeShape::RisingExponential:
        return std::exp(rate * (t - t_end));
      case EnvelopeShape::Table: {
        if (table.empty()) return 0.0;
        if (t <= table.front().first) return table.front().second;
        if (t >= table.back().first) return table.back().second;
        auto it = std::upper_bound(table.begin(), table.end(), t,
                                   [](double x, const auto& p) { return x < p.first; });
        const auto& [t1, v1] = *it;
        const auto& [t0, v0] = *(it - 1);
        return v0 + (v1 - v0) * ((t - t0) / (t1 - t0));
      }
    }
    return 0.0;
  }
};

/// One interval of the protocol timeline. delta_k ramps linearly from
/// `delta_k_begin` to `delta_k_end`; equal values give the default step.
struct ScheduleSegment {
  double t_begin = 0.0;
  double t_end = 0.0;
  double delta_k_begin = 0.0;
  double delta_k_end = 0.0;
  bool control_on = false;
  std::string label;

  double delta_k(double t) const {
    if (delta_k_begin == delta_k_end) return delta_k_begin;
    const double u = (t - t_begin) / (t_end - t_begin);
    return delta_k_begin + u * (delta_k_end - delta_k_begin);
  }
};

struct ProtocolSchedule {
  std::vector<ScheduleSegment> segments;

  void validate() const {
    if (segments.empty()) throw ValidationError("schedule: no segments");
    for (std::size_t i = 0; i < segments.size(); ++i) {
      const auto& s = segments[i];
      if (!(s.t_end > s.t_begin)) throw ValidationError("schedule: segment with non-positive length");
      if (i > 0) {
        const double prev = segments[i - 1].t_end;
        if (s.t_begin < prev - 1e-15 * std::abs(prev))
          throw ValidationError("schedule: stages overlap");
        if (s.t_begin > prev + 1e-15 * std::abs(prev))
          throw ValidationError("schedule: stages not sequential (gap between segments)");
      }
    }
  }
  double t_begin() const { return segments.front().t_begin; }
  double t_end() const { return segments.back().t_end; }
};

struct TimeGrid {
  std::size_t samples_per_segment = 200;  // output samples, including segment end points
  ode::Tolerances tol{};
};

struct TrajectoryAccounting {
  double input_photons = 0.0;
  double emitted_signal = 0.0;       // out-coupled through the input coupler
  double emitted_anti_stokes = 0.0;  // likewise for the anti-Stokes mode
  double error_estimate = 0.0;       // accumulated local error (absolute)
  std::size_t steps_accepted = 0;
  std::size_t steps_rejected = 0;
};

struct Milestone {
  std::string label;
  double t;
  MemoryState state;
};

struct MemoryTrajectory {
  std::vector<double> t;
  std::vector<MemoryState> states;
  std::vector<Milestone> milestones;  // state at the end of every schedule segment
  TrajectoryAccounting accounting;

  const MemoryState& final_state() const { return states.back(); }
};

/// Coefficients of the equations of motion for one (memory, cavity) pair.
struct MemoryModel {
  double g = 0.0;  // sqrt(d gamma_e / tau)
  cplx Gamma_s, Gamma_a;
  cplx kappa_tilde_s, kappa_tilde_a;
  cplx phase_s, phase_a;    // e^{i phi}
  cplx kappa_eff_s, kappa_eff_a;  // e^{i phi} kappa_tilde, Re > 0
  double drive_s = 0.0, drive_a = 0.0;  // t_r / (mu sqrt(tau))
  cplx light_shift;                     // 1/Gamma_s + 1/conj(Gamma_a)
  double out_s = 1.0, out_a = 1.0;      // fraction of cavity decay leaving through the coupler
  double gamma_s = 0.0, gamma_k = 0.0, J = 0.0;

  MemoryModel(const MemoryParams& m, const CavityParams& c) {
    const auto det = complex_detunings(m);
    const auto dec = cavity_decay(m, c, AlphaConvention::Exact);
    const double tau = c.roundtrip_time;
    g = std::sqrt(m.d * m.gamma_e / tau);
    Gamma_s = det.Gamma_s;
    Gamma_a = det.Gamma_a;
    kappa_tilde_s = dec.kappa_tilde_s;
    kappa_tilde_a = dec.kappa_tilde_a;
    phase_s = std::polar(1.0, c.phi_s);
    phase_a = std::polar(1.0, c.phi_a);
    kappa_eff_s = phase_s * kappa_tilde_s;
    kappa_eff_a = phase_a * kappa_tilde_a;
    const double t_r = std::sqrt(1.0 - c.r * c.r);
    drive_s = t_r / (dec.mu_s * std::sqrt(tau));
    drive_a = t_r / (dec.mu_a * std::sqrt(tau));
    light_shift = 1.0 / Gamma_s + 1.0 / std::conj(Gamma_a);
    out_s = (1.0 - c.r * c.r) / (1.0 - dec.mu_s * dec.mu_s);
    out_a = (1.0 - c.r * c.r) / (1.0 - dec.mu_a * dec.mu_a);
    gamma_s = m.gamma_s;
    gamma_k = m.gamma_k;
    J = m.J;
  }

  /// Optical coupling magnitude |sqrt(d ge/tau) Omega / Gamma| for each field.
  double coupling_s(double omega) const { return g * omega / std::abs(Gamma_s); }
  double coupling_a(double omega) const { return g * omega / std::abs(Gamma_a); }

  /// min(|kt_s| / coupling_s, |kt_a| / coupling_a) at peak Omega.
  double bad_cavity_ratio(double omega) const {
    if (omega <= 0.0) return std::numeric_limits<double>::infinity();
    return std::min(std::abs(kappa_tilde_s) / coupling_s(omega),
                    std::abs(kappa_tilde_a) / coupling_a(omega));
  }

  cplx spin_rhs(cplx s, cplx a, cplx b, cplx k, double omega) const {
    const cplx i(0.0, 1.0);
    return -gamma_s * b + i * g * (-(omega / Gamma_s) * s + (omega / Gamma_a) * std::conj(a)) -
           light_shift * (omega * omega) * b - i * J * k;
  }
  cplx noble_rhs(cplx b, cplx k, double delta_k) const {
    const cplx i(0.0, 1.0);
    return -(gamma_k + i * delta_k) * k - i * J * b;
  }
  /// Amplitude decay rate of the spin wave under constant Omega once the
  /// optical fields follow adiabatically (J coupling excluded).
  double adiabatic_spin_decay(double omega) const {
    const auto [s, a] = adiabatic_fields(1.0, omega, 0.0);
    return -spin_rhs(s, a, 1.0, 0.0, omega).real();
  }

  /// Stationary optical amplitudes for given spin wave and drive.
  std::pair<cplx, cplx> adiabatic_fields(cplx b, double omega, cplx s_in) const {
    const cplx i(0.0, 1.0);
    const cplx s = (phase_s * i * g * (omega / Gamma_s) * b + drive_s * s_in) / kappa_eff_s;
    const cplx a = (phase_a * i * g * (omega / Gamma_a) * std::conj(b)) / kappa_eff_a;
    return {s, a};
  }
};

namespace detail {

struct SegmentDrive {
  bool optical = false;  // control or input active somewhere inside the segment
  double omega_peak = 0.0;
};

inline SegmentDrive segment_drive(const ScheduleSegment& seg, const ControlPulse& pulse,
                                  const InputSignal& input) {
  SegmentDrive d;
  const bool control = seg.control_on && pulse.peak() > 0.0 && pulse.t_off > seg.t_begin &&
                       pulse.t_on < seg.t_end;
  const bool signal = input.active() && input.t_end > seg.t_begin && input.t_begin < seg.t_end;
  d.optical = control || signal;
  d.omega_peak = control ? pulse.peak() : 0.0;
  return d;
}

inline std::string fastest_rate(const MemoryModel& mm, const SegmentDrive& d, const ScheduleSegment& seg) {
  std::pair<double, std::string> rates[] = {
      {std::abs(mm.kappa_tilde_s), "kappa_tilde_s"},
      {std::abs(mm.kappa_tilde_a), "kappa_tilde_a"},
      {d.omega_peak, "Omega"},
      {mm.J, "J"},
      {std::max(std::abs(seg.delta_k_begin), std::abs(seg.delta_k_end)), "delta_k"}};
  if (!d.optical) rates[0].first = rates[1].first = rates[2].first = 0.0;
  const auto it = std::max_element(std::begin(rates), std::end(rates),
                                   [](const auto& x, const auto& y) { return x.first < y.first; });
  std::ostringstream os;
  os << it->second << " = " << it->first << " s^-1";
  return os.str();
}

inline double fastest_rate_value(const MemoryModel& mm, const SegmentDrive& d, const ScheduleSegment& seg) {
  double r = std::max({mm.J, std::abs(seg.delta_k_begin), std::abs(seg.delta_k_end)});
  if (d.optical)
    r = std::max({r, std::abs(mm.kappa_tilde_s), std::abs(mm.kappa_tilde_a), d.omega_peak});
  return r;
}

/// Shared driver for the full and the adiabatically reduced integrations.
template <bool Adiabatic>
MemoryTrajectory run(const MemoryParams& m, const CavityParams& c, const ControlPulse& pulse_in,
                     const InputSignal& input_in, const ProtocolSchedule& schedule,
                     const TimeGrid& grid, MemoryState initial) {
  schedule.validate();
  pulse_in.validate();
  if (grid.samples_per_segment < 2) throw ValidationError("time grid: need >= 2 samples per segment");
  InputSignal input = input_in;
  input.normalize();
  const ControlPulse& pulse = pulse_in;
  const MemoryModel mm(m, c);

  MemoryTrajectory traj;
  traj.accounting.input_photons = input.active() ? input.photons : 0.0;
  traj.t.push_back(schedule.t_begin());
  traj.states.push_back(initial);

  MemoryState cur = initial;
  double acc_sig = 0.0;
  double acc_as = 0.0;
  const cplx i(0.0, 1.0);

  for (const auto& seg : schedule.segments) {
    const SegmentDrive drive = segment_drive(seg, pulse, input);
    if (grid.tol.fixed_step > 0.0) {
      const double fastest = fastest_rate_value(mm, drive, seg);
      if (grid.tol.fixed_step > 0.1 / fastest)
        throw ValidationError("time grid: fixed step does not resolve " +
                              fastest_rate(mm, drive, seg) + " (need step <= 0.1/rate)");
    }
    const std::size_t n_samples = grid.samples_per_segment;
    const double dt_out = (seg.t_end - seg.t_begin) / static_cast<double>(n_samples - 1);
    std::size_t next = 1;  // sample 0 coincides with the previous segment end
    auto omega_at = [&](double t) { return seg.control_on ? pulse(t) : 0.0; };
    const std::string hint = fastest_rate(mm, drive, seg);

    if (!drive.optical && !Adiabatic) {
      // Optical modes decouple from the spins: propagate them exactly and
      // integrate only (b, k).
      const MemoryState start = cur;
      auto optical_at = [&](double t) {
        const double dt = t - seg.t_begin;
        return std::pair<cplx, cplx>{start.s * std::exp(-mm.kappa_eff_s * dt),
                                     start.a * std::exp(-mm.kappa_eff_a * dt)};
      };
      auto rhs = [&](double t, const ode::State<2>& y) {
        return ode::State<2>{mm.spin_rhs(0.0, 0.0, y[0], y[1], 0.0), mm.noble_rhs(y[0], y[1], seg.delta_k(t))};
      };
      auto on_step = [&](const ode::DenseStep<2>& dense, double t_new, const ode::State<2>&) {
        while (next < n_samples) {
          const double ts = (next == n_samples - 1) ? seg.t_end : seg.t_begin + next * dt_out;
          if (ts > t_new) break;
          const auto y = dense(ts);
          const auto [s, a] = optical_at(ts);
          traj.t.push_back(ts);
          traj.states.push_back({s, a, y[0], y[1]});
          ++next;
        }
      };
      ode::StepStats stats;
      ode::State<2> y0{cur.b, cur.k};
      const auto y1 = ode::integrate<2>(rhs, y0, seg.t_begin, seg.t_end, grid.tol, stats, on_step, hint);
      const double dt = seg.t_end - seg.t_begin;
      const auto [s1, a1] = optical_at(seg.t_end);
      acc_sig += mm.out_s * std::norm(start.s) * (1.0 - std::exp(-2.0 * mm.kappa_eff_s.real() * dt));
      acc_as += mm.out_a * std::norm(start.a) * (1.0 - std::exp(-2.0 * mm.kappa_eff_a.real() * dt));
      cur = {s1, a1, y1[0], y1[1]};
      traj.accounting.error_estimate += stats.error_estimate;
      traj.accounting.steps_accepted += stats.accepted;
      traj.accounting.steps_rejected += stats.rejected;
    } else if constexpr (!Adiabatic) {
      // Full system; components 4, 5 accumulate out-coupled signal / anti-Stokes energy.
      auto rhs = [&](double t, const ode::State<6>& y) {
        const double w = omega_at(t);
        const cplx s_in = input(t);
        ode::State<6> d;
        d[0] = -mm.kappa_eff_s * y[0] + mm.phase_s * i * mm.g * (w / mm.Gamma_s) * y[2] + mm.drive_s * s_in;
        d[1] = -mm.kappa_eff_a * y[1] + mm.phase_a * i * mm.g * (w / mm.Gamma_a) * std::conj(y[2]);
        d[2] = mm.spin_rhs(y[0], y[1], y[2], y[3], w);
        d[3] = mm.noble_rhs(y[2], y[3], seg.delta_k(t));
        d[4] = mm.out_s * 2.0 * mm.kappa_eff_s.real() * std::norm(y[0]);
        d[5] = mm.out_a * 2.0 * mm.kappa_eff_a.real() * std::norm(y[1]);
        return d;
      };
      auto on_step = [&](const ode::DenseStep<6>& dense, double t_new, const ode::State<6>&) {
        while (next < n_samples) {
          const double ts = (next == n_samples - 1) ? seg.t_end : seg.t_begin + next * dt_out;
          if (ts > t_new) break;
          const auto y = dense(ts);
          traj.t.push_back(ts);
          traj.states.push_back({y[0], y[1], y[2], y[3]});
          ++next;
        }
      };
      ode::StepStats stats;
      ode::State<6> y0{cur.s, cur.a, cur.b, cur.k, 0.0, 0.0};
      const auto y1 = ode::integrate<6>(rhs, y0, seg.t_begin, seg.t_end, grid.tol, stats, on_step, hint);
      cur = {y1[0], y1[1], y1[2], y1[3]};
      acc_sig += y1[4].real();
      acc_as += y1[5].real();
      traj.accounting.error_estimate += stats.error_estimate;
      traj.accounting.steps_accepted += stats.accepted;
      traj.accounting.steps_rejected += stats.rejected;
    } else {
      // Reduced system: (b, k) plus accumulators; s, a stationary.
      auto rhs = [&](double t, const ode::State<4>& y) {
        const double w = omega_at(t);
        const auto [s, a] = mm.adiabatic_fields(y[0], w, input(t));
        ode::State<4> d;
        d[0] = mm.spin_rhs(s, a, y[0], y[1], w);
        d[1] = mm.noble_rhs(y[0], y[1], seg.delta_k(t));
        d[2] = mm.out_s * 2.0 * mm.kappa_eff_s.real() * std::norm(s);
        d[3] = mm.out_a * 2.0 * mm.kappa_eff_a.real() * std::norm(a);
        return d;
      };
      auto on_step = [&](const ode::DenseStep<4>& dense, double t_new, const ode::State<4>&) {
        while (next < n_samples) {
          const double ts = (next == n_samples - 1) ? seg.t_end : seg.t_begin + next * dt_out;
          if (ts > t_new) break;
          const auto y = dense(ts);
          const auto [s, a] = mm.adiabatic_fields(y[0], omega_at(ts), input(ts));
          traj.t.push_back(ts);
          traj.states.push_back({s, a, y[0], y[1]});
          ++next;
        }
      };
      ode::StepStats stats;
      ode::State<4> y0{cur.b, cur.k, 0.0, 0.0};
      const auto y1 = ode::integrate<4>(rhs, y0, seg.t_begin, seg.t_end, grid.tol, stats, on_step, hint);
      const auto [s1, a1] = mm.adiabatic_fields(y1[0], omega_at(seg.t_end), input(seg.t_end));
      cur = {s1, a1, y1[0], y1[1]};
      acc_sig += y1[2].real();
      acc_as += y1[3].real();
      traj.accounting.error_estimate += stats.error_estimate;
      traj.accounting.steps_accepted += stats.accepted;
      traj.accounting.steps_rejected += stats.rejected;
    }
    traj.milestones.push_back({seg.label, seg.t_end, cur});
  }
  traj.accounting.emitted_signal = acc_sig;
  traj.accounting.emitted_anti_stokes = acc_as;
  return traj;
}

}  // namespace detail

/// Full integration of the four coupled modes over `schedule`.
inline MemoryTrajectory integrate_eq4(const MemoryParams& m, const CavityParams& c,
                                      const ControlPulse& pulse, const InputSignal& input,
                                      const ProtocolSchedule& schedule, const TimeGrid& grid = {},
                                      const MemoryState& initial = {}) {
  return detail::run<false>(m, c, pulse, input, schedule, grid, initial);
}

/// Bad-cavity reduction: s and a follow the spin wave adiabatically.
/// Rejects configurations where the cavity rates do not exceed the optical
/// coupling by `min_ratio`.
inline MemoryTrajectory adiabatic_reduce(const MemoryParams& m, const CavityParams& c,
                                         const ControlPulse& pulse, const InputSignal& input,
                                         const ProtocolSchedule& schedule, const TimeGrid& grid = {},
                                         const MemoryState& initial = {}, double min_ratio = 10.0) {
  const MemoryModel mm(m, c);
  double omega_peak = 0.0;
  for (const auto& seg : schedule.segments)
    omega_peak = std::max(omega_peak, detail::segment_drive(seg, pulse, input).omega_peak);
  const double ratio = mm.bad_cavity_ratio(omega_peak);
  if (ratio < min_ratio) {
    std::ostringstream os;
    os << "adiabatic_reduce: bad-cavity regime violated, |kappa_tilde| / coupling = " << ratio
       << " < " << min_ratio;
    throw ValidationError(os.str());
  }
  return detail::run<true>(m, c, pulse, input, schedule, grid, initial);
}

/// Transfer time that maximises alkali -> noble-gas swap.
inline double swap_time(const MemoryParams& m) { return kPi / (2.0 * m.J); }

struct StorageOptions {
  double decouple_factor = 100.0;  // stage-1 delta_k = factor * J
  bool skip_optical_stage = false;  // start stage 2 from `initial`
  MemoryState initial{};
  TimeGrid grid{};
};

struct StorageResult {
  double eta1_num = 0.0;
  double eta2_num = 0.0;
  double eta_s_num = 0.0;
  MemoryTrajectory trajectory;
};

/// Sequential storage: optical stage with the noble gas detuned, then the
/// pi/(2J) swap with the control off.
inline StorageResult simulate_storage(const MemoryParams& m, const CavityParams& c,
                                      const ControlPulse& pulse, const InputSignal& input,
                                      const StorageOptions& opt = {}) {
  if (opt.decouple_factor < 100.0)
    throw ValidationError("simulate_storage: stage-1 decoupling needs delta_k >= 100 J");
  ProtocolSchedule sched;
  double t = 0.0;
  if (!opt.skip_optical_stage) {
    const double t_end = std::max(input.active() ? input.t_end : 0.0, pulse.t_off);
    if (!(t_end > 0.0)) throw ValidationError("simulate_storage: optical stage has zero length");
    sched.segments.push_back({0.0, t_end, opt.decouple_factor * m.J, opt.decouple_factor * m.J, true,
                              "stage1"});
    t = t_end;
  }
  sched.segments.push_back({t, t + swap_time(m), 0.0, 0.0, false, "stage2"});

  StorageResult r;
  r.trajectory = integrate_eq4(m, c, pulse, opt.skip_optical_stage ? InputSignal{} : input, sched,
                               opt.grid, opt.initial);
  const auto& ms = r.trajectory.milestones;
  const double b_after_1 =
      opt.skip_optical_stage ? std::norm(opt.initial.b) : std::norm(ms.front().state.b);
  const double k_after_2 = std::norm(ms.back().state.k);
  const double norm_in = opt.skip_optical_stage ? 1.0 : r.trajectory.accounting.input_photons;
  if (norm_in > 0.0) {
    r.eta1_num = b_after_1 / norm_in;
    r.eta_s_num = k_after_2 / norm_in;
  }
  r.eta2_num = b_after_1 > 0.0 ? k_after_2 / b_after_1 : 0.0;
  return r;
}

struct RetrievalOptions {
  double decouple_factor = 100.0;
  double readout_duration = 0.0;  // phase 2 length; 0 with phase1_only
  bool phase1_only = false;
  TimeGrid grid{};
};

struct RetrievalResult {
  double transfer = 0.0;    // |b|^2 after the noble -> alkali swap
  double eta_r_num = 0.0;   // signal energy out-coupled per stored excitation
  double remaining = 0.0;   // |b|^2 + |k|^2 left at the end
  double emitted_anti_stokes = 0.0;
  MemoryTrajectory trajectory;
};

/// Readout from a noble-gas excitation k = 1. The control pulse times are
/// relative to the start of the optical readout phase.
inline RetrievalResult simulate_retrieval(const MemoryParams& m, const CavityParams& c,
                                          const ControlPulse& pulse, const RetrievalOptions& opt = {}) {
  if (opt.decouple_factor < 100.0)
    throw ValidationError("simulate_retrieval: readout decoupling needs delta_k >= 100 J");
  const double t1 = swap_time(m);
  ProtocolSchedule sched;
  sched.segments.push_back({0.0, t1, 0.0, 0.0, false, "phase1"});
  ControlPulse shifted = pulse;
  if (!opt.phase1_only) {
    if (!(opt.readout_duration > 0.0))
      throw ValidationError("simulate_retrieval: readout duration must be positive");
    shifted.t_on += t1;
    shifted.t_off += t1;
    shifted.center += t1;
    for (auto& [t, v] : shifted.table) t += t1;
    sched.segments.push_back({t1, t1 + opt.readout_duration, opt.decouple_factor * m.J,
                              opt.decouple_factor * m.J, true, "phase2"});
  }
  MemoryState init;
  init.k = 1.0;
  RetrievalResult r;
  r.trajectory = integrate_eq4(m, c, shifted, InputSignal{}, sched, opt.grid, init);
  r.transfer = std::norm(r.trajectory.milestones.front().state.b);
  const auto& fin = r.trajectory.final_state();
  r.remaining = std::norm(fin.b) + std::norm(fin.k);
  r.eta_r_num = r.trajectory.accounting.emitted_signal;
  r.emitted_anti_stokes = r.trajectory.accounting.emitted_anti_stokes;
  return r;
}

}  // namespace hotrep
