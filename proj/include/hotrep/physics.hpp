#pragma once

// Closed-form memory and cavity quantities for the hot alkali / noble-gas
// hybrid memory in a ring cavity.
//
// Frequency convention: rates and detunings are stored as plain numbers in
// s^-1 exactly as quoted (13.5 GHz -> 13.5e9). Every formula here depends only
// on ratios or on products with matching units, except the roundtrip length,
// which needs the hyperfine splitting as an angular frequency (2*pi*delta_hf).

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "hotrep/errors.hpp"
#include "hotrep/units.hpp"

namespace hotrep {

using ComplexRate = std::complex<double>;

struct MemoryParams {
  double d = 0.0;                 // optical depth
  double gamma_e = 0.0;           // excited-state half-linewidth
  double delta_s_detuning = 0.0;  // signal detuning Delta_s
  double delta_hf = 0.0;          // ground-state splitting delta_s (|g>-|s>)
  double J = 0.0;                 // alkali / noble-gas spin-exchange rate
  double gamma_s = 0.0;           // alkali spin decoherence
  double gamma_k = 0.0;           // noble-gas spin decoherence
  double delta_k = 0.0;           // alkali / noble-gas detuning (any sign)
};

struct CavityParams {
  double r = 0.0;  // input-coupler amplitude reflectivity
  double roundtrip_length = 0.0;  // m
  double roundtrip_time = 0.0;    // s
  double phi_s = 0.0;
  double phi_a = kPi;
  double zeta1 = 0.0;
};

/// How the single-pass signal amplitude transmission alpha_s is evaluated.
/// `Approximate` is exp(-d (gamma_e/Delta_s)^2), the form used for the quoted
/// implementation numbers; `Exact` is exp(-Re(kappa_s) tau) =
/// exp(-d gamma_e^2 / |Gamma_s|^2). They differ by O((gamma_e/Delta_s)^4).
enum class AlphaConvention { Approximate, Exact };

/// Regime flags reported next to closed-form evaluations instead of silently
/// extrapolating outside the far-detuned / strong-coupling regime.
struct ValidityReport {
  bool far_detuned = true;        // Delta_s > 10 gamma_e
  bool noble_slower = true;       // gamma_k < gamma_s
  bool strong_coupling = true;    // zeta1 >> 1 (taken as zeta1 >= 10)
  bool parameters_positive = true;
  std::vector<std::string> warnings;

  bool ok() const { return far_detuned && noble_slower && parameters_positive; }
};

inline ValidityReport assess_validity(const MemoryParams& m, double zeta1 = 0.0) {
  ValidityReport v;
  if (!(m.d > 0 && m.gamma_e > 0 && m.delta_s_detuning > 0 && m.delta_hf > 0 && m.J > 0 &&
        m.gamma_s >= 0 && m.gamma_k >= 0)) {
    v.parameters_positive = false;
    v.warnings.emplace_back("rates and detunings must be positive (delta_k excepted)");
  }
  if (!(m.delta_s_detuning > 10.0 * m.gamma_e)) {
    v.far_detuned = false;
    v.warnings.emplace_back("not far detuned: Delta_s <= 10 gamma_e, closed-form eta1 invalid");
  }
  if (!(m.gamma_k < m.gamma_s)) {
    v.noble_slower = false;
    v.warnings.emplace_back("gamma_k >= gamma_s: noble-gas spins decohere no slower than alkali");
  }
  if (zeta1 > 0.0 && zeta1 < 10.0) {
    v.strong_coupling = false;
    v.warnings.emplace_back("zeta1 = " + std::to_string(zeta1) +
                            " only mildly satisfies zeta1 >> 1; g2 expression is marginal");
  }
  return v;
}

struct Detunings {
  ComplexRate Gamma_s;
  ComplexRate Gamma_a;
  ComplexRate Gamma_a_plus;
};

/// Gamma_s = gamma_e - i Delta_s, Gamma_a = gamma_e - i Delta_a with
/// Delta_a = Delta_s + delta_s, and Gamma_a^+ = gamma_e - i (Delta_a + delta_s).
inline Detunings complex_detunings(const MemoryParams& m) {
  const double delta_a = m.delta_s_detuning + m.delta_hf;
  return {ComplexRate(m.gamma_e, -m.delta_s_detuning), ComplexRate(m.gamma_e, -delta_a),
          ComplexRate(m.gamma_e, -(delta_a + m.delta_hf))};
}

struct StorageEfficiency {
  double eta1;  // optical stage (signal -> alkali spin wave)
  double eta2;  // alkali -> noble-gas transfer over pi/(2J)
  double eta_s;
};

inline StorageEfficiency storage_efficiency(const MemoryParams& m) {
  if (!(m.delta_s_detuning > 10.0 * m.gamma_e))
    throw ValidationError("storage_efficiency: requires far detuning Delta_s > 10 gamma_e");
  if (!(m.J > 0.0)) throw ValidationError("storage_efficiency: J must be positive");
  const double eta1 = 1.0 - std::sqrt(m.d) * m.gamma_e / (std::sqrt(2.0) * m.delta_s_detuning);
  if (!(eta1 > 0.0))
    throw ValidationError("storage_efficiency: sqrt(d) gamma_e >= sqrt(2) Delta_s, eta1 <= 0");
  const double eta2 = std::exp(-kPi * (m.gamma_s + m.gamma_k) / (2.0 * m.J));
  return {eta1, eta2, eta1 * eta2};
}

/// Single-pass amplitude transmission of the signal through the medium.
inline double alpha_s(const MemoryParams& m, AlphaConvention conv = AlphaConvention::Approximate) {
  const double ratio = m.gamma_e / m.delta_s_detuning;
  if (conv == AlphaConvention::Approximate) return std::exp(-m.d * ratio * ratio);
  const double ge2 = m.gamma_e * m.gamma_e;
  return std::exp(-m.d * ge2 / (ge2 + m.delta_s_detuning * m.delta_s_detuning));
}

struct CavityDecay {
  ComplexRate kappa_s;  // free-space decay rates c d gamma_e / (L Gamma)
  ComplexRate kappa_a;
  double mu_s;  // roundtrip amplitude transmissions r exp(-Re(kappa) tau)
  double mu_a;
  ComplexRate kappa_tilde_s;  // cavity-enhanced (resonant / anti-resonant) rates
  ComplexRate kappa_tilde_a;
};

namespace detail {
inline ComplexRate cavity_rate(double mu, double phi, double tau) {
  const ComplexRate loop = mu * std::polar(1.0, phi);
  const ComplexRate denom = 1.0 - loop;
  if (std::abs(denom) < 1e-15)
    throw ValidationError("cavity_decay: mu e^{i phi} = 1, lossless resonance diverges");
  return denom / (tau * loop);
}
}  // namespace detail

/// kappa_tilde follows 1/kappa_tilde = tau mu e^{i phi} / (1 - mu e^{i phi}).
/// With `conv == Approximate` mu_s is r * alpha_s with the first-order alpha_s, so that
/// it agrees bit-for-bit with fwm_suppression_factor.
inline CavityDecay cavity_decay(const MemoryParams& m, const CavityParams& c,
                                AlphaConvention conv = AlphaConvention::Exact) {
  if (!(c.roundtrip_time > 0.0) || !(c.roundtrip_length > 0.0))
    throw ValidationError("cavity_decay: roundtrip length and time must be positive");
  const auto g = complex_detunings(m);
  const double pref = kSpeedOfLight * m.d * m.gamma_e / c.roundtrip_length;
  CavityDecay out;
  out.kappa_s = pref / g.Gamma_s;
  out.kappa_a = pref / g.Gamma_a_plus;
  const double tau = c.roundtrip_time;
  if (conv == AlphaConvention::Approximate) {
    out.mu_s = c.r * alpha_s(m, AlphaConvention::Approximate);
  } else {
    out.mu_s = c.r * std::exp(-out.kappa_s.real() * tau);
  }
  out.mu_a = c.r * std::exp(-out.kappa_a.real() * tau);
  out.kappa_tilde_s = detail::cavity_rate(out.mu_s, c.phi_s, tau);
  out.kappa_tilde_a = detail::cavity_rate(out.mu_a, c.phi_a, tau);
  return out;
}

inline bool is_tuned(const CavityParams& c) {
  return std::abs(c.phi_s) < 1e-12 && std::abs(c.phi_a - kPi) < 1e-12;
}

/// FWM suppression factor x = (1 - mu_s) / (2 mu_s), mu_s = r alpha_s.
/// Only meaningful with the cavity resonant with the signal (phi_s = 0) and
/// anti-resonant with the anti-Stokes field (phi_a = pi).
inline double fwm_suppression_factor(const MemoryParams& m, const CavityParams& c,
                                     AlphaConvention conv = AlphaConvention::Approximate) {
  if (!is_tuned(c))
    throw ValidationError(
        "fwm_suppression_factor: suppression formula only valid at signal resonance / "
        "anti-Stokes anti-resonance tuning (phi_s = 0, phi_a = pi)");
  const double mu_s = c.r * alpha_s(m, conv);
  return (1.0 - mu_s) / (2.0 * mu_s);
}

/// Reflectivity that optimises storage/retrieval: r = (1 - sqrt(1 - a^2)) / a.
inline double optimal_reflectivity(const MemoryParams& m,
                                   AlphaConvention conv = AlphaConvention::Approximate) {
  const double a = alpha_s(m, conv);
  if (!(a > 0.0 && a <= 1.0)) throw ValidationError("optimal_reflectivity: alpha_s outside (0,1]");
  return (1.0 - std::sqrt(1.0 - a * a)) / a;
}

struct CavityGeometry {
  double kappa_c;           // cavity linewidth, same (ordinary) frequency units as delta_hf
  double bandwidth;         // memory bandwidth bound 0.3 kappa_c
  double roundtrip_length;  // m
  double roundtrip_time;    // s
};

inline CavityGeometry cavity_geometry(const MemoryParams& m, double r) {
  if (!(r > 0.0 && r < 1.0)) throw ValidationError("cavity_geometry: r must lie in (0,1)");
  if (!(m.delta_hf > 0.0)) throw ValidationError("cavity_geometry: delta_hf must be positive");
  CavityGeometry g;
  g.kappa_c = 8.0 * m.delta_hf * (1.0 - r) / r;
  g.bandwidth = 0.3 * g.kappa_c;
  const double delta_angular = 2.0 * kPi * m.delta_hf;
  g.roundtrip_length = kPi * kSpeedOfLight / (2.0 * delta_angular);
  g.roundtrip_time = g.roundtrip_length / kSpeedOfLight;
  return g;
}

/// Tuned cavity with the optimal reflectivity and the roundtrip fixed by
/// the hyperfine splitting.
inline CavityParams make_cavity(const MemoryParams& m, double r, double zeta1 = 0.0) {
  const auto geo = cavity_geometry(m, r);
  CavityParams c;
  c.r = r;
  c.roundtrip_length = geo.roundtrip_length;
  c.roundtrip_time = geo.roundtrip_time;
  c.phi_s = 0.0;
  c.phi_a = kPi;
  c.zeta1 = zeta1;
  return c;
}

/// |Gamma_s|^2 / |Gamma_a|^2
inline double detuning_ratio(const MemoryParams& m) {
  const auto g = complex_detunings(m);
  return std::norm(g.Gamma_s) / std::norm(g.Gamma_a);
}

/// g2 of the retrieved signal: 2 x^2 zeta1 |Gamma_s|^2 / |Gamma_a|^2.
inline double readout_g2(const MemoryParams& m, const CavityParams& c,
                         AlphaConvention conv = AlphaConvention::Approximate) {
  if (!(c.zeta1 > 0.0)) throw ValidationError("readout_g2: zeta1 must be positive");
  const double x = fwm_suppression_factor(m, c, conv);
  return 2.0 * x * x * c.zeta1 * detuning_ratio(m);
}

/// F_re = 1 / (1 + SNR^-1) with SNR^-1 = g2 / 2.
inline double readout_fidelity(double g2) {
  if (!(g2 >= 0.0)) throw ValidationError("readout_fidelity: g2 must be non-negative");
  return 1.0 / (1.0 + 0.5 * g2);
}

/// Coupling strength zeta1 implied by a target readout fidelity:
/// zeta1 = (1/F - 1) |Gamma_a|^2 / (x^2 |Gamma_s|^2).
inline double calibrate_zeta1(const MemoryParams& m, const CavityParams& c, double F_re_target,
                              AlphaConvention conv = AlphaConvention::Approximate) {
  if (!(F_re_target > 0.0 && F_re_target < 1.0))
    throw ValidationError("calibrate_zeta1: target fidelity must lie in (0,1)");
  const double x = fwm_suppression_factor(m, c, conv);
  if (!(x > 0.0)) throw ValidationError("calibrate_zeta1: x = 0, noiseless readout needs no zeta1");
  const double zeta1 = (1.0 / F_re_target - 1.0) / (x * x * detuning_ratio(m));
  if (!(zeta1 > 0.0) || !std::isfinite(zeta1))
    throw ValidationError("calibrate_zeta1: implied zeta1 is not positive");
  return zeta1;
}

}  // namespace hotrep
