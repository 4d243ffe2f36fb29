#pragma once

// Closed-form protocol layer for the nested single-photon repeater:
// elementary-link generation, swapping, post-selection, charging of the
// ensemble photon source, distribution time, overall fidelity.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hotrep/errors.hpp"

namespace hotrep {

struct ProtocolParams {
  double L0 = 100.0;      // elementary link length, km
  double L_att = 22.0;    // km
  double c_fiber = 2e8;   // m/s
  double alpha2 = 0.84;   // beam-splitter reflection probability (towards memory)
  double beta2 = 0.16;    // transmission probability (towards the station)
  double eta_d = 0.6;
  double eta_c = 0.8;
  double eta_st = 0.75;
  double lambda_dark = 100.0;  // s^-1
  double T_d = 12.5e-9;        // s
  double p1 = 0.9;
  double p_charge = 0.0;       // Stokes emission probability per charging attempt
  double R = 1e7;              // charging repetition rate, s^-1
  double eta_s = 0.0;
  double eta_r = 0.0;
  double t_trans = 0.0;  // s
  int n = 2;
  int m_mux = 1;
  double F_targ = 0.9;
  double F_re = 1.0;

  double t_ch() const { return 1.0 / (R * p_charge); }
  double L_total() const { return std::ldexp(L0, n); }
  /// Duration of one elementary attempt: heralding round trip, transfer, charging.
  double attempt_time() const { return L0 * 1e3 / c_fiber + t_trans + t_ch(); }
};

namespace detail {
inline bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }
}  // namespace detail

inline void validate(const ProtocolParams& p) {
  auto fail = [](const std::string& what) { throw ValidationError("protocol params: " + what); };
  if (std::abs(p.alpha2 + p.beta2 - 1.0) > 1e-12) fail("alpha2 + beta2 must equal 1");
  const std::pair<const char*, double> probs[] = {
      {"alpha2", p.alpha2}, {"beta2", p.beta2},   {"eta_d", p.eta_d}, {"eta_c", p.eta_c},
      {"eta_st", p.eta_st}, {"p1", p.p1},         {"eta_s", p.eta_s}, {"eta_r", p.eta_r},
      {"F_targ", p.F_targ}, {"F_re", p.F_re},     {"p_charge", p.p_charge}};
  for (const auto& [name, v] : probs)
    if (!detail::in_unit(v)) fail(std::string(name) + " must lie in [0,1]");
  if (!(p.L0 > 0.0)) fail("L0 must be positive");
  if (!(p.R > 0.0)) fail("R must be positive");
  if (!(p.T_d > 0.0)) fail("T_d must be positive");
  if (!(p.L_att > 0.0) || !(p.c_fiber > 0.0)) fail("L_att and c_fiber must be positive");
  if (!(p.lambda_dark >= 0.0)) fail("lambda_dark must be non-negative");
  if (!(p.t_trans >= 0.0)) fail("t_trans must be non-negative");
  if (p.n < 0) fail("nesting level n must be >= 0");
  if (p.m_mux < 1) fail("multiplexing factor must be >= 1");
}

/// Probability of no dark count in the detection window.
inline double epsilon0(const ProtocolParams& p) {
  if (!(p.lambda_dark >= 0.0) || !(p.T_d > 0.0))
    throw ValidationError("epsilon0: need lambda >= 0 and T_d > 0");
  return std::exp(-p.lambda_dark * p.T_d);
}

inline double transmission(const ProtocolParams& p) {
  if (!(p.L0 >= 0.0)) throw ValidationError("transmission: L0 must be non-negative");
  return std::exp(-p.L0 / (2.0 * p.L_att));
}

struct Generation {
  double F_gen;
  double eta_gen;
  double F_gen_approx;    // alpha^2 eta_s
  double eta_gen_approx;  // 2 p1 beta^2 eta_t eta_c eta_d
};

inline Generation generation_fidelity_efficiency(const ProtocolParams& p) {
  const double eps0 = epsilon0(p);
  const double eta_t = transmission(p);
  const double herald = p.beta2 * eta_t * p.eta_c * p.eta_d;
  const double dark = (1.0 - eps0) * p.alpha2 * p.alpha2;
  const double double_photon = p.beta2 * p.beta2 * eta_t * eta_t * p.eta_c * p.eta_c * p.eta_d;
  const double denom = herald + dark - double_photon;
  if (!(denom > 0.0))
    throw InfeasibleError("generation: non-positive heralding denominator, configuration unusable");
  Generation g;
  g.F_gen = p.alpha2 * herald * p.eta_s / denom;
  g.eta_gen = 2.0 * p.p1 * eps0 * denom;
  g.F_gen_approx = p.alpha2 * p.eta_s;
  g.eta_gen_approx = 2.0 * p.p1 * herald;
  return g;
}

/// Mixture alpha^2 eta_s |psi><psi| + [alpha^2 (1 - eta_s) + beta^2] |0><0|.
struct LinkState {
  double w_ent;
  double w_vac;
};

inline LinkState link_state(const ProtocolParams& p) {
  LinkState s{p.alpha2 * p.eta_s, p.alpha2 * (1.0 - p.eta_s) + p.beta2};
  const double sum = s.w_ent + s.w_vac;
  if (!(sum > 0.0)) throw ValidationError("link_state: zero total weight");
  s.w_ent /= sum;
  s.w_vac /= sum;
  return s;
}

/// q = p1 alpha^2 eta_tot, eta_tot = eta_s eta_r eta_d.
inline double success_parameter(const ProtocolParams& p) {
  return p.p1 * p.alpha2 * p.eta_s * p.eta_r * p.eta_d;
}

namespace detail {
/// 2^i - (2^i - 1) q
inline double level_factor(int i, double q) {
  const double two_i = std::ldexp(1.0, i);
  return two_i - (two_i - 1.0) * q;
}
}  // namespace detail

/// Swap success probability at nesting level i >= 1 as a function of q.
inline double swap_probability(int i, double q) {
  if (i < 1) throw ValidationError("swap_probability: level index must be >= 1");
  if (!(q > 0.0 && q <= 1.0)) throw ValidationError("swap_probability: q must lie in (0,1]");
  const double below = detail::level_factor(i - 1, q);
  return 0.5 * q * detail::level_factor(i, q) / (below * below);
}

inline double swap_probability(int i, const ProtocolParams& p) {
  if (i > p.n) throw ValidationError("swap_probability: level index exceeds nesting level");
  return swap_probability(i, success_parameter(p));
}

/// First-level swap in its two-photon form q (1 - q/2).
inline double first_swap_probability(double q) { return q * (1.0 - 0.5 * q); }

inline double postselection_probability(int n, double q) {
  if (n < 0) throw ValidationError("postselection_probability: n must be >= 0");
  if (!(q >= 0.0 && q <= 1.0)) throw ValidationError("postselection_probability: q outside [0,1]");
  const double f = detail::level_factor(n, q);
  return 0.5 * q / (f * f);
}

inline double postselection_probability(int n, const ProtocolParams& p) {
  return postselection_probability(n, success_parameter(p));
}

struct Charging {
  double p2_max;
  double p_charge;
  double t_ch;  // s
};

/// Explicit charging inputs; absent fields fall back to the bundled table.
struct ChargingOverride {
  std::optional<double> p2_max;
  std::optional<double> p_charge;
};

/// Multiphoton budget of the ensemble source: p2 = 2 p (1 - eta_st) p1.
/// The mapping from target fidelity to the tolerable p2 is not derivable here,
/// so it comes from a small table of published operating points:
///   (n=2, F_targ=0.9): p2_max = 0.00093
///   (n=3, F_targ=0.9): p = 9.73e-5 given directly
inline Charging charging_model(double F_targ, int n, const ProtocolParams& p,
                               const ChargingOverride& o = {}) {
  if (!(p.R > 0.0)) throw ValidationError("charging_model: R must be positive");
  auto finish = [&](double p2, double pc) {
    if (!(pc > 0.0 && pc <= 1.0)) throw ValidationError("charging_model: p outside (0,1]");
    return Charging{p2, pc, 1.0 / (p.R * pc)};
  };
  const double per_p = 2.0 * (1.0 - p.eta_st) * p.p1;  // p2 = per_p * p
  if (o.p_charge) return finish(per_p * *o.p_charge, *o.p_charge);
  if (o.p2_max) {
    if (!(per_p > 0.0))
      throw ValidationError("charging_model: eta_st = 1 heralds every two-photon event, p2 = 0");
    return finish(*o.p2_max, *o.p2_max / per_p);
  }
  const bool f09 = std::abs(F_targ - 0.9) < 1e-12;
  if (f09 && n == 2) {
    const double p2 = 0.00093;
    return finish(p2, p2 / per_p);
  }
  if (f09 && n == 3) {
    const double pc = 9.73e-5;
    return finish(per_p * pc, pc);
  }
  throw ValidationError("charging_model: no tabulated entry for n=" + std::to_string(n) +
                        ", F_targ=" + std::to_string(F_targ) + "; supply p2_max or p");
}

/// Mean entanglement distribution time:
///   T = 3^{n+1}/2 (L0/c + t_trans + t_ch) prod_{i=1..n}(2^i - (2^i-1) q)
///       / (eta_t eta_c eta_d p1^{n+3} beta^2 alpha^{2n+4} eta_tot^{n+2}).
inline double total_time(const ProtocolParams& p) {
  if (p.n < 0) throw ValidationError("total_time: n must be >= 0");
  const double eta_t = transmission(p);
  const double eta_tot = p.eta_s * p.eta_r * p.eta_d;
  const double q = p.p1 * p.alpha2 * eta_tot;
  double prod = 1.0;
  for (int i = 1; i <= p.n; ++i) prod *= detail::level_factor(i, q);
  const int k = p.n + 2;
  const double denom = eta_t * p.eta_c * p.eta_d * std::pow(p.p1, p.n + 3) * p.beta2 *
                       std::pow(p.alpha2, k) * std::pow(eta_tot, k);
  if (!(denom > 0.0) || !std::isfinite(denom))
    throw InfeasibleError("total_time: an efficiency or probability is zero, no distribution");
  const double t = std::pow(3.0, p.n + 1) / 2.0 * p.attempt_time() * prod / denom;
  if (!std::isfinite(t)) throw InfeasibleError("total_time: distribution time overflows");
  return t;
}

/// Multiplexing acts as a pure rate multiplier.
inline double repeater_rate(const ProtocolParams& p) { return p.m_mux / total_time(p); }

/// F_tot = F_targ F_re^{n+2}; n+2 readouts (n swaps, two post-selection readouts).
inline double overall_fidelity(const ProtocolParams& p) {
  if (!(p.F_targ > 0.0 && p.F_targ <= 1.0) || !(p.F_re > 0.0 && p.F_re <= 1.0))
    throw ValidationError("overall_fidelity: F_targ and F_re must lie in (0,1]");
  return p.F_targ * std::pow(p.F_re, p.n + 2);
}

inline double direct_transmission_rate(double L_km, double R_src, double L_att = 22.0) {
  if (!(L_km >= 0.0)) throw ValidationError("direct_transmission_rate: L must be non-negative");
  return R_src * std::exp(-L_km / L_att);
}

/// Magnitudes of the dark-count contributions the closed forms neglect or
/// keep only at the generation step.
struct DarkCountDiagnostic {
  double generation_ratio;  // (1 - eps0) alpha^4 / (beta^2 eta_t eta_c eta_d)
  double readout_click;     // 1 - eps0 per swap / post-selection readout
};

inline DarkCountDiagnostic dark_count_diagnostic(const ProtocolParams& p) {
  const double eps0 = epsilon0(p);
  const double herald = p.beta2 * transmission(p) * p.eta_c * p.eta_d;
  return {(1.0 - eps0) * p.alpha2 * p.alpha2 / herald, 1.0 - eps0};
}

/// Repeater rate as a function of total distance, holding n and everything
/// else fixed (L0 = L / 2^n).
inline double repeater_rate_at(ProtocolParams p, double L_total_km) {
  p.L0 = std::ldexp(L_total_km, -p.n);
  return repeater_rate(p);
}

/// Smallest total distance in [L_min, L_max] where the repeater rate reaches
/// the direct-transmission rate, bisected to 1 km. Points where the repeater
/// cannot operate count as rate 0.
inline double crossover_distance(const std::function<double(double)>& repeater, double R_src,
                                 double L_att, double L_min, double L_max) {
  if (!(L_min >= 0.0 && L_max > L_min))
    throw ValidationError("crossover_distance: need 0 <= L_min < L_max");
  auto ahead = [&](double L) {
    double rate = 0.0;
    try {
      rate = repeater(L);
    } catch (const InfeasibleError&) {
      rate = 0.0;
    }
    return rate > 0.0 && rate >= direct_transmission_rate(L, R_src, L_att);
  };
  if (ahead(L_min)) return L_min;
  if (!ahead(L_max))
    throw InfeasibleError("crossover_distance: repeater never reaches direct transmission in range");
  double lo = L_min;
  double hi = L_max;
  while (hi - lo > 1.0) {
    const double mid = 0.5 * (lo + hi);
    (ahead(mid) ? hi : lo) = mid;
  }
  return hi;
}

inline double crossover_distance(const ProtocolParams& p, double R_src, double L_min = 1.0,
                                 double L_max = 800.0) {
  return crossover_distance([&](double L) { return repeater_rate_at(p, L); }, R_src, p.L_att,
                            L_min, L_max);
}

}  // namespace hotrep
