#pragma once

// Parameter profiles: flat `key = value unit` text with `#` comments.
//
// Every numeric key has a dimension and a canonical unit. Values are stored
// in the canonical unit, so parsing canonical text is exact and
// serialize(parse(text)) is a fixed point. `resolve` converts to SI and
// derives everything that is not given (reflectivity, zeta1, eta_s, t_trans,
// charging).

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hotrep/errors.hpp"
#include "hotrep/format.hpp"
#include "hotrep/physics.hpp"
#include "hotrep/protocol.hpp"
#include "hotrep/units.hpp"

namespace hotrep {

enum class Dimension { Dimensionless, Integer, Frequency, Time, Length, Speed, Angle };

struct KeySpec {
  const char* key;
  Dimension dim;
  const char* unit;  // canonical unit
  bool required;
};

namespace detail {

// Canonical key order for serialization.
inline constexpr std::array<KeySpec, 35> kProfileKeys{{
    {"d", Dimension::Dimensionless, "1", true},
    {"gamma_e", Dimension::Frequency, "GHz", true},
    {"delta_s", Dimension::Frequency, "GHz", true},
    {"delta_hf", Dimension::Frequency, "GHz", true},
    {"J", Dimension::Frequency, "Hz", true},
    {"gamma_s", Dimension::Frequency, "Hz", true},
    {"gamma_k", Dimension::Frequency, "Hz", true},
    {"delta_k", Dimension::Frequency, "Hz", false},
    {"r", Dimension::Dimensionless, "1", false},
    {"phi_s", Dimension::Angle, "rad", false},
    {"phi_a", Dimension::Angle, "rad", false},
    {"zeta1", Dimension::Dimensionless, "1", false},
    {"F_re_target", Dimension::Dimensionless, "1", true},
    {"L0", Dimension::Length, "km", true},
    {"L_att", Dimension::Length, "km", true},
    {"c_fiber", Dimension::Speed, "m/s", true},
    {"alpha2", Dimension::Dimensionless, "1", true},
    {"beta2", Dimension::Dimensionless, "1", true},
    {"eta_d", Dimension::Dimensionless, "1", true},
    {"eta_c", Dimension::Dimensionless, "1", true},
    {"eta_st", Dimension::Dimensionless, "1", true},
    {"lambda_dark", Dimension::Frequency, "Hz", true},
    {"T_d", Dimension::Time, "ns", true},
    {"p1", Dimension::Dimensionless, "1", true},
    {"R", Dimension::Frequency, "MHz", true},
    {"R_src", Dimension::Frequency, "GHz", true},
    {"n", Dimension::Integer, "1", true},
    {"m_mux", Dimension::Integer, "1", true},
    {"F_targ", Dimension::Dimensionless, "1", true},
    {"p_charge", Dimension::Dimensionless, "1", false},
    {"p2_max", Dimension::Dimensionless, "1", false},
    {"t_trans", Dimension::Time, "ms", false},
    {"eta_s", Dimension::Dimensionless, "1", false},
    {"eta_r", Dimension::Dimensionless, "1", false},
    // Alias of gamma_e: full width at half maximum, halved on input.
    {"linewidth_fwhm", Dimension::Frequency, "GHz", false},
}};

inline const KeySpec* find_key(std::string_view key) {
  for (const auto& k : kProfileKeys)
    if (key == k.key) return &k;
  return nullptr;
}

inline const char* dimension_name(Dimension d) {
  switch (d) {
    case Dimension::Dimensionless:
    case Dimension::Integer:
      return "dimensionless";
    case Dimension::Frequency:
      return "frequency";
    case Dimension::Time:
      return "time";
    case Dimension::Length:
      return "length";
    case Dimension::Speed:
      return "speed";
    case Dimension::Angle:
      return "angle";
  }
  return "?";
}

/// SI scale of `unit` if it measures `dim`.
inline std::optional<double> unit_scale(Dimension dim, std::string_view unit) {
  struct U {
    Dimension dim;
    const char* name;
    double si;
  };
  static constexpr U table[] = {
      {Dimension::Dimensionless, "1", 1.0}, {Dimension::Integer, "1", 1.0},
      {Dimension::Frequency, "Hz", 1.0},    {Dimension::Frequency, "kHz", 1e3},
      {Dimension::Frequency, "MHz", 1e6},   {Dimension::Frequency, "GHz", 1e9},
      {Dimension::Time, "s", 1.0},          {Dimension::Time, "ms", 1e-3},
      {Dimension::Time, "us", 1e-6},        {Dimension::Time, "ns", 1e-9},
      {Dimension::Length, "km", 1e3},       {Dimension::Length, "m", 1.0},
      {Dimension::Length, "mm", 1e-3},      {Dimension::Speed, "m/s", 1.0},
      {Dimension::Speed, "km/s", 1e3},      {Dimension::Angle, "rad", 1.0},
  };
  for (const auto& u : table)
    if (u.dim == dim && unit == u.name) return u.si;
  return std::nullopt;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace detail

struct ParameterProfile {
  std::string name;
  std::string description;
  std::string notes;
  /// Numeric entries, each in its key's canonical unit.
  std::map<std::string, double> values;

  bool has(const std::string& key) const { return values.count(key) != 0; }
  double get(const std::string& key) const {
    const auto it = values.find(key);
    if (it == values.end()) throw ValidationError("profile: missing key '" + key + "'");
    return it->second;
  }
  /// Value of `key` converted to SI (km stay km for lengths).
  double si(const std::string& key) const {
    const KeySpec* spec = detail::find_key(key);
    const double v = get(key);
    if (spec->dim == Dimension::Length) return v;  // lengths are kept in km
    return v * *detail::unit_scale(spec->dim, spec->unit);
  }
  void set(const std::string& key, double canonical_value) {
    if (!detail::find_key(key)) throw ValidationError("profile: unknown key '" + key + "'");
    values[key] = canonical_value;
  }
};

/// Parses profile text. `origin` prefixes every diagnostic.
inline ParameterProfile parse_profile(std::string_view text, const std::string& origin = "profile") {
  ParameterProfile p;
  std::map<std::string, int> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    const std::string where = origin + ":" + std::to_string(line_no);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ValidationError(where + ": expected 'key = value unit'");
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string_view rhs = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ValidationError(where + ": empty key");
    if (seen.count(key)) throw ValidationError(where + ": key '" + key + "': duplicate (first on line " +
                                               std::to_string(seen[key]) + ")");
    seen[key] = line_no;

    if (key == "name" || key == "description" || key == "notes") {
      (key == "name" ? p.name : key == "description" ? p.description : p.notes) = std::string(rhs);
      continue;
    }
    const KeySpec* spec = detail::find_key(key);
    if (!spec) throw ValidationError(where + ": key '" + key + "': unknown key");
    const auto sp = rhs.find_first_of(" \t");
    if (sp == std::string_view::npos)
      throw ValidationError(where + ": key '" + key + "': missing unit (expected e.g. '" +
                            std::string(rhs) + " " + spec->unit + "')");
    const std::string_view num = rhs.substr(0, sp);
    const std::string_view unit = detail::trim(rhs.substr(sp));
    const double v = parse_double(num, where + ": key '" + key + "'");
    if (!std::isfinite(v)) throw ValidationError(where + ": key '" + key + "': value must be finite");
    const auto scale = detail::unit_scale(spec->dim, unit);
    if (!scale)
      throw ValidationError(where + ": key '" + key + "': unit '" + std::string(unit) + "' is not a " +
                            detail::dimension_name(spec->dim) + " unit (canonical: " + spec->unit + ")");
    const double canon_scale = *detail::unit_scale(spec->dim, spec->unit);
    double canonical = (*scale == canon_scale) ? v : v * (*scale / canon_scale);
    if (spec->dim == Dimension::Integer && canonical != std::floor(canonical))
      throw ValidationError(where + ": key '" + key + "': must be an integer");
    if (key == "linewidth_fwhm") {
      if (seen.count("gamma_e")) throw ValidationError(where + ": give either gamma_e or linewidth_fwhm");
      p.values["gamma_e"] = 0.5 * canonical;
      continue;
    }
    if (key == "gamma_e" && seen.count("linewidth_fwhm"))
      throw ValidationError(where + ": give either gamma_e or linewidth_fwhm");
    p.values[key] = canonical;
  }
  for (const auto& k : detail::kProfileKeys) {
    if (k.required && !p.values.count(k.key)) {
      if (std::string_view(k.key) == "gamma_e")
        throw ValidationError(origin + ": missing key 'gamma_e' (or 'linewidth_fwhm')");
      throw ValidationError(origin + ": missing key '" + std::string(k.key) + "'");
    }
  }
  return p;
}

/// Canonical text: fixed key order, canonical units, shortest round-trip numbers.
inline std::string serialize_profile(const ParameterProfile& p) {
  std::ostringstream os;
  if (!p.name.empty()) os << "name = " << p.name << '\n';
  if (!p.description.empty()) os << "description = " << p.description << '\n';
  if (!p.notes.empty()) os << "notes = " << p.notes << '\n';
  for (const auto& k : detail::kProfileKeys) {
    const auto it = p.values.find(k.key);
    if (it == p.values.end()) continue;
    os << k.key << " = " << format_double(it->second) << ' ' << k.unit << '\n';
  }
  return os.str();
}

inline constexpr std::string_view kProfileSec5 = R"(name = paper-sec5
description = hot Rb / noble-gas memory in a ring cavity, nested single-photon repeater defaults
notes = t_trans follows pi/(2J); reflectivity and zeta1 are derived
d = 100 1
linewidth_fwhm = 27 GHz
delta_s = 2700 GHz
delta_hf = 0.46 GHz
J = 1000 Hz
gamma_s = 17.5 Hz
gamma_k = 0.0001 Hz
phi_s = 0 rad
phi_a = 3.141592653589793 rad
F_re_target = 0.986 1
L0 = 100 km
L_att = 22 km
c_fiber = 200000000 m/s
alpha2 = 0.84 1
beta2 = 0.16 1
eta_d = 0.6 1
eta_c = 0.8 1
eta_st = 0.75 1
lambda_dark = 100 Hz
T_d = 12.5 ns
p1 = 0.9 1
R = 10 MHz
R_src = 10 GHz
n = 2 1
m_mux = 1 1
F_targ = 0.9 1
)";

inline std::string builtin_profile_text(std::string_view name) {
  if (name == "paper-sec5") return std::string(kProfileSec5);
  if (name == "paper-fig4") {
    std::string text(kProfileSec5);
    text.replace(text.find("paper-sec5"), 10, "paper-fig4");
    text.replace(text.find("notes = t_trans follows pi/(2J)"), 31, "notes = t_trans pinned to 1.5 ms");
    text += "t_trans = 1.5 ms\n";
    return text;
  }
  throw ValidationError("profile: no built-in profile named '" + std::string(name) +
                        "' (available: paper-sec5, paper-fig4)");
}

inline bool is_builtin_profile(std::string_view name) { return name == "paper-sec5" || name == "paper-fig4"; }

inline ParameterProfile builtin_profile(std::string_view name) {
  return parse_profile(builtin_profile_text(name), std::string(name));
}

/// Profile with every quantity in SI (lengths in km) and all derived values filled in.
struct ResolvedProfile {
  ParameterProfile source;
  MemoryParams memory;
  CavityParams cavity;
  ProtocolParams protocol;
  StorageEfficiency efficiency{};
  CavityGeometry geometry{};
  Charging charging{};
  ChargingOverride charging_override;
  ValidityReport validity;
  double x = 0.0;
  double g2 = 0.0;
  double F_re = 0.0;
  double R_src = 0.0;

  /// Protocol at nesting level n, re-deriving charging for that level unless
  /// `keep_charging` is set.
  ProtocolParams protocol_for(int n, bool keep_charging = false) const {
    ProtocolParams p = protocol;
    p.n = n;
    if (!keep_charging) p.p_charge = charging_model(p.F_targ, n, p, charging_override).p_charge;
    return p;
  }
};

inline ResolvedProfile resolve(const ParameterProfile& prof) {
  ResolvedProfile r;
  r.source = prof;
  auto opt = [&](const char* k) -> std::optional<double> {
    if (prof.has(k)) return prof.si(k);
    return std::nullopt;
  };
  auto& m = r.memory;
  m.d = prof.si("d");
  m.gamma_e = prof.si("gamma_e");
  m.delta_s_detuning = prof.si("delta_s");
  m.delta_hf = prof.si("delta_hf");
  m.J = prof.si("J");
  m.gamma_s = prof.si("gamma_s");
  m.gamma_k = prof.si("gamma_k");
  m.delta_k = opt("delta_k").value_or(0.0);
  r.validity = assess_validity(m);
  if (!r.validity.parameters_positive)
    throw ValidationError("profile: memory parameters: " + r.validity.warnings.front());

  r.efficiency = storage_efficiency(m);
  const double refl = opt("r").value_or(optimal_reflectivity(m));
  r.geometry = cavity_geometry(m, refl);
  r.cavity = make_cavity(m, refl);
  r.cavity.phi_s = opt("phi_s").value_or(0.0);
  r.cavity.phi_a = opt("phi_a").value_or(kPi);
  r.x = fwm_suppression_factor(m, r.cavity);
  const double target = prof.si("F_re_target");
  r.cavity.zeta1 = opt("zeta1").value_or(0.0);
  if (!(r.cavity.zeta1 > 0.0)) r.cavity.zeta1 = calibrate_zeta1(m, r.cavity, target);
  r.g2 = readout_g2(m, r.cavity);
  r.F_re = readout_fidelity(r.g2);
  r.validity = assess_validity(m, r.cavity.zeta1);

  auto& p = r.protocol;
  p.L0 = prof.si("L0");
  p.L_att = prof.si("L_att");
  p.c_fiber = prof.si("c_fiber");
  p.alpha2 = prof.si("alpha2");
  p.beta2 = prof.si("beta2");
  p.eta_d = prof.si("eta_d");
  p.eta_c = prof.si("eta_c");
  p.eta_st = prof.si("eta_st");
  p.lambda_dark = prof.si("lambda_dark");
  p.T_d = prof.si("T_d");
  p.p1 = prof.si("p1");
  p.R = prof.si("R");
  p.n = static_cast<int>(prof.si("n"));
  p.m_mux = static_cast<int>(prof.si("m_mux"));
  p.F_targ = prof.si("F_targ");
  p.eta_s = opt("eta_s").value_or(r.efficiency.eta_s);
  p.eta_r = opt("eta_r").value_or(p.eta_s);
  p.t_trans = opt("t_trans").value_or(kPi / (2.0 * m.J));
  p.F_re = r.F_re;
  r.R_src = prof.si("R_src");
  r.charging_override.p_charge = opt("p_charge");
  r.charging_override.p2_max = opt("p2_max");
  r.charging = charging_model(p.F_targ, p.n, p, r.charging_override);
  p.p_charge = r.charging.p_charge;
  validate(p);
  return r;
}

}  // namespace hotrep
