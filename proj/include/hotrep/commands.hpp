#pragma once

// Command implementations behind the hotrep CLI. Each command writes to the
// supplied streams and returns a process exit code; exceptions propagate and
// are mapped to exit codes by run_guarded().

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "hotrep/errors.hpp"
#include "hotrep/format.hpp"
#include "hotrep/memory_dynamics.hpp"
#include "hotrep/montecarlo.hpp"
#include "hotrep/profile.hpp"
#include "hotrep/protocol.hpp"

namespace hotrep {

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitInfeasible = 2, kExitMcFailure = 3 };

/// Built-in profile name or path to a profile file.
inline ResolvedProfile load_profile(const std::string& ref) {
  if (is_builtin_profile(ref)) return resolve(builtin_profile(ref));
  std::ifstream in(ref, std::ios::binary);
  if (!in) throw ValidationError("profile: cannot open '" + ref + "' (not a file or built-in name)");
  std::ostringstream ss;
  ss << in.rdbuf();
  return resolve(parse_profile(ss.str(), ref));
}

// ---------------------------------------------------------------- params

struct ReportLine {
  std::string name;
  double value;  // in `unit`
  std::string unit;
};

inline std::vector<ReportLine> params_report(const ResolvedProfile& rp) {
  const auto& p = rp.protocol;
  const auto gen = generation_fidelity_efficiency(p);
  const double q = success_parameter(p);
  std::vector<ReportLine> out = {
      {"eta1", rp.efficiency.eta1, "1"},
      {"eta2", rp.efficiency.eta2, "1"},
      {"eta_s", rp.efficiency.eta_s, "1"},
      {"r", rp.cavity.r, "1"},
      {"x", rp.x, "1"},
      {"zeta1", rp.cavity.zeta1, "1"},
      {"g2", rp.g2, "1"},
      {"F_re", rp.F_re, "1"},
      {"kappa_c", rp.geometry.kappa_c / units::GHz, "GHz"},
      {"bandwidth", rp.geometry.bandwidth / units::MHz, "MHz"},
      {"L_roundtrip", rp.geometry.roundtrip_length / units::mm, "mm"},
      {"tau", rp.geometry.roundtrip_time / units::ns, "ns"},
      {"t_trans", p.t_trans / units::ms, "ms"},
      {"p_charge", rp.charging.p_charge, "1"},
      {"t_ch", p.t_ch() / units::ms, "ms"},
      {"q", q, "1"},
  };
  if (p.n >= 1) out.push_back({"P1", swap_probability(1, q), "1"});
  out.push_back({"P_ps", postselection_probability(p.n, q), "1"});
  out.push_back({"F_gen", gen.F_gen, "1"});
  out.push_back({"eta_gen", gen.eta_gen, "1"});
  out.push_back({"F_tot", overall_fidelity(p), "1"});
  out.push_back({"L_total", p.L_total(), "km"});
  out.push_back({"T_tot", total_time(p), "s"});
  out.push_back({"rate", repeater_rate(p), "Hz"});
  return out;
}

inline int cmd_params(const ResolvedProfile& rp, std::ostream& out, bool machine = false,
                      TableFormat fmt = TableFormat::Csv) {
  const auto lines = params_report(rp);
  if (machine) {
    TableWriter w(out, fmt);
    w.row({"quantity", "value", "unit"});
    for (const auto& l : lines) w.row({l.name, format_double(l.value), l.unit});
    return kExitOk;
  }
  out << "profile " << (rp.source.name.empty() ? "(unnamed)" : rp.source.name) << '\n';
  for (const auto& l : lines) {
    std::string name = l.name;
    name.resize(std::max<std::size_t>(name.size(), 12), ' ');
    out << name << ' ' << format_sig(l.value);
    if (l.unit != "1") out << ' ' << l.unit;
    out << '\n';
  }
  for (const auto& w : rp.validity.warnings) out << "warning: " << w << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- sweeps

enum class SweepVariable { L_total, n, m_mux, eta_d, eta_c, L0 };

inline SweepVariable parse_sweep_variable(const std::string& s) {
  if (s == "L_total" || s == "L") return SweepVariable::L_total;
  if (s == "n") return SweepVariable::n;
  if (s == "m_mux") return SweepVariable::m_mux;
  if (s == "eta_d") return SweepVariable::eta_d;
  if (s == "eta_c") return SweepVariable::eta_c;
  if (s == "L0") return SweepVariable::L0;
  throw ValidationError("sweep: unknown variable '" + s + "' (L_total, n, m_mux, eta_d, eta_c, L0)");
}

/// `steps` evenly spaced points from min to max inclusive.
inline std::vector<double> linear_range(double min, double max, int steps) {
  if (!(min < max)) throw ValidationError("sweep: need min < max");
  if (steps < 2) throw ValidationError("sweep: need steps >= 2");
  std::vector<double> v;
  for (int i = 0; i < steps; ++i)
    v.push_back(i == steps - 1 ? max : min + (max - min) * i / (steps - 1));
  return v;
}

struct SweepSpec {
  SweepVariable variable = SweepVariable::L_total;
  std::vector<double> values;
  std::vector<int> n_values;    // empty: profile n
  std::vector<int> mux_values;  // empty: profile m_mux
  bool direct = false;          // append direct-transmission rate
};

struct SweepPoint {
  double value;
  ProtocolParams protocol;
};

/// Expands a sweep into protocol configurations ordered by (value, n, m_mux).
inline std::vector<SweepPoint> expand_sweep(const ResolvedProfile& rp, const SweepSpec& spec) {
  if (spec.values.empty()) throw ValidationError("sweep: no values");
  std::vector<double> values = spec.values;
  std::sort(values.begin(), values.end());
  std::vector<int> ns = spec.n_values.empty() ? std::vector<int>{rp.protocol.n} : spec.n_values;
  std::vector<int> muxes = spec.mux_values.empty() ? std::vector<int>{rp.protocol.m_mux} : spec.mux_values;
  std::sort(ns.begin(), ns.end());
  std::sort(muxes.begin(), muxes.end());
  if (spec.variable == SweepVariable::n) ns = {-1};
  if (spec.variable == SweepVariable::m_mux) muxes = {-1};
  const double L_fixed = rp.protocol.L_total();

  std::vector<SweepPoint> pts;
  for (double v : values)
    for (int n : ns)
      for (int mux : muxes) {
        const int n_eff = spec.variable == SweepVariable::n ? static_cast<int>(v) : n;
        if (spec.variable == SweepVariable::n && (v != std::floor(v) || v < 0))
          throw ValidationError("sweep: n values must be non-negative integers");
        if (spec.variable == SweepVariable::m_mux && (v != std::floor(v) || v < 1))
          throw ValidationError("sweep: m_mux values must be integers >= 1");
        ProtocolParams p = rp.protocol_for(n_eff);
        p.m_mux = spec.variable == SweepVariable::m_mux ? static_cast<int>(v) : mux;
        switch (spec.variable) {
          case SweepVariable::L_total:
            p.L0 = std::ldexp(v, -n_eff);
            break;
          case SweepVariable::n:
            p.L0 = std::ldexp(L_fixed, -n_eff);
            break;
          case SweepVariable::m_mux:
            break;
          case SweepVariable::eta_d:
            p.eta_d = v;
            break;
          case SweepVariable::eta_c:
            p.eta_c = v;
            break;
          case SweepVariable::L0:
            p.L0 = v;
            break;
        }
        validate(p);
        pts.push_back({v, p});
      }
  return pts;
}

inline int cmd_rate_sweep(const ResolvedProfile& rp, const SweepSpec& spec, std::ostream& out,
                          TableFormat fmt = TableFormat::Csv) {
  TableWriter w(out, fmt);
  std::vector<std::string> header{"L_km", "n", "m_mux", "rate_hz", "T_tot_s", "F_tot"};
  if (spec.direct) header.emplace_back("direct_hz");
  header.emplace_back("status");
  w.row(header);
  for (const auto& pt : expand_sweep(rp, spec)) {
    const auto& p = pt.protocol;
    std::vector<std::string> row{format_double(p.L_total()), std::to_string(p.n), std::to_string(p.m_mux)};
    try {
      const double T = total_time(p);
      row.push_back(format_double(p.m_mux / T));
      row.push_back(format_double(T));
      row.push_back(format_double(overall_fidelity(p)));
      if (spec.direct) row.push_back(format_double(direct_transmission_rate(p.L_total(), rp.R_src, p.L_att)));
      row.emplace_back("ok");
    } catch (const InfeasibleError&) {
      row.insert(row.end(), {"", "", format_double(overall_fidelity(p))});
      if (spec.direct) row.push_back(format_double(direct_transmission_rate(p.L_total(), rp.R_src, p.L_att)));
      row.emplace_back("infeasible");
    }
    w.row(row);
  }
  return kExitOk;
}

inline int cmd_fidelity_sweep(const ResolvedProfile& rp, const SweepSpec& spec, std::ostream& out,
                              TableFormat fmt = TableFormat::Csv) {
  TableWriter w(out, fmt);
  w.row({"L_km", "n", "F_tot"});
  SweepSpec s = spec;
  s.mux_values = {rp.protocol.m_mux};  // fidelity does not depend on multiplexing
  for (const auto& pt : expand_sweep(rp, s)) {
    const auto& p = pt.protocol;
    w.row({format_double(p.L_total()), std::to_string(p.n), format_double(overall_fidelity(p))});
  }
  return kExitOk;
}

// ---------------------------------------------------------------- memory-sim

enum class MemoryMode { Stage2, Storage, Retrieval, Phase1 };

inline MemoryMode parse_memory_mode(const std::string& s) {
  if (s == "stage2") return MemoryMode::Stage2;
  if (s == "storage") return MemoryMode::Storage;
  if (s == "retrieval") return MemoryMode::Retrieval;
  if (s == "phase1") return MemoryMode::Phase1;
  throw ValidationError("memory-sim: unknown mode '" + s + "' (stage2, storage, retrieval, phase1)");
}

struct MemorySimSpec {
  MemoryMode mode = MemoryMode::Stage2;
  double omega = 5e8;      // control Rabi frequency, s^-1
  double duration = 0.0;   // optical stage / readout length; 0 = ten readout time constants
  double photons = 1.0;    // input photon number (storage)
  std::size_t samples = 200;
  double rtol = 1e-8;
  double atol = 1e-12;
};

inline void write_trajectory(const MemoryTrajectory& tr, std::ostream& out, TableFormat fmt) {
  TableWriter w(out, fmt);
  w.row({"t_s", "re_s", "im_s", "re_a", "im_a", "re_b", "im_b", "re_k", "im_k"});
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    const auto& st = tr.states[i];
    w.row({format_double(tr.t[i]), format_double(st.s.real()), format_double(st.s.imag()),
           format_double(st.a.real()), format_double(st.a.imag()), format_double(st.b.real()),
           format_double(st.b.imag()), format_double(st.k.real()), format_double(st.k.imag())});
  }
}

/// Writes the trajectory to `out` and an efficiency summary to `summary`.
inline int cmd_memory_sim(const ResolvedProfile& rp, const MemorySimSpec& spec, std::ostream& out,
                          std::ostream& summary, TableFormat fmt = TableFormat::Csv) {
  const auto& m = rp.memory;
  const auto& c = rp.cavity;
  TimeGrid grid;
  grid.samples_per_segment = spec.samples;
  grid.tol.rtol = spec.rtol;
  grid.tol.atol = spec.atol;
  const MemoryModel mm(m, c);
  double T = spec.duration;
  if (!(T > 0.0)) {
    const double rate = mm.adiabatic_spin_decay(spec.omega);
    if (!(rate > 0.0)) throw ValidationError("memory-sim: control gives no readout, set --duration");
    T = 10.0 / rate;
  }
  ControlPulse pulse;
  pulse.amplitude = spec.omega;
  pulse.t_on = 0.0;
  pulse.t_off = T;
  auto rel = [](double num, double ref) { return ref != 0.0 ? num / ref - 1.0 : num; };
  auto line = [&](const std::string& k, double v) { summary << k << " = " << format_sig(v, 9) << '\n'; };

  MemoryTrajectory traj;
  switch (spec.mode) {
    case MemoryMode::Stage2: {
      StorageOptions o;
      o.skip_optical_stage = true;
      o.initial.b = 1.0;
      o.grid = grid;
      auto r = simulate_storage(m, c, pulse, InputSignal{}, o);
      line("eta2_num", r.eta2_num);
      line("eta2_closed", rp.efficiency.eta2);
      line("eta2_rel_error", rel(r.eta2_num, rp.efficiency.eta2));
      line("k2_final", std::norm(r.trajectory.final_state().k));
      traj = std::move(r.trajectory);
      break;
    }
    case MemoryMode::Storage: {
      InputSignal in;
      in.shape = EnvelopeShape::RisingExponential;
      in.rate = mm.adiabatic_spin_decay(spec.omega);
      in.t_begin = 0.0;
      in.t_end = T;
      in.photons = spec.photons;
      StorageOptions o;
      o.grid = grid;
      auto r = simulate_storage(m, c, pulse, in, o);
      line("eta1_num", r.eta1_num);
      line("eta1_closed_bound", rp.efficiency.eta1);
      line("eta2_num", r.eta2_num);
      line("eta2_closed", rp.efficiency.eta2);
      line("eta2_rel_error", rel(r.eta2_num, rp.efficiency.eta2));
      line("eta_s_num", r.eta_s_num);
      line("eta_s_closed", rp.efficiency.eta_s);
      if (!in.short_pulse(m.gamma_s)) summary << "warning: pulse duration not << 1/gamma_s\n";
      traj = std::move(r.trajectory);
      break;
    }
    case MemoryMode::Retrieval:
    case MemoryMode::Phase1: {
      RetrievalOptions o;
      o.grid = grid;
      o.phase1_only = spec.mode == MemoryMode::Phase1;
      o.readout_duration = T;
      auto r = simulate_retrieval(m, c, pulse, o);
      line("transfer_num", r.transfer);
      line("transfer_closed", rp.efficiency.eta2);
      line("transfer_rel_error", rel(r.transfer, rp.efficiency.eta2));
      if (!o.phase1_only) {
        line("eta_r_num", r.eta_r_num);
        line("eta_r_closed", rp.protocol.eta_r);
        line("anti_stokes_emitted", r.emitted_anti_stokes);
      }
      traj = std::move(r.trajectory);
      break;
    }
  }
  line("error_estimate", traj.accounting.error_estimate);
  summary << "steps_accepted = " << traj.accounting.steps_accepted << '\n';
  write_trajectory(traj, out, fmt);
  return kExitOk;
}

// ---------------------------------------------------------------- mc-validate

struct McSpec {
  std::vector<int> n_values{1, 2};
  std::vector<double> L_values{200.0, 400.0};
  std::uint64_t trials = 100000;
  std::uint64_t seed = 20240611;
  bool unit_probabilities = false;
};

/// Grid configurations. Charging stays at the profile's operating point for
/// every n so that n without a tabulated entry can be simulated.
inline std::vector<SimConfig> mc_grid(const ResolvedProfile& rp, const McSpec& spec) {
  if (spec.trials < 1) throw ValidationError("mc-validate: trials must be >= 1");
  std::vector<SimConfig> grid;
  std::vector<int> ns = spec.n_values;
  std::vector<double> Ls = spec.L_values;
  std::sort(ns.begin(), ns.end());
  std::sort(Ls.begin(), Ls.end());
  for (int n : ns)
    for (double L : Ls) {
      if (n < 0) throw ValidationError("mc-validate: n must be >= 0");
      if (!(L > 0.0)) throw ValidationError("mc-validate: L must be positive");
      SimConfig cfg;
      cfg.protocol = rp.protocol_for(n, true);
      cfg.protocol.L0 = std::ldexp(L, -n);
      cfg.trials = spec.trials;
      cfg.seed = spec.seed;
      if (spec.unit_probabilities) {
        cfg.override_probabilities.eta_gen = 1.0;
        cfg.override_probabilities.swap = std::vector<double>(static_cast<std::size_t>(n), 1.0);
        cfg.override_probabilities.postselection = 1.0;
      }
      grid.push_back(cfg);
    }
  return grid;
}

inline int cmd_mc_validate(const ResolvedProfile& rp, const McSpec& spec, std::ostream& out,
                           std::ostream& diag, TableFormat fmt = TableFormat::Csv) {
  const auto report = validate_formula(mc_grid(rp, spec));
  TableWriter w(out, fmt);
  w.row({"n", "L_km", "trials", "seed", "mean_s", "stderr_s", "p50_s", "p90_s", "p99_s", "analytic_s",
         "ratio"});
  for (const auto& row : report.rows) {
    const auto& r = row.result;
    w.row({std::to_string(row.n), format_double(row.L_km), std::to_string(r.trials), std::to_string(r.seed),
           format_double(r.mean), format_double(r.stderr_mean), format_double(r.p50), format_double(r.p90),
           format_double(r.p99), format_double(r.analytic), format_double(r.ratio)});
    diag << "n=" << row.n << " L=" << format_double(row.L_km) << " km: ratio " << format_sig(r.ratio, 4)
         << " (95% CI " << format_sig(row.ci_low, 4) << ".." << format_sig(row.ci_high, 4) << "), max idle "
         << format_sig(r.max_idle, 4) << " s, gamma_k * max idle "
         << format_sig(rp.memory.gamma_k * r.max_idle, 4) << (row.flagged ? "  OUTSIDE [0.5, 2]" : "")
         << '\n';
  }
  diag << "rng " << kRngAlgorithm << '\n';
  return report.all_within_band() ? kExitOk : kExitMcFailure;
}

// ---------------------------------------------------------------- overlay

/// Internal rate curves merged with externally supplied comparison curves.
/// External schema: header with L_km, label and one of rate_hz / fidelity.
inline int cmd_overlay(const ResolvedProfile& rp, const SweepSpec& spec, std::istream& external,
                       const std::string& ext_name, std::ostream& out, TableFormat fmt = TableFormat::Csv) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& pt : expand_sweep(rp, spec)) {
    const auto& p = pt.protocol;
    std::string label = "n" + std::to_string(p.n);
    if (p.m_mux != 1) label += "_m" + std::to_string(p.m_mux);
    try {
      rows.push_back({format_double(p.L_total()), format_double(repeater_rate(p)), "rate_hz", label});
    } catch (const InfeasibleError&) {
      // no rate to plot at this point
    }
  }
  if (spec.direct) {
    std::vector<double> Ls;
    for (const auto& pt : expand_sweep(rp, spec)) Ls.push_back(pt.protocol.L_total());
    std::sort(Ls.begin(), Ls.end());
    Ls.erase(std::unique(Ls.begin(), Ls.end()), Ls.end());
    for (double L : Ls)
      rows.push_back({format_double(L), format_double(direct_transmission_rate(L, rp.R_src, rp.protocol.L_att)),
                      "rate_hz", "direct"});
  }

  std::string line;
  if (!std::getline(external, line)) throw ValidationError("overlay: " + ext_name + ": empty file, header expected");
  const char sep = line.find('\t') != std::string::npos ? '\t' : ',';
  const auto header = split_line(line, sep);
  auto col = [&](const std::string& name) -> int {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };
  const int c_L = col("L_km");
  const int c_label = col("label");
  const int c_rate = col("rate_hz");
  const int c_fid = col("fidelity");
  if (c_L < 0) throw ValidationError("overlay: " + ext_name + ": column 'L_km' missing");
  if (c_label < 0) throw ValidationError("overlay: " + ext_name + ": column 'label' missing");
  if ((c_rate < 0) == (c_fid < 0))
    throw ValidationError("overlay: " + ext_name + ": need exactly one of columns 'rate_hz', 'fidelity'");
  const int c_val = c_rate >= 0 ? c_rate : c_fid;
  const std::string quantity = c_rate >= 0 ? "rate_hz" : "fidelity";
  int row_no = 1;
  while (std::getline(external, line)) {
    ++row_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_line(line, sep);
    const std::string where = "overlay: " + ext_name + ": row " + std::to_string(row_no);
    if (cells.size() != header.size())
      throw ValidationError(where + ": expected " + std::to_string(header.size()) + " fields, got " +
                            std::to_string(cells.size()));
    const double L = parse_double(cells[static_cast<std::size_t>(c_L)], where + ": column 'L_km'");
    const double v = parse_double(cells[static_cast<std::size_t>(c_val)], where + ": column '" + quantity + "'");
    rows.push_back({format_double(L), format_double(v), quantity, cells[static_cast<std::size_t>(c_label)]});
  }

  TableWriter w(out, fmt);
  w.row({"L_km", "value", "quantity", "label"});
  for (const auto& r : rows) w.row(r);
  return kExitOk;
}

// ---------------------------------------------------------------- errors

/// Runs `fn`, mapping library exceptions to exit codes with a message on `err`.
template <class Fn>
int run_guarded(Fn&& fn, std::ostream& err = std::cerr) {
  try {
    return fn();
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const IntegrationError& e) {
    err << "integration failed: " << e.what() << '\n';
    return kExitValidation;
  }
}

}  // namespace hotrep
