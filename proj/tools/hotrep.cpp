// hotrep: memory and repeater performance calculator.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hotrep/commands.hpp"

namespace {

struct Globals {
  std::string profile = "paper-sec5";
  std::string out;
  std::uint64_t seed = 20240611;
  std::string format = "csv";
};

struct SweepArgs {
  std::string variable = "L_total";
  std::optional<double> min, max;
  int steps = 8;
  std::vector<double> values;
  std::vector<int> n;
  std::vector<int> mux;
  bool direct = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--var", variable, "Sweep variable: L_total, n, m_mux, eta_d, eta_c, L0");
    cmd->add_option("--min", min, "Range start (km for lengths)");
    cmd->add_option("--max", max, "Range end");
    cmd->add_option("--steps", steps, "Number of points, >= 2");
    cmd->add_option("--values", values, "Explicit list of values instead of a range")->delimiter(',');
    cmd->add_option("--n", n, "Nesting levels, comma separated")->delimiter(',');
    cmd->add_option("--mux", mux, "Multiplexing factors, comma separated")->delimiter(',');
  }

  hotrep::SweepSpec spec() const {
    hotrep::SweepSpec s;
    s.variable = hotrep::parse_sweep_variable(variable);
    if (!values.empty()) {
      s.values = values;
    } else {
      const bool L = s.variable == hotrep::SweepVariable::L_total;
      s.values = hotrep::linear_range(min.value_or(L ? 100.0 : 0.0), max.value_or(L ? 800.0 : 1.0), steps);
    }
    s.n_values = n;
    s.mux_values = mux;
    s.direct = direct;
    return s;
  }
};

hotrep::TableFormat table_format(const std::string& f) {
  if (f == "csv") return hotrep::TableFormat::Csv;
  if (f == "tsv") return hotrep::TableFormat::Tsv;
  throw hotrep::ValidationError("--format must be csv or tsv");
}

/// Output stream for --out, or stdout.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
    if (!*file_) throw hotrep::ValidationError("cannot open output file '" + path + "'");
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hotrep - hybrid-memory quantum repeater calculator"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--profile", g.profile, "Profile file or built-in name (paper-sec5, paper-fig4)");
  app.add_option("--out", g.out, "Output file (default stdout)");
  app.add_option("--seed", g.seed, "Monte Carlo seed");
  app.add_option("--format", g.format, "csv or tsv")->check(CLI::IsMember({"csv", "tsv"}));

  auto* params = app.add_subcommand("params", "Derived memory, cavity and protocol quantities");
  bool machine = false;
  params->add_flag("--machine", machine, "Delimited quantity,value,unit table");
  bool canonical = false;
  params->add_flag("--canonical", canonical, "Print the profile in canonical form instead");

  auto* rate = app.add_subcommand("rate-sweep", "Repeater rate versus a sweep variable");
  SweepArgs rate_args;
  rate_args.attach(rate);
  rate->add_flag("--direct", rate_args.direct, "Add the direct-transmission rate column");

  auto* fid = app.add_subcommand("fidelity-sweep", "Overall fidelity versus a sweep variable");
  SweepArgs fid_args;
  fid_args.attach(fid);

  auto* mem = app.add_subcommand("memory-sim", "Integrate the memory dynamics");
  std::string mode = "stage2";
  hotrep::MemorySimSpec mem_spec;
  mem->add_option("--mode", mode, "stage2, storage, retrieval or phase1");
  mem->add_option("--omega", mem_spec.omega, "Control Rabi frequency, s^-1");
  mem->add_option("--duration", mem_spec.duration, "Optical stage / readout length, s (0 = automatic)");
  mem->add_option("--photons", mem_spec.photons, "Input photon number for storage");
  mem->add_option("--samples", mem_spec.samples, "Output samples per protocol segment");
  mem->add_option("--rtol", mem_spec.rtol, "Relative tolerance");
  mem->add_option("--atol", mem_spec.atol, "Absolute tolerance");

  auto* mc = app.add_subcommand("mc-validate", "Monte Carlo check of the distribution-time formula");
  hotrep::McSpec mc_spec;
  mc->add_option("--n", mc_spec.n_values, "Nesting levels")->delimiter(',');
  mc->add_option("--L", mc_spec.L_values, "Total distances, km")->delimiter(',');
  mc->add_option("--trials", mc_spec.trials, "Trials per grid point");
  mc->add_flag("--unit-probabilities", mc_spec.unit_probabilities, "Force every success probability to 1");

  auto* overlay = app.add_subcommand("overlay", "Merge rate curves with external comparison curves");
  SweepArgs ov_args;
  ov_args.attach(overlay);
  overlay->add_flag("--direct", ov_args.direct, "Include the direct-transmission curve");
  std::string external;
  overlay->add_option("external", external, "CSV with L_km, rate_hz or fidelity, label")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return hotrep::kExitValidation;
  }

  return hotrep::run_guarded([&]() -> int {
    const auto fmt = table_format(g.format);
    if (params->parsed() && canonical) {
      const auto prof = hotrep::is_builtin_profile(g.profile)
                            ? hotrep::builtin_profile(g.profile)
                            : hotrep::load_profile(g.profile).source;
      Output out(g.out);
      out.stream() << hotrep::serialize_profile(prof);
      return hotrep::kExitOk;
    }
    const auto rp = hotrep::load_profile(g.profile);
    Output out(g.out);
    if (params->parsed()) return hotrep::cmd_params(rp, out.stream(), machine, fmt);
    if (rate->parsed()) return hotrep::cmd_rate_sweep(rp, rate_args.spec(), out.stream(), fmt);
    if (fid->parsed()) return hotrep::cmd_fidelity_sweep(rp, fid_args.spec(), out.stream(), fmt);
    if (mem->parsed()) {
      mem_spec.mode = hotrep::parse_memory_mode(mode);
      return hotrep::cmd_memory_sim(rp, mem_spec, out.stream(), std::cerr, fmt);
    }
    if (mc->parsed()) {
      mc_spec.seed = g.seed;
      return hotrep::cmd_mc_validate(rp, mc_spec, out.stream(), std::cerr, fmt);
    }
    if (overlay->parsed()) {
      std::ifstream in(external, std::ios::binary);
      if (!in) throw hotrep::ValidationError("overlay: cannot open '" + external + "'");
      return hotrep::cmd_overlay(rp, ov_args.spec(), in, external, out.stream(), fmt);
    }
    return hotrep::kExitValidation;
  });
}
