#pragma once

// Discrete-event Monte Carlo of the nested single-photon repeater.
//
// Time is counted in integer units of the attempt time T_att. Each chain is a
// binary tree of depth n: leaves are elementary links with geometric waiting
// times, an inner node at level i swaps once both children are ready (one
// extra unit) and on failure restarts both subtrees. Two chains run in
// parallel and are joined by post-selection, which restarts both chains on
// failure.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "hotrep/errors.hpp"
#include "hotrep/philox.hpp"
#include "hotrep/protocol.hpp"

namespace hotrep {

/// Probabilities used by the simulation. Absent fields are imported from the
/// protocol closed forms.
struct ProbabilityOverride {
  std::optional<double> eta_gen;
  std::optional<std::vector<double>> swap;  // P_1 .. P_n
  std::optional<double> postselection;
};

struct SimConfig {
  ProtocolParams protocol;
  std::uint64_t trials = 100000;
  std::uint64_t seed = 1;
  std::uint64_t attempt_cap = 1'000'000'000;  // elementary attempts per trial
  ProbabilityOverride override_probabilities;
};

struct SimProbabilities {
  double eta_gen = 0.0;
  std::vector<double> swap;
  double postselection = 0.0;
};

inline SimProbabilities resolve_probabilities(const SimConfig& cfg) {
  const auto& p = cfg.protocol;
  if (p.n < 0) throw ValidationError("montecarlo: n must be >= 0");
  SimProbabilities pr;
  const auto& o = cfg.override_probabilities;
  pr.eta_gen = o.eta_gen ? *o.eta_gen : generation_fidelity_efficiency(p).eta_gen;
  if (o.swap) {
    if (static_cast<int>(o.swap->size()) != p.n)
      throw ValidationError("montecarlo: need exactly n swap probabilities");
    pr.swap = *o.swap;
  } else {
    for (int i = 1; i <= p.n; ++i) pr.swap.push_back(swap_probability(i, p));
  }
  pr.postselection = o.postselection ? *o.postselection : postselection_probability(p.n, p);
  auto check = [](double v, const char* what) {
    if (!(v > 0.0 && v <= 1.0)) {
      std::ostringstream os;
      os << "montecarlo: " << what << " probability " << v << " outside (0,1]";
      throw ValidationError(os.str());
    }
  };
  check(pr.eta_gen, "generation");
  for (double v : pr.swap) check(v, "swap");
  check(pr.postselection, "post-selection");
  return pr;
}

struct SimResult {
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  double attempt_time = 0.0;  // s per unit
  double mean = 0.0;          // s
  double stderr_mean = 0.0;   // s
  double p50 = 0.0, p90 = 0.0, p99 = 0.0;
  double min_time = 0.0;
  double analytic = 0.0;  // closed-form T_tot for the same protocol
  double ratio = 0.0;     // mean / analytic
  double mean_attempts_per_link = 0.0;
  double max_idle = 0.0;  // s, longest time any finished link waited for its partner
  /// histogram[k] = trials with total time in [2^k, 2^{k+1}) units.
  std::vector<std::uint64_t> histogram;

  bool operator==(const SimResult&) const = default;
};

namespace detail {

class TrialRunner {
 public:
  TrialRunner(const SimConfig& cfg, const SimProbabilities& pr, std::uint64_t trial)
      : cfg_(cfg), pr_(pr), trial_(trial), n_(cfg.protocol.n),
        gen_scale_(pr.eta_gen >= 1.0 ? 0.0 : 1.0 / std::log1p(-pr.eta_gen)) {
    // Stream 0 is post-selection; chain c uses (c + 1) << 24 | heap index.
    for (std::uint32_t c = 0; c < 2; ++c)
      for (std::uint32_t h = 1; h < (2u << n_); ++h)
        streams_.emplace_back(cfg.seed, trial, ((c + 1) << 24) | h);
    streams_.emplace_back(cfg.seed, trial, 0u);
  }

  /// Completion time of the trial in units of T_att.
  std::uint64_t run() {
    std::uint64_t start = 0;
    PhiloxStream& ps = streams_.back();
    for (;;) {
      const std::uint64_t t0 = node(0, 1, n_, start);
      const std::uint64_t t1 = node(1, 1, n_, start);
      note_idle(t0, t1);
      const std::uint64_t t = std::max(t0, t1) + 1;
      if (ps.bernoulli(pr_.postselection)) return t;
      start = t;
    }
  }

  std::uint64_t attempts = 0;
  std::uint64_t links = 0;
  std::uint64_t max_idle = 0;

 private:
  const SimConfig& cfg_;
  const SimProbabilities& pr_;
  std::uint64_t trial_;
  int n_;
  double gen_scale_;
  std::vector<PhiloxStream> streams_;

  PhiloxStream& stream(int chain, std::uint32_t heap) {
    return streams_[static_cast<std::size_t>(chain) * ((2u << n_) - 1) + heap - 1];
  }

  void note_idle(std::uint64_t a, std::uint64_t b) { max_idle = std::max(max_idle, a > b ? a - b : b - a); }

  /// Elementary link: attempts until the first heralded success.
  std::uint64_t leaf(PhiloxStream& rng, std::uint64_t start) {
    const std::uint64_t k = rng.geometric_scaled(gen_scale_);
    if (k > cfg_.attempt_cap || attempts + k > cfg_.attempt_cap) [[unlikely]] {
      std::ostringstream os;
      os << "montecarlo: trial " << trial_ << " exceeded the attempt cap of " << cfg_.attempt_cap;
      throw InfeasibleError(os.str());
    }
    attempts += k;
    ++links;
    return start + k;
  }

  std::uint64_t node(int chain, std::uint32_t heap, int level, std::uint64_t start) {
    PhiloxStream& rng = stream(chain, heap);
    if (level == 0) return leaf(rng, start);
    const double p_swap = pr_.swap[static_cast<std::size_t>(level - 1)];
    if (level == 1) {
      PhiloxStream& left = stream(chain, 2 * heap);
      PhiloxStream& right = stream(chain, 2 * heap + 1);
      for (;;) {
        const std::uint64_t tl = leaf(left, start);
        const std::uint64_t tr = leaf(right, start);
        note_idle(tl, tr);
        const std::uint64_t t = std::max(tl, tr) + 1;
        if (rng.bernoulli(p_swap)) return t;
        start = t;
      }
    }
    for (;;) {
      const std::uint64_t tl = node(chain, 2 * heap, level - 1, start);
      const std::uint64_t tr = node(chain, 2 * heap + 1, level - 1, start);
      note_idle(tl, tr);
      const std::uint64_t t = std::max(tl, tr) + 1;
      if (rng.bernoulli(p_swap)) return t;
      start = t;
    }
  }
};

inline double nearest_rank(const std::vector<std::uint64_t>& sorted, double q) {
  const auto n = sorted.size();
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return static_cast<double>(sorted[rank - 1]);
}

}  // namespace detail

/// Runs `cfg.trials` independent trials. Trial j draws only from substreams
/// keyed by (seed, j), so results do not depend on evaluation order.
inline SimResult simulate_chain(const SimConfig& cfg) {
  if (cfg.trials < 1) throw ValidationError("montecarlo: trials must be >= 1");
  validate(cfg.protocol);
  if (cfg.protocol.n > 20) throw ValidationError("montecarlo: n > 20 not supported");
  const SimProbabilities pr = resolve_probabilities(cfg);
  const double T_att = cfg.protocol.attempt_time();

  std::vector<std::uint64_t> units(cfg.trials);
  std::uint64_t attempts = 0;
  std::uint64_t links = 0;
  std::uint64_t max_idle = 0;
  for (std::uint64_t j = 0; j < cfg.trials; ++j) {
    detail::TrialRunner runner(cfg, pr, j);
    units[j] = runner.run();
    attempts += runner.attempts;
    links += runner.links;
    max_idle = std::max(max_idle, runner.max_idle);
  }

  SimResult r;
  r.trials = cfg.trials;
  r.seed = cfg.seed;
  r.attempt_time = T_att;
  double sum = 0.0;
  for (auto u : units) sum += static_cast<double>(u);
  const double mean_units = sum / static_cast<double>(cfg.trials);
  double ss = 0.0;
  for (auto u : units) {
    const double dv = static_cast<double>(u) - mean_units;
    ss += dv * dv;
  }
  r.mean = mean_units * T_att;
  if (cfg.trials >= 2) {
    const double var = ss / static_cast<double>(cfg.trials - 1);
    r.stderr_mean = std::sqrt(var / static_cast<double>(cfg.trials)) * T_att;
  }
  for (auto u : units) {
    const auto bin = static_cast<std::size_t>(std::bit_width(u) - 1);
    if (r.histogram.size() <= bin) r.histogram.resize(bin + 1, 0);
    ++r.histogram[bin];
  }
  std::sort(units.begin(), units.end());
  r.p50 = detail::nearest_rank(units, 0.50) * T_att;
  r.p90 = detail::nearest_rank(units, 0.90) * T_att;
  r.p99 = detail::nearest_rank(units, 0.99) * T_att;
  r.min_time = static_cast<double>(units.front()) * T_att;
  r.mean_attempts_per_link = static_cast<double>(attempts) / static_cast<double>(links);
  r.max_idle = static_cast<double>(max_idle) * T_att;
  try {
    r.analytic = total_time(cfg.protocol);
    r.ratio = r.mean / r.analytic;
  } catch (const InfeasibleError&) {
    r.analytic = std::numeric_limits<double>::infinity();
    r.ratio = 0.0;
  }
  return r;
}

struct ValidationRow {
  int n;
  double L_km;  // total distance
  SimResult result;
  double ci_low, ci_high;  // 95% interval on the ratio
  bool compared;           // probabilities imported, ratio is checked
  bool flagged;            // compared and ratio outside [0.5, 2]
};

struct ValidationReport {
  std::vector<ValidationRow> rows;
  bool all_within_band() const {
    return std::none_of(rows.begin(), rows.end(), [](const auto& r) { return r.flagged; });
  }
};

/// Monte Carlo accuracy study of the closed-form T_tot over a grid of configs.
inline ValidationReport validate_formula(const std::vector<SimConfig>& grid) {
  ValidationReport rep;
  for (const auto& cfg : grid) {
    ValidationRow row;
    row.n = cfg.protocol.n;
    row.L_km = cfg.protocol.L_total();
    row.result = simulate_chain(cfg);
    const double a = row.result.analytic;
    row.ci_low = (row.result.mean - 1.96 * row.result.stderr_mean) / a;
    row.ci_high = (row.result.mean + 1.96 * row.result.stderr_mean) / a;
    // The band only means something when the simulation uses the same
    // probabilities as the closed form.
    const auto& o = cfg.override_probabilities;
    row.compared = !(o.eta_gen || o.swap || o.postselection);
    row.flagged = row.compared && !(row.result.ratio >= 0.5 && row.result.ratio <= 2.0);
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace hotrep
