#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "hotrep/protocol.hpp"
#include "test_util.hpp"

using namespace hotrep;
using testutil::fig4_protocol;
using testutil::rel;

TEST(Epsilon0, Values) {
  ProtocolParams p;
  EXPECT_NEAR(1.0 - epsilon0(p), 1.25e-6, 1e-12);
  EXPECT_LT(rel(1.0 - epsilon0(p), fixtures::one_minus_eps0), 1e-9);
  p.lambda_dark = 0.0;
  EXPECT_EQ(epsilon0(p), 1.0);
  p.lambda_dark = std::log(2.0) / p.T_d;
  EXPECT_NEAR(epsilon0(p), 0.5, 1e-15);
}

TEST(Transmission, Values) {
  ProtocolParams p;
  p.L0 = 0.0;
  EXPECT_EQ(transmission(p), 1.0);
  p.L0 = 44.0;
  EXPECT_DOUBLE_EQ(transmission(p), std::exp(-1.0));
  p.L0 = 100.0;
  EXPECT_LT(rel(transmission(p), fixtures::eta_t_100), 1e-14);
}

TEST(Generation, DefaultsAt100km) {
  const auto g = generation_fidelity_efficiency(fig4_protocol());
  EXPECT_LT(rel(g.F_gen, fixtures::F_gen_100), 1e-12);
  EXPECT_LT(rel(g.eta_gen, fixtures::eta_gen_100), 1e-12);
  EXPECT_NEAR(g.F_gen, 0.79877, 1e-5);
  EXPECT_NEAR(g.eta_gen, 0.0140569, 1e-6);
}

TEST(Generation, Limits) {
  auto p = fig4_protocol();
  p.lambda_dark = 0.0;
  p.L0 = 2000.0;  // eta_t ~ 1e-20
  const auto g = generation_fidelity_efficiency(p);
  EXPECT_NEAR(g.F_gen, 0.84 * fixtures::eta_s, 1e-12);
  EXPECT_NEAR(g.F_gen, 0.78832, 2e-5);

  ProtocolParams ideal;
  ideal.eta_s = 1.0;
  ideal.lambda_dark = 0.0;
  ideal.L0 = 1e-12;
  ideal.eta_c = ideal.eta_d = 1.0;
  ideal.alpha2 = 1.0 - 1e-9;
  ideal.beta2 = 1e-9;
  EXPECT_NEAR(generation_fidelity_efficiency(ideal).F_gen, 1.0, 1e-6);
}

TEST(Generation, VanishingHeraldIsInfeasible) {
  auto p = fig4_protocol();
  p.lambda_dark = 0.0;
  p.L0 = 1e6;  // eta_t underflows to 0
  EXPECT_THROW(generation_fidelity_efficiency(p), InfeasibleError);
}

TEST(Generation, ApproximateFormsAgreeWhereClaimed) {
  // Relative deviation of the approximate forms is ~ beta^2 eta_t eta_c plus a
  // dark-count term; it stays within 2% from 83 km upward and follows that law below.
  auto p = fig4_protocol();
  for (double L0 = 25.0; L0 <= 100.0; L0 += 0.5) {
    p.L0 = L0;
    const auto g = generation_fidelity_efficiency(p);
    const double dev_F = g.F_gen / g.F_gen_approx - 1.0;
    const double dev_eta = g.eta_gen / g.eta_gen_approx - 1.0;
    const double law = p.beta2 * transmission(p) * p.eta_c;
    EXPECT_NEAR(dev_F, law / (1.0 - law), 2e-4) << L0;
    EXPECT_NEAR(dev_eta, -law, 2e-4) << L0;
    if (L0 >= 83.0) {
      EXPECT_LT(std::abs(dev_F), 0.02) << L0;
      EXPECT_LT(std::abs(dev_eta), 0.02) << L0;
    }
  }
}

TEST(LinkState, Weights) {
  auto p = fig4_protocol();
  auto s = link_state(p);
  EXPECT_NEAR(s.w_ent, fixtures::w_ent, 1e-14);
  EXPECT_NEAR(s.w_vac, fixtures::w_vac, 1e-14);
  p.eta_s = 1.0;
  s = link_state(p);
  EXPECT_DOUBLE_EQ(s.w_ent, 0.84);
  EXPECT_DOUBLE_EQ(s.w_vac, 0.16);
  p.alpha2 = 0.0;
  p.beta2 = 1.0;
  s = link_state(p);
  EXPECT_EQ(s.w_ent, 0.0);
  EXPECT_EQ(s.w_vac, 1.0);
}

TEST(Swap, Probabilities) {
  const auto p = fig4_protocol();
  EXPECT_LT(rel(success_parameter(p), fixtures::q), 1e-14);
  EXPECT_LT(rel(swap_probability(1, p), fixtures::P1), 1e-13);
  EXPECT_LT(rel(swap_probability(2, p), fixtures::P2), 1e-13);
  EXPECT_LT(rel(swap_probability(3, fixtures::q), fixtures::P3), 1e-13);
  for (int i = 1; i <= 10; ++i) EXPECT_DOUBLE_EQ(swap_probability(i, 1.0), 0.5);
  EXPECT_THROW(swap_probability(0, 0.5), ValidationError);
  EXPECT_THROW(swap_probability(3, p), ValidationError);  // n = 2
}

TEST(PostSelection, Probabilities) {
  EXPECT_LT(rel(postselection_probability(2, fixtures::q), fixtures::Pps2), 1e-13);
  EXPECT_LT(rel(postselection_probability(1, fixtures::q), fixtures::Pps1), 1e-13);
  for (int n = 0; n <= 8; ++n) EXPECT_DOUBLE_EQ(postselection_probability(n, 1.0), 0.5);
  const double q = 1e-9;
  for (int n = 0; n <= 5; ++n)
    EXPECT_LT(rel(postselection_probability(n, q), q / 2 * std::ldexp(1.0, -2 * n)), 1e-8);
}

TEST(Charging, TabulatedOperatingPoints) {
  ProtocolParams p;
  const auto c2 = charging_model(0.9, 2, p);
  EXPECT_NEAR(c2.p_charge, 0.0021, 0.0001);
  EXPECT_NEAR(c2.t_ch, 0.048e-3, 0.001e-3);
  EXPECT_LT(rel(c2.p_charge, fixtures::p_charge_n2), 1e-14);
  const auto c3 = charging_model(0.9, 3, p);
  EXPECT_NEAR(c3.t_ch, 1.03e-3, 0.01e-3);
  EXPECT_LT(rel(c3.t_ch, fixtures::t_ch_n3), 1e-14);
}

TEST(Charging, OverridesAndErrors) {
  ProtocolParams p;
  EXPECT_THROW(charging_model(0.95, 2, p), ValidationError);
  try {
    charging_model(0.9, 1, p);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("supply p2_max or p"), std::string::npos);
  }
  ChargingOverride o;
  o.p_charge = 0.01;
  EXPECT_DOUBLE_EQ(charging_model(0.9, 1, p, o).t_ch, 1.0 / (1e7 * 0.01));
  p.eta_st = 1.0;
  EXPECT_EQ(charging_model(0.9, 1, p, o).p2_max, 0.0);
}

TEST(TotalTime, FigureRegression) {
  const auto p = [] {
    auto q = fig4_protocol();
    q.L0 = 100.0;
    return q;
  }();
  EXPECT_LT(rel(total_time(p), fixtures::T_tot_fig_n2_400), 1e-12);
  EXPECT_LT(rel(repeater_rate(p), fixtures::rate_fig_n2_400), 1e-12);
  auto mux = p;
  mux.m_mux = 100;
  EXPECT_EQ(repeater_rate(mux), 100.0 * repeater_rate(p));

  auto p3 = fig4_protocol(3);
  EXPECT_LT(rel(repeater_rate_at(p3, 400.0), fixtures::rate_fig_n3_400), 1e-12);
  EXPECT_LT(rel(repeater_rate_at(p, 100.0), fixtures::rate_fig_n2_100), 1e-12);
  EXPECT_LT(rel(repeater_rate_at(p, 200.0), fixtures::rate_fig_n2_200), 1e-12);
  EXPECT_LT(rel(repeater_rate_at(p, 600.0), fixtures::rate_fig_n2_600), 1e-12);
  EXPECT_LT(rel(repeater_rate_at(p, 800.0), fixtures::rate_fig_n2_800), 1e-12);
}

TEST(TotalTime, UnitEfficiencyLimit) {
  ProtocolParams p;
  p.eta_s = p.eta_r = p.eta_d = p.eta_c = p.p1 = 1.0;
  p.alpha2 = 1.0 - 1e-15;
  p.beta2 = 1e-15;
  p.t_trans = 0.0;
  p.p_charge = 1.0;
  p.R = 1e300;  // t_ch -> 0
  for (int n = 0; n <= 3; ++n) {
    p.n = n;
    const double L0_over_c = p.L0 * 1e3 / p.c_fiber;
    const double expected = std::pow(3.0, n + 1) / 2.0 * L0_over_c / (transmission(p) * p.beta2);
    EXPECT_LT(rel(total_time(p), expected), 1e-12) << n;
  }
}

TEST(TotalTime, ZeroEfficiencyIsInfeasible) {
  auto p = fig4_protocol();
  p.eta_d = 0.0;
  EXPECT_THROW(total_time(p), InfeasibleError);
}

TEST(Fidelity, Overall) {
  auto p = fig4_protocol(2);
  EXPECT_NEAR(overall_fidelity(p), 0.851, 0.001);
  EXPECT_LT(rel(overall_fidelity(p), fixtures::F_tot_n2), 1e-14);
  p.n = 3;
  EXPECT_NEAR(overall_fidelity(p), 0.8387, 0.001);
  p.F_re = 1.0;
  EXPECT_EQ(overall_fidelity(p), p.F_targ);
}

TEST(Direct, Rates) {
  EXPECT_EQ(direct_transmission_rate(0.0, 1e10), 1e10);
  EXPECT_DOUBLE_EQ(direct_transmission_rate(22.0, 1e10), 1e10 * std::exp(-1.0));
  EXPECT_LT(rel(direct_transmission_rate(600.0, 1e10), fixtures::direct_600), 1e-13);
}

TEST(DarkCounts, Diagnostic) {
  auto p = fig4_protocol();
  p.L0 = 100.0;
  EXPECT_LT(rel(dark_count_diagnostic(p).generation_ratio, fixtures::dark_ratio_100), 1e-9);
  EXPECT_LE(dark_count_diagnostic(p).generation_ratio, 1.2e-4);
  for (double L0 = 1.0; L0 <= 95.0; L0 += 1.0) {
    p.L0 = L0;
    EXPECT_LE(dark_count_diagnostic(p).generation_ratio, 1e-4) << L0;
  }
  EXPECT_NEAR(dark_count_diagnostic(p).readout_click, 1.25e-6, 1e-12);
}

TEST(Crossover, Regression) {
  auto p = fig4_protocol();
  const double L = crossover_distance(p, 1e10);
  EXPECT_GT(L, fixtures::crossover_fig_n2);
  EXPECT_LE(L, fixtures::crossover_fig_n2 + 1.0);
  p.m_mux = 100;
  const double Lm = crossover_distance(p, 1e10);
  EXPECT_GT(Lm, fixtures::crossover_fig_n2_mux100);
  EXPECT_LE(Lm, fixtures::crossover_fig_n2_mux100 + 1.0);
  auto p3 = fig4_protocol(3);
  const double L3 = crossover_distance(p3, 1e10);
  EXPECT_GT(L3, fixtures::crossover_fig_n3);
  EXPECT_LE(L3, fixtures::crossover_fig_n3 + 1.0);
}

TEST(Crossover, EdgeCases) {
  EXPECT_EQ(crossover_distance([](double) { return 1e20; }, 1e10, 22.0, 1.0, 800.0), 1.0);
  EXPECT_THROW(crossover_distance([](double) { return 0.0; }, 1e10, 22.0, 1.0, 800.0), InfeasibleError);
  auto p = fig4_protocol();
  p.eta_d = 0.0;
  EXPECT_THROW(crossover_distance(p, 1e10), InfeasibleError);
}

TEST(Validation, AlphaBetaMustSumToOne) {
  auto p = fig4_protocol();
  p.alpha2 = 0.8;
  EXPECT_THROW(validate(p), ValidationError);
  p.alpha2 = 0.84;
  EXPECT_NO_THROW(validate(p));
  p.eta_d = 1.5;
  EXPECT_THROW(validate(p), ValidationError);
}

// ---------------------------------------------------------------- properties

namespace {
ProtocolParams random_protocol(std::mt19937_64& g) {
  ProtocolParams p;
  p.alpha2 = testutil::uniform(g, 0.01, 0.99);
  p.beta2 = 1.0 - p.alpha2;
  p.eta_d = testutil::uniform(g, 0.05, 1.0);
  p.eta_c = testutil::uniform(g, 0.05, 1.0);
  p.eta_s = testutil::uniform(g, 0.05, 1.0);
  p.eta_r = testutil::uniform(g, 0.05, 1.0);
  p.p1 = testutil::uniform(g, 0.05, 1.0);
  p.L0 = testutil::uniform(g, 1.0, 200.0);
  p.lambda_dark = testutil::log_uniform(g, 1.0, 1e4);
  p.t_trans = testutil::uniform(g, 0.0, 5e-3);
  p.p_charge = testutil::log_uniform(g, 1e-5, 1e-1);
  p.n = static_cast<int>(g() % 5);
  p.F_re = testutil::uniform(g, 0.5, 1.0);
  return p;
}
}  // namespace

TEST(ProtocolProperties, FirstLevelSwapMatchesTwoPhotonForm) {
  std::mt19937_64 g(11);
  for (int i = 0; i < testutil::kDraws; ++i) {
    const double q = testutil::uniform(g, 0.0, 1.0);
    if (q == 0.0) continue;
    ASSERT_NEAR(swap_probability(1, q), first_swap_probability(q), 1e-12);
  }
  EXPECT_NEAR(swap_probability(1, 1.0), first_swap_probability(1.0), 1e-12);
}

TEST(ProtocolProperties, ProbabilitiesInUnitInterval) {
  std::mt19937_64 g(12);
  for (int i = 0; i < testutil::kDraws; ++i) {
    const auto p = random_protocol(g);
    const double q = success_parameter(p);
    ASSERT_GE(q, 0.0);
    ASSERT_LE(q, 1.0);
    for (int lvl = 1; lvl <= 8; ++lvl) {
      const double P = swap_probability(lvl, q);
      ASSERT_GE(P, 0.0);
      ASSERT_LE(P, 1.0);
    }
    const double Pps = postselection_probability(p.n, q);
    ASSERT_GE(Pps, 0.0);
    ASSERT_LE(Pps, 1.0);
    Generation gen{};
    try {
      gen = generation_fidelity_efficiency(p);
    } catch (const InfeasibleError&) {
      continue;
    }
    ASSERT_GE(gen.F_gen, 0.0);
    ASSERT_LE(gen.F_gen, 1.0);
    ASSERT_GE(gen.eta_gen, 0.0);
    ASSERT_LE(gen.eta_gen, 1.0);
    const auto s = link_state(p);
    ASSERT_NEAR(s.w_ent + s.w_vac, 1.0, 1e-12);
  }
}

TEST(ProtocolProperties, AlphaBetaEnforced) {
  std::mt19937_64 g(13);
  for (int i = 0; i < testutil::kDraws; ++i) {
    auto p = random_protocol(g);
    ASSERT_NO_THROW(validate(p));
    p.beta2 += testutil::uniform(g, 1e-9, 0.1) * (g() % 2 ? 1.0 : -1.0);
    ASSERT_THROW(validate(p), ValidationError);
  }
}

TEST(ProtocolProperties, TotalTimeMonotonicity) {
  std::mt19937_64 g(14);
  for (int i = 0; i < testutil::kDraws; ++i) {
    const auto p = random_protocol(g);
    const double T = total_time(p);
    ASSERT_TRUE(std::isfinite(T) && T > 0.0);
    const double k = testutil::uniform(g, 1.01, 1.5);
    auto improve = [&](double ProtocolParams::*field) {
      auto up = p;
      up.*field = std::min(1.0, up.*field * k);
      if (up.*field == p.*field) return;
      ASSERT_LT(total_time(up), T);
    };
    improve(&ProtocolParams::eta_d);
    improve(&ProtocolParams::eta_c);
    improve(&ProtocolParams::eta_s);
    improve(&ProtocolParams::eta_r);
    improve(&ProtocolParams::p1);
    auto longer = p;
    longer.L0 *= k;
    ASSERT_GT(total_time(longer), T);
  }
}

TEST(ProtocolProperties, FidelityStructure) {
  std::mt19937_64 g(15);
  for (int i = 0; i < testutil::kDraws; ++i) {
    auto p = random_protocol(g);
    if (p.F_re >= 1.0) continue;
    const double F = overall_fidelity(p);
    auto other = p;
    other.L0 = testutil::uniform(g, 1.0, 400.0);
    other.m_mux = 1 + static_cast<int>(g() % 200);
    ASSERT_EQ(overall_fidelity(other), F);
    other = p;
    other.n = p.n + 1;
    ASSERT_LT(overall_fidelity(other), F);
  }
}

TEST(ProtocolProperties, MultiplexedRateAbove1mHzTo800km) {
  auto p = fig4_protocol();
  p.m_mux = 100;
  for (double L = 10.0; L <= 800.0; L += 10.0) EXPECT_GE(repeater_rate_at(p, L), 1e-3) << L;
}

TEST(ProtocolProperties, RateDecreasesWithDistance) {
  for (int n : {2, 3}) {
    auto p = fig4_protocol(n);
    double prev = repeater_rate_at(p, 50.0);
    for (double L = 60.0; L <= 800.0; L += 10.0) {
      const double r = repeater_rate_at(p, L);
      EXPECT_LT(r, prev) << n << " " << L;
      prev = r;
    }
  }
}
