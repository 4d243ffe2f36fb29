#pragma once

// Reference values from tests/oracles/closed_forms.py (mpmath, 40 digits),
// rounded to 17 significant digits.

namespace fixtures {

// memory / cavity, paper-sec5 profile
inline constexpr double eta1 = 0.96464466094067262;
inline constexpr double eta2 = 0.97288529395147888;
inline constexpr double eta_s = 0.93848860451799096;
inline constexpr double alpha_s = 0.99750312239746012;
inline constexpr double r = 0.93170396899920525;
inline constexpr double mu_s = 0.92937761822681363;
inline constexpr double mu_s_exact = 0.92937767631146447;
inline constexpr double x = 0.037994449397183059;
inline constexpr double detuning_ratio = 0.99965935483090022;
inline constexpr double zeta1 = 9.8391770560784820;
inline constexpr double g2 = 0.028397565922920892;
inline constexpr double kappa_c = 2.6975241326157650e8;
inline constexpr double bandwidth = 8.0925723978472951e7;
inline constexpr double roundtrip_length = 0.16293068369565217;
inline constexpr double t_trans = 1.5707963267948966e-3;

// protocol
inline constexpr double one_minus_eps0 = 1.2499992187503255e-6;
inline constexpr double eta_t_100 = 0.10303080346176418;
inline constexpr double F_gen_100 = 0.79877559891109077;
inline constexpr double eta_gen_100 = 0.014056712715312487;
inline constexpr double dark_ratio_100 = 1.1146538157911761e-4;
inline constexpr double dark_ratio_95 = 9.9492045868017073e-5;
inline constexpr double w_ent = 0.78833042779511241;
inline constexpr double w_vac = 0.21166957220488759;
inline constexpr double q = 0.39951312646347317;
inline constexpr double P1 = 0.31970775735516362;
inline constexpr double P2 = 0.21846473702291955;
inline constexpr double P3 = 0.13244022295900745;
inline constexpr double Pps1 = 0.077982440808103516;
inline constexpr double Pps2 = 0.025452591847146671;
inline constexpr double p_charge_n2 = 0.0020666666666666667;
inline constexpr double t_ch_n2 = 4.8387096774193548e-5;
inline constexpr double t_ch_n3 = 1.0277492291880781e-3;
inline constexpr double F_tot_n2 = 0.85064855617440000;
inline constexpr double F_tot_n3 = 0.83873947638795840;

// distribution time, t_trans = 1.5 ms (paper-fig4)
inline constexpr double T_tot_fig_n2_400 = 683.41956879252481;
inline constexpr double rate_fig_n2_400 = 1.4632299771088116e-3;
inline constexpr double rate_fig_n2_100 = 9.8492438637944352e-3;
inline constexpr double rate_fig_n2_200 = 5.1922775601472628e-3;
inline constexpr double rate_fig_n2_600 = 4.1858628044391866e-4;
inline constexpr double rate_fig_n2_800 = 1.2117870597619733e-4;
inline constexpr double rate_fig_n3_400 = 8.6033967454987837e-5;
inline constexpr double crossover_fig_n2 = 689.99981864572572;
inline constexpr double crossover_fig_n2_mux100 = 572.63416111021346;
inline constexpr double crossover_fig_n3 = 735.04487962695907;

// distribution time, t_trans = pi/(2J) (paper-sec5)
inline constexpr double T_tot_sec5_n2_400 = 707.03990657265317;
inline constexpr double T_tot_sec5_n1_200 = 33.610053452261692;

inline constexpr double direct_600 = 0.014308860148391216;
inline constexpr double direct_400 = 126.98040054380047;

}  // namespace fixtures
