"""Independent extended-precision evaluation of the closed-form quantities.

Values printed here are frozen into tests/fixtures.hpp. Run with:
    python3 tests/oracles/closed_forms.py
"""
from mpmath import mp, mpf, sqrt, exp, pi, log

mp.dps = 40

# memory / cavity profile
d = mpf(100)
gamma_e = mpf("13.5e9")   # half-linewidth, 2*gamma_e = 27 GHz
delta_s = mpf("2700e9")
delta_hf = mpf("0.46e9")
J = mpf(1000)
gamma_s = mpf("17.5")
gamma_k = mpf("1e-4")
c_vac = mpf(299792458)

eta1 = 1 - sqrt(d) * gamma_e / (sqrt(2) * delta_s)
eta2 = exp(-pi * (gamma_s + gamma_k) / (2 * J))
eta_s = eta1 * eta2
alpha_s = exp(-d * (gamma_e / delta_s) ** 2)
r = (1 - sqrt(1 - alpha_s ** 2)) / alpha_s
mu_s = r * alpha_s
x = (1 - mu_s) / (2 * mu_s)
delta_a = delta_s + delta_hf
gs2 = gamma_e ** 2 + delta_s ** 2
ga2 = gamma_e ** 2 + delta_a ** 2
ratio = gs2 / ga2
F_re = mpf("0.986")
zeta1 = (1 / F_re - 1) * ga2 / (x ** 2 * gs2)
g2 = 2 * x ** 2 * zeta1 * ratio
kappa_c = 8 * delta_hf * (1 - r) / r
band = mpf("0.3") * kappa_c
Lrt = pi * c_vac / (2 * 2 * pi * delta_hf)
re_ks_tau = d * gamma_e ** 2 / gs2
mu_s_exact = r * exp(-re_ks_tau)
t_trans = pi / (2 * J)

print("eta1", eta1); print("eta2", eta2); print("eta_s", eta_s)
print("alpha_s", alpha_s); print("r", r); print("mu_s", mu_s); print("x", x)
print("|Gs|^2/|Ga|^2", ratio); print("zeta1", zeta1); print("g2", g2)
print("kappa_c", kappa_c); print("bandwidth", band); print("L_rt", Lrt)
print("Re(ks)tau", re_ks_tau); print("mu_s exact", mu_s_exact)
print("t_trans", t_trans)

# protocol
a2, b2 = mpf("0.84"), mpf("0.16")
eta_d, eta_c, p1 = mpf("0.6"), mpf("0.8"), mpf("0.9")
lam, Td = mpf(100), mpf("12.5e-9")
Latt = mpf(22)
eps0 = exp(-lam * Td)
print("1-eps0", 1 - eps0)


def gen(L0, es=eta_s):
    et = exp(-L0 / (2 * Latt))
    B = b2 * et * eta_c * eta_d
    den = B + (1 - eps0) * a2 ** 2 - b2 ** 2 * et ** 2 * eta_c ** 2 * eta_d
    F = a2 * b2 * et * eta_c * eta_d * es / den
    eg = 2 * p1 * (eps0 * B + eps0 * (1 - eps0) * a2 ** 2 - eps0 * b2 ** 2 * et ** 2 * eta_c ** 2 * eta_d)
    return et, F, eg, (1 - eps0) * a2 ** 2 / B


et, F, eg, darkratio = gen(mpf(100))
print("eta_t(100)", et, "F_gen", F, "eta_gen", eg, "dark/B", darkratio)
for L0 in (25, 50, 82, 90, 95, 100):
    et, F, eg, dr = gen(mpf(L0))
    print(" L0", L0, "F rel dev", F / (a2 * eta_s) - 1, "eta rel dev", eg / (2 * p1 * b2 * et * eta_c * eta_d) - 1, "dark/B", dr)
print("w_ent", a2 * eta_s, "w_vac", a2 * (1 - eta_s) + b2)

eta_tot = eta_s * eta_s * eta_d
q = p1 * a2 * eta_tot
print("q", q)


def D(i):
    return 2 ** i - (2 ** i - 1) * q


def P(i):
    return q / 2 * D(i) / D(i - 1) ** 2


def Pps(n):
    return q / 2 / D(n) ** 2


print("P1", P(1), "P2", P(2), "P3", P(3), "Pps(1)", Pps(1), "Pps(2)", Pps(2))

p2max, eta_st, R = mpf("0.00093"), mpf("0.75"), mpf("1e7")
p_ch = p2max / (2 * (1 - eta_st) * p1)
print("p_charge", p_ch, "t_ch", 1 / (R * p_ch), "t_ch n3", 1 / (R * mpf("9.73e-5")))
print("F_tot n2", mpf("0.9") * F_re ** 4, "n3", mpf("0.9") * F_re ** 5)

c_f = mpf("2e8")


def T_tot(n, L, t_tr, t_ch, es=eta_s):
    L0 = L / 2 ** n
    et = exp(-L0 / (2 * Latt))
    etot = es * es * eta_d
    qq = p1 * a2 * etot
    prod = mpf(1)
    for i in range(1, n + 1):
        prod *= 2 ** i - (2 ** i - 1) * qq
    tatt = L0 * 1000 / c_f + t_tr + t_ch
    return mpf(3) ** (n + 1) / 2 * tatt * prod / (et * eta_c * eta_d * p1 ** (n + 3) * b2 * a2 ** (n + 2) * etot ** (n + 2))


tch2 = 1 / (R * p_ch)
tch3 = 1 / (R * mpf("9.73e-5"))
T = T_tot(2, mpf(400), mpf("1.5e-3"), tch2)
print("T_tot fig n2 L400", T, "rate", 1 / T)
for L in (100, 200, 400, 600, 800):
    print(" L", L, "n2 rate", 1 / T_tot(2, mpf(L), mpf("1.5e-3"), tch2), "n3 rate", 1 / T_tot(3, mpf(L), mpf("1.5e-3"), tch3),
          "direct", mpf("1e10") * exp(-mpf(L) / Latt))
print("direct 600", mpf("1e10") * exp(-mpf(600) / Latt))

# crossover: smallest L where repeater rate >= 1e10 exp(-L/22)
from mpmath import findroot


def crossover(n, t_ch, mux=1):
    f = lambda L: log(mux / T_tot(n, L, mpf("1.5e-3"), t_ch)) - (log(mpf("1e10")) - L / Latt)
    return findroot(f, (mpf(300), mpf(800)), solver="bisect")


print("crossover n2", crossover(2, tch2), "n2 mux100", crossover(2, tch2, 100), "n3", crossover(3, tch3))
print("T_tot sec5 n2 L400", T_tot(2, mpf(400), t_trans, tch2))
print("T_tot sec5 n1 L200", T_tot(1, mpf(200), t_trans, tch2), "n1 L100", T_tot(1, mpf(100), t_trans, tch2))
