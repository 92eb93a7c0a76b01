#!/usr/bin/env python3
"""Reference values for the test suites, computed with mpmath.

Every constant asserted in tests/ that is not a textbook closed form comes
from this script. Run it and diff against the constants embedded in the
tests when touching the ladder definitions or the series code.

Conventions match the library: a_1 = 0 for every ladder, q_l = exp(-a_l),
qtilde_l = q_l * R^l.
"""

from mpmath import mp, mpf, exp, log, sqrt, findroot

mp.dps = 40

TWO_THIRDS = mpf(2) / 3


def qt_example1(l, delta, gamma):
    # a_1 = 0, a_l = -delta*l + gamma*l^(2/3); R = exp(-delta)
    if l == 1:
        return exp(-delta)
    return exp(-gamma * mpf(l) ** TWO_THIRDS)


def example1_f_tilde(mu, delta, gamma, terms=4000):
    return sum(qt_example1(l, delta, gamma) * mu**l for l in range(1, terms + 1))


def example1_g_tilde(mu, delta, gamma, terms=4000):
    return sum(l * qt_example1(l, delta, gamma) * mu**l for l in range(1, terms + 1))


def show(name, v, digits=21):
    print(f"{name} = {mp.nstr(mpf(v), digits)}")


print("# example1 delta=2 gamma=2")
d, g = mpf(2), mpf(2)
show("f_tilde(1)", example1_f_tilde(1, d, g))
show("f_tilde(0.5)", example1_f_tilde(mpf("0.5"), d, g))
show("g_tilde(0.5)", example1_g_tilde(mpf("0.5"), d, g))
show("g_tilde(1)", example1_g_tilde(1, d, g))

print()
print("# example1 borderline: delta* with f_tilde(1) = 1 exactly")
T = sum(qt_example1(l, d, g) for l in range(2, 4001))
delta_star = -log(1 - T)
show("tail T", T)
show("delta_star", delta_star)

print()
print("# example2 beta=ln2  (qtilde_1 = 2, qtilde_l = 1 beyond)")
mu2 = (3 - sqrt(5)) / 2
show("mu_bar", mu2)
g2 = mu2 + mu2 / (1 - mu2) ** 2
show("g_tilde(mu_bar)", g2)
show("N_bar(rho=1)", 1 / g2)
show("A_tilde(rho=1)", log(mu2))
show("f_tilde(0.5)", 2 * mpf("0.5") + mpf("0.25") / (1 - mpf("0.5")))
show("g_tilde(0.5)", mpf("0.5") + mpf("0.5") / (1 - mpf("0.5")) ** 2)

print()
print("# geometric beta=ln2  (qtilde_l = 2 for all l)")
show("mu_bar", mpf(1) / 3)
show("N_bar(rho=1)", TWO_THIRDS)
show("A_tilde(rho=1)", log(mpf(1) / 3))
print("# z_bar_l = (4/3) * 3^-l")

print()
print("# geometric beta=-ln2  (R=1/2, qtilde_l = 1/2 for all l)")
mu3 = TWO_THIRDS
show("mu_bar", mu3)
show("N_bar(rho=1)", mpf(1) / 3)
show("A_tilde(rho=1)", log(TWO_THIRDS))
show("lambda_bar = qt_1*mu", mpf(1) / 3)

print()
print("# example1 minimizing sequence, rho=1: weights max(qtilde_l, pi_m),")
print("# root of sum_l w_l mu^l = 1 with geometric tail, value = ln(mu_m)")
for m in (5, 10, 20, 40, 80):
    pi = qt_example1(m + 1, d, g)

    def F(s, m=m, pi=pi):
        mu = 1 - s
        head = sum(
            max(qt_example1(l, d, g), pi) * mu**l for l in range(1, m + 1)
        )
        return head + pi * mu ** (m + 1) / s - 1

    lo, hi = mpf("1e-30"), mpf("0.9")  # F > 0 at lo (tail blows up), < 0 at hi
    for _ in range(600):
        mid = sqrt(lo * hi)
        if F(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < mpf("1e-30") * lo:
            break
    s_m = sqrt(lo * hi)
    mu_m = 1 - s_m
    head = sum(
        l * max(qt_example1(l, d, g), pi) * mu_m**l for l in range(1, m + 1)
    )
    g_m = head + pi * mu_m ** (m + 1) * (1 + m * s_m) / s_m**2
    print(f"m={m}")
    show("  s_m = 1-mu_m", s_m)
    show("  value_m = ln mu_m", log(mu_m))
    show("  N_m", 1 / g_m)
    show("  pi_m", pi)

print()
print("# example1 truncated detailed-balance state (kinetics-independent),")
print("# root of sum_{l<=m} qtilde_l mu^l = 1 with mu > 1")
for m in (8, 256):
    def Fm(mu, m=m):
        return sum(qt_example1(l, d, g) * mu**l for l in range(1, m + 1)) - 1

    mu_m = findroot(Fm, (mpf(1), mpf(4)), solver="bisect", tol=mpf("1e-35"))
    g_m = sum(l * qt_example1(l, d, g) * mu_m**l for l in range(1, m + 1))
    N_m = 1 / g_m
    print(f"m={m}")
    show("  mu", mu_m)
    show("  z_1/rho", N_m * qt_example1(1, d, g) * mu_m)
    show("  z_m/rho", N_m * qt_example1(m, d, g) * mu_m**m)

print()
print("# standard model alpha=gamma=1/3, z_s=1, q=1:")
print("# c_l = l^(1/3), d_l = l^(1/3) + 1, Q_1 = 1, Q_{l+1} = Q_l c_l/d_{l+1}")
one_third = mpf(1) / 3


def std_rho(mu, terms=400):
    tot = mpf(0)
    logQ = mpf(0)
    for l in range(1, terms + 1):
        if l > 1:
            c = mpf(l - 1) ** one_third
            dd = mpf(l) ** one_third + 1
            logQ += log(c) - log(dd)
        tot += l * exp(logQ + l * log(mu))
    return tot


show("rho(mu=0.5)", std_rho(mpf("0.5")))
show("rho(mu=1) [saturation]", std_rho(mpf(1), terms=200000), 12)
