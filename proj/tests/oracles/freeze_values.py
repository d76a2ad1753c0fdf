"""Independent high-precision reference values frozen into the C++ tests.

Run with:  python3 tests/oracles/freeze_values.py
Uses mpmath (50 digits) and numpy only; nothing here calls the C++ library.
"""
import numpy as np
from mpmath import mp, mpf, binomial, log, sqrt, erfc, findroot, quad, exp, pi, inf

mp.dps = 50


def phi(z):
    return erfc(-mpf(z) / sqrt(2)) / 2


def quantile(q):
    # bisection on the erfc-based CDF
    lo, hi = mpf(-40), mpf(40)
    for _ in range(400):
        mid = (lo + hi) / 2
        if phi(mid) < q:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def restricted_pc(nt, nc, xt, xc, d):
    d = mpf(d)
    lo, hi = max(mpf(0), -d), min(mpf(1), 1 - d)

    def score(p):
        s = mpf(0)
        pt = p + d
        if xt > 0: s += xt / pt
        if nt - xt > 0: s -= (nt - xt) / (1 - pt)
        if xc > 0: s += xc / p
        if nc - xc > 0: s -= (nc - xc) / (1 - p)
        return s

    eps = mpf(10) ** -40
    if score(lo + eps) <= 0: return lo
    if score(hi - eps) >= 0: return hi
    a, b = lo + eps, hi - eps
    for _ in range(200):
        m = (a + b) / 2
        if score(m) > 0: a = m
        else: b = m
    return (a + b) / 2


def z_mee(nt, nc, xt, xc, d):
    pc = restricted_pc(nt, nc, xt, xc, d)
    pt = pc + mpf(d)
    s = sqrt(pt * (1 - pt) / nt + pc * (1 - pc) / nc)
    num = mpf(xt) / nt - mpf(xc) / nc - mpf(d)
    if s == 0:
        return inf if num > 0 else (-inf if num < 0 else mpf(0))
    return num / s


print("# prob-kernel")
print("6 ln 0.475        =", mp.nstr(6 * log(mpf("0.475")), 20))
print("ln(20/64)         =", mp.nstr(log(mpf(20) / 64), 20))
print("0.475^12          =", mp.nstr(mpf("0.475") ** 12, 20))
print("Phi^-1(0.975)     =", mp.nstr(quantile(mpf("0.975")), 20))
print("Phi^-1(0.99987)   =", mp.nstr(quantile(1 - mpf("0.00013")), 20))
dens = lambda t: exp(-t * t / 2) / sqrt(2 * pi)
print("quad check 0.975  =", mp.nstr(quad(dens, [-inf, quantile(mpf("0.975"))]), 20))

print("# score-engine")
pc = restricted_pc(6, 6, 6, 0, "0.99")
print("rmle pc (6,6/6,0/0.99) =", mp.nstr(pc, 20))
s = sqrt(2 * mpf("0.005") * mpf("0.995") / 6)
print("sigma                  =", mp.nstr(s, 20))
print("z_mee at 0.99          =", mp.nstr(z_mee(6, 6, 6, 0, "0.99"), 20))
zb = z_mee(6, 6, 6, 0, "-0.05")
print("z_mee at -0.05         =", mp.nstr(zb, 20))
print("p_asy at -0.05         =", mp.nstr(1 - phi(zb), 20))
print("z_wald (10,10/7,5/0)   =", mp.nstr(mpf("0.2") / sqrt(mpf("0.021") + mpf("0.025")), 20))
print("wald ci (10,10/7,5)    =", mp.nstr(mpf("0.2") - quantile(mpf("0.975")) * sqrt(mpf("0.046")), 20),
      mp.nstr(mpf("0.2") + quantile(mpf("0.975")) * sqrt(mpf("0.046")), 20))

print("# ec-engine")
pe = mpf("0.475") ** 12
sig = sqrt(2 * mpf("0.525") * mpf("0.475") / 6)
d0 = mpf("-0.05") + sig * quantile(1 - pe)
print("d_hat_0 (6,6/6,0/0.05) =", mp.nstr(d0, 20))
for pd in ("-0.99", "-0.9981", "-0.999"):
    D = -mpf(pd)
    print("z_ec at noninferiority delta", pd, "=", mp.nstr((d0 - D) / sqrt((1 - D * D) / 12), 20))
print("-1/d_hat_0             =", mp.nstr(-1 / d0, 20))
print("sigma from rounded reference values=", mp.nstr((mpf("1.0019") + mpf("0.05")) / quantile(1 - mpf("0.00013")), 20))


def outcome_probs_matrix(nt, nc, outs, pt, pc):
    """rows: outcomes, cols: nuisance grid."""
    from math import comb
    res = []
    for xt, xc in outs:
        res.append(comb(nt, xt) * pt ** xt * (1 - pt) ** (nt - xt) *
                   comb(nc, xc) * pc ** xc * (1 - pc) ** (nc - xc))
    return np.array(res)


def exact_p(nt, nc, obs, d, side, step):
    outs = [(a, b) for a in range(nt + 1) for b in range(nc + 1)]
    z = {o: z_mee(nt, nc, o[0], o[1], d) for o in outs}
    zo = z[obs]
    tol = mpf(10) ** -9
    if side > 0:
        tail = [o for o in outs if z[o] >= zo - tol]
    else:
        tail = [o for o in outs if z[o] <= zo + tol]
    lo, hi = max(0.0, -float(d)), min(1.0, 1.0 - float(d))
    pc = np.linspace(lo, hi, int(round((hi - lo) / step)) + 1)
    pt = np.clip(pc + float(d), 0, 1)
    return outcome_probs_matrix(nt, nc, tail, pt, pc).sum(axis=0).max()


print("# exact-engine")
print("p_exact (2,2/(2,0)/0)  =", repr(exact_p(2, 2, (2, 0), 0, +1, 1e-6)))

print("# ci-engine: cz (2,2/(2,0)) alpha=0.05, delta grid 1e-3, nuisance grid 1e-5")
acc = []
for i in range(-999, 1000):
    d = mpf(i) / 1000
    pl = exact_p(2, 2, (2, 0), d, +1, 1e-5)
    pu = exact_p(2, 2, (2, 0), d, -1, 1e-5) if pl >= 0.025 else 0
    if pl >= 0.025 and pu >= 0.025:
        acc.append(i / 1000)
print("cz accepted grid hull  =", min(acc), max(acc), "count", len(acc))

print("# coverage-eval: wald (6,6), p_T = p_C = 0.5, alpha = 0.05")
from math import comb
c = float(quantile(mpf("0.975")))
cov = 0.0
for xt in range(7):
    for xc in range(7):
        a, b = xt / 6, xc / 6
        s = np.sqrt(a * (1 - a) / 6 + b * (1 - b) / 6)
        lo, hi = max(-1, a - b - c * s), min(1, a - b + c * s)
        w = comb(6, xt) * comb(6, xc) / 4096
        if lo <= 0 <= hi:
            cov += w
print("wald coverage          =", repr(cov))
