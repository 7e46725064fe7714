"""Independent reference values for the Riesz-potential tests.

1. l = 1 sector, d = 3, alpha = 1: potential of x_1 e^{-|x|^2} at (r, 0, 0) by a
   brute-force 3D tensor-grid sum (numpy), cross-checked against the 1D
   Newton-shell formula in mpmath; the mpmath values are frozen.
2. Ratio potential / bracket over r in [0, 20] for the test family
   {e^{-r}, e^{-r^2}, (1+r^2)^{-d}}, d in {3,4,5}, alpha in {d-2-0.1, d-2, d-2+0.1},
   using the hypergeometric form of the angular kernel (scipy) on a fine radial mesh.
"""
import numpy as np
import mpmath as mp
from scipy import integrate, special

mp.mp.dps = 25


def newton_l1(r):
    # 4π/3 [ r^{-2} ∫_0^r s^3 g + r ∫_r^∞ g ],  g(s) = s e^{-s^2}
    g = lambda s: s * mp.e ** (-s * s)
    a = mp.quad(lambda s: s ** 3 * g(s), [0, r])
    b = mp.quad(g, [r, mp.inf])
    return 4 * mp.pi / 3 * (a / r ** 2 + r * b)


def brute_3d(r, h=0.04, L=6.0):
    ax = np.arange(-L + h / 2, L, h)
    X, Y, Z = np.meshgrid(ax, ax, ax, indexing="ij")
    rho = X * np.exp(-(X * X + Y * Y + Z * Z))
    # Evaluate at (r + h/2·0.5, ...) offset so that no grid point coincides with the target.
    px = r + 0.5 * h * 0.37
    dist = np.sqrt((X - px) ** 2 + (Y - 0.13 * h) ** 2 + (Z - 0.29 * h) ** 2)
    return float(np.sum(rho / dist) * h ** 3), px


def kernel0(d, alpha, r, s):
    u = r * r + s * s
    x = 2 * r * s / u
    area = 2 * np.pi ** ((d - 1) / 2) / special.gamma((d - 1) / 2)
    return area * u ** (-alpha / 2) * special.beta(0.5, (d - 1) / 2) * special.hyp2f1(alpha / 4, alpha / 4 + 0.5, d / 2, x * x)


def potential(d, alpha, f, r):
    if r == 0:
        area = 2 * np.pi ** (d / 2) / special.gamma(d / 2)
        return area * integrate.quad(lambda s: f(s) * s ** (d - 1 - alpha), 0, 25, limit=400)[0]
    pts = [r]
    val = integrate.quad(lambda s: kernel0(d, alpha, r, s) * f(s) * s ** (d - 1), 0, 25, points=pts, limit=800, epsabs=1e-13, epsrel=1e-11)[0]
    return val


def bracket(d, alpha, f, r):
    inner = 0.0 if r == 0 else r ** (-alpha) * integrate.quad(lambda s: f(s) * s ** (d - 1), 0, r, limit=400)[0]
    outer = integrate.quad(lambda s: f(s) * s ** (d - 1 - alpha), r, 25, limit=400)[0]
    return inner + outer


if __name__ == "__main__":
    print("# l=1 oracle, d=3, alpha=1, g(s) = s e^{-s^2}")
    for r in [0.5, 1.0, 2.0]:
        bf, px = brute_3d(r)
        print("brute 3D at %.4f: %.6f   newton: %s" % (px, bf, mp.nstr(newton_l1(mp.mpf(px)), 10)))
    for r in [0.25, 0.5, 1.0, 1.5, 2.0, 3.0]:
        print("{%.2f, %s}," % (r, mp.nstr(newton_l1(mp.mpf(r)), 17)))

    print("# kernel check against the table in kernel_values.py")
    print(kernel0(4, 1.3, 1.1, 5.0), "expect 2.4224227949449079")
    print(kernel0(5, 2.2, 0.4, 0.5), "expect 105.18486796796639")

    print("# potential/bracket ratio ranges over r in [0,20]")
    rs = np.concatenate([[0.0], np.geomspace(0.01, 20, 120)])
    for d in (3, 4, 5):
        fam = {
            "exp": lambda s: np.exp(-s),
            "gauss": lambda s: np.exp(-s * s),
            "poly": lambda s, d=d: (1 + s * s) ** (-d),
        }
        for alpha in (d - 2.1, d - 2.0, d - 1.9):
            lo, hi = np.inf, 0.0
            for name, f in fam.items():
                for r in rs:
                    q = potential(d, alpha, f, r) / bracket(d, alpha, f, r)
                    lo, hi = min(lo, q), max(hi, q)
            print("d=%d alpha=%.1f ratio in [%.6f, %.6f]" % (d, alpha, lo, hi))
