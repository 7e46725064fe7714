"""Reference values of the sector kernels K_ell(r, s) by high-precision quadrature."""
import mpmath as mp

mp.mp.dps = 30


def kernel(d, alpha, ell, r, s):
    if d == 1:
        a = abs(r - s) ** (-alpha)
        b = (r + s) ** (-alpha)
        return a + b if ell == 0 else a - b
    area = 2 * mp.pi ** (mp.mpf(d - 1) / 2) / mp.gamma(mp.mpf(d - 1) / 2)
    f = lambda t: (r * r + s * s - 2 * r * s * mp.cos(t)) ** (-mp.mpf(alpha) / 2) * mp.cos(t) ** ell * mp.sin(t) ** (d - 2)
    return area * mp.quad(f, [0, mp.mpf(1) / 1000, mp.mpf(1) / 10, 1, mp.pi])


cases = [
    (2, 0.5, 0, 1.0, 1.7), (2, 1.5, 1, 0.3, 0.45), (3, 1.0, 0, 0.5, 2.0), (3, 1.5, 0, 1.0, 1.2),
    (3, 2.5, 1, 1.0, 1.3), (3, 0.7, 1, 0.2, 3.0), (4, 2.0, 0, 0.7, 0.9), (4, 2.0, 1, 0.7, 0.9),
    (4, 1.3, 0, 1.1, 5.0), (4, 3.2, 1, 2.0, 2.4), (5, 3.0, 0, 1.0, 1.05), (5, 3.0, 1, 1.0, 1.05),
    (5, 2.2, 0, 0.4, 0.5), (5, 3.7, 1, 3.0, 3.5), (5, 1.0, 1, 0.1, 4.0),
]
for c in cases:
    print("{%d, %.17g, %d, %.17g, %.17g, %s}," % (c + (mp.nstr(kernel(*c), 17),)))
