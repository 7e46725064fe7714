"""I(R; alpha, beta) = ∫_R^∞ r^{-alpha} e^{-beta r} dr through the upper incomplete gamma
function, and the range of I / (R^{-alpha} e^{-beta R}) over the test lattice."""
import mpmath as mp

mp.mp.dps = 30


def tail(R, alpha, beta):
    R, alpha, beta = mp.mpf(R), mp.mpf(alpha), mp.mpf(beta)
    return beta ** (alpha - 1) * mp.gammainc(1 - alpha, beta * R, mp.inf)


for c in [(1, 1, 1), (2.5, -1.5, 0.75), (7, 2.25, 2), (1, 3, 0.5), (20, -2, 3), (12.5, 0.5, 1.25)]:
    print("{%.17g, %.17g, %.17g, %s}," % (c + (mp.nstr(tail(*c), 17),)))

lo, hi = mp.inf, 0
for i in range(20):
    R = 1 + i
    for j in range(21):
        a = -2 + 0.25 * j
        for k in range(11):
            b = 0.5 + 0.25 * k
            q = tail(R, a, b) / (mp.mpf(R) ** (-a) * mp.exp(-b * R))
            lo, hi = min(lo, q), max(hi, q)
print("ratio range", mp.nstr(lo, 12), mp.nstr(hi, 12))
