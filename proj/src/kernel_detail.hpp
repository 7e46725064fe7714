#pragma once

namespace choquard::detail {

/// |S^k|, the area of the unit k-sphere (|S^0| = 2).
double sphere_area(int k);

/// Coefficient A with K_ell(r, s) ~ A |r - s|^{d-1-alpha} as s -> r, for alpha > d - 1.
double singular_coefficient(int d, double alpha, double r);

}  // namespace choquard::detail
