#pragma once

#include <vector>

namespace pathsum {

// J_0(x) … J_nmax(x) by Miller's downward recurrence, normalized with J_0 + 2 Σ J_2k = 1.
std::vector<double> bessel_j_all(int nmax, double x);
double bessel_j(int n, double x);

// Struve H_1: power series for x ≤ 16, integral (2x/π) ∫_0^{π/2} cos²θ sin(x sin θ) dθ beyond.
double struve_h1(double x);
double struve_h1_series(double x);
// H_1 − Y_1 asymptotic sum, truncated at its smallest term (large x only).
double struve_h1_minus_y1_asymptotic(double x);

// n-th positive zero of J_0 (n ≥ 1).
double bessel_j0_zero(int n);

}  // namespace pathsum
