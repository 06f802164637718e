#pragma once

#include <functional>
#include <vector>

#include "pathsum/two_level.hpp"

namespace pathsum {

// Order-0 accelerated closed forms for the lab-frame drive [[ω0/2, 2β cos ωt], [2β cos ωt, −ω0/2]].
double return_probability_acc0(const BlochSiegertParams& p, double t);
// ½(1 + J_0(4β/ω))
double mean_return_probability(const BlochSiegertParams& p);
// Valid for ω0 ≪ (β/ω)^{1/2}; the system starts in ψ− = (|↑⟩ − |↓⟩)/√2.
double psi_transition_acc0(const BlochSiegertParams& p, double t);
// Simplified: ω0 ∫_0^t sin((4β/ω) sin ωτ) dτ. Full: the form keeping cos(ω0τ/2) and sin(ω0 t/4).
double sigma_x_acc0(const BlochSiegertParams& p, double t, bool simplified = true);

// Mean of f over [0, periods·period] by composite Simpson with samples_per_period points per period.
double time_average(const std::function<double(double)>& f, double period, int periods = 10,
                    int samples_per_period = 400);

struct StruveRoots {
  std::vector<double> roots;     // zeros of 1 − (π/2) H_1(x) in the range
  std::vector<double> j0_zeros;  // n-th zero of J_0 paired with the n-th root
  std::vector<double> gaps;      // Δ_n = |j0_zeros[n] − roots[n]|
};

// Sign-change bracketing on a step-0.05 grid, then bisection to tol.
StruveRoots fluctuation_extrema(double x_lo, double x_hi, double step = 0.05, double tol = 1e-9);

struct BesselExpansion {
  std::vector<double> even;  // sin α J_0, then 2 sin α J_2n cos 2nφ for n = 1..order
  std::vector<double> odd;   // 2 cos α J_{2n+1} sin (2n+1)φ for n = 0..order
  double value() const;
};

// Truncated expansion of sin(α + z sin φ) over Bessel functions.
BesselExpansion bessel_expand(double alpha, double z, double phi, int order);

}  // namespace pathsum
