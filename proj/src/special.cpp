#include "pathsum/special.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <numbers>

#include "pathsum/error.hpp"

namespace pathsum {

std::vector<double> bessel_j_all(int nmax, double x) {
  if (nmax < 0) throw Error("Bessel order must be non-negative");
  std::vector<double> J(nmax + 1, 0.0);
  if (x == 0.0) {
    J[0] = 1.0;
    return J;
  }
  const double ax = std::abs(x);
  // Start well above both nmax and x so the minimal solution dominates.
  int start = std::max(nmax, static_cast<int>(ax)) + 20 + static_cast<int>(std::sqrt(40.0 * std::max(nmax, static_cast<int>(ax))));
  if (start % 2) ++start;
  double jp1 = 0.0, j = 1e-300, norm = 0.0;
  for (int k = start; k > 0; --k) {
    const double jm1 = 2.0 * k / ax * j - jp1;
    jp1 = j;
    j = jm1;
    if (k - 1 <= nmax) J[k - 1] = j;
    if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * j;
    if (std::abs(j) > 1e250) {
      j *= 1e-250;
      jp1 *= 1e-250;
      norm *= 1e-250;
      for (double& v : J) v *= 1e-250;
    }
  }
  norm += j;
  for (int k = 0; k <= nmax; ++k) {
    J[k] /= norm;
    if (x < 0.0 && k % 2) J[k] = -J[k];
  }
  return J;
}

double bessel_j(int n, double x) {
  if (n < 0) return (n % 2 ? -1.0 : 1.0) * bessel_j(-n, x);
  return bessel_j_all(n, x)[n];
}

double struve_h1_series(double x) {
  // Σ_k (−1)^k (x/2)^{2k+2} / (Γ(k+3/2) Γ(k+5/2))
  const double z = 0.5 * x, z2 = z * z;
  double term = z2 / (std::tgamma(1.5) * std::tgamma(2.5));
  double sum = term;
  for (int k = 0; k < 200; ++k) {
    term *= -z2 / ((k + 1.5) * (k + 2.5));
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

double struve_h1(double x) {
  if (std::abs(x) <= 16.0) return struve_h1_series(x);
  using boost::math::quadrature::gauss_kronrod;
  auto f = [x](double th) {
    const double c = std::cos(th);
    return c * c * std::sin(x * std::sin(th));
  };
  const double I = gauss_kronrod<double, 61>::integrate(f, 0.0, std::numbers::pi / 2, 15, 1e-14);
  return 2.0 * x / std::numbers::pi * I;
}

double struve_h1_minus_y1_asymptotic(double x) {
  // (1/π) Σ_k Γ(k+½) (x/2)^{−2k} / Γ(3/2 − k)
  const double r = 4.0 / (x * x);
  double term = 2.0, sum = 0.0;
  for (int k = 0; k < 100; ++k) {
    sum += term;
    const double next = term * (k + 0.5) * (0.5 - k) * r;
    if (std::abs(next) >= std::abs(term)) break;
    term = next;
  }
  return sum / std::numbers::pi;
}

double bessel_j0_zero(int n) {
  if (n < 1) throw Error("J0 zero index starts at 1");
  return boost::math::cyl_bessel_j_zero(0.0, n);
}

}  // namespace pathsum
