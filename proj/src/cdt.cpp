#include "pathsum/cdt.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <numeric>

#include "pathsum/error.hpp"
#include "pathsum/special.hpp"

namespace pathsum {

namespace {

constexpr cplx I(0.0, 1.0);

// ∫_0^t f over pieces no longer than a quarter drive period.
template <class F>
double integrate(F f, double t, double omega) {
  if (t == 0.0) return 0.0;
  const int pieces = std::max(1, static_cast<int>(std::ceil(t * omega / (0.5 * std::numbers::pi))));
  const double h = t / pieces;
  double acc = 0.0;
  for (int k = 0; k < pieces; ++k)
    acc += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, k * h, (k + 1) * h, 6, 1e-12);
  return acc;
}

}  // namespace

double return_probability_acc0(const BlochSiegertParams& p, double t) {
  p.validate();
  const double b = p.beta / p.omega, w = p.omega, w0 = p.omega0;
  const double st = std::sin(w * t);
  auto g = [&](double tau) {
    const double s = std::sin(b * (std::sin(w * tau) - st));
    return s * s;
  };
  // i ω0 e^{−iω0τ/2} g(τ) split into real and imaginary parts.
  const double re = integrate([&](double tau) { return w0 * std::sin(0.5 * w0 * tau) * g(tau); }, t, w);
  const double im = integrate([&](double tau) { return w0 * std::cos(0.5 * w0 * tau) * g(tau); }, t, w);
  const cplx a = std::cos(2.0 * b * st) + std::exp(-0.5 * I * w0 * t) - 1.0 + cplx(re, im);
  return std::norm(a);
}

double mean_return_probability(const BlochSiegertParams& p) {
  p.validate();
  return 0.5 * (1.0 + bessel_j(0, 4.0 * p.beta / p.omega));
}

double psi_transition_acc0(const BlochSiegertParams& p, double t) {
  p.validate();
  const double z = 4.0 * p.beta / p.omega, w = p.omega;
  const double st = std::sin(w * t);
  const double s = integrate([&](double tau) { return std::sin(z * (st - std::sin(w * tau))); }, t, w);
  const double c = integrate([&](double tau) { return std::cos(z * (st - std::sin(w * tau))); }, t, w);
  return 0.25 * p.omega0 * p.omega0 * (s * s + c * c);
}

double sigma_x_acc0(const BlochSiegertParams& p, double t, bool simplified) {
  p.validate();
  const double z = 4.0 * p.beta / p.omega, w = p.omega, w0 = p.omega0;
  if (simplified) return w0 * integrate([&](double tau) { return std::sin(z * std::sin(w * tau)); }, t, w);
  const double st = std::sin(w * t);
  const double a = integrate([&](double tau) { return std::cos(0.5 * w0 * tau) * std::sin(z * std::sin(w * tau)); }, t, w);
  const double b = integrate(
      [&](double tau) { return std::sin(0.25 * w0 * (t - 2.0 * tau)) * std::sin(z * (st - std::sin(w * tau))); }, t, w);
  return w0 * a + 2.0 * w0 * std::sin(0.25 * w0 * t) * b;
}

double time_average(const std::function<double(double)>& f, double period, int periods, int samples_per_period) {
  if (!(period > 0.0) || periods < 1 || samples_per_period < 2) throw Error("time average needs a positive window");
  int n = periods * samples_per_period;
  if (n % 2) ++n;
  const double T = period * periods, h = T / n;
  double acc = f(0.0) + f(T);
  for (int k = 1; k < n; ++k) acc += (k % 2 ? 4.0 : 2.0) * f(k * h);
  return acc * h / 3.0 / T;
}

StruveRoots fluctuation_extrema(double x_lo, double x_hi, double step, double tol) {
  if (!(x_lo > 0.0) || !(x_hi > x_lo)) throw Error("fluctuation_extrema needs a positive range");
  auto f = [](double x) { return 1.0 - 0.5 * std::numbers::pi * struve_h1(x); };
  StruveRoots r;
  double a = x_lo, fa = f(a);
  while (a < x_hi) {
    const double b = std::min(a + step, x_hi), fb = f(b);
    if (fa == 0.0) {
      r.roots.push_back(a);
    } else if (fa * fb < 0.0) {
      double lo = a, hi = b, flo = fa;
      while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi), fm = f(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      r.roots.push_back(0.5 * (lo + hi));
    }
    a = b;
    fa = fb;
  }
  if (r.roots.empty()) throw Error("no root of 1 − (π/2)H_1 in the range");
  // Pair the n-th root with the n-th J_0 zero counted from the origin.
  int first = 1;
  while (bessel_j0_zero(first) < r.roots.front() - 1.0) ++first;
  for (std::size_t k = 0; k < r.roots.size(); ++k) {
    r.j0_zeros.push_back(bessel_j0_zero(first + static_cast<int>(k)));
    r.gaps.push_back(std::abs(r.j0_zeros.back() - r.roots[k]));
  }
  return r;
}

double BesselExpansion::value() const {
  return std::accumulate(even.begin(), even.end(), 0.0) + std::accumulate(odd.begin(), odd.end(), 0.0);
}

BesselExpansion bessel_expand(double alpha, double z, double phi, int order) {
  if (order < 0) throw Error("expansion order must be non-negative");
  const std::vector<double> J = bessel_j_all(2 * order + 1, z);
  BesselExpansion e;
  e.even.push_back(std::sin(alpha) * J[0]);
  for (int n = 1; n <= order; ++n) e.even.push_back(2.0 * std::sin(alpha) * J[2 * n] * std::cos(2.0 * n * phi));
  for (int n = 0; n <= order; ++n)
    e.odd.push_back(2.0 * std::cos(alpha) * J[2 * n + 1] * std::sin((2.0 * n + 1.0) * phi));
  return e;
}

}  // namespace pathsum
