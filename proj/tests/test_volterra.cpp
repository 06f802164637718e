#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

#include "pathsum/error.hpp"
#include "pathsum/volterra.hpp"

using namespace pathsum;

namespace {

// K ≡ c has resolvent δ + c e^{c(t'−t)}.
double constant_kernel_error(const TimeGrid& g, cplx c) {
  const auto K = TwoTimeFunction::lift_scalar(g, [&](double) { return c; });
  const auto G = solve_direct(K);
  double e = 0.0;
  for (int i = 0; i < g.n_points; ++i)
    for (int j = 0; j <= i; ++j) e = std::max(e, std::abs(G(i, j) - c * std::exp(c * (g.t(i) - g.t(j)))));
  return e;
}

TwoTimeFunction smooth_kernel(const TimeGrid& g) {
  return TwoTimeFunction::lift_scalar(g, [](double tp, double t) { return cplx(-0.3 * std::cos(tp), -std::sin(tp - t)); });
}

}  // namespace

TEST_CASE("constant kernel resolvent") {
  const cplx c(-0.4, 1.1);
  const double e1 = constant_kernel_error(TimeGrid(0.0, 4.0, 201), c);
  const double e2 = constant_kernel_error(TimeGrid(0.0, 4.0, 401), c);
  CHECK(e1 < 1e-3);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
  const double g1 = constant_kernel_error(TimeGrid(0.0, 4.0, 201, Quadrature::gregory4), c);
  const double g2 = constant_kernel_error(TimeGrid(0.0, 4.0, 401, Quadrature::gregory4), c);
  CHECK(g1 < 2e-6);
  CHECK(g1 / g2 > 7.5);  // the first interval is trapezoidal, so pointwise third order
}

TEST_CASE("discrete residual vanishes for the direct solve") {
  for (Quadrature q : {Quadrature::trapezoid, Quadrature::gregory4}) {
    TimeGrid g(0.0, 3.0, 61, q);
    const auto K = smooth_kernel(g);
    CHECK(volterra_residual(K, solve_direct(K)) < 1e-12);
    const auto R = TwoTimeFunction::lift_scalar(g, [](double t) { return cplx(0.2, -t); });
    CHECK(volterra_residual(R, solve_direct(R)) < 1e-12);
  }
}

TEST_CASE("matrix kernel residual and row fast path") {
  TimeGrid g(0.0, 2.0, 41, Quadrature::gregory4);
  std::function<Mat(double)> a = [](double t) {
    Mat m(2, 2);
    m << cplx(0, -1), cplx(0, -0.5 * std::cos(t)), cplx(0, -0.5 * std::cos(t)), cplx(0, 1);
    return m;
  };
  const auto K = TwoTimeFunction::lift(g, 2, 2, a);
  const auto G = solve_direct(K);
  CHECK(volterra_residual(K, G) < 1e-12);
  CHECK(max_distance(G, solve_direct(K.to_general())) < 1e-12);
}

TEST_CASE("column solve equals the matching column of the full solve") {
  TimeGrid g(0.0, 2.0, 51);
  const auto K = smooth_kernel(g);
  const auto G = solve_direct(K);
  for (int j : {0, 10, 50}) {
    const Column c = solve_column(K, j);
    double e = 0.0;
    for (int i = j; i < g.n_points; ++i) e = std::max(e, std::abs(c.at(i)(0, 0) - G(i, j)));
    CHECK(e < 1e-13);
  }
}

TEST_CASE("Neumann series converges to the direct solve") {
  TimeGrid g(0.0, 2.0, 81);
  const auto K = smooth_kernel(g);
  const auto G = solve_direct(K);
  const auto tr = neumann(K, 20);
  CHECK(tr.partial_sums.size() == 21);
  CHECK(tr.residuals[0] == 0.0);
  CHECK(max_distance(tr.partial_sums[0], TwoTimeFunction::identity(g, 1)) == 0.0);
  CHECK(tr.residuals[20] < tr.residuals[5]);
  // Truncated sums differ from the discrete resolvent by the implicit diagonal term only.
  CHECK(max_distance(tr.result(), G) < 1e-3);
  const auto col = neumann_column(K, 20, 3);
  double e = 0.0;
  for (int i = 3; i < g.n_points; ++i) e = std::max(e, std::abs(col.result().at(i)(0, 0) - tr.result()(i, 3)));
  CHECK(e < 1e-12);
  const auto au = neumann_auto(K, 1e-10);
  CHECK(au.residuals.back() < 1e-10);
}

TEST_CASE("accelerated expansion") {
  TimeGrid g(0.0, 2.0, 81);
  const auto K1 = TwoTimeFunction::lift_scalar(g, [](double) { return cplx(0.0, -1.0); });
  const auto K2 = TwoTimeFunction::lift_scalar(g, [](double tp, double t) { return cplx(0.2 * std::cos(tp + t), 0.0); });
  const auto G = solve_direct(K1 + K2);
  // Successive orders converge geometrically; the limit differs from the
  // discrete resolvent by the quadrature error only.
  const auto a2 = accelerated(K1, K2, 2), a4 = accelerated(K1, K2, 4), a8 = accelerated(K1, K2, 8);
  CHECK(max_distance(a8, a4) < 0.1 * max_distance(a4, a2));
  CHECK(max_distance(a8, a4) < 1e-6);
  CHECK(max_distance(a8, G) < 5e-4);
  TimeGrid fine(0.0, 2.0, 161);
  const auto F1 = TwoTimeFunction::lift_scalar(fine, [](double) { return cplx(0.0, -1.0); });
  const auto F2 = TwoTimeFunction::lift_scalar(fine, [](double tp, double t) { return cplx(0.2 * std::cos(tp + t), 0.0); });
  const double coarse_gap = max_distance(a8, G);
  const double fine_gap = max_distance(accelerated(F1, F2, 8), solve_direct(F1 + F2));
  CHECK(coarse_gap / fine_gap == doctest::Approx(4.0).epsilon(0.15));
  const auto Z = TwoTimeFunction::zero(g, 1, 1);
  CHECK(max_distance(accelerated(K1, Z, 3), solve_direct(K1)) == 0.0);
  CHECK(max_distance(accelerated(Z, K1, 3), solve_direct(K1)) == 0.0);
}

TEST_CASE("closed form for commuting kernels") {
  TimeGrid g(0.0, 3.0, 301, Quadrature::gregory4);
  std::function<Mat(double)> k = [](double t) {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = cplx(-0.1, -std::cos(t));
    m(1, 1) = cplx(0.0, 2.0);
    return m;
  };
  const auto G = closed_form_G(g, 2, k);
  // δ + K(t') exp(∫_t^{t'} K) entrywise on the diagonal
  double e = 0.0;
  for (int i = 0; i < g.n_points; i += 7)
    for (int j = 0; j <= i; j += 5) {
      const double tp = g.t(i), t = g.t(j);
      const cplx ref = cplx(-0.1, -std::cos(tp)) * std::exp(cplx(-0.1 * (tp - t), -(std::sin(tp) - std::sin(t))));
      e = std::max(e, std::abs(G.at(i, j)(0, 0) - ref));
    }
  CHECK(e < 1e-8);
  CHECK(max_distance(G, solve_direct(TwoTimeFunction::lift(g, 2, 2, k))) < 5e-6);

  std::function<Mat(double)> nc = [](double t) {
    Mat m(2, 2);
    m << 0.0, cplx(0, -1), cplx(0, -std::cos(t)), 0.0;
    return m;
  };
  CHECK(commutator_defect(g, nc) > 1e-3);
  CHECK_THROWS_AS(closed_form_G(g, 2, nc), Error);
}

TEST_CASE("singular implicit step is reported") {
  TimeGrid g(0.0, 1.0, 11);  // h = 0.1, trapezoid end weight 1/2
  const auto K = TwoTimeFunction::lift_scalar(g, [](double) { return cplx(20.0, 0.0); });
  CHECK_THROWS_AS(solve_direct(K), StepSizeError);
}

TEST_CASE("resolvent kernels must be square and delta-free") {
  TimeGrid g(0.0, 1.0, 11);
  CHECK_THROWS_AS(solve_direct(TwoTimeFunction::identity(g, 1)), Error);
  CHECK_THROWS_AS(solve_direct(TwoTimeFunction(g, 1, 2)), DimensionMismatch);
}
