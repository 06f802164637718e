#include <doctest.h>

#include <cmath>

#include "pathsum/error.hpp"
#include "pathsum/star.hpp"

using namespace pathsum;

namespace {

double max_err(const TwoTimeFunction& f, const std::function<cplx(double, double)>& ref) {
  double e = 0.0;
  for (int i = 0; i < f.n(); ++i)
    for (int j = 0; j <= i; ++j) e = std::max(e, std::abs(f(i, j) - ref(f.grid().t(i), f.grid().t(j))));
  return e;
}

TwoTimeFunction smooth_pair(const TimeGrid& g, int which) {
  if (which == 0) return TwoTimeFunction::lift_scalar(g, [](double tp, double t) { return cplx(std::cos(tp - t), 0.3 * t); });
  if (which == 1) return TwoTimeFunction::lift_scalar(g, [](double tp, double t) { return cplx(std::sin(tp + 2 * t), tp * t); });
  return TwoTimeFunction::lift_scalar(g, [](double tp, double t) { return std::exp(cplx(0.0, tp - 0.5 * t)); });
}

}  // namespace

TEST_CASE("identity is exact under the star product") {
  TimeGrid g(0.0, 2.0, 41);
  const auto f = smooth_pair(g, 0);
  const auto I = TwoTimeFunction::identity(g, 1);
  CHECK(max_distance(star_product(I, f), f) == 0.0);
  CHECK(max_distance(star_product(f, I), f) == 0.0);
}

TEST_CASE("product of constants is linear in t' - t") {
  for (Quadrature q : {Quadrature::trapezoid, Quadrature::gregory4}) {
    TimeGrid g(0.0, 3.0, 31, q);
    const cplx a(1.5, -0.5), b(0.25, 2.0);
    const auto fa = TwoTimeFunction::lift_scalar(g, [&](double) { return a; });
    const auto fb = TwoTimeFunction::lift_scalar(g, [&](double, double) { return b; });
    const auto p = star_product(fa, fb);
    CHECK(max_err(p, [&](double tp, double t) { return a * b * (tp - t); }) < 1e-13);
    CHECK(max_err(star_product(fa.to_general(), fb), [&](double tp, double t) { return a * b * (tp - t); }) < 1e-13);
    CHECK(max_err(star_product(fa, fa), [&](double tp, double t) { return a * a * (tp - t); }) < 1e-13);
  }
}

TEST_CASE("smooth product converges at the order of the rule") {
  // ∫_t^{t'} cos(t') e^{0.7τ} · e^{0.3τ − t} dτ = cos(t') e^{−t} (e^{t'} − e^{t})
  auto ref = [](double tp, double t) { return cplx(std::cos(tp) * std::exp(-t) * (std::exp(tp) - std::exp(t)), 0.0); };
  for (Quadrature q : {Quadrature::trapezoid, Quadrature::gregory4}) {
    double prev = 0.0;
    for (int n : {41, 81, 161}) {
      TimeGrid g(0.0, 2.0, n, q);
      const auto f = TwoTimeFunction::lift_scalar(g, [](double tp, double t) { return cplx(std::cos(tp) * std::exp(0.7 * t), 0.0); });
      const auto k = TwoTimeFunction::lift_scalar(g, [](double tp, double t) { return cplx(std::exp(0.3 * tp - t), 0.0); });
      const double e = max_err(star_product(f, k), ref);
      if (prev > 0.0) {
        const double ratio = prev / e;
        if (q == Quadrature::trapezoid)
          CHECK(ratio == doctest::Approx(4.0).epsilon(0.1));
        else
          CHECK(ratio > 7.5);  // pointwise O(h^3) next to the diagonal, O(h^4) elsewhere
      }
      prev = e;
    }
  }
}

TEST_CASE("row-profile fast paths agree with the general path") {
  for (Quadrature q : {Quadrature::trapezoid, Quadrature::gregory4}) {
    TimeGrid g(-1.0, 2.0, 57, q);
    const auto r1 = TwoTimeFunction::lift_scalar(g, [](double t) { return cplx(std::cos(3 * t), t); });
    const auto r2 = TwoTimeFunction::lift_scalar(g, [](double t) { return cplx(1.0, std::sin(t)); });
    const auto gen = smooth_pair(g, 1);
    const auto R1 = r1.to_general(), R2 = r2.to_general();
    CHECK(max_distance(star_product(r1, gen), star_product(R1, gen)) < 1e-12);
    CHECK(max_distance(star_product(gen, r2), star_product(gen, R2)) < 1e-12);
    if (q == Quadrature::trapezoid) CHECK(max_distance(star_product(r1, r2), star_product(R1, R2)) < 1e-12);
  }
}

TEST_CASE("matrix-valued fast paths agree with the general path") {
  TimeGrid g(0.0, 1.0, 33);
  auto a = [](double t) {
    Mat m(2, 3);
    m << cplx(1, t), 2.0, cplx(0, -t), t * t, cplx(0.5, 0.5), -1.0;
    return m;
  };
  auto b = [](double tp, double t) {
    Mat m(3, 2);
    m << std::cos(tp - t), cplx(0, t), 1.0, tp, cplx(t, tp), -0.5;
    return m;
  };
  const auto A = TwoTimeFunction::lift(g, 2, 3, std::function<Mat(double)>(a));
  const auto B = TwoTimeFunction::lift(g, 3, 2, std::function<Mat(double, double)>(b));
  const auto P1 = star_product(A, B), P2 = star_product(A.to_general(), B);
  CHECK(P1.rows() == 2);
  CHECK(P1.cols() == 2);
  CHECK(max_distance(P1, P2) < 1e-12);
}

TEST_CASE("delta parts compose like constants") {
  TimeGrid g(0.0, 1.0, 21);
  auto f = smooth_pair(g, 0);
  auto k = smooth_pair(g, 2);
  f.set_delta(Mat::Constant(1, 1, cplx(2.0, 1.0)));
  k.set_delta(Mat::Constant(1, 1, cplx(-0.5, 0.0)));
  const auto p = star_product(f, k);
  CHECK(std::abs(p.delta()(0, 0) - cplx(2.0, 1.0) * cplx(-0.5, 0.0)) < 1e-15);
  auto fs = f, ks = k;
  fs.set_delta(Mat::Zero(1, 1));
  ks.set_delta(Mat::Zero(1, 1));
  const auto expected = star_product(fs, ks) + cplx(2.0, 1.0) * ks + cplx(-0.5, 0.0) * fs;
  auto ps = p;
  ps.set_delta(Mat::Zero(1, 1));
  CHECK(max_distance(ps, expected) < 1e-13);
}

TEST_CASE("associativity defect shrinks under refinement") {
  double prev = 0.0;
  for (int n : {51, 101, 201}) {
    TimeGrid g(0.0, 3.0, n);
    const auto a = smooth_pair(g, 0), b = smooth_pair(g, 1), c = smooth_pair(g, 2);
    const double e = max_distance(star_product(star_product(a, b), c), star_product(a, star_product(b, c)));
    if (prev > 0.0) CHECK(prev / e > 3.0);
    prev = e;
  }
}

TEST_CASE("column application matches the full product") {
  for (Quadrature q : {Quadrature::trapezoid, Quadrature::gregory4}) {
    TimeGrid g(0.0, 2.0, 45, q);
    const auto a = smooth_pair(g, 0), b = smooth_pair(g, 1);
    const auto r = TwoTimeFunction::lift_scalar(g, [](double t) { return cplx(t, 1.0); });
    for (int j : {0, 7, 44}) {
      for (const auto* f : {&a, &r}) {
        const Column c = star_apply(*f, column(b, j));
        const auto full = star_product(*f, b);
        double e = 0.0;
        for (int i = j; i < g.n_points; ++i) e = std::max(e, std::abs(c.at(i)(0, 0) - full(i, j)));
        CHECK(e < 1e-12);
      }
    }
  }
}

TEST_CASE("integrating a column includes the delta part") {
  TimeGrid g(0.0, 1.0, 11, Quadrature::gregory4);
  Column c(g, 1, 1, 0);
  c.delta = Mat::Identity(1, 1);
  c.has_delta = true;
  for (int i = 0; i < g.n_points; ++i) c.block(i)[0] = 3.0 * g.t(i) * g.t(i);
  const auto U = integrate_column(c);
  for (int i = 0; i < g.n_points; ++i) CHECK(std::abs(U[i](0, 0) - (1.0 + std::pow(g.t(i), 3))) < 1e-13);
}

TEST_CASE("grids must match") {
  TimeGrid g1(0.0, 1.0, 11), g2(0.0, 1.0, 12);
  CHECK_THROWS_AS(star_product(smooth_pair(g1, 0), smooth_pair(g2, 0)), GridMismatch);
  CHECK_THROWS_AS(TimeGrid(1.0, 1.0, 5), Error);
}
