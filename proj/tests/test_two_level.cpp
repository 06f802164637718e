#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pathsum/error.hpp"
#include "pathsum/oracle.hpp"
#include "pathsum/two_level.hpp"

using namespace pathsum;

namespace {

constexpr cplx I(0.0, 1.0);

double max_gap(const TwoLevelSolution& s, const PropagationRun& r) {
  double e = 0.0;
  for (std::size_t i = 0; i < s.U.size(); ++i) e = std::max(e, (Mat(s.U[i]) - r.U[i]).cwiseAbs().maxCoeff());
  return e;
}

std::vector<double> oracle_transition(const BlochSiegertParams& p, const TimeGrid& g) {
  const auto h = bloch_siegert_lab(p);
  const auto R = propagate([&](double t) { return h.matrix(t); }, g, 1e-10);
  std::vector<double> P(g.n_points);
  for (int i = 0; i < g.n_points; ++i) P[i] = std::norm(R.U[i](1, 0));
  return P;
}

}  // namespace

TEST_CASE("printed kernels agree with the generic construction") {
  for (BlochSiegertParams p : {BlochSiegertParams{0.7, 1.0, 2.0}, BlochSiegertParams{0.5, 1.0, 1.0},
                               BlochSiegertParams{1.6, 1.0, 8.0}}) {
    TimeGrid g(0.0, 3.0, 301, Quadrature::gregory4);
    const auto printed = bs_kernel(p, g);
    const auto built = general_kernel(bloch_siegert_rotating(p), g);
    const double scale = printed.up.max_norm() + 1.0;
    CHECK(max_distance(printed.up, built.up) < 1e-6 * scale);
    CHECK(max_distance(printed.down, built.down) < 1e-6 * scale);
  }
}

TEST_CASE("resonant branch is the limit of the generic one") {
  const BlochSiegertParams res{0.8, 1.0, 1.0}, near{0.8, 1.0, 1.0 + 1e-5};
  for (auto [tp, t] : {std::pair{1.3, 0.2}, std::pair{4.0, 2.5}, std::pair{7.1, 0.0}}) {
    CHECK(std::abs(bs_kernel_up(res, tp, t) - bs_kernel_up(near, tp, t)) < 1e-3);
    CHECK(std::abs(bs_kernel_down(res, tp, t) - bs_kernel_down(near, tp, t)) < 1e-3);
  }
}

TEST_CASE("decoupled and diagonal Hamiltonians") {
  TimeGrid g(0.0, 5.0, 401, Quadrature::gregory4);
  TwoLevelHamiltonian h;
  h.h_up = [](double) { return cplx(0.5); };
  h.h_down = [](double) { return cplx(-0.5); };
  h.hermitian = true;
  const auto s = solve_2x2(h, g);
  double e = 0.0;
  for (int i = 0; i < g.n_points; ++i) {
    const double t = g.t(i);
    e = std::max({e, std::abs(s.U[i](0, 0) - std::exp(-0.5 * I * t)), std::abs(s.U[i](1, 1) - std::exp(0.5 * I * t)),
                  std::abs(s.U[i](0, 1)), std::abs(s.U[i](1, 0))});
  }
  CHECK(e < 1e-9);

  h.h_up = [](double t) { return cplx(std::cos(t)); };
  const auto s2 = solve_2x2(h, g);
  CHECK(std::abs(s2.U.back()(0, 0) - std::exp(-I * std::sin(5.0))) < 1e-7);
}

TEST_CASE("general 2x2 solution against the RK4 oracle") {
  TwoLevelHamiltonian h;
  h.h_up = [](double t) { return cplx(0.3 + 0.4 * std::cos(1.3 * t)); };
  h.h_down = [](double t) { return cplx(-0.2 + 0.5 * std::sin(0.7 * t)); };
  h.h_updown = [](double t) { return cplx(0.6 * std::cos(t), 0.3 * std::sin(0.5 * t)); };
  h.h_downup = [](double t) { return cplx(0.6 * std::cos(t), -0.3 * std::sin(0.5 * t)); };
  h.hermitian = true;
  TimeGrid g(0.0, 6.0, 601, Quadrature::gregory4);
  const auto r = propagate([&](double t) { return h.matrix(t); }, g, 1e-11);
  CHECK(max_gap(solve_2x2(h, g), r) < 1e-7);
  CHECK(max_gap(solve_2x2(h, g, TwoLevelMethod::neumann, 30), r) < 1e-7);
}

TEST_CASE("non-Hermitian decay keeps column norms monotone") {
  TwoLevelHamiltonian h;
  h.h_down = [](double) { return cplx(0.0, -0.3); };
  h.h_updown = [](double t) { return cplx(0.7 * std::cos(t)); };
  h.h_downup = h.h_updown;
  TimeGrid g(0.0, 8.0, 801, Quadrature::gregory4);
  CHECK_THROWS_AS([&] {
    TwoLevelHamiltonian bad = h;
    bad.hermitian = true;
    bad.validate(g);
  }(), Error);
  const auto s = solve_2x2(h, g);
  for (int i = 1; i < g.n_points; ++i) CHECK(s.U[i].col(0).norm() <= s.U[i - 1].col(0).norm() + 1e-9);
}

TEST_CASE("transition probability pipeline") {
  const BlochSiegertParams weak{0.05, 1.0, 1.0};
  TimeGrid g(0.0, 5.0, 501, Quadrature::gregory4);
  const auto P0 = transition_probability(weak, g, 0);
  CHECK(P0[0] == 0.0);
  double e = 0.0;
  for (int i = 0; i < g.n_points; ++i) e = std::max(e, std::abs(P0[i] - transition_probability_order0(weak, g.t(i))));
  CHECK(e < 1e-10);
  CHECK(transition_probability(weak, g, 13)[0] == 0.0);
  CHECK_THROWS_AS(transition_probability(weak, g, -1), Error);

  // One Rabi flip at β/ω = 0.5 against the lab-frame oracle.
  const BlochSiegertParams p{0.5, 1.0, 1.0};
  TimeGrid flip(0.0, std::numbers::pi / (2 * p.beta) + 0.5, 1201, Quadrature::gregory4);
  const auto Po = oracle_transition(p, flip);
  const auto P13 = transition_probability(p, flip, 13);
  double d = 0.0;
  for (int i = 0; i < flip.n_points; ++i) d = std::max(d, std::abs(P13[i] - Po[i]));
  CHECK(d < 1e-3);
}

TEST_CASE("spin-flip time radical") {
  const double lead = std::sqrt((3.0 + std::sqrt(3.0)) / 2.0);
  CHECK(spin_flip_radical({1e-4, 1.0, 1.0}) * 1e-4 == doctest::Approx(lead).epsilon(1e-6));
  // Second-order term of the small-β expansion.
  const double b = 1e-2;
  const double series = lead / b - b / 8.0 * std::sqrt((129.0 + 67.0 * std::sqrt(3.0)) / 2.0);
  CHECK(spin_flip_radical({b, 1.0, 1.0}) == doctest::Approx(series).epsilon(1e-8));
  CHECK(spin_flip_branch_bound() == doctest::Approx(0.49266).epsilon(1e-4));
  CHECK(std::isnan(spin_flip_radical({0.6, 1.0, 1.0})));
  const auto fb = spin_flip_time({0.6, 1.0, 1.0}, 13, 1501);
  CHECK_FALSE(fb.radical);
  CHECK(std::isfinite(fb.t));
  CHECK_THROWS_AS(spin_flip_time({0.3, 1.0, 2.0}), Error);
}

TEST_CASE("first peak picks the first excursion above one half") {
  const std::vector<double> t{0, 1, 2, 3, 4, 5, 6};
  const std::vector<double> P{0.0, 0.6, 0.9, 0.7, 0.2, 0.95, 0.1};
  CHECK(first_peak_time(t, P) == 2.0);
  CHECK(std::isnan(first_peak_time(t, std::vector<double>(7, 0.1))));
}
