#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pathsum/error.hpp"
#include "pathsum/oracle.hpp"
#include "pathsum/two_level.hpp"

using namespace pathsum;

namespace {

constexpr cplx I(0.0, 1.0);

Mat hermitian3() {
  Mat H(3, 3);
  H << 0.4, cplx(0.2, 0.1), cplx(-0.1, 0.3), cplx(0.2, -0.1), -0.3, 0.25, cplx(-0.1, -0.3), 0.25, 0.1;
  return H;
}

}  // namespace

TEST_CASE("RK4 oracle basics") {
  TimeGrid g(0.0, 2.0, 21);
  const auto zero = propagate([](double) { return Mat::Zero(2, 2); }, g);
  for (const auto& U : zero.U) CHECK((U - Mat::Identity(2, 2)).norm() == 0.0);

  const Mat H = hermitian3();
  TimeGrid g5(0.0, 5.0, 51);
  const auto r = propagate([&](double) { return H; }, g5, 1e-12);
  const auto x = expm_const(H, g5);
  double e = 0.0, u = 0.0;
  for (int i = 0; i < g5.n_points; ++i) {
    e = std::max(e, (r.U[i] - x.U[i]).cwiseAbs().maxCoeff());
    u = std::max(u, (r.U[i].adjoint() * r.U[i] - Mat::Identity(3, 3)).norm());
  }
  CHECK(e < 1e-9);
  CHECK(u < 1e-9);
  CHECK(r.U[0] == Mat::Identity(3, 3));
}

TEST_CASE("RK4 is fourth order") {
  auto H = [](double t) {
    Mat m(2, 2);
    m << std::cos(t), 0.5 * std::sin(2 * t), 0.5 * std::sin(2 * t), -std::cos(t);
    return m;
  };
  TimeGrid g(0.0, 3.0, 31);
  const auto ref = propagate(H, g, 1e-13);
  auto err = [&](int m) {
    const auto U = rk4_fixed(H, g, m);
    double e = 0.0;
    for (int i = 0; i < g.n_points; ++i) e = std::max(e, (U[i] - ref.U[i]).cwiseAbs().maxCoeff());
    return e;
  };
  CHECK(err(1) / err(2) == doctest::Approx(16.0).epsilon(0.15));
}

TEST_CASE("oracle reproduces a full Rabi flip") {
  const BlochSiegertParams p{0.5, 1.0, 1.0};
  const auto h = bloch_siegert_lab(p);
  TimeGrid g(0.0, 60.0, 6001);
  const auto r = propagate([&](double t) { return h.matrix(t); }, g, 1e-9);
  std::vector<double> t(g.n_points), P(g.n_points);
  for (int i = 0; i < g.n_points; ++i) {
    t[i] = g.t(i);
    P[i] = std::norm(r.U[i](1, 0));
  }
  // The counter-rotating term caps the first flip near 0.89; later flips come close to 1.
  const double first = first_peak_time(t, P);
  CHECK(first == doctest::Approx(3.27).epsilon(0.01));
  CHECK(P[static_cast<int>(std::lround(first / g.step()))] > 0.85);
  CHECK(*std::max_element(P.begin(), P.end()) > 0.99);
}

TEST_CASE("propagate rejects bad input") {
  TimeGrid g(0.0, 1.0, 11);
  CHECK_THROWS_AS(propagate([](double) { return Mat::Zero(2, 3); }, g), DimensionMismatch);
  CHECK_THROWS_AS(propagate([](double t) { return Mat::Constant(1, 1, t > 0.5 ? NAN : 0.0); }, g), Error);
  CHECK_THROWS_AS(propagate([](double) { return Mat::Constant(1, 1, 50.0); }, g, 1e-14, 1), Error);
}

TEST_CASE("walk sums converge to the exponential") {
  TimeGrid g(0.0, 1.0, 3);
  const Mat H = hermitian3();
  DynamicalGraph graph = DynamicalGraph::from_hamiltonian([&](double) { return H; }, {{0}, {1}, {2}}, g);
  const Mat U = (-I * H).exp();
  const auto zero = walk_sum(graph, 0, 2, 0, 1.0);
  CHECK(zero[0].norm() == 0.0);
  CHECK(walk_sum(graph, 1, 1, 0, 1.0)[0](0, 0) == 1.0);
  const auto s = walk_sum(graph, 0, 2, 14, 1.0);
  CHECK(std::abs(s.back()(0, 0) - U(2, 0)) < 1e-10);
  CHECK(std::abs(s[4](0, 0) - U(2, 0)) > std::abs(s[8](0, 0) - U(2, 0)));
  CHECK_THROWS_AS(walk_sum(graph, 0, 2, 30, 1.0, 1000), Error);

  DynamicalGraph moving = DynamicalGraph::from_hamiltonian([](double t) { return Mat::Constant(1, 1, t); }, {{0}},
                                                           TimeGrid(0.0, 1.0, 5));
  CHECK_THROWS_AS(walk_sum(moving, 0, 0, 2, 1.0), Error);
}

TEST_CASE("full space Hamiltonian") {
  const MasSchedule stat;
  FullSpaceHamiltonian one(CouplingSchedule(1, {}, stat), {3.0});
  const Mat H1 = one.dense(0.0);
  CHECK(H1(0, 0).real() == -1.5);
  CHECK(H1(1, 1).real() == 1.5);

  SpinGeometry pair;
  pair.positions = {{0, 0, 0}, {2.0, 0, 0}};
  const auto two = full_space(pair, stat);
  const double w = coupling_schedule(pair, stat).at(0.0)(0, 1);
  Eigen::SelfAdjointEigenSolver<Mat> es(two.dense(0.0));
  Eigen::Vector4d expect(-w / 2, 0.0, w / 4, w / 4);
  std::sort(expect.data(), expect.data() + 4);
  for (int k = 0; k < 4; ++k) CHECK(es.eigenvalues()(k) == doctest::Approx(expect(k)).epsilon(1e-12));

  const auto six = full_space(synthetic_chain(6, 2.2, 0.4, 3), MasSchedule{62.8}, {1, 2, 3, 4, 5, 6});
  const Eigen::VectorXd z = six.total_z();
  for (double t : {0.0, 0.013, 0.07}) {
    const Mat H = six.dense(t);
    CHECK((H - H.adjoint()).norm() < 1e-12);
    CHECK((H * z.asDiagonal() - z.asDiagonal() * H).norm() < 1e-12);
  }
  CHECK_THROWS_AS(full_space(synthetic_chain(13, 2.0, 0.1, 1), stat), Error);
}
