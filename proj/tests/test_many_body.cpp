#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "pathsum/error.hpp"
#include "pathsum/many_body.hpp"
#include "pathsum/oracle.hpp"

using namespace pathsum;

namespace {

const MasSchedule kMas{2.0 * std::numbers::pi * 10.0};  // 10 kHz in rad/ms

double rotor_period() { return 2.0 * std::numbers::pi / kMas.omega_r; }

}  // namespace

TEST_CASE("geometry parsing") {
  const auto g = SpinGeometry::parse("# protons\nH1 0 0 0\nH2 1.5 0.0 0.2  # close pair\n\nH3 0 2 1\n");
  CHECK(g.size() == 3);
  CHECK(g.labels[1] == "H2");
  CHECK(g.positions[1].x() == 1.5);
  CHECK_THROWS_AS(SpinGeometry::parse("H1 0 0\nH2 1 1 1\n"), ParseError);
  CHECK_THROWS_AS(SpinGeometry::parse("H1 0 0 0 7\nH2 1 1 1\n"), ParseError);
  CHECK_THROWS_AS(SpinGeometry::parse("H1 0 0 0\nH2 0 0 0\n"), Error);
  CHECK_THROWS_AS(SpinGeometry::parse("H1 0 0 0\n"), Error);
  CHECK_THROWS_AS(SpinGeometry::read("/nonexistent/geometry.xyz"), ParseError);

  const std::string path = "test_geometry.xyz";
  std::ofstream(path) << "A 0 0 0\nB 0 0 2\n";
  CHECK(SpinGeometry::read(path).size() == 2);
  std::remove(path.c_str());
}

TEST_CASE("dipolar coupling schedule") {
  SpinGeometry g;
  g.positions = {{0, 0, 0}, {2, 0, 0}, {0, 0, 3}};
  const auto c = coupling_schedule(g, MasSchedule{});
  // Along x: ψ = π/2, φ = 0, so ξ = 1 at every time when static.
  CHECK(c.at(0.0)(0, 1) == doctest::Approx(kProtonDipolarPrefactor / 8.0 * 0.5));
  CHECK(c.at(5.0)(0, 1) == c.at(0.0)(0, 1));
  CHECK(c.at(0.0)(0, 2) == doctest::Approx(0.0).epsilon(1e-14));  // along the rotor axis
  CHECK(c.at(0.0)(1, 0) == c.at(0.0)(0, 1));
  CHECK(mas_xi(0.3, 1.1, 0.0) == doctest::Approx(2.0 * std::sqrt(2.0) * std::sin(0.3) * std::cos(0.3) * std::sin(1.1) +
                                                 std::sin(0.3) * std::sin(0.3) * std::cos(2.2)));
  // The MAS schedule is periodic with the rotor.
  const auto spun = coupling_schedule(synthetic_chain(4, 2.2, 0.4, 9), kMas);
  CHECK((spun.at(0.011) - spun.at(0.011 + rotor_period())).norm() < 1e-10);
  CHECK_THROWS_AS(CouplingSchedule(2, {}, MasSchedule{-1.0}), Error);
}

TEST_CASE("two-site flip-flop") {
  SpinGeometry g;
  g.positions = {{0, 0, 0}, {2, 0, 0}};
  const auto h = sector_hamiltonian(g, MasSchedule{});
  const double w = h.couplings.at(0.0)(0, 1);
  TimeGrid grid(0.0, 0.2, 401, Quadrature::gregory4);
  const auto r = spin_diffusion(h, {{0}, {1}}, kNoCutoff, 0, grid);
  double e = 0.0;
  for (int i = 0; i < grid.n_points; ++i) e = std::max(e, std::abs(r.probability[1][i] - std::pow(std::sin(w * grid.t(i) / 4), 2)));
  CHECK(e < 1e-8);

  auto hk = h;
  hk.keep_common_phase = true;
  const auto full = full_space(g, MasSchedule{});
  const Mat Hs = hk(0.0), Hf = full.dense(0.0);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) CHECK(std::abs(Hs(a, b) - Hf(1 << a, 1 << b)) < 1e-12);
}

TEST_CASE("sector propagator equals the restricted full-space one") {
  const auto g = synthetic_chain(6, 2.2, 0.4, 6);
  auto h = sector_hamiltonian(g, kMas, {3, -2, 0, 5, 1, -4});
  h.keep_common_phase = true;
  const auto full = full_space(g, kMas, {3, -2, 0, 5, 1, -4});
  TimeGrid grid(0.0, rotor_period(), 201);
  const auto Rs = propagate([&](double t) { return h(t); }, grid, 1e-11);
  const auto Rf = propagate([&](double t) { return full.dense(t); }, grid, 1e-11);
  double e = 0.0;
  for (int i = 0; i < grid.n_points; ++i)
    for (int a = 0; a < 6; ++a)
      for (int b = 0; b < 6; ++b)
        e = std::max(e, std::abs(Rs.U[i](a, b) - Rf.U[i](single_excitation_state(a), single_excitation_state(b))));
  CHECK(e < 1e-6);
  CHECK_THROWS_AS(sector_hamiltonian(g, kMas, {1, 2}), Error);
}

TEST_CASE("block graph cutoff") {
  const auto g = synthetic_dumbbell(3, 2.0, 7.0, 0.1, 4);
  const auto h = sector_hamiltonian(g, kMas);
  TimeGrid grid(0.0, rotor_period(), 101);
  const std::vector<std::vector<int>> part{{0}, {1}, {2}, {3}, {4}, {5}};
  std::size_t prev = 0;
  for (double lambda : {1.5, 3.0, 10.0, 100.0, 1000.0}) {
    const auto bg = block_graph(h, part, lambda, grid);
    CHECK(bg.edges.size() >= prev);
    CHECK(bg.edges.size() + bg.dropped.size() == 15);
    prev = bg.edges.size();
  }
  const auto tight = block_graph(h, part, 3.0, grid);
  CHECK(tight.components == 2);
  const auto open = block_graph(h, part, kNoCutoff, grid);
  CHECK(open.dropped.empty());
  CHECK(open.components == 1);
  CHECK(open.graph.edge_count() == 36);  // 30 couplings plus one self-loop per block
  CHECK_THROWS_AS(block_graph(h, part, 0.0, grid), Error);
  CHECK_THROWS_AS(block_graph(h, {{0, 1}, {1, 2, 3, 4, 5}}, 2.0, grid), Error);
  CHECK_THROWS_AS(block_graph(h, {{0, 1}, {2, 3, 4}}, 2.0, grid), Error);
}

TEST_CASE("spin diffusion against the oracle and across partitions") {
  const auto g = synthetic_chain(6, 2.2, 0.4, 6);
  const auto h = sector_hamiltonian(g, kMas);
  TimeGrid grid(0.0, rotor_period(), 501, Quadrature::gregory4);
  const auto whole = spin_diffusion(h, {{0, 1, 2, 3, 4, 5}}, kNoCutoff, 0, grid);
  const auto split = spin_diffusion(h, {{0, 1, 2}, {3, 4, 5}}, kNoCutoff, 0, grid);
  const auto R = propagate([&](double t) { return h(t); }, grid, 1e-11);
  double gap = 0.0, err = 0.0, cons = 0.0;
  for (int s = 0; s < 6; ++s)
    for (int i = 0; i < grid.n_points; ++i) {
      gap = std::max(gap, std::abs(whole.probability[s][i] - split.probability[s][i]));
      err = std::max(err, std::abs(split.probability[s][i] - std::norm(R.U[i](s, 0))));
    }
  for (double x : split.total) cons = std::max(cons, std::abs(x - 1.0));
  CHECK(gap < 1e-6);
  CHECK(err < 1e-6);
  CHECK(cons < 1e-6);
  CHECK_THROWS_AS(spin_diffusion(h, {{0, 1, 2}, {3, 4, 5}}, kNoCutoff, 6, grid), Error);
}

TEST_CASE("truncated Σ approximation") {
  const auto g = synthetic_chain(6, 2.0, 0.2, 5);
  const auto h = sector_hamiltonian(g, kMas);
  TimeGrid grid(0.0, 0.5 * rotor_period(), 301, Quadrature::gregory4);
  const std::vector<std::vector<int>> part{{0, 1}, {2, 3}, {4, 5}};
  const std::vector<std::string> labels{"A", "B", "C"};
  const auto exact = spin_diffusion(h, part, kNoCutoff, 0, grid);
  const auto approx = truncated_sigma_approximation(h, part, kNoCutoff, 0, grid, {"B"}, labels);
  double e = 0.0;
  for (int s = 0; s < 6; ++s)
    for (int i = 0; i < grid.n_points; ++i) e = std::max(e, std::abs(exact.probability[s][i] - approx.probability[s][i]));
  // C only reaches A through B; dropping its dressing of B is a small but visible change.
  CHECK(e > 1e-8);
  CHECK(e < 5e-2);
  CHECK_THROWS(truncated_sigma_approximation(h, part, kNoCutoff, 0, grid, {"D"}, labels));
}
