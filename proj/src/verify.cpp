#include "pathsum/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "pathsum/error.hpp"
#include "pathsum/graph.hpp"
#include "pathsum/many_body.hpp"
#include "pathsum/oracle.hpp"
#include "pathsum/two_level.hpp"
#include "pathsum/volterra.hpp"

namespace pathsum {

namespace {

Mat random_hermitian(int n, std::mt19937& rng) {
  std::normal_distribution<double> d;
  Mat a(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) a(r, c) = cplx(d(rng), d(rng));
  const Mat h = 0.5 * (a + a.adjoint());
  return h / h.operatorNorm();
}

std::vector<std::vector<int>> singletons(int n) {
  std::vector<std::vector<int>> p;
  for (int k = 0; k < n; ++k) p.push_back({k});
  return p;
}

VerifyCheck below(std::string name, double measured, double tol, std::string detail = {}) {
  return {std::move(name), std::isfinite(measured) && measured < tol, measured, tol, std::move(detail)};
}

// Smooth 2×2 two-time functions that do not commute with each other.
TwoTimeFunction smooth(const TimeGrid& g, int which) {
  return TwoTimeFunction::lift(g, 2, 2, [which](double tp, double t) {
    Mat m(2, 2);
    if (which == 0) m << std::cos(tp - t), cplx(0.0, 0.3 * t), 0.5, std::sin(tp);
    else if (which == 1) m << cplx(0.2, tp * t), std::sin(tp + 2 * t), std::cos(t), -0.4;
    else m << std::exp(cplx(0.0, tp - 0.5 * t)), 0.1 * tp, cplx(0.0, -0.7), std::cos(2 * tp);
    return m;
  });
}

double associativity_defect(const TimeGrid& g) {
  const auto a = smooth(g, 0), b = smooth(g, 1), c = smooth(g, 2);
  return max_distance(star_product(star_product(a, b), c), star_product(a, star_product(b, c)));
}

// Discretization tolerance for propagator-level checks: scale·(h·‖H‖)^p.
double grid_tolerance(const TimeGrid& g, double scale, double h_norm = 1.0) {
  return std::max(1e-9, scale * std::pow(g.step() * h_norm, g.order()));
}

}  // namespace

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.passed; });
}

VerifyReport run_verify(const VerifyOptions& opt) {
  if (opt.grid_points < 11) throw Error("verify needs at least 11 grid points");
  std::mt19937 rng(opt.seed);
  VerifyReport rep;
  const int n = opt.grid_points;

  {
    // Halving h must shrink the defect by about 2^p.
    const TimeGrid coarse(0.0, 2.0, n, opt.rule), fine(0.0, 2.0, 2 * n - 1, opt.rule);
    const double e1 = associativity_defect(coarse), e2 = associativity_defect(fine);
    // Measured pointwise, where the Gregory rule is O(h^3) next to the diagonal.
    const int p = coarse.order() == 2 ? 2 : 3;
    const double ratio = e1 / e2, expect = std::pow(2.0, p), lo = 0.75 * expect;
    char buf[160];
    std::snprintf(buf, sizeof buf, "defect %.3e at n=%d, %.3e at n=%d, ratio %.2f, expected %.0f", e1, n, e2, 2 * n - 1,
                  ratio, expect);
    rep.checks.push_back({"associativity refinement", ratio > lo && ratio < 1.5 * expect, ratio, lo, buf});
  }

  {
    const TimeGrid g(0.0, 2.0, n, opt.rule);
    const auto K = smooth(g, 0) + smooth(g, 1);
    const auto G = solve_direct(K);
    rep.checks.push_back(below("volterra residual (direct)", volterra_residual(K, G), 1e-10));
    const Column c = solve_column(K, n / 3);
    double gap = 0.0;
    for (int i = n / 3; i < n; ++i) gap = std::max(gap, (c.at(i) - G.at(i, n / 3)).cwiseAbs().maxCoeff());
    rep.checks.push_back(below("volterra column solve", gap, 1e-10));
    const auto N = neumann_auto(K, 1e-12, 80);
    rep.checks.push_back(below("neumann converges to direct", max_distance(N.result(), G), 1e-9,
                               "order " + std::to_string(N.partial_sums.size() - 1)));
  }

  {
    TwoLevelHamiltonian h;
    h.h_up = [](double t) { return cplx(0.3 + 0.4 * std::cos(1.3 * t)); };
    h.h_down = [](double t) { return cplx(-0.2 + 0.5 * std::sin(0.7 * t)); };
    h.h_updown = [](double t) { return cplx(0.6 * std::cos(t), 0.3 * std::sin(0.5 * t)); };
    h.h_downup = [](double t) { return cplx(0.6 * std::cos(t), -0.3 * std::sin(0.5 * t)); };
    h.hermitian = true;
    const TimeGrid g(0.0, 5.0, n, opt.rule);
    const auto s = solve_2x2(h, g);
    double u = 0.0;
    for (const auto& U : s.U) u = std::max(u, (U.adjoint() * U - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff());
    rep.checks.push_back(below("unitarity (2x2 solution)", u, grid_tolerance(g, 20.0)));
  }

  {
    const TimeGrid g(0.0, 2.0, n, opt.rule);
    double worst = 0.0, unit = 0.0;
    int depth = 0;
    for (int trial = 0; trial < 3; ++trial) {
      const Mat A = random_hermitian(4, rng), B = random_hermitian(4, rng);
      const auto G = DynamicalGraph::from_hamiltonian([&](double t) { return Mat(A + std::cos(2.0 * t) * B); },
                                                      singletons(4), g);
      const auto base = evaluate(green_function(G, 0, 2), G);
      std::vector<int> order{0, 1, 2, 3};
      for (int p = 0; p < 3; ++p) {
        std::shuffle(order.begin(), order.end(), rng);
        GreenOptions o;
        o.construction = Construction::vertex_elimination;
        o.elimination_order = order;
        const auto e = green_function(G, 0, 2, o);
        depth = std::max(depth, e.depth());
        worst = std::max(worst, max_distance(evaluate(e, G), base));
      }
      if (trial == 0)
        for (const auto& U : full_propagator(G))
          unit = std::max(unit, (U.adjoint() * U - Mat::Identity(4, 4)).cwiseAbs().maxCoeff());
    }
    rep.checks.push_back(below("elimination-order invariance", worst, grid_tolerance(g, 50.0)));
    rep.checks.push_back({"ladder depth <= |V|", depth <= 4, double(depth), 4.0, {}});
    rep.checks.push_back(below("unitarity (4-vertex path sum)", unit, grid_tolerance(g, 20.0)));
  }

  {
    const Mat Hc = random_hermitian(3, rng);
    const TimeGrid g(0.0, 1.0, n, opt.rule);
    const auto G = DynamicalGraph::from_hamiltonian([&](double) { return Hc; }, singletons(3), g);
    const auto U = propagator_block(G, 0, 2);
    const auto w = walk_sum(G, 0, 2, 14, g.t_max);
    rep.checks.push_back(below("walk sum vs path sum", std::abs(w.back()(0, 0) - U.back()(0, 0)), grid_tolerance(g, 20.0)));
  }

  {
    const MasSchedule mas{2.0 * 3.141592653589793 * 10.0};
    const auto geom = synthetic_chain(4, 2.2, 0.4, opt.seed);
    const std::vector<double> offsets{3.0, -2.0, 0.5, 4.0};
    auto h = sector_hamiltonian(geom, mas, offsets);
    h.keep_common_phase = true;
    const auto full = full_space(geom, mas, offsets);
    const TimeGrid g(0.0, 0.1, 51);
    const auto Rs = propagate([&](double t) { return h(t); }, g, 1e-11);
    const auto Rf = propagate([&](double t) { return full.dense(t); }, g, 1e-11);
    double e = 0.0;
    for (int i = 0; i < g.n_points; ++i)
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          e = std::max(e, std::abs(Rs.U[i](a, b) - Rf.U[i](single_excitation_state(a), single_excitation_state(b))));
    rep.checks.push_back(below("sector / full-space equivalence", e, 1e-8));

    h.keep_common_phase = false;
    const TimeGrid gd(0.0, 0.1, n, opt.rule);
    double h_norm = 0.0;
    for (int i = 0; i < gd.n_points; i += 10) h_norm = std::max(h_norm, h(gd.t(i)).cwiseAbs().maxCoeff());
    const auto whole = spin_diffusion(h, {{0, 1, 2, 3}}, kNoCutoff, 0, gd);
    const auto split = spin_diffusion(h, {{0, 1}, {2}, {3}}, kNoCutoff, 0, gd);
    double gap = 0.0, cons = 0.0;
    for (int s = 0; s < 4; ++s)
      for (int i = 0; i < gd.n_points; ++i) gap = std::max(gap, std::abs(whole.probability[s][i] - split.probability[s][i]));
    for (double x : split.total) cons = std::max(cons, std::abs(x - 1.0));
    rep.checks.push_back(below("partition invariance", gap, grid_tolerance(gd, 1.0, h_norm)));
    rep.checks.push_back(below("excitation conservation", cons, grid_tolerance(gd, 1.0, h_norm)));
  }
  return rep;
}

std::string format_report(const VerifyReport& r) {
  std::ostringstream os;
  for (const auto& c : r.checks) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s  %-34s measured %.3e  tolerance %.3e", c.passed ? "PASS" : "FAIL", c.name.c_str(),
                  c.measured, c.tolerance);
    os << buf;
    if (!c.detail.empty()) os << "  (" << c.detail << ")";
    os << '\n';
  }
  return os.str();
}

}  // namespace pathsum
