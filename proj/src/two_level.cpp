#include "pathsum/two_level.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "pathsum/error.hpp"
#include "pathsum/volterra.hpp"

namespace pathsum {

namespace {

constexpr cplx I(0.0, 1.0);

cplx eval_or_zero(const ScalarFn& f, double t) { return f ? f(t) : cplx(0.0); }

bool is_zero_fn(const ScalarFn& f, const TimeGrid& grid) {
  if (!f) return true;
  for (int i = 0; i < grid.n_points; ++i)
    if (f(grid.t(i)) != 0.0) return false;
  return true;
}

TwoTimeFunction weight(const ScalarFn& h, const TimeGrid& grid) {
  return TwoTimeFunction::lift_scalar(grid, [&](double t) { return -I * eval_or_zero(h, t); });
}

// F = δ + w(t') exp(∫_t^{t'} w), the exact resolvent of a one-time scalar weight.
TwoTimeFunction self_loop_resolvent(const ScalarFn& h, const TimeGrid& grid) {
  if (is_zero_fn(h, grid)) return TwoTimeFunction::identity(grid, 1);
  return closed_form_G(grid, 1, [&](double t) { return Mat::Constant(1, 1, -I * h(t)); });
}

TwoTimeFunction dressed_kernel(const ScalarFn& diag, const ScalarFn& out, const ScalarFn& back,
                               const ScalarFn& other_diag, const TimeGrid& grid) {
  TwoTimeFunction K = weight(diag, grid);
  if (is_zero_fn(out, grid) || is_zero_fn(back, grid)) return K;
  const TwoTimeFunction F = self_loop_resolvent(other_diag, grid);
  return K + star_product(weight(out, grid), star_product(F, weight(back, grid)));
}

}  // namespace

Mat TwoLevelHamiltonian::matrix(double t) const {
  Mat m(2, 2);
  m << eval_or_zero(h_up, t), eval_or_zero(h_updown, t), eval_or_zero(h_downup, t), eval_or_zero(h_down, t);
  return m;
}

void TwoLevelHamiltonian::validate(const TimeGrid& grid) const {
  for (int i = 0; i < grid.n_points; ++i) {
    const Mat m = matrix(grid.t(i));
    if (!m.allFinite()) throw Error("two-level Hamiltonian is not finite at t = " + std::to_string(grid.t(i)));
    if (hermitian && (m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + m.cwiseAbs().maxCoeff()))
      throw Error("two-level Hamiltonian flagged Hermitian is not at t = " + std::to_string(grid.t(i)));
  }
}

bool BlochSiegertParams::resonant() const { return std::abs(omega - omega0) < 1e-8 * omega; }

void BlochSiegertParams::validate() const {
  if (!(omega > 0.0)) throw Error("Bloch-Siegert drive frequency must be positive");
  if (!(beta >= 0.0)) throw Error("Bloch-Siegert amplitude must be non-negative");
  if (!std::isfinite(omega0)) throw Error("Bloch-Siegert splitting must be finite");
}

TwoLevelHamiltonian bloch_siegert_lab(const BlochSiegertParams& p) {
  p.validate();
  TwoLevelHamiltonian h;
  h.h_up = [p](double) { return cplx(p.omega0 / 2); };
  h.h_down = [p](double) { return cplx(-p.omega0 / 2); };
  h.h_updown = [p](double t) { return cplx(2 * p.beta * std::cos(p.omega * t)); };
  h.h_downup = h.h_updown;
  h.hermitian = true;
  return h;
}

TwoLevelHamiltonian bloch_siegert_rotating(const BlochSiegertParams& p) {
  p.validate();
  TwoLevelHamiltonian h;
  h.h_updown = [p](double t) { return 2 * p.beta * std::cos(p.omega * t) * std::exp(-I * p.omega0 * t); };
  h.h_downup = [p](double t) { return 2 * p.beta * std::cos(p.omega * t) * std::exp(I * p.omega0 * t); };
  h.hermitian = true;
  return h;
}

KernelPair general_kernel(const TwoLevelHamiltonian& h, const TimeGrid& grid) {
  h.validate(grid);
  return {dressed_kernel(h.h_up, h.h_updown, h.h_downup, h.h_down, grid),
          dressed_kernel(h.h_down, h.h_downup, h.h_updown, h.h_up, grid)};
}

cplx bs_kernel_up(const BlochSiegertParams& p, double tp, double t) {
  const double b = p.beta, w = p.omega, w0 = p.omega0;
  if (p.resonant())
    return (b * b / w) * (I * std::exp(2.0 * I * w * tp) - I * std::exp(2.0 * I * w * t) - 2.0 * w * (tp - t)) *
           std::exp(-I * w * tp) * std::cos(w * tp);
  auto k = [&](double s) { return I * w0 * std::cos(w * s) + w * std::sin(w * s); };
  return (4 * b * b / (w * w - w0 * w0)) * std::cos(w * tp) * (k(t) * std::exp(-I * w0 * (tp - t)) - k(tp));
}

cplx bs_kernel_down(const BlochSiegertParams& p, double tp, double t) {
  const double b = p.beta, w = p.omega, w0 = p.omega0;
  if (p.resonant())
    return (b * b / w) * (-I + I * std::exp(2.0 * I * (tp - t) * w) + 2.0 * w * (t - tp) * std::exp(2.0 * I * w * tp)) *
           std::exp(-I * w * tp) * std::cos(w * tp);
  auto k = [&](double s) { return std::exp(2.0 * I * w * s) * (w + w0) - (w - w0); };
  return (I * b * b / (w * w - w0 * w0)) * (1.0 + std::exp(-2.0 * I * w * tp)) *
         (k(tp) - k(t) * std::exp(I * (w + w0) * (tp - t)));
}

KernelPair bs_kernel(const BlochSiegertParams& p, const TimeGrid& grid) {
  p.validate();
  return {TwoTimeFunction::lift_scalar(grid, [&](double tp, double t) { return bs_kernel_up(p, tp, t); }),
          TwoTimeFunction::lift_scalar(grid, [&](double tp, double t) { return bs_kernel_down(p, tp, t); })};
}

TwoLevelSolution solve_2x2(const TwoLevelHamiltonian& h, const TimeGrid& grid, TwoLevelMethod method, int order) {
  const KernelPair K = general_kernel(h, grid);
  auto green = [&](const TwoTimeFunction& k) {
    return method == TwoLevelMethod::direct ? solve_column(k, 0) : neumann_column(k, order, 0).result();
  };
  const Column Gu = green(K.up), Gd = green(K.down);
  const auto uu = integrate_column(Gu), dd = integrate_column(Gd);
  std::vector<Mat> du(grid.n_points, Mat::Zero(1, 1)), ud(grid.n_points, Mat::Zero(1, 1));
  if (!is_zero_fn(h.h_downup, grid))
    du = integrate_column(star_apply(self_loop_resolvent(h.h_down, grid), star_apply(weight(h.h_downup, grid), Gu)));
  if (!is_zero_fn(h.h_updown, grid))
    ud = integrate_column(star_apply(self_loop_resolvent(h.h_up, grid), star_apply(weight(h.h_updown, grid), Gd)));
  TwoLevelSolution s{grid, std::vector<Eigen::Matrix2cd>(grid.n_points)};
  for (int i = 0; i < grid.n_points; ++i) s.U[i] << uu[i](0, 0), ud[i](0, 0), du[i](0, 0), dd[i](0, 0);
  return s;
}

std::vector<double> transition_probability(const BlochSiegertParams& p, const TimeGrid& grid, int order) {
  p.validate();
  if (order < 0) throw Error("transition probability order must be non-negative");
  Column G(grid, 1, 1, 0);
  G.delta = Mat::Identity(1, 1);
  G.has_delta = true;
  if (order > 0) {
    const TwoTimeFunction K = TwoTimeFunction::lift_scalar(grid, [&](double tp, double t) { return bs_kernel_up(p, tp, t); });
    G = neumann_column(K, order, 0).result();
  }
  // U_{↓↑}(t) = ∫_0^t w_{↓↑}(τ1) ∫_0^{τ1} G(τ0, 0) dτ0 dτ1
  const auto inner = integrate_column(G);
  std::vector<cplx> v(grid.n_points);
  for (int i = 0; i < grid.n_points; ++i) {
    const double t = grid.t(i);
    v[i] = -2.0 * I * p.beta * std::cos(p.omega * t) * std::exp(I * p.omega0 * t) * inner[i](0, 0);
  }
  const auto U = cumulative_integral(grid.rule, v);
  std::vector<double> P(grid.n_points);
  const double h = grid.step();
  for (int i = 0; i < grid.n_points; ++i) P[i] = std::norm(h * U[i]);
  P[0] = 0.0;
  return P;
}

double transition_probability_order0(const BlochSiegertParams& p, double t) {
  const double b2 = p.beta * p.beta, w = p.omega;
  return b2 * t / w * std::sin(2 * w * t) + b2 / (2 * w * w) + b2 * t * t - b2 / (2 * w * w) * std::cos(2 * w * t);
}

double spin_flip_branch_bound() { return 2.0 * std::sqrt((11.0 - std::sqrt(30.0)) / 91.0); }

double spin_flip_radical(const BlochSiegertParams& p) {
  if (!(p.beta > 0.0)) throw Error("spin-flip time needs β > 0");
  const double b = p.beta, w = p.omega;
  const double b2 = b * b, b4 = b2 * b2, w2 = w * w;
  const double inner = 91 * b4 * b4 - 88 * b4 * b2 * w2 + 16 * b4 * w2 * w2;
  if (inner < 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double outer = 12 / b2 - 15 / w2 + std::sqrt(3.0) / (b4 * w2) * std::sqrt(inner);
  if (outer < 0.0) return std::numeric_limits<double>::quiet_NaN();
  return std::sqrt(outer) / (2 * std::sqrt(2.0));
}

double first_peak_time(const std::vector<double>& t, const std::vector<double>& P) {
  std::size_t k = 0;
  while (k < P.size() && P[k] <= 0.5) ++k;
  if (k == P.size()) return std::numeric_limits<double>::quiet_NaN();
  std::size_t best = k;
  for (; k < P.size() && P[k] > 0.5; ++k)
    if (P[k] > P[best]) best = k;
  return t[best];
}

SpinFlipTime spin_flip_time(const BlochSiegertParams& p, int fallback_order, int fallback_points) {
  p.validate();
  if (!p.resonant()) throw Error("spin-flip time is defined for the resonant case");
  const double r = spin_flip_radical(p);
  if (std::isfinite(r)) return {r, true};
  // The first flip completes near βt = π/2; scan a little beyond it.
  const TimeGrid grid(0.0, 1.5 * std::numbers::pi / p.beta, fallback_points, Quadrature::gregory4);
  const auto P = transition_probability(p, grid, fallback_order);
  std::vector<double> t(grid.n_points);
  for (int i = 0; i < grid.n_points; ++i) t[i] = grid.t(i);
  return {first_peak_time(t, P), false};
}

}  // namespace pathsum
