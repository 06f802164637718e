#pragma once

#include <array>
#include <complex>
#include <vector>

namespace pathsum {

using cplx = std::complex<double>;

enum class Quadrature { trapezoid, gregory4 };

struct TimeGrid {
  double t_min = 0.0;
  double t_max = 1.0;
  int n_points = 2;
  Quadrature rule = Quadrature::trapezoid;

  TimeGrid() = default;
  TimeGrid(double t_min, double t_max, int n_points, Quadrature rule = Quadrature::trapezoid);

  double step() const { return (t_max - t_min) / (n_points - 1); }
  double t(int i) const { return t_min + i * step(); }
  int order() const { return rule == Quadrature::trapezoid ? 2 : 4; }

  bool operator==(const TimeGrid& o) const {
    return t_min == o.t_min && t_max == o.t_max && n_points == o.n_points && rule == o.rule;
  }
  bool operator!=(const TimeGrid& o) const { return !(*this == o); }
};

// Weights (in units of h) of the rule on an interval spanning L steps.
// Long intervals use `edge` weights on the first/last `n_edge` nodes and 1 inside.
struct IntervalWeights {
  int L = 0;
  bool edged = false;
  int n_edge = 0;
  std::array<double, 3> edge{};  // edge[0] applies to the end nodes
  std::array<double, 6> small{};  // explicit weights when !edged (L <= 5)

  double operator[](int k) const;
};

IntervalWeights interval_weights(Quadrature rule, int L);

// Integral of samples v[lo..hi] over [t_lo, t_hi] with the grid rule.
template <class T>
T integrate_range(const IntervalWeights& w, const T* v, T zero) {
  T acc = zero;
  if (w.L == 0) return acc;
  if (!w.edged) {
    for (int k = 0; k <= w.L; ++k) acc += w.small[k] * v[k];
    return acc;
  }
  for (int k = 0; k <= w.L; ++k) acc += v[k];
  for (int e = 0; e < w.n_edge; ++e) {
    acc += (w.edge[e] - 1.0) * v[e];
    acc += (w.edge[e] - 1.0) * v[w.L - e];
  }
  return acc;
}

// Running integral C(t_k) = ∫_{t_0}^{t_k} v with C(t_0) = 0 (values in units of h).
// Under gregory4 each step uses a four-point interpolation stencil, so every
// increment is locally fifth order; trapezoid otherwise.
std::vector<cplx> cumulative_integral(Quadrature rule, const std::vector<cplx>& v);

}  // namespace pathsum
