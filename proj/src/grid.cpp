#include "pathsum/grid.hpp"

#include <cmath>

#include "pathsum/error.hpp"

namespace pathsum {

TimeGrid::TimeGrid(double a, double b, int n, Quadrature q) : t_min(a), t_max(b), n_points(n), rule(q) {
  if (n < 2) throw Error("TimeGrid needs at least 2 points");
  if (!(b > a) || !std::isfinite(a) || !std::isfinite(b)) throw Error("TimeGrid needs t_max > t_min");
}

double IntervalWeights::operator[](int k) const {
  if (!edged) return small[k];
  if (k < n_edge) return edge[k];
  if (L - k < n_edge) return edge[L - k];
  return 1.0;
}

IntervalWeights interval_weights(Quadrature rule, int L) {
  IntervalWeights w;
  w.L = L;
  if (L <= 0) return w;
  if (rule == Quadrature::trapezoid) {
    w.edged = true;
    w.n_edge = 1;
    w.edge = {0.5, 0.0, 0.0};
    return w;
  }
  switch (L) {
    case 1: w.small = {0.5, 0.5}; return w;
    case 2: w.small = {1.0 / 3, 4.0 / 3, 1.0 / 3}; return w;
    case 3: w.small = {3.0 / 8, 9.0 / 8, 9.0 / 8, 3.0 / 8}; return w;
    case 4: w.small = {14.0 / 45, 64.0 / 45, 24.0 / 45, 64.0 / 45, 14.0 / 45}; return w;
    default: break;
  }
  w.edged = true;
  w.n_edge = 3;
  w.edge = {3.0 / 8, 7.0 / 6, 23.0 / 24};
  return w;
}

std::vector<cplx> cumulative_integral(Quadrature rule, const std::vector<cplx>& v) {
  const int n = static_cast<int>(v.size());
  std::vector<cplx> c(n, 0.0);
  if (rule == Quadrature::trapezoid || n < 4) {
    for (int k = 1; k < n; ++k) c[k] = c[k - 1] + 0.5 * (v[k - 1] + v[k]);
    return c;
  }
  for (int k = 1; k < n; ++k) {
    cplx inc;
    if (k == 1)
      inc = (9.0 * v[0] + 19.0 * v[1] - 5.0 * v[2] + v[3]) / 24.0;
    else if (k == n - 1)
      inc = (v[n - 4] - 5.0 * v[n - 3] + 19.0 * v[n - 2] + 9.0 * v[n - 1]) / 24.0;
    else
      inc = (-v[k - 2] + 13.0 * v[k - 1] + 13.0 * v[k] - v[k + 1]) / 24.0;
    c[k] = c[k - 1] + inc;
  }
  return c;
}

}  // namespace pathsum
