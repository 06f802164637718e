#pragma once

#include <optional>
#include <vector>

#include "pathsum/star.hpp"

namespace pathsum {

// G = (1_* − K)^{∗−1}: solves g = K + K ∗ g on the grid by forward substitution.
TwoTimeFunction solve_direct(const TwoTimeFunction& K);
// Only the t_j column of the resolvent; O(n^2) instead of O(n^3).
Column solve_column(const TwoTimeFunction& K, int j = 0);

// max |G − (1_* + K ∗ G)| with the grid's own quadrature.
double volterra_residual(const TwoTimeFunction& K, const TwoTimeFunction& G);

struct NeumannTrace {
  std::vector<TwoTimeFunction> partial_sums;  // G^(0..n), or only G^(n) when not kept
  std::vector<double> residuals;              // ‖G^(k) − G^(k−1)‖_max, residuals[0] = 0
  const TwoTimeFunction& result() const { return partial_sums.back(); }
};

struct NeumannColumnTrace {
  std::vector<Column> partial_sums;
  std::vector<double> residuals;
  const Column& result() const { return partial_sums.back(); }
};

NeumannTrace neumann(const TwoTimeFunction& K, int order, bool keep_partial_sums = true);
// Stops at the first order whose residual falls below `tol` (or at max_order).
NeumannTrace neumann_auto(const TwoTimeFunction& K, double tol, int max_order = 64);
NeumannColumnTrace neumann_column(const TwoTimeFunction& K, int order, int j = 0);

// (Σ_{k≤n} T^{∗k}) ∗ G1 ∗ G2 with T = δ − G1∗G2 + G1∗G2∗(K1+K2).
TwoTimeFunction accelerated(const TwoTimeFunction& K1, const TwoTimeFunction& K2, int order,
                            const std::optional<TwoTimeFunction>& G1 = std::nullopt,
                            const std::optional<TwoTimeFunction>& G2 = std::nullopt);

// δ·Id + K(t') exp(∫_t^{t'} K) for a one-time family K(τ) that commutes with itself.
TwoTimeFunction closed_form_G(const TimeGrid& grid, int m, const std::function<Mat(double)>& K,
                              double commutator_tol = 1e-10);
// max ‖[K(t_a), K(t_b)]‖ / max ‖K‖² on a coarse lattice of the grid.
double commutator_defect(const TimeGrid& grid, const std::function<Mat(double)>& K, int lattice = 17);

}  // namespace pathsum
