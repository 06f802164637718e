#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "pathsum/star.hpp"

namespace pathsum {

using ScalarFn = std::function<cplx(double)>;

// H(t) = [[h_up, h_updown], [h_downup, h_down]] in the basis (↑, ↓).
struct TwoLevelHamiltonian {
  ScalarFn h_up, h_down, h_updown, h_downup;
  bool hermitian = false;

  Mat matrix(double t) const;
  // Samples every entry on the grid: finite, and Hermitian structure when flagged.
  void validate(const TimeGrid& grid) const;
};

struct BlochSiegertParams {
  double beta = 0.0;
  double omega = 1.0;
  double omega0 = 1.0;

  bool resonant() const;  // |ω − ω0| < 1e-8 ω
  void validate() const;
};

// [[ω0/2, 2β cos ωt], [2β cos ωt, −ω0/2]]
TwoLevelHamiltonian bloch_siegert_lab(const BlochSiegertParams& p);
// Interaction frame with zero diagonal; h_updown = 2β cos(ωt) e^{−iω0 t}.
TwoLevelHamiltonian bloch_siegert_rotating(const BlochSiegertParams& p);

struct KernelPair {
  TwoTimeFunction up;
  TwoTimeFunction down;
};

// K_up = w_up + w_updown ∗ F_down ∗ w_downup with w = −i h and F = (1_* − w)^{∗−1}.
KernelPair general_kernel(const TwoLevelHamiltonian& h, const TimeGrid& grid);
// Printed closed forms (generic and resonant branches).
KernelPair bs_kernel(const BlochSiegertParams& p, const TimeGrid& grid);
cplx bs_kernel_up(const BlochSiegertParams& p, double tp, double t);
cplx bs_kernel_down(const BlochSiegertParams& p, double tp, double t);

enum class TwoLevelMethod { direct, neumann };

struct TwoLevelSolution {
  TimeGrid grid;
  std::vector<Eigen::Matrix2cd> U;  // U(t_i, t_0)
};

TwoLevelSolution solve_2x2(const TwoLevelHamiltonian& h, const TimeGrid& grid,
                           TwoLevelMethod method = TwoLevelMethod::direct, int order = 13);

// P^(n)(t_i) = |U^(n)_{↓↑}(t_i)|² from the order-n Neumann sum of the closed-form K_up.
std::vector<double> transition_probability(const BlochSiegertParams& p, const TimeGrid& grid, int order);
// Order-0 resonant closed form.
double transition_probability_order0(const BlochSiegertParams& p, double t);

struct SpinFlipTime {
  double t = 0.0;
  bool radical = true;  // false: numeric argmax fallback
};

// NaN once the inner radicand turns negative (β/ω above ≈ 0.4927).
double spin_flip_radical(const BlochSiegertParams& p);
double spin_flip_branch_bound();  // 2 sqrt((11 − √30)/91)
// Radical when valid, otherwise the argmax of P^(order) over its first excursion above 1/2.
SpinFlipTime spin_flip_time(const BlochSiegertParams& p, int fallback_order = 13, int fallback_points = 4001);

// Time of the maximum of a sampled P over its first excursion above 1/2 (NaN if none).
double first_peak_time(const std::vector<double>& t, const std::vector<double>& P);

}  // namespace pathsum
