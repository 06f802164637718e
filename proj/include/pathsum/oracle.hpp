#pragma once

#include <Eigen/Sparse>
#include <functional>
#include <vector>

#include "pathsum/graph.hpp"
#include "pathsum/many_body.hpp"

namespace pathsum {

using MatrixFn = std::function<Mat(double)>;

enum class PropagationMethod { rk4, expm_const };

struct PropagationRun {
  TimeGrid grid;
  PropagationMethod method = PropagationMethod::rk4;
  std::vector<Mat> U;  // U(t_i, t_0)
  int substeps = 1;    // RK4 steps per grid interval in the accepted run
  double refinement_gap = 0.0;
};

// U(t_i) from `substeps` classic RK4 steps per grid interval.
std::vector<Mat> rk4_fixed(const MatrixFn& H, const TimeGrid& grid, int substeps);
// Fixed-step RK4 for dU/dt = −i H U, halving the step until two successive runs agree to rtol.
PropagationRun propagate(const MatrixFn& H, const TimeGrid& grid, double rtol = 1e-10, int max_halvings = 12);
// e^{−i H t_i} by scaling and squaring.
PropagationRun expm_const(const Mat& H, const TimeGrid& grid);

// Partial sums S_0..S_max_length at time t of Σ_walks w_last ⋯ w_first t^ℓ/ℓ!, with w the
// (time-independent) edge weights of g. Throws when the walk count would exceed max_walks.
std::vector<Mat> walk_sum(const DynamicalGraph& g, int source, int target, int max_length, double t,
                          long long max_walks = 20'000'000);

using SparseMat = Eigen::SparseMatrix<cplx>;

// H^II + Σ offset_i I_z,i on the 2^N product basis; bit i of the index set means spin i up.
class FullSpaceHamiltonian {
 public:
  FullSpaceHamiltonian(CouplingSchedule couplings, std::vector<double> offsets);
  int spins() const { return n_; }
  int dim() const { return 1 << n_; }
  SparseMat operator()(double t) const;
  Mat dense(double t) const { return Mat((*this)(t)); }
  // Σ I_z,i as a diagonal.
  Eigen::VectorXd total_z() const;

 private:
  int n_;
  CouplingSchedule couplings_;
  std::vector<double> offsets_;
};

inline constexpr int kFullSpaceMaxSpins = 12;

FullSpaceHamiltonian full_space(const SpinGeometry& geom, const MasSchedule& mas, std::vector<double> offsets = {});
// Basis index of the state with only spin i up.
inline int single_excitation_state(int i) { return 1 << i; }

}  // namespace pathsum
