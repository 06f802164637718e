#include "pathsum/oracle.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include "pathsum/error.hpp"

namespace pathsum {

namespace {

constexpr cplx I(0.0, 1.0);

std::vector<Mat> rk4_steps(const MatrixFn& H, const TimeGrid& grid, int m) {
  const int d = static_cast<int>(H(grid.t(0)).rows());
  std::vector<Mat> U(grid.n_points);
  U[0] = Mat::Identity(d, d);
  Mat u = U[0];
  const double h = grid.step() / m;
  for (int i = 0; i + 1 < grid.n_points; ++i) {
    for (int s = 0; s < m; ++s) {
      const double t = grid.t(i) + s * h;
      const Mat Ha = H(t), Hb = H(t + 0.5 * h), Hc = H(t + h);
      const Mat k1 = -I * (Ha * u);
      const Mat k2 = -I * (Hb * (u + 0.5 * h * k1));
      const Mat k3 = -I * (Hb * (u + 0.5 * h * k2));
      const Mat k4 = -I * (Hc * (u + h * k3));
      u += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    U[i + 1] = u;
  }
  return U;
}

double max_gap(const std::vector<Mat>& a, const std::vector<Mat>& b) {
  double g = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) g = std::max(g, (a[i] - b[i]).cwiseAbs().maxCoeff());
  return g;
}

}  // namespace

std::vector<Mat> rk4_fixed(const MatrixFn& H, const TimeGrid& grid, int substeps) {
  if (substeps < 1) throw Error("RK4 needs at least one substep");
  return rk4_steps(H, grid, substeps);
}

PropagationRun propagate(const MatrixFn& H, const TimeGrid& grid, double rtol, int max_halvings) {
  const Mat H0 = H(grid.t(0));
  if (H0.rows() != H0.cols() || H0.rows() == 0) throw DimensionMismatch("propagate needs a square Hamiltonian");
  for (int i = 0; i < grid.n_points; ++i)
    if (!H(grid.t(i)).allFinite()) throw Error("Hamiltonian is not finite at t = " + std::to_string(grid.t(i)));

  // Start near h‖H‖ ≈ 0.1 so the first comparison is already meaningful.
  double scale = 0.0;
  for (int i = 0; i < grid.n_points; i += std::max(1, grid.n_points / 64))
    scale = std::max(scale, H(grid.t(i)).cwiseAbs().rowwise().sum().maxCoeff());
  int m = std::max(1, static_cast<int>(std::ceil(grid.step() * scale / 0.1)));
  std::vector<Mat> prev = rk4_steps(H, grid, m);
  for (int k = 0; k < max_halvings; ++k) {
    m *= 2;
    std::vector<Mat> next = rk4_steps(H, grid, m);
    const double gap = max_gap(prev, next);
    if (gap < rtol) return {grid, PropagationMethod::rk4, std::move(next), m, gap};
    prev = std::move(next);
  }
  throw Error("RK4 oracle did not reach rtol = " + std::to_string(rtol) + " after " + std::to_string(max_halvings) +
              " halvings");
}

PropagationRun expm_const(const Mat& H, const TimeGrid& grid) {
  if (H.rows() != H.cols()) throw DimensionMismatch("expm_const needs a square Hamiltonian");
  PropagationRun r{grid, PropagationMethod::expm_const, std::vector<Mat>(grid.n_points), 1, 0.0};
  for (int i = 0; i < grid.n_points; ++i) {
    r.U[i] = (-I * (grid.t(i) - grid.t(0)) * H).exp();
  }
  r.U[0] = Mat::Identity(H.rows(), H.cols());
  return r;
}

std::vector<Mat> walk_sum(const DynamicalGraph& g, int source, int target, int max_length, double t,
                          long long max_walks) {
  if (max_length < 0) throw Error("walk length must be non-negative");
  const TimeGrid& grid = g.grid();
  // Constant weights only: every edge sample must equal its first one.
  std::vector<std::vector<Mat>> w(g.size(), std::vector<Mat>(g.size()));
  int max_out = 0;
  for (int u = 0; u < g.size(); ++u) {
    max_out = std::max(max_out, static_cast<int>(g.successors(u).size()));
    for (int v : g.successors(u)) {
      const TwoTimeFunction& e = g.edge(u, v);
      w[u][v] = e.at(0, 0);
      for (int i = 1; i < grid.n_points; ++i)
        if ((e.at(i, 0) - w[u][v]).cwiseAbs().maxCoeff() > 1e-14 * (1.0 + w[u][v].cwiseAbs().maxCoeff()))
          throw Error("walk_sum needs time-independent edge weights");
    }
  }
  double count = 1.0;
  for (int l = 0; l < max_length; ++l) count *= std::max(1, max_out);
  if (count > static_cast<double>(max_walks))
    throw Error("walk enumeration exceeds the cap of " + std::to_string(max_walks) + " walks");

  std::vector<Mat> by_length(max_length + 1, Mat::Zero(g.dim(target), g.dim(source)));
  std::function<void(int, int, const Mat&)> dfs = [&](int u, int len, const Mat& prod) {
    if (u == target) by_length[len] += prod;
    if (len == max_length) return;
    for (int v : g.successors(u)) dfs(v, len + 1, w[u][v] * prod);
  };
  dfs(source, 0, Mat::Identity(g.dim(source), g.dim(source)));

  std::vector<Mat> partial(max_length + 1);
  double coeff = 1.0;
  Mat acc = Mat::Zero(g.dim(target), g.dim(source));
  for (int l = 0; l <= max_length; ++l) {
    if (l > 0) coeff *= t / l;
    acc += coeff * by_length[l];
    partial[l] = acc;
  }
  return partial;
}

FullSpaceHamiltonian::FullSpaceHamiltonian(CouplingSchedule couplings, std::vector<double> offsets)
    : n_(couplings.size()), couplings_(std::move(couplings)), offsets_(std::move(offsets)) {
  if (n_ < 1) throw Error("full space needs at least one spin");
  if (n_ > kFullSpaceMaxSpins) throw Error("full space limited to " + std::to_string(kFullSpaceMaxSpins) + " spins");
  if (!offsets_.empty() && static_cast<int>(offsets_.size()) != n_) throw Error("one offset per site expected");
}

Eigen::VectorXd FullSpaceHamiltonian::total_z() const {
  Eigen::VectorXd z(dim());
  for (int s = 0; s < dim(); ++s) {
    double m = 0.0;
    for (int i = 0; i < n_; ++i) m += (s >> i & 1) ? 0.5 : -0.5;
    z(s) = m;
  }
  return z;
}

SparseMat FullSpaceHamiltonian::operator()(double t) const {
  std::vector<Eigen::Triplet<cplx>> trip;
  const auto& pairs = couplings_.pairs();
  std::vector<double> w(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p) w[p] = couplings_.omega(pairs[p], t);
  for (int s = 0; s < dim(); ++s) {
    double diag = 0.0;
    for (int i = 0; i < n_; ++i)
      if (!offsets_.empty()) diag += offsets_[i] * ((s >> i & 1) ? 0.5 : -0.5);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const int bi = s >> pairs[p].i & 1, bj = s >> pairs[p].j & 1;
      // ω (I_iz I_jz − ¼(I_i⁺I_j⁻ + I_i⁻I_j⁺)), the secular dipolar pair term.
      diag += w[p] * (bi == bj ? 0.25 : -0.25);
      if (bi != bj) trip.emplace_back(s ^ (1 << pairs[p].i) ^ (1 << pairs[p].j), s, -0.25 * w[p]);
    }
    trip.emplace_back(s, s, diag);
  }
  SparseMat H(dim(), dim());
  H.setFromTriplets(trip.begin(), trip.end());
  return H;
}

FullSpaceHamiltonian full_space(const SpinGeometry& geom, const MasSchedule& mas, std::vector<double> offsets) {
  if (geom.size() > kFullSpaceMaxSpins)
    throw Error("full space limited to " + std::to_string(kFullSpaceMaxSpins) + " spins");
  return FullSpaceHamiltonian(coupling_schedule(geom, mas), std::move(offsets));
}

}  // namespace pathsum
