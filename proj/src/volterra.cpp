#include "pathsum/volterra.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

#include "pathsum/error.hpp"

namespace pathsum {

namespace {

using Profile = TwoTimeFunction::Profile;

void require_resolvent_kernel(const TwoTimeFunction& K) {
  if (K.rows() != K.cols()) throw DimensionMismatch("resolvent kernel must be square");
  if (K.has_delta()) throw Error("resolvent kernel must have a zero delta part");
}

// (Id − c·K(t_i,t_i))^{-1} for the few distinct end weights c of the rule.
class DiagonalSolver {
 public:
  DiagonalSolver(const TwoTimeFunction& K, int i) : m_(K.rows()), kii_(K.at(i, i)), h_(K.grid().step()) {}

  const Mat& inverse(double w) {
    for (auto& [key, inv] : cache_)
      if (key == w) return inv;
    const Mat M = Mat::Identity(m_, m_) - h_ * w * kii_;
    Eigen::PartialPivLU<Mat> lu(M);
    const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    if (!(std::abs(lu.determinant()) > 1e-12 * std::pow(scale, m_)) || lu.rcond() < 1e-12)
      throw StepSizeError("singular implicit Volterra step (Id − h·w·K(t,t) not invertible)");
    cache_.emplace_back(w, lu.inverse());
    return cache_.back().second;
  }

 private:
  int m_;
  Mat kii_;
  double h_;
  std::vector<std::pair<double, Mat>> cache_;
};

// Solves one column; g[k - j] receives g(t_k, t_j) as m×m blocks (row-major).
void solve_one_column(const TwoTimeFunction& K, int j, std::vector<DiagonalSolver>& diag,
                      std::vector<cplx>& g) {
  const TimeGrid& grid = K.grid();
  const int n = grid.n_points, m = K.rows(), mm = m * m;
  const double h = grid.step();
  g.assign(static_cast<std::size_t>(n - j) * mm, cplx(0.0));
  std::copy(K.block(j, j), K.block(j, j) + mm, g.data());

  const bool scalar = (m == 1);
  const bool row = K.profile() == Profile::row;
  std::vector<cplx> prefix(mm, 0.0), acc(mm), rhs(mm);
  if (row) std::copy(g.data(), g.data() + mm, prefix.data());

  for (int i = j + 1; i < n; ++i) {
    const int L = i - j;
    const IntervalWeights w = interval_weights(grid.rule, L);
    // acc = Σ_{k=j}^{i-1} w_k K(t_i,t_k) g(t_k,t_j)
    std::fill(acc.begin(), acc.end(), cplx(0.0));
    if (row) {
      // K(t_i, ·) is constant: contract the weighted sum of g first.
      std::vector<cplx> sum(mm, 0.0);
      if (!w.edged) {
        for (int k = 0; k < L; ++k)
          for (int e = 0; e < mm; ++e) sum[e] += w.small[k] * g[k * mm + e];
      } else {
        sum = prefix;
        for (int e2 = 0; e2 < w.n_edge; ++e2) {
          for (int e = 0; e < mm; ++e) sum[e] += (w.edge[e2] - 1.0) * g[e2 * mm + e];
          if (e2 > 0)
            for (int e = 0; e < mm; ++e) sum[e] += (w.edge[e2] - 1.0) * g[(L - e2) * mm + e];
        }
      }
      const cplx* Ki = K.block(i, 0);
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
          for (int d = 0; d < m; ++d) acc[a * m + d] += Ki[a * m + b] * sum[b * m + d];
    } else if (scalar) {
      const cplx* Kr = K.block(i, j);
      if (!w.edged) {
        for (int k = 0; k < L; ++k) acc[0] += w.small[k] * Kr[k] * g[k];
      } else {
        // Unit weights first, then the end corrections (the k = L end is implicit).
        double sr = 0.0, si = 0.0;
        for (int k = 0; k < L; ++k) {
          const double ar = Kr[k].real(), ai = Kr[k].imag(), br = g[k].real(), bi = g[k].imag();
          sr += ar * br - ai * bi;
          si += ar * bi + ai * br;
        }
        acc[0] = cplx(sr, si);
        for (int e = 0; e < w.n_edge; ++e) {
          acc[0] += (w.edge[e] - 1.0) * Kr[e] * g[e];
          if (e > 0) acc[0] += (w.edge[e] - 1.0) * Kr[L - e] * g[L - e];
        }
      }
    } else {
      for (int k = 0; k < L; ++k) {
        const cplx* Kb = K.block(i, j + k);
        const cplx* gb = &g[k * mm];
        const double wk = w[k];
        for (int a = 0; a < m; ++a)
          for (int b = 0; b < m; ++b) {
            const cplx x = wk * Kb[a * m + b];
            for (int d = 0; d < m; ++d) acc[a * m + d] += x * gb[b * m + d];
          }
      }
    }
    const cplx* Kij = K.block(i, j);
    for (int e = 0; e < mm; ++e) rhs[e] = Kij[e] + h * acc[e];
    const Mat& inv = diag[i].inverse(w[L]);
    cplx* gi = &g[static_cast<std::size_t>(L) * mm];
    for (int a = 0; a < m; ++a)
      for (int d = 0; d < m; ++d) {
        cplx s = 0.0;
        for (int b = 0; b < m; ++b) s += inv(a, b) * rhs[b * m + d];
        gi[a * m + d] = s;
      }
    if (row)
      for (int e = 0; e < mm; ++e) prefix[e] += gi[e];
  }
}

std::vector<DiagonalSolver> make_diagonal_solvers(const TwoTimeFunction& K) {
  std::vector<DiagonalSolver> d;
  d.reserve(K.n());
  for (int i = 0; i < K.n(); ++i) d.emplace_back(K, i);
  return d;
}

}  // namespace

TwoTimeFunction solve_direct(const TwoTimeFunction& K) {
  require_resolvent_kernel(K);
  const int n = K.n(), m = K.rows(), mm = m * m;
  TwoTimeFunction G(K.grid(), m, m, Profile::general);
  G.set_delta(Mat::Identity(m, m));
  if (K.smooth_is_zero()) return G;
  std::vector<DiagonalSolver> diag = make_diagonal_solvers(K);
  // Warm the caches serially so the parallel loop only reads them.
  for (int i = 1; i < n; ++i)
    for (int L = 1; L <= std::min(i, 6); ++L) diag[i].inverse(interval_weights(K.grid().rule, L)[L]);
#pragma omp parallel for schedule(dynamic, 4)
  for (int j = 0; j < n; ++j) {
    std::vector<cplx> g;
    solve_one_column(K, j, diag, g);
    for (int i = j; i < n; ++i) std::copy(&g[(i - j) * mm], &g[(i - j) * mm] + mm, G.block(i, j));
  }
  return G;
}

Column solve_column(const TwoTimeFunction& K, int j) {
  require_resolvent_kernel(K);
  const int m = K.rows();
  Column c(K.grid(), m, m, j);
  c.delta = Mat::Identity(m, m);
  c.has_delta = true;
  if (K.smooth_is_zero()) return c;
  std::vector<DiagonalSolver> diag = make_diagonal_solvers(K);
  solve_one_column(K, j, diag, c.data);
  return c;
}

double volterra_residual(const TwoTimeFunction& K, const TwoTimeFunction& G) {
  const TwoTimeFunction rhs = TwoTimeFunction::identity(K.grid(), K.rows()) + star_product(K, G);
  return max_distance(G, rhs);
}

NeumannTrace neumann(const TwoTimeFunction& K, int order, bool keep_partial_sums) {
  require_resolvent_kernel(K);
  if (order < 0) throw Error("Neumann order must be non-negative");
  NeumannTrace tr;
  TwoTimeFunction sum = TwoTimeFunction::identity(K.grid(), K.rows());
  tr.partial_sums.push_back(sum);
  tr.residuals.push_back(0.0);
  TwoTimeFunction power = K;  // K^{∗k}
  for (int k = 1; k <= order; ++k) {
    if (k > 1) power = star_product(K, power);
    sum = sum + power;
    tr.residuals.push_back(power.max_norm());
    if (keep_partial_sums)
      tr.partial_sums.push_back(sum);
    else
      tr.partial_sums.back() = sum;
  }
  return tr;
}

NeumannTrace neumann_auto(const TwoTimeFunction& K, double tol, int max_order) {
  require_resolvent_kernel(K);
  NeumannTrace tr;
  TwoTimeFunction sum = TwoTimeFunction::identity(K.grid(), K.rows());
  tr.partial_sums.push_back(sum);
  tr.residuals.push_back(0.0);
  TwoTimeFunction power = K;
  for (int k = 1; k <= max_order; ++k) {
    if (k > 1) power = star_product(K, power);
    sum = sum + power;
    tr.partial_sums.push_back(sum);
    tr.residuals.push_back(power.max_norm());
    if (tr.residuals.back() < tol) break;
  }
  return tr;
}

NeumannColumnTrace neumann_column(const TwoTimeFunction& K, int order, int j) {
  require_resolvent_kernel(K);
  if (order < 0) throw Error("Neumann order must be non-negative");
  const int m = K.rows();
  NeumannColumnTrace tr;
  Column sum(K.grid(), m, m, j);
  sum.delta = Mat::Identity(m, m);
  sum.has_delta = true;
  tr.partial_sums.push_back(sum);
  tr.residuals.push_back(0.0);
  Column power = column(K, j);
  for (int k = 1; k <= order; ++k) {
    if (k > 1) power = star_apply(K, power);
    sum = sum + power;
    double r = 0.0;
    for (const cplx& v : power.data) r = std::max(r, std::abs(v));
    tr.residuals.push_back(r);
    tr.partial_sums.push_back(sum);
  }
  return tr;
}

TwoTimeFunction accelerated(const TwoTimeFunction& K1, const TwoTimeFunction& K2, int order,
                            const std::optional<TwoTimeFunction>& G1in,
                            const std::optional<TwoTimeFunction>& G2in) {
  require_resolvent_kernel(K1);
  require_resolvent_kernel(K2);
  check_same_grid(K1.grid(), K2.grid());
  if (K1.rows() != K2.rows()) throw DimensionMismatch("accelerated split kernels");
  if (order < 0) throw Error("accelerated order must be non-negative");
  const TwoTimeFunction G1 = G1in ? *G1in : solve_direct(K1);
  if (K2.smooth_is_zero()) return G1;
  const TwoTimeFunction G2 = G2in ? *G2in : solve_direct(K2);
  if (K1.smooth_is_zero()) return G2;

  const TwoTimeFunction G12 = star_product(G1, G2);
  if (order == 0) return G12;
  const int m = K1.rows();
  TwoTimeFunction T = TwoTimeFunction::identity(K1.grid(), m) - G12 + star_product(G12, K1 + K2);
  T.set_delta(Mat::Zero(m, m));
  TwoTimeFunction term = G12, sum = G12;
  for (int k = 1; k <= order; ++k) {
    term = star_product(T, term);
    sum = sum + term;
  }
  return sum;
}

double commutator_defect(const TimeGrid& grid, const std::function<Mat(double)>& K, int lattice) {
  std::vector<Mat> s;
  double scale = 0.0;
  for (int a = 0; a < lattice; ++a) {
    s.push_back(K(grid.t_min + (grid.t_max - grid.t_min) * a / (lattice - 1)));
    scale = std::max(scale, s.back().cwiseAbs().maxCoeff());
  }
  if (scale == 0.0) return 0.0;
  double worst = 0.0;
  for (std::size_t a = 0; a < s.size(); ++a)
    for (std::size_t b = a + 1; b < s.size(); ++b)
      worst = std::max(worst, (s[a] * s[b] - s[b] * s[a]).cwiseAbs().maxCoeff());
  return worst / (scale * scale);
}

TwoTimeFunction closed_form_G(const TimeGrid& grid, int m, const std::function<Mat(double)>& K,
                              double commutator_tol) {
  const double defect = commutator_defect(grid, K);
  if (defect > commutator_tol)
    throw Error("closed_form_G: kernel family does not commute (defect " + std::to_string(defect) + ")");
  const int n = grid.n_points;
  const double h = grid.step();
  std::vector<Mat> k(n);
  for (int i = 0; i < n; ++i) {
    k[i] = K(grid.t(i));
    if (k[i].rows() != m || k[i].cols() != m) throw DimensionMismatch("closed_form_G sample shape");
  }
  // A(t_i) = ∫_{t_0}^{t_i} K entrywise, then exp(A_i − A_j) = exp(A_i) exp(−A_j).
  std::vector<Mat> A(n, Mat::Zero(m, m));
  std::vector<cplx> v(n);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      for (int i = 0; i < n; ++i) v[i] = k[i](a, b);
      const std::vector<cplx> c = cumulative_integral(grid.rule, v);
      for (int i = 0; i < n; ++i) A[i](a, b) = h * c[i];
    }
  std::vector<Mat> ep(n), em(n);
  for (int i = 0; i < n; ++i) {
    ep[i] = A[i].exp();
    em[i] = (-A[i]).exp();
  }
  TwoTimeFunction G(grid, m, m, Profile::general);
  G.set_delta(Mat::Identity(m, m));
  for (int i = 0; i < n; ++i) {
    const Mat left = k[i] * ep[i];
    for (int j = 0; j <= i; ++j) BlockMap(G.block(i, j), m, m) = left * em[j];
  }
  return G;
}

}  // namespace pathsum
