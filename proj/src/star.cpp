#include "pathsum/star.hpp"

#include <cmath>

#include "pathsum/error.hpp"

namespace pathsum {

namespace {

// acc(r×c) += s · A(r×p) · B(p×c), all row-major.
inline void mac(cplx* acc, const cplx* A, const cplx* B, int r, int p, int c, cplx s) {
  if (r == 1 && p == 1 && c == 1) {
    acc[0] += s * A[0] * B[0];
    return;
  }
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < p; ++b) {
      const cplx x = s * A[a * p + b];
      for (int d = 0; d < c; ++d) acc[a * c + d] += x * B[b * c + d];
    }
}

inline void axpy(cplx* y, const cplx* x, int len, cplx s) {
  for (int k = 0; k < len; ++k) y[k] += s * x[k];
}

bool is_identity(const Mat& d) { return d.rows() == d.cols() && d == Mat::Identity(d.rows(), d.cols()); }

// y = D·x for an r×p matrix D and p×c block x.
void left_mul(cplx* y, const Mat& D, const cplx* x, int p, int c) {
  const int r = static_cast<int>(D.rows());
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < p; ++b) {
      const cplx s = D(a, b);
      if (s == 0.0) continue;
      for (int d = 0; d < c; ++d) y[a * c + d] += s * x[b * c + d];
    }
}

// y = x·D for an r×p block x and p×c matrix D.
void right_mul(cplx* y, const cplx* x, const Mat& D, int r, int p) {
  const int c = static_cast<int>(D.cols());
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < p; ++b) {
      const cplx s = x[a * p + b];
      if (s == 0.0) continue;
      for (int d = 0; d < c; ++d) y[a * c + d] += s * D(b, d);
    }
}

void check_finite(const Mat& m) {
  if (!m.allFinite()) throw Error("non-finite sample while lifting a function onto the grid");
}

}  // namespace

void check_same_grid(const TimeGrid& a, const TimeGrid& b) {
  if (a != b) throw GridMismatch();
}

TwoTimeFunction::TwoTimeFunction(const TimeGrid& grid, int rows, int cols, Profile profile)
    : grid_(grid), rows_(rows), cols_(cols), profile_(profile), delta_(Mat::Zero(rows, cols)) {
  if (rows < 1 || cols < 1) throw DimensionMismatch("two-time function needs positive dimensions");
  const std::size_t n = grid.n_points;
  const std::size_t cells = profile == Profile::row ? n : n * (n + 1) / 2;
  data_.assign(cells * rows * cols, cplx(0.0));
}

TwoTimeFunction TwoTimeFunction::identity(const TimeGrid& grid, int m) {
  TwoTimeFunction f(grid, m, m, Profile::row);
  f.set_delta(Mat::Identity(m, m));
  return f;
}

TwoTimeFunction TwoTimeFunction::zero(const TimeGrid& grid, int rows, int cols) {
  return TwoTimeFunction(grid, rows, cols, Profile::row);
}

TwoTimeFunction TwoTimeFunction::lift(const TimeGrid& grid, int rows, int cols,
                                      const std::function<Mat(double)>& a) {
  TwoTimeFunction f(grid, rows, cols, Profile::row);
  for (int i = 0; i < grid.n_points; ++i) {
    const Mat v = a(grid.t(i));
    if (v.rows() != rows || v.cols() != cols) throw DimensionMismatch("lifted sample has wrong shape");
    check_finite(v);
    BlockMap(f.block(i, 0), rows, cols) = v;
  }
  return f;
}

TwoTimeFunction TwoTimeFunction::lift(const TimeGrid& grid, int rows, int cols,
                                      const std::function<Mat(double, double)>& fn) {
  TwoTimeFunction f(grid, rows, cols, Profile::general);
  for (int i = 0; i < grid.n_points; ++i)
    for (int j = 0; j <= i; ++j) {
      const Mat v = fn(grid.t(i), grid.t(j));
      if (v.rows() != rows || v.cols() != cols) throw DimensionMismatch("lifted sample has wrong shape");
      check_finite(v);
      BlockMap(f.block(i, j), rows, cols) = v;
    }
  return f;
}

TwoTimeFunction TwoTimeFunction::lift_scalar(const TimeGrid& grid, const std::function<cplx(double)>& a) {
  TwoTimeFunction f(grid, 1, 1, Profile::row);
  for (int i = 0; i < grid.n_points; ++i) {
    const cplx v = a(grid.t(i));
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw Error("non-finite sample while lifting a function onto the grid");
    *f.block(i, 0) = v;
  }
  return f;
}

TwoTimeFunction TwoTimeFunction::lift_scalar(const TimeGrid& grid,
                                             const std::function<cplx(double, double)>& fn) {
  TwoTimeFunction f(grid, 1, 1, Profile::general);
  for (int i = 0; i < grid.n_points; ++i)
    for (int j = 0; j <= i; ++j) {
      const cplx v = fn(grid.t(i), grid.t(j));
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw Error("non-finite sample while lifting a function onto the grid");
      *f.block(i, j) = v;
    }
  return f;
}

void TwoTimeFunction::set_delta(const Mat& d) {
  if (d.rows() != rows_ || d.cols() != cols_) throw DimensionMismatch("delta coefficient shape");
  delta_ = d;
  has_delta_ = !d.isZero(0.0);
}

Mat TwoTimeFunction::at(int i, int j) const { return ConstBlockMap(block(i, j), rows_, cols_); }

bool TwoTimeFunction::smooth_is_zero() const {
  for (const cplx& v : data_)
    if (v != 0.0) return false;
  return true;
}

double TwoTimeFunction::max_norm() const {
  double m = 0.0;
  for (const cplx& v : data_) m = std::max(m, std::abs(v));
  return m;
}

TwoTimeFunction TwoTimeFunction::to_general() const {
  if (profile_ == Profile::general) return *this;
  TwoTimeFunction g(grid_, rows_, cols_, Profile::general);
  g.delta_ = delta_;
  g.has_delta_ = has_delta_;
  const int b = block_size();
  for (int i = 0; i < n(); ++i)
    for (int j = 0; j <= i; ++j) std::copy(block(i, 0), block(i, 0) + b, g.block(i, j));
  return g;
}

namespace {

using Profile = TwoTimeFunction::Profile;

// ∫ part of f∗g (no delta contributions).
TwoTimeFunction integral_part(const TwoTimeFunction& f, const TwoTimeFunction& g) {
  const TimeGrid& grid = f.grid();
  const int n = grid.n_points, r = f.rows(), p = f.cols(), c = g.cols(), rc = r * c, pc = p * c;
  const double h = grid.step();
  TwoTimeFunction out(grid, r, c, Profile::general);

  if (f.profile() == Profile::row && g.profile() == Profile::row) {
    // ∫_{t_j}^{t_i} f(t_i) g(τ) dτ = f(t_i)·(C(t_i) − C(t_j)).
    std::vector<std::vector<cplx>> cum(pc);
    for (int e = 0; e < pc; ++e) {
      std::vector<cplx> v(n);
      for (int k = 0; k < n; ++k) v[k] = g.block(k, 0)[e];
      cum[e] = cumulative_integral(grid.rule, v);
    }
    std::vector<cplx> diff(pc);
#pragma omp parallel for schedule(dynamic, 16) firstprivate(diff)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) {
        for (int e = 0; e < pc; ++e) diff[e] = cum[e][i] - cum[e][j];
        mac(out.block(i, j), f.block(i, 0), diff.data(), r, p, c, h);
      }
    return out;
  }

  if (g.profile() == Profile::row) {
    // Row i: φ_k = f(t_i,t_k) g(t_k); suffix sums over k ∈ [j, i].
#pragma omp parallel for schedule(dynamic, 8)
    for (int i = 0; i < n; ++i) {
      std::vector<cplx> phi(static_cast<std::size_t>(i + 1) * rc, 0.0);
      for (int k = 0; k <= i; ++k) mac(&phi[k * rc], f.block(i, k), g.block(k, 0), r, p, c, 1.0);
      std::vector<cplx> suffix(rc, 0.0);
      for (int j = i; j >= 0; --j) {
        axpy(suffix.data(), &phi[j * rc], rc, 1.0);
        const IntervalWeights w = interval_weights(grid.rule, i - j);
        cplx* o = out.block(i, j);
        if (w.L == 0) continue;
        if (!w.edged) {
          for (int k = 0; k <= w.L; ++k) axpy(o, &phi[(j + k) * rc], rc, h * w.small[k]);
          continue;
        }
        axpy(o, suffix.data(), rc, h);
        for (int e = 0; e < w.n_edge; ++e) {
          axpy(o, &phi[(j + e) * rc], rc, h * (w.edge[e] - 1.0));
          axpy(o, &phi[(i - e) * rc], rc, h * (w.edge[e] - 1.0));
        }
      }
    }
    return out;
  }

  if (f.profile() == Profile::row) {
    // Column j: f(t_i) · Σ_k w g(t_k, t_j), prefix sums over k.
#pragma omp parallel for schedule(dynamic, 8)
    for (int j = 0; j < n; ++j) {
      std::vector<cplx> prefix(pc, 0.0), acc(pc);
      for (int i = j; i < n; ++i) {
        axpy(prefix.data(), g.block(i, j), pc, 1.0);
        const IntervalWeights w = interval_weights(grid.rule, i - j);
        if (w.L == 0) continue;
        std::fill(acc.begin(), acc.end(), cplx(0.0));
        if (!w.edged) {
          for (int k = 0; k <= w.L; ++k) axpy(acc.data(), g.block(j + k, j), pc, w.small[k]);
        } else {
          axpy(acc.data(), prefix.data(), pc, 1.0);
          for (int e = 0; e < w.n_edge; ++e) {
            axpy(acc.data(), g.block(j + e, j), pc, w.edge[e] - 1.0);
            axpy(acc.data(), g.block(i - e, j), pc, w.edge[e] - 1.0);
          }
        }
        mac(out.block(i, j), f.block(i, 0), acc.data(), r, p, c, h);
      }
    }
    return out;
  }

  // General × general: contiguous column copy of g for the inner sums.
  std::vector<std::size_t> col_start(n + 1, 0);
  for (int j = 0; j < n; ++j) col_start[j + 1] = col_start[j] + static_cast<std::size_t>(n - j) * pc;
  std::vector<cplx> gcol(col_start[n]);
  for (int j = 0; j < n; ++j)
    for (int k = j; k < n; ++k) std::copy(g.block(k, j), g.block(k, j) + pc, &gcol[col_start[j] + (k - j) * pc]);

  const bool scalar = (r == 1 && p == 1 && c == 1);
#pragma omp parallel for schedule(dynamic, 4)
  for (int i = n - 1; i >= 0; --i) {
    const cplx* frow = f.block(i, 0);
    std::vector<cplx> acc(rc);
    for (int j = 0; j <= i; ++j) {
      const int L = i - j;
      if (L == 0) continue;
      const IntervalWeights w = interval_weights(grid.rule, L);
      const cplx* gc = &gcol[col_start[j]];  // gc[(k - j)] = g(t_k, t_j)
      const cplx* fr = frow + static_cast<std::size_t>(j) * r * p;  // f(t_i, t_k) from k = j
      cplx* o = out.block(i, j);
      if (scalar) {
        cplx s = 0.0;
        if (!w.edged) {
          for (int k = 0; k <= L; ++k) s += w.small[k] * fr[k] * gc[k];
        } else {
          double sr = 0.0, si = 0.0;
          for (int k = 0; k <= L; ++k) {
            const double ar = fr[k].real(), ai = fr[k].imag(), br = gc[k].real(), bi = gc[k].imag();
            sr += ar * br - ai * bi;
            si += ar * bi + ai * br;
          }
          s = cplx(sr, si);
          for (int e = 0; e < w.n_edge; ++e) {
            s += (w.edge[e] - 1.0) * fr[e] * gc[e];
            s += (w.edge[e] - 1.0) * fr[L - e] * gc[L - e];
          }
        }
        o[0] = h * s;
        continue;
      }
      std::fill(acc.begin(), acc.end(), cplx(0.0));
      for (int k = 0; k <= L; ++k) mac(acc.data(), fr + k * r * p, gc + k * pc, r, p, c, w[k]);
      axpy(o, acc.data(), rc, h);
    }
  }
  return out;
}

}  // namespace

TwoTimeFunction star_product(const TwoTimeFunction& f, const TwoTimeFunction& g) {
  check_same_grid(f.grid(), g.grid());
  if (f.cols() != g.rows()) throw DimensionMismatch("star_product inner dimensions");
  const int r = f.rows(), p = f.cols(), c = g.cols(), n = f.n();
  const bool f_smooth = !f.smooth_is_zero(), g_smooth = !g.smooth_is_zero();

  // Delta-only operands act by plain multiplication and keep the other profile.
  if (!f_smooth || !g_smooth) {
    Profile prof = Profile::row;
    if (f_smooth && f.profile() == Profile::general) prof = Profile::general;
    if (g_smooth && g.profile() == Profile::general) prof = Profile::general;
    if (!f_smooth && f.has_delta() && is_identity(f.delta())) {
      TwoTimeFunction out = g;
      out.set_delta(f.delta() * g.delta());
      return out;
    }
    if (!g_smooth && g.has_delta() && is_identity(g.delta())) {
      TwoTimeFunction out = f;
      out.set_delta(f.delta() * g.delta());
      return out;
    }
    TwoTimeFunction out(f.grid(), r, c, prof);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= (prof == Profile::row ? 0 : i); ++j) {
        if (f.has_delta() && g_smooth) left_mul(out.block(i, j), f.delta(), g.block(i, j), p, c);
        if (g.has_delta() && f_smooth) right_mul(out.block(i, j), f.block(i, j), g.delta(), r, p);
      }
    out.set_delta(f.delta() * g.delta());
    return out;
  }

  TwoTimeFunction out = integral_part(f, g);
  if (f.has_delta() || g.has_delta()) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) {
        if (f.has_delta()) left_mul(out.block(i, j), f.delta(), g.block(i, j), p, c);
        if (g.has_delta()) right_mul(out.block(i, j), f.block(i, j), g.delta(), r, p);
      }
  }
  out.set_delta(f.delta() * g.delta());
  return out;
}

TwoTimeFunction star_power(const TwoTimeFunction& f, int n) {
  if (f.rows() != f.cols()) throw DimensionMismatch("star_power needs a square function");
  if (n < 0) throw Error("star_power order must be non-negative");
  TwoTimeFunction out = TwoTimeFunction::identity(f.grid(), f.rows());
  for (int k = 0; k < n; ++k) out = star_product(f, out);
  return out;
}

namespace {

TwoTimeFunction combine(const TwoTimeFunction& a, const TwoTimeFunction& b, cplx sb) {
  check_same_grid(a.grid(), b.grid());
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionMismatch("sum of two-time functions");
  if (a.profile() == b.profile()) {
    TwoTimeFunction out = a;
    for (std::size_t k = 0; k < out.raw().size(); ++k) out.raw()[k] += sb * b.raw()[k];
    out.set_delta(a.delta() + sb * b.delta());
    return out;
  }
  TwoTimeFunction out = a.to_general();
  const TwoTimeFunction bg = b.to_general();
  for (std::size_t k = 0; k < out.raw().size(); ++k) out.raw()[k] += sb * bg.raw()[k];
  out.set_delta(a.delta() + sb * b.delta());
  return out;
}

}  // namespace

TwoTimeFunction operator+(const TwoTimeFunction& a, const TwoTimeFunction& b) { return combine(a, b, 1.0); }
TwoTimeFunction operator-(const TwoTimeFunction& a, const TwoTimeFunction& b) { return combine(a, b, -1.0); }

TwoTimeFunction operator*(cplx s, const TwoTimeFunction& a) {
  TwoTimeFunction out = a;
  for (cplx& v : out.raw()) v *= s;
  out.set_delta(s * a.delta());
  return out;
}

double max_distance(const TwoTimeFunction& a, const TwoTimeFunction& b) {
  check_same_grid(a.grid(), b.grid());
  double m = (a.delta() - b.delta()).cwiseAbs().maxCoeff();
  for (int i = 0; i < a.n(); ++i)
    for (int j = 0; j <= i; ++j) m = std::max(m, (a.at(i, j) - b.at(i, j)).cwiseAbs().maxCoeff());
  return m;
}

Column::Column(const TimeGrid& g, int r, int c, int j0)
    : grid(g), rows(r), cols(c), j(j0), delta(Mat::Zero(r, c)) {
  data.assign(static_cast<std::size_t>(g.n_points - j0) * r * c, cplx(0.0));
}

Mat Column::at(int i) const { return ConstBlockMap(block(i), rows, cols); }

Column column(const TwoTimeFunction& f, int j) {
  Column c(f.grid(), f.rows(), f.cols(), j);
  const int b = f.block_size();
  for (int i = j; i < f.n(); ++i) std::copy(f.block(i, j), f.block(i, j) + b, c.block(i));
  c.delta = f.delta();
  c.has_delta = f.has_delta();
  return c;
}

Column star_apply(const TwoTimeFunction& f, const Column& c) {
  check_same_grid(f.grid(), c.grid);
  if (f.cols() != c.rows) throw DimensionMismatch("star_apply inner dimensions");
  const TimeGrid& grid = c.grid;
  const int n = grid.n_points, r = f.rows(), p = f.cols(), q = c.cols, j = c.j, rq = r * q, pq = p * q;
  const double h = grid.step();
  Column out(grid, r, q, j);
  out.delta = f.delta() * c.delta;
  out.has_delta = !out.delta.isZero(0.0);

  for (int i = j; i < n; ++i) {
    if (f.has_delta()) left_mul(out.block(i), f.delta(), c.block(i), p, q);
    if (c.has_delta) right_mul(out.block(i), f.block(i, j), c.delta, r, p);
  }

  if (f.profile() == Profile::row) {
    std::vector<cplx> prefix(pq, 0.0), acc(pq);
    for (int i = j; i < n; ++i) {
      axpy(prefix.data(), c.block(i), pq, 1.0);
      const IntervalWeights w = interval_weights(grid.rule, i - j);
      if (w.L == 0) continue;
      std::fill(acc.begin(), acc.end(), cplx(0.0));
      if (!w.edged) {
        for (int k = 0; k <= w.L; ++k) axpy(acc.data(), c.block(j + k), pq, w.small[k]);
      } else {
        axpy(acc.data(), prefix.data(), pq, 1.0);
        for (int e = 0; e < w.n_edge; ++e) {
          axpy(acc.data(), c.block(j + e), pq, w.edge[e] - 1.0);
          axpy(acc.data(), c.block(i - e), pq, w.edge[e] - 1.0);
        }
      }
      mac(out.block(i), f.block(i, 0), acc.data(), r, p, q, h);
    }
    return out;
  }

#pragma omp parallel for schedule(dynamic, 16)
  for (int i = j + 1; i < n; ++i) {
    const IntervalWeights w = interval_weights(grid.rule, i - j);
    std::vector<cplx> acc(rq, 0.0);
    for (int k = j; k <= i; ++k) mac(acc.data(), f.block(i, k), c.block(k), r, p, q, w[k - j]);
    axpy(out.block(i), acc.data(), rq, h);
  }
  return out;
}

Column operator+(const Column& a, const Column& b) {
  check_same_grid(a.grid, b.grid);
  if (a.rows != b.rows || a.cols != b.cols || a.j != b.j) throw DimensionMismatch("sum of columns");
  Column out = a;
  for (std::size_t k = 0; k < out.data.size(); ++k) out.data[k] += b.data[k];
  out.delta = a.delta + b.delta;
  out.has_delta = !out.delta.isZero(0.0);
  return out;
}

std::vector<Mat> integrate_column(const Column& c) {
  const int n = c.grid.n_points, len = n - c.j, rc = c.rows * c.cols;
  const double h = c.grid.step();
  std::vector<Mat> u(len, c.delta);
  std::vector<cplx> v(len);
  for (int e = 0; e < rc; ++e) {
    for (int k = 0; k < len; ++k) v[k] = c.data[static_cast<std::size_t>(k) * rc + e];
    const std::vector<cplx> cum = cumulative_integral(c.grid.rule, v);
    for (int k = 0; k < len; ++k) u[k](e / c.cols, e % c.cols) += h * cum[k];
  }
  return u;
}

}  // namespace pathsum
