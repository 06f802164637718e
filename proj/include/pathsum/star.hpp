#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "pathsum/grid.hpp"

namespace pathsum {

using Mat = Eigen::MatrixXcd;
using RowBlock = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using BlockMap = Eigen::Map<RowBlock>;
using ConstBlockMap = Eigen::Map<const RowBlock>;

// D·δ(t'−t) + f(t',t) on the lower triangle t_j <= t_i of a grid.
// A `row` profile stores a function of t' alone (one value per node), which is
// how Hamiltonian entries a(t') lift; it behaves exactly like the general
// triangle filled with a(t_i) on row i.
class TwoTimeFunction {
 public:
  enum class Profile { general, row };

  TwoTimeFunction() = default;
  TwoTimeFunction(const TimeGrid& grid, int rows, int cols, Profile profile = Profile::general);

  static TwoTimeFunction identity(const TimeGrid& grid, int m);
  static TwoTimeFunction zero(const TimeGrid& grid, int rows, int cols);
  static TwoTimeFunction lift(const TimeGrid& grid, int rows, int cols,
                              const std::function<Mat(double)>& a);
  static TwoTimeFunction lift(const TimeGrid& grid, int rows, int cols,
                              const std::function<Mat(double, double)>& f);
  static TwoTimeFunction lift_scalar(const TimeGrid& grid, const std::function<cplx(double)>& a);
  static TwoTimeFunction lift_scalar(const TimeGrid& grid, const std::function<cplx(double, double)>& f);

  const TimeGrid& grid() const { return grid_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int n() const { return grid_.n_points; }
  Profile profile() const { return profile_; }
  int block_size() const { return rows_ * cols_; }

  const Mat& delta() const { return delta_; }
  bool has_delta() const { return has_delta_; }
  void set_delta(const Mat& d);

  const cplx* block(int i, int j) const { return data_.data() + offset(i, j); }
  cplx* block(int i, int j) { return data_.data() + offset(i, j); }
  Mat at(int i, int j) const;
  cplx operator()(int i, int j) const { return *block(i, j); }

  bool smooth_is_zero() const;
  double max_norm() const;  // max |entry| of the smooth part
  TwoTimeFunction to_general() const;

  std::vector<cplx>& raw() { return data_; }
  const std::vector<cplx>& raw() const { return data_; }

 private:
  std::size_t offset(int i, int j) const {
    const std::size_t b = block_size();
    if (profile_ == Profile::row) return static_cast<std::size_t>(i) * b;
    return (static_cast<std::size_t>(i) * (i + 1) / 2 + j) * b;
  }

  TimeGrid grid_;
  int rows_ = 0;
  int cols_ = 0;
  Profile profile_ = Profile::general;
  Mat delta_;
  bool has_delta_ = false;
  std::vector<cplx> data_;
};

// Values (t_i, t_j) of a two-time function for one fixed t_j, i >= j.
struct Column {
  TimeGrid grid;
  int rows = 0;
  int cols = 0;
  int j = 0;
  Mat delta;
  bool has_delta = false;
  std::vector<cplx> data;

  Column() = default;
  Column(const TimeGrid& g, int r, int c, int j0);
  const cplx* block(int i) const { return data.data() + static_cast<std::size_t>(i - j) * rows * cols; }
  cplx* block(int i) { return data.data() + static_cast<std::size_t>(i - j) * rows * cols; }
  Mat at(int i) const;
};

TwoTimeFunction star_product(const TwoTimeFunction& f, const TwoTimeFunction& g);
TwoTimeFunction star_power(const TwoTimeFunction& f, int n);
TwoTimeFunction operator+(const TwoTimeFunction& a, const TwoTimeFunction& b);
TwoTimeFunction operator-(const TwoTimeFunction& a, const TwoTimeFunction& b);
TwoTimeFunction operator*(cplx s, const TwoTimeFunction& a);
double max_distance(const TwoTimeFunction& a, const TwoTimeFunction& b);

Column column(const TwoTimeFunction& f, int j);
Column star_apply(const TwoTimeFunction& f, const Column& c);  // (f ∗ c)(t_i, t_j)
Column operator+(const Column& a, const Column& b);
// U(t_i) = D + ∫_{t_j}^{t_i} c(τ) dτ for i >= j (the Heaviside convention ∫δ = 1).
std::vector<Mat> integrate_column(const Column& c);

void check_same_grid(const TimeGrid& a, const TimeGrid& b);

}  // namespace pathsum
