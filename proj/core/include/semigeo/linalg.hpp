#pragma once

#include <span>
#include <vector>

namespace semigeo {

using Vec = std::vector<double>;

// Dense row-major matrix. Everything in this toolkit is n-by-n with n <= 6,
// so the solvers below are plain Gaussian elimination with partial pivoting.
class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols) : rows_(rows), cols_(cols), a_(rows * cols, 0.0) {}
  static Mat identity(int n);

  double& operator()(int i, int j) { return a_[i * cols_ + j]; }
  double operator()(int i, int j) const { return a_[i * cols_ + j]; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::span<const double> data() const { return a_; }
  std::span<double> data() { return a_; }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<double> a_;
};

// Rank-3 cube of side n, indexed (h, i, j).
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(int n) : n_(n), a_(n * n * n, 0.0) {}

  double& operator()(int h, int i, int j) { return a_[(h * n_ + i) * n_ + j]; }
  double operator()(int h, int i, int j) const { return a_[(h * n_ + i) * n_ + j]; }
  int dim() const { return n_; }
  std::span<const double> data() const { return a_; }
  std::span<double> data() { return a_; }

 private:
  int n_ = 0;
  std::vector<double> a_;
};

Vec mat_vec(const Mat& a, std::span<const double> x);

// Direct solve of a x = b; throws NumericsError when a is singular.
Vec solve(Mat a, Vec b);
Mat inverse(const Mat& a);
double det(Mat a);

double norm_inf(const Mat& a);
// ||a||_inf * ||a^-1||_inf; +inf when a is singular (never throws).
double cond_inf(const Mat& a);

}  // namespace semigeo
