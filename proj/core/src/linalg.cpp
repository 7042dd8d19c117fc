#include "semigeo/linalg.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "semigeo/errors.hpp"

namespace semigeo {

Mat Mat::identity(int n) {
  Mat m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vec mat_vec(const Mat& a, std::span<const double> x) {
  Vec y(a.rows(), 0.0);
  for (int i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (int j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

namespace {

// In-place LU with partial pivoting. Returns the permutation sign, or 0 when
// a pivot vanishes.
int lu_decompose(Mat& a, std::vector<int>& perm) {
  const int n = a.rows();
  perm.resize(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  int sign = 1;
  for (int k = 0; k < n; ++k) {
    int p = k;
    double best = std::abs(a(k, k));
    for (int i = k + 1; i < n; ++i) {
      if (std::abs(a(i, k)) > best) {
        best = std::abs(a(i, k));
        p = i;
      }
    }
    if (best == 0.0) return 0;
    if (p != k) {
      for (int j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
      std::swap(perm[k], perm[p]);
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i) {
      a(i, k) /= a(k, k);
      for (int j = k + 1; j < n; ++j) a(i, j) -= a(i, k) * a(k, j);
    }
  }
  return sign;
}

Vec lu_solve(const Mat& lu, const std::vector<int>& perm, const Vec& b) {
  const int n = lu.rows();
  Vec y(n);
  for (int i = 0; i < n; ++i) {
    double s = b[perm[i]];
    for (int j = 0; j < i; ++j) s -= lu(i, j) * y[j];
    y[i] = s;
  }
  for (int i = n - 1; i >= 0; --i) {
    for (int j = i + 1; j < n; ++j) y[i] -= lu(i, j) * y[j];
    y[i] /= lu(i, i);
  }
  return y;
}

}  // namespace

Vec solve(Mat a, Vec b) {
  std::vector<int> perm;
  if (lu_decompose(a, perm) == 0) throw NumericsError("singular matrix in solve()");
  return lu_solve(a, perm, b);
}

Mat inverse(const Mat& a) {
  const int n = a.rows();
  Mat lu = a;
  std::vector<int> perm;
  if (lu_decompose(lu, perm) == 0) throw NumericsError("singular matrix in inverse()");
  Mat inv(n, n);
  Vec e(n, 0.0);
  for (int j = 0; j < n; ++j) {
    e.assign(n, 0.0);
    e[j] = 1.0;
    Vec col = lu_solve(lu, perm, e);
    for (int i = 0; i < n; ++i) inv(i, j) = col[i];
  }
  return inv;
}

double det(Mat a) {
  std::vector<int> perm;
  const int sign = lu_decompose(a, perm);
  if (sign == 0) return 0.0;
  double d = sign;
  for (int i = 0; i < a.rows(); ++i) d *= a(i, i);
  return d;
}

double norm_inf(const Mat& a) {
  double best = 0.0;
  for (int i = 0; i < a.rows(); ++i) {
    double row = 0.0;
    for (int j = 0; j < a.cols(); ++j) row += std::abs(a(i, j));
    best = std::max(best, row);
  }
  return best;
}

double cond_inf(const Mat& a) {
  Mat lu = a;
  std::vector<int> perm;
  if (lu_decompose(lu, perm) == 0) return std::numeric_limits<double>::infinity();
  const int n = a.rows();
  Mat inv(n, n);
  Vec e(n, 0.0);
  for (int j = 0; j < n; ++j) {
    e.assign(n, 0.0);
    e[j] = 1.0;
    Vec col = lu_solve(lu, perm, e);
    for (int i = 0; i < n; ++i) inv(i, j) = col[i];
  }
  return norm_inf(a) * norm_inf(inv);
}

}  // namespace semigeo
