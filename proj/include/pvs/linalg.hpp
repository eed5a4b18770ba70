#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace pvs {

/// Dimension cap for the small dense types. Spatial dimension n and driving
/// dimension m both stay at desk scale (<= 3); states live on the stack so
/// the per-node flow loops do not allocate.
inline constexpr int kMaxDim = 3;

struct VecN {
  std::array<double, kMaxDim> a{};
  int n = 0;

  VecN() = default;
  explicit VecN(int dim) : n(dim) {
    if (dim < 0 || dim > kMaxDim) throw std::invalid_argument("VecN: dimension out of range");
  }
  VecN(std::initializer_list<double> vals) {
    if (static_cast<int>(vals.size()) > kMaxDim) throw std::invalid_argument("VecN: too many entries");
    n = static_cast<int>(vals.size());
    int i = 0;
    for (double v : vals) a[i++] = v;
  }

  double& operator[](int i) { return a[i]; }
  double operator[](int i) const { return a[i]; }
};

struct MatN {
  std::array<double, kMaxDim * kMaxDim> a{};
  int rows = 0, cols = 0;

  MatN() = default;
  MatN(int r, int c) : rows(r), cols(c) {
    if (r < 0 || r > kMaxDim || c < 0 || c > kMaxDim) throw std::invalid_argument("MatN: dimension out of range");
  }
  static MatN identity(int d) {
    MatN m(d, d);
    for (int i = 0; i < d; ++i) m(i, i) = 1.0;
    return m;
  }

  double& operator()(int i, int j) { return a[i * kMaxDim + j]; }
  double operator()(int i, int j) const { return a[i * kMaxDim + j]; }
};

inline VecN operator+(const VecN& u, const VecN& v) {
  VecN r(u.n);
  for (int i = 0; i < u.n; ++i) r[i] = u[i] + v[i];
  return r;
}
inline VecN operator-(const VecN& u, const VecN& v) {
  VecN r(u.n);
  for (int i = 0; i < u.n; ++i) r[i] = u[i] - v[i];
  return r;
}
inline VecN operator*(double s, const VecN& v) {
  VecN r(v.n);
  for (int i = 0; i < v.n; ++i) r[i] = s * v[i];
  return r;
}
inline VecN& operator+=(VecN& u, const VecN& v) {
  for (int i = 0; i < u.n; ++i) u[i] += v[i];
  return u;
}
inline double dot(const VecN& u, const VecN& v) {
  double s = 0.0;
  for (int i = 0; i < u.n; ++i) s += u[i] * v[i];
  return s;
}
inline double norm_inf(const VecN& v) {
  double s = 0.0;
  for (int i = 0; i < v.n; ++i) s = std::max(s, std::fabs(v[i]));
  return s;
}
inline double norm2(const VecN& v) { return std::sqrt(dot(v, v)); }

inline MatN operator+(const MatN& A, const MatN& B) {
  MatN r(A.rows, A.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) r(i, j) = A(i, j) + B(i, j);
  return r;
}
inline MatN operator-(const MatN& A, const MatN& B) {
  MatN r(A.rows, A.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) r(i, j) = A(i, j) - B(i, j);
  return r;
}
inline MatN operator*(double s, const MatN& A) {
  MatN r(A.rows, A.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) r(i, j) = s * A(i, j);
  return r;
}
inline MatN& operator+=(MatN& A, const MatN& B) {
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) A(i, j) += B(i, j);
  return A;
}
inline MatN matmul(const MatN& A, const MatN& B) {
  MatN r(A.rows, B.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < B.cols; ++j) {
      double s = 0.0;
      for (int k = 0; k < A.cols; ++k) s += A(i, k) * B(k, j);
      r(i, j) = s;
    }
  return r;
}
inline VecN matvec(const MatN& A, const VecN& v) {
  VecN r(A.rows);
  for (int i = 0; i < A.rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < A.cols; ++j) s += A(i, j) * v[j];
    r[i] = s;
  }
  return r;
}
inline MatN outer(const VecN& u, const VecN& v) {
  MatN r(u.n, v.n);
  for (int i = 0; i < u.n; ++i)
    for (int j = 0; j < v.n; ++j) r(i, j) = u[i] * v[j];
  return r;
}
inline MatN transpose(const MatN& A) {
  MatN r(A.cols, A.rows);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) r(j, i) = A(i, j);
  return r;
}
inline MatN sym(const MatN& A) {
  MatN r(A.rows, A.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) r(i, j) = 0.5 * (A(i, j) + A(j, i));
  return r;
}
inline double norm_max(const MatN& A) {
  double s = 0.0;
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) s = std::max(s, std::fabs(A(i, j)));
  return s;
}
inline double trace(const MatN& A) {
  double s = 0.0;
  for (int i = 0; i < A.rows; ++i) s += A(i, i);
  return s;
}

inline double det(const MatN& A) {
  if (A.rows != A.cols) throw std::invalid_argument("det: matrix not square");
  switch (A.rows) {
    case 0: return 1.0;
    case 1: return A(0, 0);
    case 2: return A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
    case 3:
      return A(0, 0) * (A(1, 1) * A(2, 2) - A(1, 2) * A(2, 1)) -
             A(0, 1) * (A(1, 0) * A(2, 2) - A(1, 2) * A(2, 0)) +
             A(0, 2) * (A(1, 0) * A(2, 1) - A(1, 1) * A(2, 0));
    default: throw std::invalid_argument("det: dimension out of range");
  }
}

/// Solve A y = b for the small square sizes used here. Throws if A is
/// numerically singular.
inline VecN solve(const MatN& A, const VecN& b) {
  if (A.rows != A.cols || A.rows != b.n) throw std::invalid_argument("solve: shape mismatch");
  const int d = A.rows;
  double m[kMaxDim][kMaxDim + 1];
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) m[i][j] = A(i, j);
    m[i][d] = b[i];
  }
  for (int col = 0; col < d; ++col) {
    int piv = col;
    for (int r = col + 1; r < d; ++r)
      if (std::fabs(m[r][col]) > std::fabs(m[piv][col])) piv = r;
    if (std::fabs(m[piv][col]) < 1e-300) throw std::runtime_error("solve: singular matrix");
    if (piv != col)
      for (int j = col; j <= d; ++j) std::swap(m[piv][j], m[col][j]);
    for (int r = 0; r < d; ++r) {
      if (r == col) continue;
      double f = m[r][col] / m[col][col];
      for (int j = col; j <= d; ++j) m[r][j] -= f * m[col][j];
    }
  }
  VecN y(d);
  for (int i = 0; i < d; ++i) y[i] = m[i][d] / m[i][i];
  return y;
}

}  // namespace pvs
