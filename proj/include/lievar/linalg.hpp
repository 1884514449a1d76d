#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace lievar {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Symmetric positive (semi-)definite square root via eigendecomposition.
inline Matrix symmetric_sqrt(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  if (es.info() != Eigen::Success) throw std::runtime_error("symmetric_sqrt: eigensolver failed");
  Vector d = es.eigenvalues();
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d[i] < 0) {
      if (d[i] < -1e-10 * std::abs(d[d.size() - 1]))
        throw std::runtime_error("symmetric_sqrt: matrix not positive semi-definite");
      d[i] = 0;
    }
  }
  return es.eigenvectors() * d.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

inline Matrix symmetric_inv_sqrt(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  if (es.info() != Eigen::Success) throw std::runtime_error("symmetric_inv_sqrt: eigensolver failed");
  const Vector& d = es.eigenvalues();
  if (d.size() > 0 && d[0] <= 0) throw std::runtime_error("symmetric_inv_sqrt: matrix not positive definite");
  return es.eigenvectors() * d.cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
}

/// Matrix exponential of a symmetric matrix (exact up to the eigensolver).
inline Matrix exp_symmetric(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  return es.eigenvectors() * es.eigenvalues().array().exp().matrix().asDiagonal() *
         es.eigenvectors().transpose();
}

/// Orthonormal basis (columns) of the kernel of a: right singular vectors whose
/// singular value is below rel_tol * sigma_max. Optionally reports the spectrum.
inline Matrix nullspace(const Matrix& a, double rel_tol, Vector* singular_values = nullptr,
                        double* cutoff_out = nullptr) {
  const Eigen::Index cols = a.cols();
  if (a.rows() == 0 || a.size() == 0) {
    if (singular_values) *singular_values = Vector::Zero(cols);
    if (cutoff_out) *cutoff_out = 0.0;
    return Matrix::Identity(cols, cols);
  }
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
  Vector sv = Vector::Zero(cols);
  sv.head(svd.singularValues().size()) = svd.singularValues();
  const double smax = sv.size() ? sv[0] : 0.0;
  const double cutoff = rel_tol * smax;
  if (singular_values) *singular_values = sv;
  if (cutoff_out) *cutoff_out = cutoff;
  Eigen::Index rank = 0;
  while (rank < cols && sv[rank] > cutoff) ++rank;
  return svd.matrixV().rightCols(cols - rank);
}

/// Orthonormal basis of the column space of a (columns with sigma > rel_tol * sigma_max).
inline Matrix column_space(const Matrix& a, double rel_tol) {
  if (a.cols() == 0 || a.rows() == 0) return Matrix::Zero(a.rows(), 0);
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU);
  const Vector& sv = svd.singularValues();
  const double smax = sv.size() ? sv[0] : 0.0;
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv[rank] > rel_tol * smax && sv[rank] > 0) ++rank;
  return svd.matrixU().leftCols(rank);
}

/// Intersection of two subspaces given by orthonormal column bases.
/// Directions with principal angle below sqrt(2*tol) survive.
inline Matrix subspace_intersection(const Matrix& u, const Matrix& w, double tol = 1e-8) {
  if (u.cols() == 0 || w.cols() == 0) return Matrix::Zero(u.rows(), 0);
  Eigen::JacobiSVD<Matrix> svd(u.transpose() * w, Eigen::ComputeFullU);
  const Vector& sv = svd.singularValues();
  Eigen::Index k = 0;
  while (k < sv.size() && sv[k] >= 1.0 - tol) ++k;
  if (k == 0) return Matrix::Zero(u.rows(), 0);
  Matrix basis = u * svd.matrixU().leftCols(k);
  return column_space(basis, 1e-12);
}

/// Gap between equal-dimensional subspaces (orthonormal bases): sin of the
/// largest principal angle. Returns 1 for mismatched dimensions.
inline double subspace_gap(const Matrix& u, const Matrix& w) {
  if (u.cols() != w.cols()) return 1.0;
  if (u.cols() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(u.transpose() * w);
  double c = svd.singularValues().minCoeff();
  c = std::min(1.0, std::max(-1.0, c));
  return std::sqrt(std::max(0.0, 1.0 - c * c));
}

/// Orthogonal projection of x onto the span of orthonormal columns b.
inline Vector project_onto(const Matrix& b, const Vector& x) {
  if (b.cols() == 0) return Vector::Zero(x.size());
  return b * (b.transpose() * x);
}

struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;
};

/// Best rational approximation with denominator <= max_den (continued fractions).
inline Fraction rational_approx(double x, std::int64_t max_den) {
  if (max_den < 1) throw std::invalid_argument("rational_approx: max_den must be >= 1");
  if (!std::isfinite(x)) throw std::invalid_argument("rational_approx: non-finite input");
  const bool neg = x < 0;
  long double y = neg ? -static_cast<long double>(x) : static_cast<long double>(x);
  // convergent recurrence h_n = a_n h_{n-1} + h_{n-2}, seeded with h_{-2}/k_{-2} = 0/1, h_{-1}/k_{-1} = 1/0
  std::int64_t p_prev = 0, q_prev = 1;
  std::int64_t p = 1, q = 0;
  long double frac = y;
  for (int iter = 0; iter < 64; ++iter) {
    const long double fl = std::floor(frac);
    if (fl > 9e17) break;
    const std::int64_t a = static_cast<std::int64_t>(fl);
    const std::int64_t p_next = a * p + p_prev;
    const std::int64_t q_next = a * q + q_prev;
    if (q_next > max_den || p_next < 0 || q_next < 0) break;
    p_prev = p; q_prev = q;
    p = p_next; q = q_next;
    const long double rem = frac - fl;
    if (rem < 1e-18L) break;
    frac = 1.0L / rem;
  }
  if (q == 0) { p = static_cast<std::int64_t>(std::llround(static_cast<double>(y))); q = 1; }
  return {neg ? -p : p, q};
}

inline std::int64_t gcd64(std::int64_t a, std::int64_t b) { return std::gcd(a < 0 ? -a : a, b < 0 ? -b : b); }

inline std::int64_t lcm64(std::int64_t a, std::int64_t b) {
  if (a == 0 || b == 0) return 0;
  return (a / gcd64(a, b)) * b;
}

}  // namespace lievar
