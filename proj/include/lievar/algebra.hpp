#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "lievar/linalg.hpp"

namespace lievar {

/// Dense rank-3 structure tensor c[i][j][k] with [b_i, b_j] = sum_k c[i][j][k] b_k.
/// Both index orders are stored so contractions stay branch-free.
class StructureTensor {
 public:
  StructureTensor() = default;
  explicit StructureTensor(int dim) : dim_(dim), c_(static_cast<std::size_t>(dim) * dim * dim, 0.0) {}

  int dim() const { return dim_; }

  double operator()(int i, int j, int k) const { return c_[idx(i, j, k)]; }
  double& at(int i, int j, int k) { return c_[idx(i, j, k)]; }

  /// Sets c[i][j][k] = v and c[j][i][k] = -v.
  void set_antisymmetric(int i, int j, int k, double v) {
    c_[idx(i, j, k)] = v;
    c_[idx(j, i, k)] = -v;
  }

  Vector bracket_basis(int i, int j) const {
    Vector out(dim_);
    for (int k = 0; k < dim_; ++k) out[k] = c_[idx(i, j, k)];
    return out;
  }

  Vector bracket(const Vector& x, const Vector& y) const {
    Vector out = Vector::Zero(dim_);
    for (int i = 0; i < dim_; ++i) {
      if (x[i] == 0.0) continue;
      for (int j = 0; j < dim_; ++j) {
        if (y[j] == 0.0) continue;
        const double w = x[i] * y[j];
        const double* slice = &c_[idx(i, j, 0)];
        for (int k = 0; k < dim_; ++k) out[k] += w * slice[k];
      }
    }
    return out;
  }

  /// Matrix of ad_v : x -> [v, x].
  Matrix ad(const Vector& v) const {
    Matrix out = Matrix::Zero(dim_, dim_);
    for (int i = 0; i < dim_; ++i) {
      if (v[i] == 0.0) continue;
      for (int j = 0; j < dim_; ++j) {
        const double* slice = &c_[idx(i, j, 0)];
        for (int k = 0; k < dim_; ++k) out(k, j) += v[i] * slice[k];
      }
    }
    return out;
  }

  Matrix ad_basis(int i) const {
    Matrix out(dim_, dim_);
    for (int j = 0; j < dim_; ++j)
      for (int k = 0; k < dim_; ++k) out(k, j) = c_[idx(i, j, k)];
    return out;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : c_) m = std::max(m, std::abs(v));
    return m;
  }

  double antisymmetry_residual() const {
    double r = 0.0;
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j)
        for (int k = 0; k < dim_; ++k) r = std::max(r, std::abs(c_[idx(i, j, k)] + c_[idx(j, i, k)]));
    return r;
  }

  /// max over basis triples of |[b_i,[b_j,b_k]] - [[b_i,b_j],b_k] - [b_j,[b_i,b_k]]| (coefficient 2-norm).
  double jacobi_residual() const {
    double r = 0.0;
    for (int i = 0; i < dim_; ++i)
      for (int j = i + 1; j < dim_; ++j)
        for (int k = j + 1; k < dim_; ++k) {
          Vector lhs = bracket(basis_vec(i), bracket_basis(j, k));
          Vector rhs = bracket(bracket_basis(i, j), basis_vec(k)) + bracket(basis_vec(j), bracket_basis(i, k));
          r = std::max(r, (lhs - rhs).norm());
        }
    return r;
  }

  StructureTensor scaled(double s) const {
    StructureTensor out = *this;
    for (double& v : out.c_) v *= s;
    return out;
  }

 private:
  Vector basis_vec(int i) const { return Vector::Unit(dim_, i); }
  std::size_t idx(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * dim_ + j) * dim_ + k;
  }

  int dim_ = 0;
  std::vector<double> c_;
};

/// A finite-dimensional real Lie algebra together with an invariant symmetric
/// form beta and an involution theta such that <x,y> = -beta(theta x, y) is an
/// inner product. The form is stored rather than recomputed: for the gl(n)+g
/// codomains it is the trace form, not the Killing form.
class QuadraticLieAlgebra {
 public:
  QuadraticLieAlgebra() = default;
  QuadraticLieAlgebra(std::string label, StructureTensor bracket, Matrix form, Matrix involution)
      : label_(std::move(label)),
        dim_(bracket.dim()),
        bracket_(std::move(bracket)),
        form_(std::move(form)),
        involution_(std::move(involution)) {
    gram_ = -involution_.transpose() * form_;
    gram_ = 0.5 * (gram_ + gram_.transpose().eval());
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram_);
    gram_pd_ = dim_ == 0 || es.eigenvalues()[0] > 0;
    if (gram_pd_ && dim_ > 0) {
      gram_sqrt_ = es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
      gram_inv_sqrt_ =
          es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    } else {
      gram_sqrt_ = Matrix::Identity(dim_, dim_);
      gram_inv_sqrt_ = Matrix::Identity(dim_, dim_);
    }
  }

  const std::string& label() const { return label_; }
  int dim() const { return dim_; }
  const StructureTensor& bracket() const { return bracket_; }
  const Matrix& form() const { return form_; }
  const Matrix& involution() const { return involution_; }
  const Matrix& gram() const { return gram_; }
  bool gram_positive_definite() const { return gram_pd_; }
  const Matrix& gram_sqrt() const { return gram_sqrt_; }
  const Matrix& gram_inv_sqrt() const { return gram_inv_sqrt_; }

  Vector brk(const Vector& x, const Vector& y) const { return bracket_.bracket(x, y); }
  Matrix ad(const Vector& v) const { return bracket_.ad(v); }
  Vector theta(const Vector& x) const { return involution_ * x; }
  double ip(const Vector& x, const Vector& y) const { return x.dot(gram_ * y); }
  double norm(const Vector& x) const { return std::sqrt(std::max(0.0, ip(x, x))); }

  /// Gram-orthonormal basis (columns) of the -1 eigenspace of theta.
  Matrix minus_eigenspace() const { return theta_eigenspace(-1.0); }
  Matrix plus_eigenspace() const { return theta_eigenspace(1.0); }

 private:
  Matrix theta_eigenspace(double sign) const {
    // kernel of (theta - sign I) in gram-orthonormal coordinates
    Matrix m = gram_sqrt_ * (involution_ - sign * Matrix::Identity(dim_, dim_)) * gram_inv_sqrt_;
    Matrix ker = nullspace(m, 1e-10);
    return gram_inv_sqrt_ * ker;
  }

  std::string label_;
  int dim_ = 0;
  StructureTensor bracket_;
  Matrix form_;
  Matrix involution_;
  Matrix gram_;
  Matrix gram_sqrt_;
  Matrix gram_inv_sqrt_;
  bool gram_pd_ = false;
};

using AlgebraPtr = std::shared_ptr<const QuadraticLieAlgebra>;

/// A subspace of an ambient space, held as (not necessarily orthonormal) basis columns.
struct Subspace {
  Matrix basis;  // columns
  const QuadraticLieAlgebra* ambient = nullptr;

  int dim() const { return static_cast<int>(basis.cols()); }
};

struct ValidationItem {
  std::string name;
  double residual = 0.0;
  bool pass = false;
};

struct ValidationReport {
  std::vector<ValidationItem> items;
  bool ok = false;

  double residual(const std::string& name) const {
    for (const auto& it : items)
      if (it.name == name) return it.residual;
    return -1.0;
  }
};

/// Checks every structural invariant of a QuadraticLieAlgebra and reports the
/// residuals; ok is true iff all of them fall below tol (relative).
inline ValidationReport validate_algebra(const QuadraticLieAlgebra& alg, double tol = 1e-10) {
  ValidationReport rep;
  const int d = alg.dim();
  const double cmax = std::max(alg.bracket().max_abs(), 1e-300);
  const double bmax = std::max(alg.form().cwiseAbs().maxCoeff(), 1e-300);

  auto push = [&](const std::string& name, double res) {
    rep.items.push_back({name, res, res <= tol});
  };

  push("antisymmetry", alg.bracket().antisymmetry_residual() / cmax);
  push("jacobi", alg.bracket().jacobi_residual() / std::max(cmax * cmax, 1e-300));

  const Matrix& th = alg.involution();
  push("involution_squares_to_identity", (th * th - Matrix::Identity(d, d)).cwiseAbs().maxCoeff());

  double auto_res = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      Vector lhs = th * alg.bracket().bracket_basis(i, j);
      Vector rhs = alg.brk(th.col(i), th.col(j));
      auto_res = std::max(auto_res, (lhs - rhs).norm());
    }
  push("involution_automorphism", auto_res / cmax);

  push("form_symmetric", (alg.form() - alg.form().transpose()).cwiseAbs().maxCoeff() / bmax);

  // beta([x,y],z) + beta(y,[x,z]) = 0 on basis triples
  double inv_res = 0.0;
  for (int i = 0; i < d; ++i) {
    Matrix adi = alg.bracket().ad_basis(i);
    Matrix r = adi.transpose() * alg.form() + alg.form() * adi;
    inv_res = std::max(inv_res, r.cwiseAbs().maxCoeff());
  }
  push("form_ad_invariant", inv_res / std::max(bmax * cmax, 1e-300));

  Matrix gram_expected = -th.transpose() * alg.form();
  push("gram_matches_form", (alg.gram() - 0.5 * (gram_expected + gram_expected.transpose())).cwiseAbs().maxCoeff() / bmax);
  push("gram_symmetric", (alg.gram() - alg.gram().transpose()).cwiseAbs().maxCoeff() / bmax);

  double min_eig = 0.0;
  if (d > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(alg.gram());
    min_eig = es.eigenvalues()[0];
  }
  // positive definiteness reported as a residual: how far below (tol * scale) the smallest eigenvalue sits
  const double pd_scale = std::max(alg.gram().cwiseAbs().maxCoeff(), 1e-300);
  rep.items.push_back({"gram_positive_definite", min_eig / pd_scale, d == 0 || min_eig > tol * pd_scale});

  rep.ok = true;
  for (const auto& it : rep.items) rep.ok = rep.ok && it.pass;
  return rep;
}

/// B[i][j] = trace(ad_{b_i} ad_{b_j}).
inline Matrix killing_form(const StructureTensor& bracket) {
  const int d = bracket.dim();
  std::vector<Matrix> ads(d);
  for (int i = 0; i < d; ++i) ads[i] = bracket.ad_basis(i);
  Matrix b(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j) b(i, j) = b(j, i) = (ads[i] * ads[j]).trace();
  return b;
}

/// Matrix of x -> [v, x].
inline Matrix adjoint(const QuadraticLieAlgebra& alg, const Vector& v) { return alg.ad(v); }

/// Numerical kernel of v -> ([v,s_1], ..., [v,s_m]) over a basis of s.
/// Returned basis is gram-orthonormal. An empty s centralizes to the whole algebra.
inline Subspace centralizer(const QuadraticLieAlgebra& alg, const Subspace& s, double tol = 1e-8) {
  const int d = alg.dim();
  const int m = s.dim();
  if (m == 0) return Subspace{alg.gram_inv_sqrt() * Matrix::Identity(d, d), &alg};
  Matrix stacked(static_cast<Eigen::Index>(m) * d, d);
  for (int j = 0; j < m; ++j) {
    // [v, s_j] = -ad(s_j) v, expressed in gram-orthonormal coordinates.
    Matrix block = alg.gram_sqrt() * (-alg.ad(s.basis.col(j))) * alg.gram_inv_sqrt();
    stacked.middleRows(static_cast<Eigen::Index>(j) * d, d) = block;
  }
  Matrix ker = nullspace(stacked, tol);
  return Subspace{alg.gram_inv_sqrt() * ker, &alg};
}

}  // namespace lievar
