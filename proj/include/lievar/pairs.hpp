#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "lievar/algebra.hpp"

namespace lievar {

/// A point (mu, phi) of V_n(g): a skew bracket tensor on R^n plus the
/// coefficient matrix of a linear map phi : R^n -> g (column j = phi(e_j)).
/// Membership in the variety cut out by the Jacobi/homomorphism equations is
/// a property (see residuals), not an invariant of the type.
struct Pair {
  int n = 0;
  StructureTensor mu;
  Matrix phi;  // dim(g) x n
  AlgebraPtr codomain;

  bool is_zero(double tol = 0.0) const;
};

struct TangentElement {
  StructureTensor dmu;
  Matrix dphi;
};

/// V_n inner product: sum_{i<j} <mu(ei,ej), nu(ei,ej)> + sum_j <phi e_j, psi e_j>_g.
inline double vn_ip(const StructureTensor& mu1, const Matrix& phi1, const StructureTensor& mu2,
                    const Matrix& phi2, const QuadraticLieAlgebra& g) {
  const int n = mu1.dim();
  double acc = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) acc += mu1.bracket_basis(i, j).dot(mu2.bracket_basis(i, j));
  acc += (phi1.transpose() * g.gram() * phi2).trace();
  return acc;
}

inline double vn_ip(const Pair& p, const Pair& q) { return vn_ip(p.mu, p.phi, q.mu, q.phi, *p.codomain); }
inline double vn_ip(const TangentElement& a, const TangentElement& b, const QuadraticLieAlgebra& g) {
  return vn_ip(a.dmu, a.dphi, b.dmu, b.dphi, g);
}

inline double pair_norm_sq(const Pair& p) { return vn_ip(p, p); }
inline double pair_norm(const Pair& p) { return std::sqrt(std::max(0.0, pair_norm_sq(p))); }
inline double tangent_norm(const TangentElement& t, const QuadraticLieAlgebra& g) {
  return std::sqrt(std::max(0.0, vn_ip(t, t, g)));
}

inline bool Pair::is_zero(double tol) const { return pair_norm_sq(*this) <= tol; }

inline Pair scaled(const Pair& p, double c) { return Pair{p.n, p.mu.scaled(c), c * p.phi, p.codomain}; }

inline Pair normalized(const Pair& p) {
  const double nrm = pair_norm(p);
  if (nrm <= 0) throw std::invalid_argument("normalized: zero pair");
  return scaled(p, 1.0 / nrm);
}

struct Residuals {
  double jacobi = 0.0;
  double hom = 0.0;
  double max() const { return std::max(jacobi, hom); }
};

/// Degree-2-normalized residuals of the defining equations. The zero pair
/// reports (0, 0); orbit and moment operations reject it instead.
inline Residuals residuals(const Pair& p) {
  const double nsq = pair_norm_sq(p);
  if (nsq <= 0) return {0.0, 0.0};
  const QuadraticLieAlgebra& g = *p.codomain;
  double hom = 0.0;
  for (int i = 0; i < p.n; ++i)
    for (int j = i + 1; j < p.n; ++j) {
      Vector lhs = p.phi * p.mu.bracket_basis(i, j);
      Vector rhs = g.brk(p.phi.col(i), p.phi.col(j));
      hom = std::max(hom, g.norm(lhs - rhs));
    }
  return {p.mu.jacobi_residual() / nsq, hom / nsq};
}

/// Stacked values of the defining equations at p: all Jacobi triples i<j<k
/// followed by the homomorphism defect on pairs i<j (raw g coordinates).
inline Vector variety_equations(const Pair& p) {
  const int n = p.n;
  const int d = p.codomain->dim();
  const int rows = n * (n - 1) * (n - 2) / 6 * n + n * (n - 1) / 2 * d;
  Vector f(rows);
  int pos = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        Vector v = p.mu.bracket(Vector::Unit(n, i), p.mu.bracket_basis(j, k)) -
                   p.mu.bracket(p.mu.bracket_basis(i, j), Vector::Unit(n, k)) -
                   p.mu.bracket(Vector::Unit(n, j), p.mu.bracket_basis(i, k));
        f.segment(pos, n) = v;
        pos += n;
      }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      f.segment(pos, d) = p.phi * p.mu.bracket_basis(i, j) - p.codomain->brk(p.phi.col(i), p.phi.col(j));
      pos += d;
    }
  return f;
}

/// Gauss-Newton reprojection onto the variety. The defining equations are
/// quadratic, so central differences with unit step give the exact Jacobian.
/// Used to keep long flows from drifting off along expanding directions of
/// the linearized group action; a no-op when the residuals are already tiny.
inline Pair purify_to_variety(Pair p, double target = 1e-14, int max_iter = 3) {
  const int n = p.n;
  const int d = p.codomain->dim();
  const int nvars = n * (n - 1) / 2 * n + d * n;
  if (nvars == 0 || variety_equations(p).size() == 0) return p;
  for (int iter = 0; iter < max_iter; ++iter) {
    const double nsq = pair_norm_sq(p);
    Vector f = variety_equations(p);
    if (f.lpNorm<Eigen::Infinity>() <= target * nsq) break;
    Matrix jac(f.size(), nvars);
    int var = 0;
    auto probe = [&](auto&& bump) {
      Pair plus = p, minus = p;
      bump(plus, 1.0);
      bump(minus, -1.0);
      jac.col(var++) = 0.5 * (variety_equations(plus) - variety_equations(minus));
    };
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        for (int k = 0; k < n; ++k)
          probe([&](Pair& q, double s) { q.mu.set_antisymmetric(i, j, k, q.mu(i, j, k) + s); });
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < n; ++c)
        probe([&](Pair& q, double s) { q.phi(r, c) += s; });
    Eigen::JacobiSVD<Matrix> svd(jac, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();
    const double smax = std::max(sv.size() ? sv[0] : 0.0, 1e-300);
    Vector uf = svd.matrixU().transpose() * f;
    for (Eigen::Index i = 0; i < uf.size(); ++i) uf[i] = sv[i] > 1e-10 * smax ? uf[i] / sv[i] : 0.0;
    Vector dz = -(svd.matrixV() * uf);
    int pos = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        for (int k = 0; k < n; ++k) p.mu.set_antisymmetric(i, j, k, p.mu(i, j, k) + dz[pos++]);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < n; ++c) p.phi(r, c) += dz[pos++];
  }
  return p;
}

/// An element (g, h) of GL(n,R) x Inn(g); h acts on g-coordinates and is kept
/// as an explicit automorphism matrix (generated as a product of exp(ad_v)).
struct GroupElement {
  Matrix gl_part;
  Matrix inner_part;

  static GroupElement identity(int n, const QuadraticLieAlgebra& g) {
    return {Matrix::Identity(n, n), Matrix::Identity(g.dim(), g.dim())};
  }
};

inline GroupElement compose(const GroupElement& a, const GroupElement& b) {
  return {a.gl_part * b.gl_part, a.inner_part * b.inner_part};
}

/// exp of a gc_n(g) element (A, v): the group element (exp A, exp ad_v).
inline GroupElement group_exp(const Matrix& a, const Vector& v, const QuadraticLieAlgebra& g) {
  return {a.exp(), g.ad(v).exp()};
}

inline double automorphism_residual(const QuadraticLieAlgebra& g, const Matrix& h) {
  const int d = g.dim();
  double r = 0.0;
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      Vector lhs = h * g.bracket().bracket_basis(i, j);
      Vector rhs = g.brk(h.col(i), h.col(j));
      r = std::max(r, (lhs - rhs).norm() / (scale * scale));
    }
  return r;
}

/// (g, h) . (mu, phi) = (g mu(g^{-1} ., g^{-1} .), h phi g^{-1}).
inline Pair group_act(const GroupElement& e, const Pair& p) {
  const int n = p.n;
  Eigen::FullPivLU<Matrix> lu(e.gl_part);
  if (!lu.isInvertible() || std::abs(lu.determinant()) < 1e-300)
    throw std::invalid_argument("group_act: singular gl part");
  Matrix ginv = lu.inverse();
  StructureTensor mu2(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Vector w = e.gl_part * p.mu.bracket(ginv.col(i), ginv.col(j));
      for (int k = 0; k < n; ++k) mu2.set_antisymmetric(i, j, k, w[k]);
    }
  return Pair{n, std::move(mu2), e.inner_part * p.phi * ginv, p.codomain};
}

/// Infinitesimal action of (A, v) in gc_n(g): the derivative at t = 0 of
/// (exp tA, exp t ad_v) . (mu, phi), i.e.
///   dmu(X,Y) = A mu(X,Y) - mu(AX,Y) - mu(X,AY),  dphi = ad_v phi - phi A.
inline TangentElement inf_act(const Matrix& a, const Vector& v, const Pair& p) {
  const int n = p.n;
  StructureTensor dmu(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Vector w = a * p.mu.bracket_basis(i, j) - p.mu.bracket(a.col(i), Vector::Unit(n, j)) -
                 p.mu.bracket(Vector::Unit(n, i), a.col(j));
      for (int k = 0; k < n; ++k) dmu.set_antisymmetric(i, j, k, w[k]);
    }
  Matrix dphi = p.codomain->ad(v) * p.phi - p.phi * a;
  return {std::move(dmu), std::move(dphi)};
}

/// ad^{mu,phi} : X -> (ad^mu_X, phi X), a pair derivation whenever the pair
/// satisfies the defining equations.
inline std::pair<Matrix, Vector> pair_adjoint(const Pair& p, const Vector& x) {
  return {p.mu.ad(x), p.phi * x};
}

// ---------------------------------------------------------------------------
// gc_n(g) coordinates. Elements (A, v) are packed as (A row-major, G^{1/2} v),
// which is orthonormal for the Frobenius + gram inner product.
// ---------------------------------------------------------------------------

inline int gc_dim(int n, const QuadraticLieAlgebra& g) { return n * n + g.dim(); }

inline Vector gc_pack(const Matrix& a, const Vector& v, const QuadraticLieAlgebra& g) {
  const int n = static_cast<int>(a.rows());
  Vector out(gc_dim(n, g));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out[i * n + j] = a(i, j);
  out.tail(g.dim()) = g.gram_sqrt() * v;
  return out;
}

inline std::pair<Matrix, Vector> gc_unpack(const Vector& w, int n, const QuadraticLieAlgebra& g) {
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = w[i * n + j];
  Vector v = g.gram_inv_sqrt() * w.tail(g.dim());
  return {a, v};
}

inline double gc_ip(const Matrix& a1, const Vector& v1, const Matrix& a2, const Vector& v2,
                    const QuadraticLieAlgebra& g) {
  return (a1.transpose() * a2).trace() + v1.dot(g.gram() * v2);
}

inline double gc_norm(const Matrix& a, const Vector& v, const QuadraticLieAlgebra& g) {
  return std::sqrt(std::max(0.0, gc_ip(a, v, a, v, g)));
}

/// Bracket of gc_n(g) = gl(n) + g: ([A,B], [v,w]).
inline std::pair<Matrix, Vector> gc_bracket(const Matrix& a1, const Vector& v1, const Matrix& a2,
                                            const Vector& v2, const QuadraticLieAlgebra& g) {
  return {a1 * a2 - a2 * a1, g.brk(v1, v2)};
}

/// theta-tilde(A, v) = (-A^T, theta v).
inline std::pair<Matrix, Vector> gc_theta(const Matrix& a, const Vector& v, const QuadraticLieAlgebra& g) {
  return {-a.transpose(), g.theta(v)};
}

// V_n(g) orthonormal coordinates: (mu_{ij}^k for i<j, (G^{1/2} phi) entries).
inline int vn_dim(int n, const QuadraticLieAlgebra& g) { return n * (n - 1) / 2 * n + g.dim() * n; }

inline Vector vn_pack(const StructureTensor& mu, const Matrix& phi, const QuadraticLieAlgebra& g) {
  const int n = mu.dim();
  Vector out(vn_dim(n, g));
  int pos = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = 0; k < n; ++k) out[pos++] = mu(i, j, k);
  Matrix ph = g.gram_sqrt() * phi;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < g.dim(); ++i) out[pos++] = ph(i, j);
  return out;
}

/// Orthonormal basis of der(mu, phi) inside gc_n(g), with the singular
/// spectrum of the defining linear map and the kernel cutoff used.
struct DerivationSpace {
  std::vector<std::pair<Matrix, Vector>> basis;
  Vector singular_values;
  double cutoff = 0.0;

  int dim() const { return static_cast<int>(basis.size()); }

  /// Basis as columns in packed gc coordinates.
  Matrix packed(int n, const QuadraticLieAlgebra& g) const {
    Matrix out(gc_dim(n, g), dim());
    for (int a = 0; a < dim(); ++a) out.col(a) = gc_pack(basis[a].first, basis[a].second, g);
    return out;
  }
};

/// Numerical kernel of (A, v) -> (A, v) . (mu, phi), via one dense SVD of the
/// stacked system in orthonormal coordinates. Desk-scale sizes only.
inline DerivationSpace derivation_space(const Pair& p, double tol = 1e-8) {
  if (p.is_zero()) throw std::invalid_argument("derivation_space: zero pair");
  const QuadraticLieAlgebra& g = *p.codomain;
  const int n = p.n;
  const int cols = gc_dim(n, g);
  Matrix sys(vn_dim(n, g), cols);
  for (int c = 0; c < cols; ++c) {
    auto [a, v] = gc_unpack(Vector::Unit(cols, c), n, g);
    TangentElement t = inf_act(a, v, p);
    sys.col(c) = vn_pack(t.dmu, t.dphi, g);
  }
  DerivationSpace out;
  Matrix ker = nullspace(sys, tol, &out.singular_values, &out.cutoff);
  out.basis.reserve(ker.cols());
  for (Eigen::Index c = 0; c < ker.cols(); ++c) out.basis.push_back(gc_unpack(ker.col(c), n, g));
  return out;
}

}  // namespace lievar
