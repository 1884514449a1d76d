#pragma once

#include <vector>

#include "lievar/pairs.hpp"

namespace lievar {

/// The quadratic moment value M(mu,phi) = (M(mu) - phi*phi, u) together with
/// the derived quantities k, D = M_gl + k I and the energy k / |(mu,phi)|^2.
struct MomentValue {
  Matrix M_gl;          // symmetric n x n component
  Vector M_g;           // g component, u = sum_i [theta phi(e_i), phi(e_i)]
  double norm_pair_sq = 0.0;
  double k = 0.0;
  Matrix D;
  double energy = 0.0;

  const Vector& u() const { return M_g; }

  double norm_sq(const QuadraticLieAlgebra& g) const {
    return M_gl.squaredNorm() + M_g.dot(g.gram() * M_g);
  }
  double du_norm_sq(const QuadraticLieAlgebra& g) const {
    return D.squaredNorm() + M_g.dot(g.gram() * M_g);
  }
};

namespace detail {

inline MomentValue finish_moment(Matrix m_gl, Vector u, double nsq, const QuadraticLieAlgebra& g) {
  const int n = static_cast<int>(m_gl.rows());
  MomentValue mv;
  mv.M_gl = 0.5 * (m_gl + m_gl.transpose().eval());
  mv.M_g = std::move(u);
  mv.norm_pair_sq = nsq;
  mv.k = (mv.M_gl.squaredNorm() + mv.M_g.dot(g.gram() * mv.M_g)) / nsq;
  Matrix d = mv.M_gl + mv.k * Matrix::Identity(n, n);
  mv.D = 0.5 * (d + d.transpose().eval());
  mv.energy = mv.k / nsq;
  return mv;
}

}  // namespace detail

/// Moment value by the closed formula
///   <M(mu)X,Y> = 1/2 sum_{ij} <X,mu(ei,ej)><mu(ei,ej),Y> - sum_i <mu(X,ei),mu(Y,ei)>,
///   M_gl = M(mu) - phi*phi,  u = sum_i [theta phi(e_i), phi(e_i)],
/// with phi* = phi^T G taken in the codomain gram product.
inline MomentValue moment_explicit(const Pair& p) {
  const double nsq = pair_norm_sq(p);
  if (nsq <= 0) throw std::invalid_argument("moment_explicit: zero pair");
  const QuadraticLieAlgebra& g = *p.codomain;
  const int n = p.n;

  Matrix m_mu = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Vector w = p.mu.bracket_basis(i, j);
      m_mu += w * w.transpose();  // the 1/2 cancels against summing i<j only
    }
  Matrix ad_terms = Matrix::Zero(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b <= a; ++b) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += p.mu.bracket_basis(a, i).dot(p.mu.bracket_basis(b, i));
      ad_terms(a, b) = ad_terms(b, a) = acc;
    }
  Matrix phistar_phi = p.phi.transpose() * g.gram() * p.phi;

  Vector u = Vector::Zero(g.dim());
  for (int i = 0; i < n; ++i) u += g.brk(g.theta(p.phi.col(i)), p.phi.col(i));

  return detail::finish_moment(m_mu - ad_terms - phistar_phi, std::move(u), nsq, g);
}

/// Moment value straight from the defining relation
///   <M(mu,phi), (A,v)> = <(A,v).(mu,phi), (mu,phi)>,
/// expanded against an orthonormal basis of Symm(n) + p. Serves as the
/// independent oracle for moment_explicit.
inline MomentValue moment_definitional(const Pair& p) {
  const double nsq = pair_norm_sq(p);
  if (nsq <= 0) throw std::invalid_argument("moment_definitional: zero pair");
  const QuadraticLieAlgebra& g = *p.codomain;
  const int n = p.n;

  Matrix m_gl = Matrix::Zero(n, n);
  const Vector zero_v = Vector::Zero(g.dim());
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      Matrix a = Matrix::Zero(n, n);
      if (i == j) {
        a(i, i) = 1.0;
      } else {
        a(i, j) = a(j, i) = 1.0 / std::sqrt(2.0);
      }
      TangentElement t = inf_act(a, zero_v, p);
      const double coeff = vn_ip(t.dmu, t.dphi, p.mu, p.phi, g);
      m_gl += coeff * a;
    }
  }
  Matrix pbasis = g.minus_eigenspace();  // gram-orthonormal columns
  Vector u = Vector::Zero(g.dim());
  const Matrix zero_a = Matrix::Zero(n, n);
  for (Eigen::Index c = 0; c < pbasis.cols(); ++c) {
    TangentElement t = inf_act(zero_a, pbasis.col(c), p);
    const double coeff = vn_ip(t.dmu, t.dphi, p.mu, p.phi, g);
    u += coeff * pbasis.col(c);
  }
  return detail::finish_moment(std::move(m_gl), std::move(u), nsq, g);
}

/// Gradient of the energy at the unit-sphere representative of p:
///   grad E = 4 (E (id,0) + m) . (mu:phi) = 4 (D, u) . (mu:phi).
/// Vanishes exactly when (D, u) is a pair derivation.
inline TangentElement energy_gradient(const Pair& p) {
  Pair unit = normalized(p);
  MomentValue mv = moment_explicit(unit);
  TangentElement t = inf_act(mv.D, mv.M_g, unit);
  t.dmu = t.dmu.scaled(4.0);
  t.dphi *= 4.0;
  return t;
}

inline double energy(const Pair& p) { return moment_explicit(p).energy; }

/// max over the derivation basis of |<M, (delta,v)>| / (|M| |(delta,v)|).
/// Contract: below 1e-8 for points of the variety.
inline double derivation_orthogonality_check(const Pair& p, const DerivationSpace& ds) {
  MomentValue mv = moment_explicit(p);
  const QuadraticLieAlgebra& g = *p.codomain;
  const double mnorm = std::sqrt(mv.norm_sq(g));
  if (mnorm == 0) return 0.0;
  double worst = 0.0;
  for (const auto& [a, v] : ds.basis) {
    const double ip = gc_ip(mv.M_gl, mv.M_g, a, v, g);
    const double bn = gc_norm(a, v, g);
    if (bn > 0) worst = std::max(worst, std::abs(ip) / (mnorm * bn));
  }
  return worst;
}

struct BracketPositivityItem {
  double value = 0.0;           // <M, [theta~(delta,v), (delta,v)]>, always >= 0 in exact arithmetic
  bool tight = false;           // equality case
  double theta_image_residual = 0.0;  // |(-delta*, theta v) . p| when tight
};

/// For each derivation basis element evaluates <M, [theta~(delta,v),(delta,v)]>.
/// Equality cases are flagged and the iff direction (theta~-image is again a
/// derivation) is verified on them.
inline std::vector<BracketPositivityItem> lemma23_part2_check(const Pair& p, const DerivationSpace& ds,
                                                              double tol = 1e-8) {
  Pair unit = normalized(p);
  MomentValue mv = moment_explicit(unit);
  const QuadraticLieAlgebra& g = *unit.codomain;
  std::vector<BracketPositivityItem> out;
  out.reserve(ds.basis.size());
  for (const auto& [a, v] : ds.basis) {
    auto [ta, tv] = gc_theta(a, v, g);
    auto [ba, bv] = gc_bracket(ta, tv, a, v, g);
    BracketPositivityItem item;
    item.value = gc_ip(mv.M_gl, mv.M_g, ba, bv, g);
    item.tight = std::abs(item.value) <= tol;
    if (item.tight) {
      TangentElement img = inf_act(ta, tv, unit);
      item.theta_image_residual = tangent_norm(img, g);
    }
    out.push_back(item);
  }
  return out;
}

}  // namespace lievar
