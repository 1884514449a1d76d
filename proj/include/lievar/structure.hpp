#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "lievar/catalog.hpp"
#include "lievar/moment.hpp"

namespace lievar {

struct CriticalityReport {
  double projection_residual = 0.0;  // distance of (D,u) from span der(mu,phi), relative
  bool is_critical = false;
  double tolerance = 0.0;
  double energy = 0.0;
  Vector D_spectrum;
  double D_min_eig = 0.0;
  int der_dim = 0;
};

/// A pair is critical exactly when (D, u) is a pair derivation; this projects
/// (D, u) onto der(mu,phi) and reports the relative off-space residual.
inline CriticalityReport criticality_test(const Pair& p, double tol = 1e-6, double der_tol = 1e-8) {
  Pair unit = normalized(p);
  const QuadraticLieAlgebra& g = *unit.codomain;
  MomentValue mv = moment_explicit(unit);
  DerivationSpace ds = derivation_space(unit, der_tol);
  CriticalityReport rep;
  rep.tolerance = tol;
  rep.energy = mv.energy;
  rep.der_dim = ds.dim();
  Eigen::SelfAdjointEigenSolver<Matrix> es(mv.D);
  rep.D_spectrum = es.eigenvalues();
  rep.D_min_eig = rep.D_spectrum.size() ? rep.D_spectrum[0] : 0.0;
  Vector w = gc_pack(mv.D, mv.M_g, g);
  const double wn = w.norm();
  if (wn <= 1e-14) {
    rep.projection_residual = 0.0;
  } else {
    Matrix basis = ds.packed(unit.n, g);
    rep.projection_residual = (w - project_onto(basis, w)).norm() / wn;
  }
  rep.is_critical = rep.projection_residual <= tol;
  return rep;
}

struct PsdReport {
  double min_eig = 0.0;
  Vector spectrum;
  int kernel_violations = 0;  // kernel eigenvectors with vanishing pair-adjoint image
};

/// Eigendecomposition of D. For critical pairs D must be positive
/// semi-definite and any X killed by the pair adjoint must leave ker D.
inline PsdReport psd_check(const Pair& p) {
  MomentValue mv = moment_explicit(p);
  const QuadraticLieAlgebra& g = *p.codomain;
  Eigen::SelfAdjointEigenSolver<Matrix> es(mv.D);
  PsdReport rep;
  rep.spectrum = es.eigenvalues();
  rep.min_eig = rep.spectrum.size() ? rep.spectrum[0] : 0.0;
  // kernel cutoff relative to k, so that D = 0 + roundoff reads as all-kernel
  const double dscale = std::max(rep.spectrum.size() ? rep.spectrum.cwiseAbs().maxCoeff() : 0.0, mv.k);
  const double pscale = pair_norm(p);
  for (Eigen::Index i = 0; i < rep.spectrum.size(); ++i) {
    if (std::abs(rep.spectrum[i]) > 1e-8 * dscale) continue;
    auto [a, v] = pair_adjoint(p, es.eigenvectors().col(i));
    if (gc_norm(a, v, g) <= 1e-8 * pscale) ++rep.kernel_violations;
  }
  return rep;
}

struct RationalSpectrum {
  double c = 1.0;  // smallest scaling with c * eig((1/k) D) and c * eig((1/k) ad_u) integral
  std::vector<long> D_ints;
  std::vector<long> adu_ints;
  double residual = 0.0;
  bool ok = false;
  Vector D_eigs;    // eigenvalues of (1/k) D, ascending
  Vector adu_eigs;  // eigenvalues of (1/k) ad_u, ascending
};

/// Reconstructs the eigenvalues of (1/k) D and (1/k) ad_u as rationals with
/// denominator <= max_den (continued fractions) and scales them to a common
/// integer vector. A residual above 1e-4 signals either non-criticality or a
/// too-small max_den, and is reported rather than silently accepted.
inline RationalSpectrum rational_spectrum(const Pair& p, std::int64_t max_den = 64) {
  MomentValue mv = moment_explicit(p);
  const QuadraticLieAlgebra& g = *p.codomain;
  if (mv.k <= 0) throw std::invalid_argument("rational_spectrum: vanishing k");
  RationalSpectrum out;
  Eigen::SelfAdjointEigenSolver<Matrix> esd(mv.D / mv.k);
  out.D_eigs = esd.eigenvalues();
  Matrix adu = g.gram_sqrt() * g.ad(mv.M_g) * g.gram_inv_sqrt() / mv.k;
  Eigen::SelfAdjointEigenSolver<Matrix> esu(0.5 * (adu + adu.transpose().eval()));
  out.adu_eigs = esu.eigenvalues();

  std::vector<double> eigs;
  for (Eigen::Index i = 0; i < out.D_eigs.size(); ++i) eigs.push_back(out.D_eigs[i]);
  for (Eigen::Index i = 0; i < out.adu_eigs.size(); ++i) eigs.push_back(out.adu_eigs[i]);

  std::int64_t den_lcm = 1, num_gcd = 0;
  for (double e : eigs) {
    Fraction f = rational_approx(e, max_den);
    if (f.num == 0) continue;
    den_lcm = lcm64(den_lcm, f.den);
    num_gcd = gcd64(num_gcd, f.num);
  }
  if (num_gcd == 0) num_gcd = 1;  // zero spectrum
  out.c = static_cast<double>(den_lcm) / static_cast<double>(num_gcd);
  for (Eigen::Index i = 0; i < out.D_eigs.size(); ++i)
    out.D_ints.push_back(static_cast<long>(std::llround(out.c * out.D_eigs[i])));
  for (Eigen::Index i = 0; i < out.adu_eigs.size(); ++i)
    out.adu_ints.push_back(static_cast<long>(std::llround(out.c * out.adu_eigs[i])));
  double res = 0.0;
  for (double e : eigs) res = std::max(res, std::abs(out.c * e - std::llround(out.c * e)));
  out.residual = res;
  out.ok = res <= 1e-4;
  return out;
}

struct GradedBlock {
  long weight = 0;
  Matrix basis;  // orthonormal columns (gram-orthonormal for g-blocks)
};

struct Gradation {
  double c = 1.0;  // rescaling applied to D and ad_u themselves (= spectrum scaling / k)
  std::int64_t denominators_bound = 64;
  std::vector<GradedBlock> h_blocks;  // weights of the eigenspaces of c D
  std::vector<GradedBlock> g_blocks;  // weights of the eigenspaces of c ad_u
  double bracket_residual_h = 0.0;    // mu(h^a, h^b) off h^{a+b}
  double bracket_residual_g = 0.0;    // [g^a, g^b] off g^{a+b}
  double phi_residual = 0.0;          // phi[h^a] off g^a
  double compat_residual = 0.0;
  bool ok = false;
  RationalSpectrum spectrum;
};

/// Assembles the integer gradations of h_mu and g induced by cD and c ad_u and
/// measures their compatibility with both brackets and with phi.
inline Gradation gradation(const Pair& p_in, std::int64_t max_den = 64) {
  Pair p = normalized(p_in);
  const QuadraticLieAlgebra& g = *p.codomain;
  MomentValue mv = moment_explicit(p);
  Gradation out;
  out.denominators_bound = max_den;
  out.spectrum = rational_spectrum(p, max_den);
  if (!out.spectrum.ok) return out;  // reconstruction failure propagated
  out.c = out.spectrum.c / mv.k;

  auto group_blocks = [](const Matrix& vecs, const Vector& eigs, double scale) {
    std::vector<GradedBlock> blocks;
    Eigen::Index i = 0;
    while (i < eigs.size()) {
      const long w = std::lround(scale * eigs[i]);
      Eigen::Index j = i;
      while (j < eigs.size() && std::lround(scale * eigs[j]) == w) ++j;
      blocks.push_back({w, vecs.middleCols(i, j - i)});
      i = j;
    }
    return blocks;
  };

  Eigen::SelfAdjointEigenSolver<Matrix> esd(mv.D);
  out.h_blocks = group_blocks(esd.eigenvectors(), esd.eigenvalues(), out.c);

  Matrix adu = g.gram_sqrt() * g.ad(mv.M_g) * g.gram_inv_sqrt();
  Eigen::SelfAdjointEigenSolver<Matrix> esu(0.5 * (adu + adu.transpose().eval()));
  // g-blocks kept in gram-orthonormal coordinates for easy projections
  out.g_blocks = group_blocks(esu.eigenvectors(), esu.eigenvalues(), out.c);

  auto h_block = [&](long w) -> const GradedBlock* {
    for (const auto& b : out.h_blocks)
      if (b.weight == w) return &b;
    return nullptr;
  };
  auto g_block = [&](long w) -> const GradedBlock* {
    for (const auto& b : out.g_blocks)
      if (b.weight == w) return &b;
    return nullptr;
  };

  for (const auto& ba : out.h_blocks)
    for (const auto& bb : out.h_blocks) {
      const GradedBlock* target = h_block(ba.weight + bb.weight);
      for (Eigen::Index x = 0; x < ba.basis.cols(); ++x)
        for (Eigen::Index y = 0; y < bb.basis.cols(); ++y) {
          Vector w = p.mu.bracket(ba.basis.col(x), bb.basis.col(y));
          Vector off = target ? Vector(w - project_onto(target->basis, w)) : w;
          out.bracket_residual_h = std::max(out.bracket_residual_h, off.norm());
        }
    }
  for (const auto& ba : out.g_blocks)
    for (const auto& bb : out.g_blocks) {
      const GradedBlock* target = g_block(ba.weight + bb.weight);
      for (Eigen::Index x = 0; x < ba.basis.cols(); ++x)
        for (Eigen::Index y = 0; y < bb.basis.cols(); ++y) {
          Vector va = g.gram_inv_sqrt() * ba.basis.col(x);
          Vector vb = g.gram_inv_sqrt() * bb.basis.col(y);
          Vector w = g.gram_sqrt() * g.brk(va, vb);
          Vector off = target ? Vector(w - project_onto(target->basis, w)) : w;
          out.bracket_residual_g = std::max(out.bracket_residual_g, off.norm());
        }
    }
  for (const auto& ba : out.h_blocks) {
    const GradedBlock* target = g_block(ba.weight);
    for (Eigen::Index x = 0; x < ba.basis.cols(); ++x) {
      Vector w = g.gram_sqrt() * (p.phi * ba.basis.col(x));
      Vector off = target ? Vector(w - project_onto(target->basis, w)) : w;
      out.phi_residual = std::max(out.phi_residual, off.norm());
    }
  }
  out.compat_residual = std::max({out.bracket_residual_h, out.bracket_residual_g, out.phi_residual});
  out.ok = true;
  return out;
}

struct LeviDecomposition {
  Subspace m_part;  // Levi factor: derived ideal of ker D
  Subspace a_part;  // center of ker D
  Subspace n_part;  // nilradical = image of D
  double m_subalgebra_residual = 0.0;
  double n_ideal_residual = 0.0;
  double orthogonality_residual = 0.0;
  double splitting_gap = 0.0;  // smallest kept / largest dropped singular value of the derived span
};

/// h_mu = m + a + n for a critical pair: n = im D, and ker D splits into its
/// derived ideal m and center a.
inline LeviDecomposition levi_decompose(const Pair& p_in, double tol = 1e-8) {
  Pair p = normalized(p_in);
  MomentValue mv = moment_explicit(p);
  const int n = p.n;
  Eigen::SelfAdjointEigenSolver<Matrix> es(mv.D);
  // kernel/image split relative to max(spectrum, k): D = 0 + roundoff is all kernel
  const double dmax = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), mv.k);
  std::vector<Eigen::Index> ker_idx, im_idx;
  for (Eigen::Index i = 0; i < n; ++i)
    (std::abs(es.eigenvalues()[i]) <= std::sqrt(tol) * dmax ? ker_idx : im_idx).push_back(i);
  Matrix K(n, ker_idx.size()), N(n, im_idx.size());
  for (std::size_t i = 0; i < ker_idx.size(); ++i) K.col(i) = es.eigenvectors().col(ker_idx[i]);
  for (std::size_t i = 0; i < im_idx.size(); ++i) N.col(i) = es.eigenvectors().col(im_idx[i]);

  LeviDecomposition out;
  out.n_part = Subspace{N};
  const Eigen::Index q = K.cols();
  if (q == 0) {
    out.m_part = Subspace{Matrix::Zero(n, 0)};
    out.a_part = Subspace{Matrix::Zero(n, 0)};
    return out;
  }
  // derived ideal of ker D, in ker coordinates
  Matrix spans(q, q * (q - 1) / 2);
  Eigen::Index col = 0;
  for (Eigen::Index a = 0; a < q; ++a)
    for (Eigen::Index b = a + 1; b < q; ++b) spans.col(col++) = K.transpose() * p.mu.bracket(K.col(a), K.col(b));
  Matrix m_coords;
  if (spans.cols() == 0) {
    m_coords = Matrix::Zero(q, 0);
  } else {
    Eigen::JacobiSVD<Matrix> svd(spans, Eigen::ComputeThinU);
    const Vector& sv = svd.singularValues();
    const double smax = std::max(sv.size() ? sv[0] : 0.0, 1e-300);
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv[rank] > tol * smax) ++rank;
    double largest_dropped = rank < sv.size() ? sv[rank] : 0.0;
    double smallest_kept = rank > 0 ? sv[rank - 1] : smax;
    out.splitting_gap = largest_dropped > 0 ? smallest_kept / largest_dropped : 1.0 / tol;
    if (rank > 0 && rank < sv.size() && out.splitting_gap < 1.0 / std::sqrt(tol) * 1e-2)
      throw std::runtime_error("levi_decompose: derived-ideal span is numerically ill-conditioned");
    m_coords = svd.matrixU().leftCols(rank);
  }
  Matrix a_coords = nullspace(m_coords.transpose(), 1e-10);
  out.m_part = Subspace{K * m_coords};
  out.a_part = Subspace{K * a_coords};

  auto off_span = [&](const Matrix& basis, const Vector& v) { return (v - project_onto(basis, v)).norm(); };
  for (Eigen::Index a = 0; a < out.m_part.basis.cols(); ++a)
    for (Eigen::Index b = 0; b < out.m_part.basis.cols(); ++b)
      out.m_subalgebra_residual = std::max(
          out.m_subalgebra_residual,
          off_span(out.m_part.basis, p.mu.bracket(out.m_part.basis.col(a), out.m_part.basis.col(b))));
  for (int x = 0; x < n; ++x)
    for (Eigen::Index b = 0; b < N.cols(); ++b)
      out.n_ideal_residual =
          std::max(out.n_ideal_residual, off_span(N, p.mu.bracket(Vector::Unit(n, x), N.col(b))));
  auto cross = [&](const Matrix& u, const Matrix& w) {
    if (u.cols() == 0 || w.cols() == 0) return 0.0;
    return (u.transpose() * w).cwiseAbs().maxCoeff();
  };
  out.orthogonality_residual = std::max({cross(out.m_part.basis, out.a_part.basis),
                                         cross(out.m_part.basis, N), cross(out.a_part.basis, N)});
  return out;
}

struct RestrictionReport {
  Pair restricted;
  double u_residual = 0.0;           // |u_restricted - u_original|
  double D_residual = 0.0;           // |D_restricted - D|_n| in the nilradical basis
  double criticality_residual = 0.0;
  bool trivial = false;              // empty nilradical
  bool ok = false;
};

/// Restriction of a critical pair to its nilradical: again critical, with the
/// same u and with D restricted.
inline RestrictionReport restrict_nilradical(const Pair& p_in) {
  Pair p = normalized(p_in);
  const QuadraticLieAlgebra& g = *p.codomain;
  LeviDecomposition ld = levi_decompose(p);
  const Matrix& N = ld.n_part.basis;
  const int m = static_cast<int>(N.cols());
  RestrictionReport rep;
  if (m == 0) {
    rep.restricted = Pair{0, StructureTensor(0), Matrix::Zero(g.dim(), 0), p.codomain};
    rep.trivial = true;
    rep.ok = true;
    return rep;
  }
  StructureTensor nu(m);
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) {
      Vector w = N.transpose() * p.mu.bracket(N.col(a), N.col(b));
      for (int k = 0; k < m; ++k) nu.set_antisymmetric(a, b, k, w[k]);
    }
  rep.restricted = Pair{m, std::move(nu), p.phi * N, p.codomain};
  MomentValue mv = moment_explicit(p);
  MomentValue mvr = moment_explicit(rep.restricted);
  rep.u_residual = g.norm(mvr.M_g - mv.M_g);
  rep.D_residual = (mvr.D - N.transpose() * mv.D * N).cwiseAbs().maxCoeff();
  rep.criticality_residual = criticality_test(rep.restricted).projection_residual;
  rep.ok = rep.u_residual <= 1e-7 && rep.D_residual <= 1e-7 && rep.criticality_residual <= 1e-6;
  return rep;
}

struct ReductivePartReport {
  Pair reductive_pair;  // over gc(dim n_mu, g)
  double criticality_residual = 0.0;
  double energy_deviation = 0.0;  // |E - 1/dim l|
  double k_deviation = 0.0;       // |k_new - k_original|
  double u_norm = 0.0;            // |u_new|, must vanish
  bool ok = false;
};

/// The pair (nu, psi) on l = ker D with psi(X) = (ad_X|_n, phi X) taking
/// values in gc_m(g): a minimal-energy critical pair preserving k.
inline ReductivePartReport reductive_part_pair(const Pair& p_in) {
  Pair p = normalized(p_in);
  const QuadraticLieAlgebra& g = *p.codomain;
  LeviDecomposition ld = levi_decompose(p);
  const int q = ld.m_part.dim() + ld.a_part.dim();
  if (q == 0) throw std::invalid_argument("reductive_part_pair: trivial ker D");
  Matrix L(p.n, q);
  L.leftCols(ld.m_part.dim()) = ld.m_part.basis;
  L.rightCols(ld.a_part.dim()) = ld.a_part.basis;
  const Matrix& N = ld.n_part.basis;
  const int m = static_cast<int>(N.cols());

  catalog::AlgebraEntry gc = catalog::make_gc(m, p.codomain);
  Matrix psi(gc.algebra->dim(), q);
  for (int i = 0; i < q; ++i) {
    Matrix ad_on_n = N.transpose() * p.mu.ad(L.col(i)) * N;
    psi.col(i) = catalog::gc_algebra_coords(ad_on_n, p.phi * L.col(i));
  }
  StructureTensor nu(q);
  for (int a = 0; a < q; ++a)
    for (int b = a + 1; b < q; ++b) {
      Vector w = L.transpose() * p.mu.bracket(L.col(a), L.col(b));
      for (int k = 0; k < q; ++k) nu.set_antisymmetric(a, b, k, w[k]);
    }
  ReductivePartReport rep;
  rep.reductive_pair = Pair{q, std::move(nu), std::move(psi), gc.algebra};
  MomentValue mv = moment_explicit(p);
  MomentValue mvr = moment_explicit(rep.reductive_pair);
  rep.criticality_residual = criticality_test(rep.reductive_pair).projection_residual;
  rep.energy_deviation = std::abs(mvr.energy - 1.0 / q);
  rep.k_deviation = std::abs(mvr.k - mv.k);
  rep.u_norm = gc.algebra->norm(mvr.M_g);
  rep.ok = rep.criticality_residual <= 1e-6 && rep.energy_deviation <= 1e-7 && rep.k_deviation <= 1e-7 &&
           rep.u_norm <= 1e-7;
  return rep;
}

// ---------------------------------------------------------------------------
// theta~-invariant derivations r_{mu,phi} = der(mu,phi) /\ theta~[der(mu,phi)]
// ---------------------------------------------------------------------------

struct ThetaInvariantDerivations {
  AlgebraPtr gc;         // ambient gc_n(g)
  Matrix basis_packed;   // orthonormal columns in packed gc coordinates
  std::vector<std::pair<Matrix, Vector>> elements;
  double commutation_residual = 0.0;  // with (D,u), meaningful at critical pairs

  int dim() const { return static_cast<int>(basis_packed.cols()); }
  Subspace as_subspace() const {
    Matrix coords(basis_packed.rows(), basis_packed.cols());
    for (Eigen::Index c = 0; c < basis_packed.cols(); ++c)
      coords.col(c) = catalog::gc_algebra_coords(elements[c].first, elements[c].second);
    return Subspace{coords, gc.get()};
  }
};

/// Matrix of theta~ acting on packed gc coordinates.
inline Matrix gc_theta_packed(int n, const QuadraticLieAlgebra& g) {
  const int dim = gc_dim(n, g);
  Matrix t(dim, dim);
  for (int c = 0; c < dim; ++c) {
    auto [a, v] = gc_unpack(Vector::Unit(dim, c), n, g);
    auto [ta, tv] = gc_theta(a, v, g);
    t.col(c) = gc_pack(ta, tv, g);
  }
  return t;
}

inline ThetaInvariantDerivations theta_invariant_derivations(const Pair& p_in, double tol = 1e-8) {
  Pair p = normalized(p_in);
  const QuadraticLieAlgebra& g = *p.codomain;
  DerivationSpace ds = derivation_space(p, tol);
  ThetaInvariantDerivations out;
  out.gc = catalog::make_gc(p.n, p.codomain).algebra;
  Matrix U = ds.packed(p.n, g);
  if (U.cols() == 0) {
    out.basis_packed = Matrix::Zero(gc_dim(p.n, g), 0);
    return out;
  }
  Matrix T = gc_theta_packed(p.n, g);
  Matrix W = column_space(T * U, 1e-12);
  out.basis_packed = subspace_intersection(U, W, tol);
  for (Eigen::Index c = 0; c < out.basis_packed.cols(); ++c)
    out.elements.push_back(gc_unpack(out.basis_packed.col(c), p.n, g));
  MomentValue mv = moment_explicit(p);
  for (const auto& [a, v] : out.elements) {
    auto [ba, bv] = gc_bracket(a, v, mv.D, mv.M_g, g);
    out.commutation_residual = std::max(out.commutation_residual, gc_norm(ba, bv, g));
  }
  return out;
}

struct RAlgebra {
  AlgebraPtr algebra;                           // r_{mu,phi} with restricted beta~ / theta~
  Matrix basis_packed;                          // columns: r basis in packed gc coordinates
  std::vector<std::pair<Matrix, Vector>> elements;
  AlgebraPtr gc;                                // the ambient gc_n(g)
  double closure_residual = 0.0;                // bracket leak outside the span
};

/// Builds r_{mu,phi} as a quadratic Lie algebra carrying the restriction of
/// beta~ and theta~ from gc_n(g); validated before use in extensions.
inline RAlgebra build_r_algebra(const Pair& p, double tol = 1e-8) {
  ThetaInvariantDerivations tid = theta_invariant_derivations(p, tol);
  const QuadraticLieAlgebra& g = *p.codomain;
  const int r = tid.dim();
  RAlgebra out;
  out.basis_packed = tid.basis_packed;
  out.elements = tid.elements;
  out.gc = tid.gc;
  StructureTensor t(r);
  for (int a = 0; a < r; ++a)
    for (int b = a + 1; b < r; ++b) {
      auto [ba, bv] = gc_bracket(tid.elements[a].first, tid.elements[a].second, tid.elements[b].first,
                                 tid.elements[b].second, g);
      Vector packed = gc_pack(ba, bv, g);
      Vector coords = tid.basis_packed.transpose() * packed;
      out.closure_residual = std::max(out.closure_residual, (packed - tid.basis_packed * coords).norm());
      for (int k = 0; k < r; ++k) {
        // clamp roundoff so near-abelian subalgebras come out exactly abelian
        const double v = std::abs(coords[k]) < 1e-12 ? 0.0 : coords[k];
        t.set_antisymmetric(a, b, k, v);
      }
    }
  Matrix form(r, r);
  for (int a = 0; a < r; ++a)
    for (int b = a; b < r; ++b) {
      const auto& [aa, av] = tid.elements[a];
      const auto& [bb, bv] = tid.elements[b];
      form(a, b) = form(b, a) = (aa * bb).trace() + av.dot(g.form() * bv);
    }
  Matrix T = gc_theta_packed(p.n, g);
  Matrix theta = tid.basis_packed.transpose() * T * tid.basis_packed;
  out.algebra = std::make_shared<const QuadraticLieAlgebra>("r(" + g.label() + ")", std::move(t),
                                                            std::move(form), std::move(theta));
  return out;
}

/// A one-dimensional abelian pair into the toral line of r_{mu,phi} spanned by
/// (D,u), scaled so that its k matches k of the base pair.
inline Pair make_toral_extension(const Pair& base, const RAlgebra& r) {
  Pair unit = normalized(base);
  const QuadraticLieAlgebra& g = *unit.codomain;
  MomentValue mv = moment_explicit(unit);
  Vector packed = gc_pack(mv.D, mv.M_g, g);
  Vector coords = r.basis_packed.transpose() * packed;
  const double off = (packed - r.basis_packed * coords).norm();
  if (coords.norm() <= 1e-12 || off > 1e-6 * packed.norm())
    throw std::runtime_error("make_toral_extension: (D,u) does not span a line of r (pair not critical?)");
  Matrix psi = std::sqrt(mv.k) * (coords / coords.norm());
  psi.resize(r.algebra->dim(), 1);
  return Pair{1, StructureTensor(1), psi, r.algebra};
}

struct ExtensionReport {
  Pair product;
  double rescale_factor = 1.0;  // applied to the extension to equalize k
  Residuals product_residuals;
  double criticality_residual = 0.0;
  double D_block_residual = 0.0;  // |D_product - D_ext + (delta(u_ext)+D_base)| blockwise
  double u_residual = 0.0;        // |u_product - (pi(u_ext) + u_base)|
  bool ok = false;
};

/// Semi-direct extension of a nilpotent critical base pair by a critical pair
/// into r_{mu,phi}:
///   nu~((X,A),(Y,B)) = (nu(X,Y), mu(A,B) + delta(psi X) B - delta(psi Y) A)
///   psi~(X,A) = pi(psi X) + phi(A)
/// after rescaling the extension so both k values agree.
inline ExtensionReport semidirect_extend(const Pair& base_in, const Pair& ext_in,
                                         const RAlgebra& r, double crit_tol = 1e-6) {
  Pair base = normalized(base_in);
  const QuadraticLieAlgebra& g = *base.codomain;
  MomentValue mv_base = moment_explicit(base);
  if (mv_base.k <= 0) throw std::invalid_argument("semidirect_extend: base pair has k = 0");
  {
    CriticalityReport cr = criticality_test(base, crit_tol);
    if (!cr.is_critical) throw std::invalid_argument("semidirect_extend: base pair is not critical");
    Eigen::SelfAdjointEigenSolver<Matrix> es(mv_base.D);
    if (es.eigenvalues()[0] <= 1e-8 * es.eigenvalues().cwiseAbs().maxCoeff())
      throw std::invalid_argument("semidirect_extend: base pair has nontrivial ker D (not nilpotent)");
  }
  const int m = ext_in.n, n = base.n;
  if (m == 0) {
    ExtensionReport rep;
    rep.product = base;
    rep.product_residuals = residuals(base);
    rep.criticality_residual = criticality_test(base, crit_tol).projection_residual;
    rep.D_block_residual = 0.0;
    rep.u_residual = 0.0;
    rep.ok = true;
    return rep;
  }
  if (ext_in.codomain->dim() != r.algebra->dim())
    throw std::invalid_argument("semidirect_extend: extension codomain does not match r_{mu,phi}");

  ExtensionReport rep;
  Pair ext = ext_in;
  ext.codomain = r.algebra;  // same data, canonical instance
  MomentValue mv_ext = moment_explicit(ext);
  rep.rescale_factor = std::sqrt(mv_base.k / mv_ext.k);
  ext = scaled(ext, rep.rescale_factor);
  mv_ext = moment_explicit(ext);

  // psi columns as gc_n(g) elements (A_i, v_i)
  std::vector<Matrix> delta_psi(m, Matrix::Zero(n, n));
  std::vector<Vector> pi_psi(m, Vector::Zero(g.dim()));
  for (int i = 0; i < m; ++i) {
    Vector packed = r.basis_packed * ext.phi.col(i);
    auto [a, v] = gc_unpack(packed, n, g);
    delta_psi[i] = a;
    pi_psi[i] = v;
  }

  const int nn = m + n;
  StructureTensor mu2(nn);
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      Vector w = ext.mu.bracket_basis(i, j);
      for (int k = 0; k < m; ++k) mu2.set_antisymmetric(i, j, k, w[k]);
    }
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      Vector w = base.mu.bracket_basis(a, b);
      for (int k = 0; k < n; ++k) mu2.set_antisymmetric(m + a, m + b, m + k, w[k]);
    }
  for (int i = 0; i < m; ++i)
    for (int b = 0; b < n; ++b) {
      Vector w = delta_psi[i].col(b);
      for (int k = 0; k < n; ++k) mu2.set_antisymmetric(i, m + b, m + k, w[k]);
    }
  Matrix phi2(g.dim(), nn);
  for (int i = 0; i < m; ++i) phi2.col(i) = pi_psi[i];
  phi2.rightCols(n) = base.phi;
  rep.product = Pair{nn, std::move(mu2), std::move(phi2), base.codomain};

  rep.product_residuals = residuals(rep.product);
  rep.criticality_residual = criticality_test(rep.product, crit_tol).projection_residual;
  MomentValue mv_prod = moment_explicit(rep.product);

  // delta(u_ext), pi(u_ext): u_ext has coefficients in the r basis
  Vector u_ext_packed = r.basis_packed * mv_ext.M_g;
  auto [du_ext, pu_ext] = gc_unpack(u_ext_packed, n, g);
  Matrix d_expected = Matrix::Zero(nn, nn);
  d_expected.topLeftCorner(m, m) = mv_ext.D;
  d_expected.bottomRightCorner(n, n) = du_ext + mv_base.D;
  rep.D_block_residual = (mv_prod.D - d_expected).cwiseAbs().maxCoeff();
  rep.u_residual = g.norm(mv_prod.M_g - (pu_ext + mv_base.M_g));
  rep.ok = rep.product_residuals.max() <= 1e-9 && rep.criticality_residual <= crit_tol &&
           rep.D_block_residual <= 1e-7 && rep.u_residual <= 1e-7;
  return rep;
}

// ---------------------------------------------------------------------------
// minimal stratum structure
// ---------------------------------------------------------------------------

struct MinimalFactor {
  Subspace basis;            // subspace of R^n
  bool is_center = false;
  double homothety_constant = 0.0;
  double homothety_residual = 0.0;
  double energy = 0.0;
  double energy_deviation = 0.0;  // |E_i - 1/n_i|
};

struct MinimalDecomposition {
  std::vector<MinimalFactor> factors;
  double image_orthogonality_residual = 0.0;
  bool ok = false;
};

/// Splits a minimal critical pair into its center and bracket-irreducible
/// ideals (eigenspaces of phi*phi refined by bracket connectivity); verifies
/// the per-factor homothety, image orthogonality and energies.
inline MinimalDecomposition minimal_decompose(const Pair& p, double tol = 1e-6) {
  // works at the input scale so the homothety constants refer to the given
  // pair; the energy checks are scale-invariant anyway
  if (p.is_zero()) throw std::invalid_argument("minimal_decompose: zero pair");
  const QuadraticLieAlgebra& g = *p.codomain;
  MomentValue mv = moment_explicit(p);
  if (std::abs(mv.energy - 1.0 / p.n) > tol)
    throw std::invalid_argument("minimal_decompose: pair is not at minimal energy");
  const int n = p.n;

  Matrix ad_stack(n * n, n);
  for (int i = 0; i < n; ++i) {
    Matrix ad = p.mu.ad(Vector::Unit(n, i));
    ad_stack.col(i) = Eigen::Map<Vector>(ad.data(), n * n);
  }
  Matrix center = nullspace(ad_stack, 1e-8);
  Matrix derived = nullspace(center.transpose(), 1e-10);

  MinimalDecomposition out;
  Matrix w = p.phi.transpose() * g.gram() * p.phi;

  std::vector<Matrix> blocks;
  if (derived.cols() > 0) {
    Matrix wr = derived.transpose() * w * derived;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (wr + wr.transpose().eval()));
    const Vector& ev = es.eigenvalues();
    const double scale = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
    // group eigenvalues, then refine each group by bracket connectivity
    Eigen::Index i = 0;
    while (i < ev.size()) {
      Eigen::Index j = i;
      while (j < ev.size() && ev[j] - ev[i] <= 1e-6 * scale) ++j;
      Matrix cols = derived * es.eigenvectors().middleCols(i, j - i);
      const Eigen::Index r = cols.cols();
      std::vector<int> comp(r);
      std::iota(comp.begin(), comp.end(), 0);
      std::function<int(int)> find = [&](int x) { return comp[x] == x ? x : comp[x] = find(comp[x]); };
      for (Eigen::Index a = 0; a < r; ++a)
        for (Eigen::Index b = a + 1; b < r; ++b) {
          bool linked = false;
          for (int c = 0; c < n && !linked; ++c)
            linked = std::abs(cols.col(b).dot(p.mu.bracket(cols.col(a), Vector::Unit(n, c)))) > 1e-8;
          if (linked) comp[find(static_cast<int>(b))] = find(static_cast<int>(a));
        }
      std::map<int, std::vector<Eigen::Index>> groups;
      for (Eigen::Index a = 0; a < r; ++a) groups[find(static_cast<int>(a))].push_back(a);
      for (auto& [root, idxs] : groups) {
        Matrix blk(n, idxs.size());
        for (std::size_t a = 0; a < idxs.size(); ++a) blk.col(a) = cols.col(idxs[a]);
        blocks.push_back(blk);
      }
      i = j;
    }
  }

  auto factor_report = [&](const Matrix& basis, bool is_center) {
    MinimalFactor f;
    f.basis = Subspace{basis};
    f.is_center = is_center;
    const int ni = static_cast<int>(basis.cols());
    Matrix wi = basis.transpose() * w * basis;
    f.homothety_constant = wi.trace() / ni;
    f.homothety_residual = (wi - f.homothety_constant * Matrix::Identity(ni, ni)).cwiseAbs().maxCoeff();
    StructureTensor mi(ni);
    for (int a = 0; a < ni; ++a)
      for (int b = a + 1; b < ni; ++b) {
        Vector wv = basis.transpose() * p.mu.bracket(basis.col(a), basis.col(b));
        for (int k = 0; k < ni; ++k) mi.set_antisymmetric(a, b, k, wv[k]);
      }
    Pair sub{ni, std::move(mi), p.phi * basis, p.codomain};
    f.energy = moment_explicit(sub).energy;
    f.energy_deviation = std::abs(f.energy - 1.0 / ni);
    return f;
  };

  if (center.cols() > 0) out.factors.push_back(factor_report(center, true));
  for (const auto& blk : blocks) out.factors.push_back(factor_report(blk, false));

  for (std::size_t a = 0; a < out.factors.size(); ++a)
    for (std::size_t b = a + 1; b < out.factors.size(); ++b) {
      Matrix cross = (p.phi * out.factors[a].basis.basis).transpose() * g.gram() *
                     (p.phi * out.factors[b].basis.basis);
      out.image_orthogonality_residual =
          std::max(out.image_orthogonality_residual, cross.cwiseAbs().maxCoeff());
    }
  out.ok = out.image_orthogonality_residual <= 1e-8;
  for (const auto& f : out.factors)
    out.ok = out.ok && f.homothety_residual <= 1e-7 && f.energy_deviation <= 1e-7;
  return out;
}

struct MetricGaugeResult {
  Matrix gl;                    // the gauge g with mu' = g . mu
  double moment_residual = 0.0; // |M(mu') + (|mu'|^2/n) I|, max entry
  double involution_residual = 0.0;
  double automorphism_residual = 0.0;

  GroupElement as_group_element(const QuadraticLieAlgebra& g) const {
    return {gl, Matrix::Identity(g.dim(), g.dim())};
  }
};

/// M(mu) for a bare bracket (the phi = 0 moment component).
inline Matrix bracket_moment(const StructureTensor& mu) {
  const int n = mu.dim();
  Matrix m = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Vector w = mu.bracket_basis(i, j);
      m += w * w.transpose();
    }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b <= a; ++b) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += mu.bracket_basis(a, i).dot(mu.bracket_basis(b, i));
      m(a, b) -= acc;
      if (a != b) m(b, a) -= acc;
    }
  return m;
}

inline double bracket_norm_sq(const StructureTensor& mu) {
  double acc = 0.0;
  for (int i = 0; i < mu.dim(); ++i)
    for (int j = i + 1; j < mu.dim(); ++j) acc += mu.bracket_basis(i, j).squaredNorm();
  return acc;
}

inline StructureTensor bracket_act(const Matrix& g, const StructureTensor& mu) {
  const int n = mu.dim();
  Matrix ginv = g.inverse();
  StructureTensor out(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Vector w = g * mu.bracket(ginv.col(i), ginv.col(j));
      for (int k = 0; k < n; ++k) out.set_antisymmetric(i, j, k, w[k]);
    }
  return out;
}

/// Metric gauge for a semi-simple bracket: returns g with
///   M(g . mu) = -(|g . mu|^2 / n) I,
/// built as the symmetric square root of the positive form
///   W(X,Y) = -(n / (2 |mu|^2)) B_mu(theta' X, Y).
inline MetricGaugeResult minimal_metric_gauge(const StructureTensor& mu, const Matrix& theta_prime) {
  const int n = mu.dim();
  MetricGaugeResult out;
  out.involution_residual = (theta_prime * theta_prime - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Vector lhs = theta_prime * mu.bracket_basis(i, j);
      Vector rhs = mu.bracket(theta_prime.col(i), theta_prime.col(j));
      out.automorphism_residual = std::max(out.automorphism_residual, (lhs - rhs).norm());
    }
  if (out.involution_residual > 1e-8 || out.automorphism_residual > 1e-8)
    throw std::invalid_argument("minimal_metric_gauge: theta_prime is not an involutive automorphism");
  Matrix b = killing_form(mu);
  {
    Eigen::SelfAdjointEigenSolver<Matrix> es(b);
    const double bmax = es.eigenvalues().cwiseAbs().maxCoeff();
    if (es.eigenvalues().cwiseAbs().minCoeff() <= 1e-10 * bmax)
      throw std::invalid_argument("minimal_metric_gauge: Killing form is degenerate");
  }
  const double musq = bracket_norm_sq(mu);
  Matrix w = -(n / (2.0 * musq)) * theta_prime.transpose() * b;
  w = 0.5 * (w + w.transpose().eval());
  {
    Eigen::SelfAdjointEigenSolver<Matrix> es(w);
    if (es.eigenvalues()[0] <= 0)
      throw std::invalid_argument("minimal_metric_gauge: theta_prime is not a Cartan involution (form not positive)");
  }
  out.gl = symmetric_sqrt(w);
  StructureTensor mu2 = bracket_act(out.gl, mu);
  const double musq2 = bracket_norm_sq(mu2);
  out.moment_residual =
      (bracket_moment(mu2) + (musq2 / n) * Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
  return out;
}

struct MostowReport {
  Matrix theta_prime;  // Cartan involution of h_mu with theta phi = phi theta_prime
  double involution_residual = 0.0;    // |theta'^2 - I|
  double automorphism_residual = 0.0;  // theta' as automorphism of mu
  double compat_residual = 0.0;        // |theta phi - phi theta'| (gram norm, max column)
  double metric_residual = 0.0;        // per-factor |<X,Y> + (n_i/(2|mu_i|^2)) B_i(theta' X, Y)|
  bool ok = false;
};

/// The compatible Cartan involution theta' = phi* theta phi (per simple
/// factor, with phi rescaled to an isometry) of a minimal critical pair.
inline MostowReport mostow_involution(const Pair& p_in, double tol = 1e-6) {
  Pair p = normalized(p_in);
  const QuadraticLieAlgebra& g = *p.codomain;
  MomentValue mv = moment_explicit(p);
  if (std::abs(mv.energy - 1.0 / p.n) > tol)
    throw std::invalid_argument("mostow_involution: pair is not at minimal energy");
  {
    Matrix b = killing_form(p.mu);
    Eigen::SelfAdjointEigenSolver<Matrix> es(b);
    const double bmax = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
    if (es.eigenvalues().cwiseAbs().minCoeff() <= 1e-10 * bmax)
      throw std::invalid_argument("mostow_involution: h_mu is not semi-simple (degenerate Killing form)");
  }
  MinimalDecomposition md = minimal_decompose(p, tol);
  for (const auto& f : md.factors)
    if (f.is_center) throw std::invalid_argument("mostow_involution: h_mu has a nontrivial center");

  const int n = p.n;
  Matrix phistar_theta_phi = p.phi.transpose() * g.gram() * g.involution() * p.phi;
  Matrix theta_prime = Matrix::Zero(n, n);
  MostowReport rep;
  for (const auto& f : md.factors) {
    const Matrix& fb = f.basis.basis;
    Matrix ti = (fb.transpose() * phistar_theta_phi * fb) / f.homothety_constant;
    theta_prime += fb * ti * fb.transpose();

    // metric identity of the gauge lemma on this factor
    const int ni = static_cast<int>(fb.cols());
    StructureTensor mi(ni);
    for (int a = 0; a < ni; ++a)
      for (int b2 = a + 1; b2 < ni; ++b2) {
        Vector wv = fb.transpose() * p.mu.bracket(fb.col(a), fb.col(b2));
        for (int k = 0; k < ni; ++k) mi.set_antisymmetric(a, b2, k, wv[k]);
      }
    Matrix bi = killing_form(mi);
    const double misq = bracket_norm_sq(mi);
    // W(X,Y) = -(n_i/(2|mu_i|^2)) B_i(theta' X, Y) must equal the (restricted) dot product
    Matrix w = -(ni / (2.0 * misq)) * ti.transpose() * bi;
    rep.metric_residual =
        std::max(rep.metric_residual, (0.5 * (w + w.transpose().eval()) - Matrix::Identity(ni, ni)).cwiseAbs().maxCoeff());
  }
  rep.theta_prime = theta_prime;
  rep.involution_residual = (theta_prime * theta_prime - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Vector lhs = theta_prime * p.mu.bracket_basis(i, j);
      Vector rhs = p.mu.bracket(theta_prime.col(i), theta_prime.col(j));
      rep.automorphism_residual = std::max(rep.automorphism_residual, (lhs - rhs).norm());
    }
  Matrix compat = g.involution() * p.phi - p.phi * theta_prime;
  for (int j = 0; j < n; ++j)
    rep.compat_residual = std::max(rep.compat_residual, g.norm(compat.col(j)));
  rep.ok = rep.involution_residual <= tol && rep.automorphism_residual <= tol &&
           rep.compat_residual <= tol && rep.metric_residual <= tol;
  return rep;
}

struct AbelianClassification {
  bool is_homothety = false;
  bool image_commutes = false;
  bool theta_invariant_envelope = false;
  bool minimal = false;
  double homothety_residual = 0.0;
  double commutation_residual = 0.0;
  double envelope_residual = 0.0;
  double energy = 0.0;
};

/// Classification of abelian pairs (0 : phi): minimal energy holds exactly
/// when phi is a homothety and the span of {phi X, theta phi X} is abelian.
inline AbelianClassification abelian_classify(const Pair& p_in) {
  if (p_in.mu.max_abs() > 1e-12) throw std::invalid_argument("abelian_classify: mu is not zero");
  Pair p = normalized(p_in);
  const QuadraticLieAlgebra& g = *p.codomain;
  AbelianClassification out;
  Matrix w = p.phi.transpose() * g.gram() * p.phi;
  const double c = w.trace() / p.n;
  out.homothety_residual = (w - c * Matrix::Identity(p.n, p.n)).cwiseAbs().maxCoeff();
  out.is_homothety = out.homothety_residual <= 1e-8;
  for (int i = 0; i < p.n; ++i)
    for (int j = i + 1; j < p.n; ++j)
      out.commutation_residual = std::max(out.commutation_residual, g.norm(g.brk(p.phi.col(i), p.phi.col(j))));
  out.image_commutes = out.commutation_residual <= 1e-8;
  Matrix env(g.dim(), 2 * p.n);
  env.leftCols(p.n) = p.phi;
  env.rightCols(p.n) = g.involution() * p.phi;
  for (int i = 0; i < 2 * p.n; ++i)
    for (int j = i + 1; j < 2 * p.n; ++j)
      out.envelope_residual = std::max(out.envelope_residual, g.norm(g.brk(env.col(i), env.col(j))));
  out.theta_invariant_envelope = out.envelope_residual <= 1e-8;
  out.energy = moment_explicit(p).energy;
  out.minimal = std::abs(out.energy - 1.0 / p.n) <= 1e-8 && out.is_homothety && out.image_commutes &&
                out.theta_invariant_envelope;
  return out;
}

struct AdaptedBasis {
  Matrix basis;            // orthonormal columns, joint eigenvectors
  Vector D_eigenvalues;    // per column
  Vector W_eigenvalues;    // phi*phi eigenvalue per column
  double commutator_norm = 0.0;
};

/// Joint orthonormal eigenbasis of D and phi*phi (they commute at critical
/// pairs), ordered by D-eigenvalue, then phi*phi-eigenvalue, then index.
inline AdaptedBasis adapted_basis(const Pair& p_in) {
  Pair p = normalized(p_in);
  const QuadraticLieAlgebra& g = *p.codomain;
  MomentValue mv = moment_explicit(p);
  Matrix w = p.phi.transpose() * g.gram() * p.phi;
  AdaptedBasis out;
  out.commutator_norm = (mv.D * w - w * mv.D).cwiseAbs().maxCoeff();
  const double scale = std::max({mv.D.cwiseAbs().maxCoeff(), w.cwiseAbs().maxCoeff(), 1e-300});
  if (out.commutator_norm > 1e-8 * scale)
    throw std::runtime_error("adapted_basis: [D, phi*phi] = " + std::to_string(out.commutator_norm) +
                             " (pair is not critical)");
  const int n = p.n;
  Eigen::SelfAdjointEigenSolver<Matrix> esd(mv.D);
  out.basis = Matrix(n, n);
  out.D_eigenvalues = Vector(n);
  out.W_eigenvalues = Vector(n);
  const double dscale = std::max(esd.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
  int pos = 0;
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index j = i;
    while (j < n && esd.eigenvalues()[j] - esd.eigenvalues()[i] <= 1e-8 * dscale) ++j;
    Matrix block = esd.eigenvectors().middleCols(i, j - i);
    Matrix wb = block.transpose() * w * block;
    Eigen::SelfAdjointEigenSolver<Matrix> esw(0.5 * (wb + wb.transpose().eval()));
    for (Eigen::Index a = 0; a < block.cols(); ++a, ++pos) {
      out.basis.col(pos) = block * esw.eigenvectors().col(a);
      out.D_eigenvalues[pos] = esd.eigenvalues()[i];
      out.W_eigenvalues[pos] = esw.eigenvalues()[a];
    }
    i = j;
  }
  return out;
}

}  // namespace lievar
