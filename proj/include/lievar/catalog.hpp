#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lievar/pairs.hpp"

namespace lievar {
namespace catalog {

struct AlgebraEntry {
  AlgebraPtr algebra;
  std::optional<Subspace> cartan;  // distinguished theta-invariant Cartan subalgebra, when known
};

/// sl(m, R) in the basis H_i = E_ii - E_{i+1,i+1} (i = 1..m-1) followed by the
/// off-diagonal units E_ij in row-major order; theta X = -X^T, beta = Killing.
inline AlgebraEntry make_sl(int m) {
  if (m < 2) throw std::invalid_argument("make_sl: m must be >= 2");
  const int d = m * m - 1;
  std::vector<Matrix> basis;
  basis.reserve(d);
  for (int i = 0; i + 1 < m; ++i) {
    Matrix h = Matrix::Zero(m, m);
    h(i, i) = 1;
    h(i + 1, i + 1) = -1;
    basis.push_back(h);
  }
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (i != j) {
        Matrix e = Matrix::Zero(m, m);
        e(i, j) = 1;
        basis.push_back(e);
      }

  auto coords = [&](const Matrix& x) {
    Vector c = Vector::Zero(d);
    double acc = 0.0;
    for (int i = 0; i + 1 < m; ++i) {
      acc += x(i, i);
      c[i] = acc;
    }
    int pos = m - 1;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        if (i != j) c[pos++] = x(i, j);
    return c;
  };

  StructureTensor t(d);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      Vector c = coords(basis[i] * basis[j] - basis[j] * basis[i]);
      for (int k = 0; k < d; ++k)
        if (c[k] != 0.0) t.set_antisymmetric(i, j, k, c[k]);
    }
  Matrix theta = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i) theta.col(i) = coords(-basis[i].transpose());
  Matrix form = killing_form(t);
  auto alg = std::make_shared<const QuadraticLieAlgebra>("sl" + std::to_string(m) + "R", std::move(t),
                                                         std::move(form), std::move(theta));
  Subspace cartan{Matrix::Identity(d, d).leftCols(m - 1), alg.get()};
  return {alg, cartan};
}

/// su(2) with [e1,e2] = e3 cyclic; compact, theta = id, beta = Killing = -2 I.
inline AlgebraEntry make_su2(const std::string& label = "su2") {
  StructureTensor t(3);
  t.set_antisymmetric(0, 1, 2, 1.0);
  t.set_antisymmetric(1, 2, 0, 1.0);
  t.set_antisymmetric(2, 0, 1, 1.0);
  Matrix form = killing_form(t);
  auto alg = std::make_shared<const QuadraticLieAlgebra>(label, std::move(t), std::move(form),
                                                         Matrix::Identity(3, 3));
  Subspace cartan{Matrix::Identity(3, 3).leftCols(1), alg.get()};
  return {alg, cartan};
}

inline AlgebraEntry make_so3() { return make_su2("so3"); }

/// Direct product: block structure constants, block form, block involution.
inline AlgebraEntry make_product(const AlgebraEntry& a, const AlgebraEntry& b, std::string label = "") {
  const int da = a.algebra->dim(), db = b.algebra->dim(), d = da + db;
  StructureTensor t(d);
  for (int i = 0; i < da; ++i)
    for (int j = i + 1; j < da; ++j)
      for (int k = 0; k < da; ++k)
        if (double v = a.algebra->bracket()(i, j, k); v != 0.0) t.set_antisymmetric(i, j, k, v);
  for (int i = 0; i < db; ++i)
    for (int j = i + 1; j < db; ++j)
      for (int k = 0; k < db; ++k)
        if (double v = b.algebra->bracket()(i, j, k); v != 0.0)
          t.set_antisymmetric(da + i, da + j, da + k, v);
  Matrix form = Matrix::Zero(d, d);
  form.topLeftCorner(da, da) = a.algebra->form();
  form.bottomRightCorner(db, db) = b.algebra->form();
  Matrix theta = Matrix::Zero(d, d);
  theta.topLeftCorner(da, da) = a.algebra->involution();
  theta.bottomRightCorner(db, db) = b.algebra->involution();
  if (label.empty()) label = a.algebra->label() + "x" + b.algebra->label();
  auto alg = std::make_shared<const QuadraticLieAlgebra>(label, std::move(t), std::move(form), std::move(theta));
  std::optional<Subspace> cartan;
  if (a.cartan && b.cartan) {
    Matrix c = Matrix::Zero(d, a.cartan->dim() + b.cartan->dim());
    c.topLeftCorner(da, a.cartan->dim()) = a.cartan->basis;
    c.bottomRightCorner(db, b.cartan->dim()) = b.cartan->basis;
    cartan = Subspace{c, alg.get()};
  }
  return {alg, cartan};
}

/// gc_n(g) = gl(n,R) + g with beta~((A,v),(B,w)) = Tr(AB) + beta_g(v,w) and
/// theta~(A,v) = (-A^T, theta v). The form is invariant but not the Killing
/// form, which is why the algebra type stores beta as data. Basis: E_ab in
/// row-major order, then the basis of g.
inline AlgebraEntry make_gc(int n, const AlgebraPtr& g) {
  const int dg = g->dim();
  const int d = n * n + dg;
  StructureTensor t(d);
  auto gl_idx = [n](int a, int b) { return a * n + b; };
  // [E_ab, E_cd] = delta_bc E_ad - delta_da E_cb
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int e = 0; e < n; ++e) {
          const int i = gl_idx(a, b), j = gl_idx(c, e);
          if (i >= j) continue;
          if (b == c) t.at(i, j, gl_idx(a, e)) += 1.0;
          if (e == a) t.at(i, j, gl_idx(c, b)) -= 1.0;
        }
  for (int i = 0; i < n * n; ++i)
    for (int j = i + 1; j < n * n; ++j)
      for (int k = 0; k < n * n; ++k)
        if (double v = t(i, j, k); v != 0.0) t.at(j, i, k) = -v;
  for (int i = 0; i < dg; ++i)
    for (int j = i + 1; j < dg; ++j)
      for (int k = 0; k < dg; ++k)
        if (double v = g->bracket()(i, j, k); v != 0.0)
          t.set_antisymmetric(n * n + i, n * n + j, n * n + k, v);
  Matrix form = Matrix::Zero(d, d);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) form(gl_idx(a, b), gl_idx(b, a)) = 1.0;  // Tr(E_ab E_cd)
  form.bottomRightCorner(dg, dg) = g->form();
  Matrix theta = Matrix::Zero(d, d);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) theta(gl_idx(b, a), gl_idx(a, b)) = -1.0;  // E_ab -> -E_ba
  theta.bottomRightCorner(dg, dg) = g->involution();
  auto alg = std::make_shared<const QuadraticLieAlgebra>("gc(" + std::to_string(n) + "," + g->label() + ")",
                                                         std::move(t), std::move(form), std::move(theta));
  return {alg, std::nullopt};
}

/// Coordinates of a gc_n(g) element (A, v) in the make_gc basis.
inline Vector gc_algebra_coords(const Matrix& a, const Vector& v) {
  const int n = static_cast<int>(a.rows());
  Vector out(n * n + v.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out[i * n + j] = a(i, j);
  out.tail(v.size()) = v;
  return out;
}

inline std::pair<Matrix, Vector> gc_algebra_uncoords(const Vector& w, int n, int dg) {
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = w[i * n + j];
  return {a, w.tail(dg)};
}

inline AlgebraEntry algebra_by_name(const std::string& name) {
  if (name == "su2") return make_su2();
  if (name == "so3") return make_so3();
  if (name == "su2xsu2") return make_product(make_su2(), make_su2());
  if (name.size() >= 4 && name.substr(0, 2) == "sl" && name.back() == 'R') {
    const int m = std::stoi(name.substr(2, name.size() - 3));
    return make_sl(m);
  }
  throw std::invalid_argument("unknown catalog algebra: " + name);
}

inline std::vector<std::string> algebra_names() { return {"sl2R", "sl3R", "sl4R", "su2", "so3", "su2xsu2"}; }

// --------------------------------------------------------------------------
// Named pairs. Every homomorphism column is normalized so the inclusion is
// isometric for the -B(theta ., .) inner product, which is the normalization
// that makes the parabolic and nilradical inclusions critical.
// --------------------------------------------------------------------------

namespace detail {

inline StructureTensor sl2_bracket_tensor() {
  // basis {H, E, F}: [H,E] = 2E, [H,F] = -2F, [E,F] = H
  StructureTensor t(3);
  t.set_antisymmetric(0, 1, 1, 2.0);
  t.set_antisymmetric(0, 2, 2, -2.0);
  t.set_antisymmetric(1, 2, 0, 1.0);
  return t;
}

inline StructureTensor su2_bracket_tensor() {
  StructureTensor t(3);
  t.set_antisymmetric(0, 1, 2, 1.0);
  t.set_antisymmetric(1, 2, 0, 1.0);
  t.set_antisymmetric(2, 0, 1, 1.0);
  return t;
}

}  // namespace detail

inline Pair pair_by_name(const std::string& name) {
  const double s6 = std::sqrt(6.0);
  if (name == "identity-su2") {
    auto g = make_su2().algebra;
    return Pair{3, detail::su2_bracket_tensor(), Matrix::Identity(3, 3), g};
  }
  if (name == "identity-sl2R") {
    auto g = make_sl(2).algebra;
    return Pair{3, detail::sl2_bracket_tensor(), Matrix::Identity(3, 3), g};
  }
  if (name == "identity-sl3R") {
    auto g = make_sl(3).algebra;
    return Pair{8, g->bracket(), Matrix::Identity(8, 8), g};
  }
  if (name == "cartan-line-sl2R") {
    auto g = make_sl(2).algebra;
    Matrix phi = Matrix::Zero(3, 1);
    phi(0, 0) = 1.0 / std::sqrt(8.0);  // H, unit length
    return Pair{1, StructureTensor(1), phi, g};
  }
  if (name == "nilpotent-line-sl2R") {
    auto g = make_sl(2).algebra;
    Matrix phi = Matrix::Zero(3, 1);
    phi(1, 0) = 0.5;  // E, unit length
    return Pair{1, StructureTensor(1), phi, g};
  }
  if (name == "borel-sl2R") {
    auto g = make_sl(2).algebra;
    Matrix phi = Matrix::Zero(3, 2);
    phi(0, 0) = 1.0 / std::sqrt(8.0);
    phi(1, 1) = 0.5;
    StructureTensor mu(2);
    mu.set_antisymmetric(0, 1, 1, 1.0 / std::sqrt(2.0));
    return Pair{2, std::move(mu), phi, g};
  }
  if (name == "cartan-sl3") {
    auto g = make_sl(3).algebra;
    Matrix phi = Matrix::Zero(8, 2);
    phi(0, 0) = 1.0 / std::sqrt(12.0);         // t1 = diag(1,-1,0)/sqrt(12)
    phi(0, 1) = 1.0 / 6.0;                     // t2 = diag(1,1,-2)/6
    phi(1, 1) = 1.0 / 3.0;
    return Pair{2, StructureTensor(2), phi, g};
  }
  if (name == "heisenberg-sl3") {
    // nilradical of the Borel of sl(3,R): e1 -> E12, e2 -> E23, e3 -> E13
    auto g = make_sl(3).algebra;
    Matrix phi = Matrix::Zero(8, 3);
    phi(2, 0) = 1.0 / s6;
    phi(5, 1) = 1.0 / s6;
    phi(3, 2) = 1.0 / s6;
    StructureTensor mu(3);
    mu.set_antisymmetric(0, 1, 2, 1.0 / s6);
    return Pair{3, std::move(mu), phi, g};
  }
  if (name == "borel-sl3") {
    // torus + nilradical of sl(3,R), isometric inclusion
    auto g = make_sl(3).algebra;
    Matrix phi = Matrix::Zero(8, 5);
    phi(0, 0) = 1.0 / std::sqrt(12.0);
    phi(0, 1) = 1.0 / 6.0;
    phi(1, 1) = 1.0 / 3.0;
    phi(2, 2) = 1.0 / s6;
    phi(5, 3) = 1.0 / s6;
    phi(3, 4) = 1.0 / s6;
    StructureTensor mu(5);
    const double s3 = std::sqrt(3.0);
    mu.set_antisymmetric(0, 2, 2, 1.0 / s3);
    mu.set_antisymmetric(0, 3, 3, -0.5 / s3);
    mu.set_antisymmetric(0, 4, 4, 0.5 / s3);
    mu.set_antisymmetric(1, 3, 3, 0.5);
    mu.set_antisymmetric(1, 4, 4, 0.5);
    mu.set_antisymmetric(2, 3, 4, 1.0 / s6);
    return Pair{5, std::move(mu), phi, g};
  }
  if (name == "principal-sl2-sl3") {
    // irreducible 3-dimensional representation of sl(2,R)
    auto g = make_sl(3).algebra;
    const double s2 = std::sqrt(2.0);
    Matrix phi = Matrix::Zero(8, 3);
    phi(0, 0) = 2.0;  // diag(2,0,-2) = 2 H1 + 2 H2
    phi(1, 0) = 2.0;
    phi(2, 1) = s2;   // sqrt(2)(E12 + E23)
    phi(5, 1) = s2;
    phi(4, 2) = s2;   // sqrt(2)(E21 + E32)
    phi(7, 2) = s2;
    return Pair{3, detail::sl2_bracket_tensor(), phi, g};
  }
  if (name == "su2-line-product") {
    // minimal pair with one simple factor and one central line, images orthogonal
    auto g = make_product(make_su2(), make_su2()).algebra;
    Matrix phi = Matrix::Zero(6, 4);
    phi.topLeftCorner(3, 3) = Matrix::Identity(3, 3);
    phi(3, 3) = std::sqrt(1.5);
    StructureTensor mu(4);
    mu.set_antisymmetric(0, 1, 2, 1.0);
    mu.set_antisymmetric(1, 2, 0, 1.0);
    mu.set_antisymmetric(2, 0, 1, 1.0);
    return Pair{4, std::move(mu), phi, g};
  }
  throw std::invalid_argument("unknown catalog pair: " + name);
}

inline std::vector<std::string> pair_names() {
  return {"identity-su2",  "identity-sl2R", "identity-sl3R",     "cartan-line-sl2R",
          "nilpotent-line-sl2R", "borel-sl2R",    "cartan-sl3",        "heisenberg-sl3",
          "borel-sl3",     "principal-sl2-sl3", "su2-line-product"};
}

/// Catalog point with exact variety membership for a given (algebra, n), used
/// to seed the exact-membership random generators.
inline std::optional<std::string> seed_pair_name(const std::string& algebra, int n) {
  static const std::map<std::pair<std::string, int>, std::string> table = {
      {{"sl2R", 1}, "cartan-line-sl2R"}, {{"sl2R", 2}, "borel-sl2R"},
      {{"sl2R", 3}, "identity-sl2R"},    {{"sl3R", 2}, "cartan-sl3"},
      {{"sl3R", 3}, "heisenberg-sl3"},   {{"sl3R", 5}, "borel-sl3"},
      {{"sl3R", 8}, "identity-sl3R"},    {{"su2", 3}, "identity-su2"},
      {{"su2xsu2", 4}, "su2-line-product"}};
  auto it = table.find({algebra, n});
  if (it == table.end()) return std::nullopt;
  return it->second;
}

}  // namespace catalog
}  // namespace lievar
