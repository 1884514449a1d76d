#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "lievar/algebra.hpp"
#include "lievar/catalog.hpp"

using namespace lievar;

namespace {
StructureTensor sl2_tensor() {
  StructureTensor t(3);
  t.set_antisymmetric(0, 1, 1, 2.0);   // [H,E] = 2E
  t.set_antisymmetric(0, 2, 2, -2.0);  // [H,F] = -2F
  t.set_antisymmetric(1, 2, 0, 1.0);   // [E,F] = H
  return t;
}
}  // namespace

TEST_CASE("killing form values") {
  Matrix b = killing_form(sl2_tensor());
  CHECK(b(0, 0) == Catch::Approx(8.0));
  CHECK(b(1, 2) == Catch::Approx(4.0));
  CHECK(b(1, 1) == Catch::Approx(0.0).margin(1e-14));
  CHECK((b - b.transpose()).cwiseAbs().maxCoeff() < 1e-14);

  CHECK(killing_form(StructureTensor(4)).cwiseAbs().maxCoeff() == 0.0);

  auto su2 = catalog::make_su2();
  CHECK((killing_form(su2.algebra->bracket()) + 2.0 * Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("killing form of a product is the direct sum, exactly") {
  auto a = catalog::make_su2();
  auto b = catalog::make_sl(2);
  auto prod = catalog::make_product(a, b);
  Matrix k = killing_form(prod.algebra->bracket());
  Matrix expected = Matrix::Zero(6, 6);
  expected.topLeftCorner(3, 3) = killing_form(a.algebra->bracket());
  expected.bottomRightCorner(3, 3) = killing_form(b.algebra->bracket());
  CHECK((k - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("validate_algebra on catalog entries") {
  for (const auto& name : catalog::algebra_names()) {
    ValidationReport rep = validate_algebra(*catalog::algebra_by_name(name).algebra);
    INFO(name);
    CHECK(rep.ok);
    for (const auto& it : rep.items) {
      INFO(it.name << " residual " << it.residual);
      CHECK(it.pass);
    }
  }
}

TEST_CASE("validate_algebra flags a non-Cartan involution") {
  // replacing theta by the identity on sl(2,R) makes <E,E> = -B(E,E) = 0
  StructureTensor t = sl2_tensor();
  Matrix form = killing_form(t);
  QuadraticLieAlgebra alg("sl2-bad-theta", std::move(t), std::move(form), Matrix::Identity(3, 3));
  ValidationReport rep = validate_algebra(alg);
  CHECK_FALSE(rep.ok);
  for (const auto& it : rep.items) {
    if (it.name == "gram_positive_definite")
      CHECK_FALSE(it.pass);
    else
      CHECK(it.pass);  // the identity is still an involutive automorphism
  }
}

TEST_CASE("validate_algebra flags broken antisymmetry") {
  StructureTensor t(3);
  t.at(0, 1, 2) = 1.0;  // mirror entry left at zero on purpose
  QuadraticLieAlgebra alg("broken", std::move(t), Matrix::Zero(3, 3), Matrix::Identity(3, 3));
  ValidationReport rep = validate_algebra(alg);
  CHECK_FALSE(rep.ok);
  CHECK(rep.residual("antisymmetry") == Catch::Approx(1.0));
}

TEST_CASE("adjoint maps") {
  auto sl2 = catalog::make_sl(2);
  CHECK(adjoint(*sl2.algebra, Vector::Zero(3)).cwiseAbs().maxCoeff() == 0.0);
  // ad_H = diag(0, 2, -2) in the {H, E, F} basis
  Matrix ad_h = adjoint(*sl2.algebra, Vector::Unit(3, 0));
  Matrix expected = Eigen::Vector3d(0.0, 2.0, -2.0).asDiagonal();
  CHECK((ad_h - expected).cwiseAbs().maxCoeff() < 1e-14);

  // su(2): ad_{e1} sends e2 -> e3, e3 -> -e2
  auto su2 = catalog::make_su2();
  Matrix ad1 = adjoint(*su2.algebra, Vector::Unit(3, 0));
  CHECK((ad1 * Vector::Unit(3, 1) - Vector::Unit(3, 2)).norm() < 1e-14);
  CHECK((ad1 * Vector::Unit(3, 2) + Vector::Unit(3, 1)).norm() < 1e-14);

  // linearity in v
  Vector v1 = Vector::Random(3), v2 = Vector::Random(3);
  CHECK((adjoint(*sl2.algebra, v1 + v2) - adjoint(*sl2.algebra, v1) - adjoint(*sl2.algebra, v2))
            .cwiseAbs()
            .maxCoeff() < 1e-13);
}

TEST_CASE("centralizer") {
  auto sl2 = catalog::make_sl(2);
  const QuadraticLieAlgebra& g = *sl2.algebra;

  // the center of a semi-simple algebra is zero
  Subspace whole{Matrix::Identity(3, 3), &g};
  CHECK(centralizer(g, whole).dim() == 0);

  // z(H) = span{H}
  Subspace h_line{Matrix::Identity(3, 3).leftCols(1), &g};
  Subspace z = centralizer(g, h_line);
  REQUIRE(z.dim() == 1);
  CHECK(std::abs(z.basis(1, 0)) < 1e-12);
  CHECK(std::abs(z.basis(2, 0)) < 1e-12);

  // empty conditions centralize to everything
  Subspace none{Matrix::Zero(3, 0), &g};
  CHECK(centralizer(g, none).dim() == 3);

  // contract: brackets with the generating set nearly vanish
  for (int j = 0; j < z.dim(); ++j) {
    double bound = 10 * 1e-8 * g.norm(z.basis.col(j)) * g.norm(h_line.basis.col(0));
    CHECK(g.norm(g.brk(z.basis.col(j), h_line.basis.col(0))) <= std::max(bound, 1e-12));
  }
}

TEST_CASE("catalog entries expose the documented data") {
  auto sl2 = catalog::make_sl(2);
  CHECK(sl2.algebra->dim() == 3);
  CHECK(killing_form(sl2.algebra->bracket())(0, 0) == Catch::Approx(8.0));
  REQUIRE(sl2.cartan.has_value());
  CHECK(sl2.cartan->dim() == 1);

  auto sl3 = catalog::make_sl(3);
  CHECK(sl3.algebra->dim() == 8);
  REQUIRE(sl3.cartan.has_value());
  CHECK(sl3.cartan->dim() == 2);

  // gc(2, sl2R): dim 4 + 3, gram block diagonal (Frobenius and the sl2 gram)
  auto gc = catalog::make_gc(2, sl2.algebra);
  CHECK(gc.algebra->dim() == 7);
  Matrix gram = gc.algebra->gram();
  CHECK((gram.topLeftCorner(4, 4) - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((gram.bottomRightCorner(3, 3) - sl2.algebra->gram()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(gram.topRightCorner(4, 3).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(validate_algebra(*gc.algebra).ok);

  CHECK_THROWS_AS(catalog::algebra_by_name("e8"), std::invalid_argument);
}

TEST_CASE("theta-orthogonality: gram adjoint of ad_v is -ad_{theta v}") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> dist;
  for (const auto& name : catalog::algebra_names()) {
    auto entry = catalog::algebra_by_name(name);
    const QuadraticLieAlgebra& g = *entry.algebra;
    Vector v(g.dim());
    for (int i = 0; i < g.dim(); ++i) v[i] = dist(rng);
    Matrix ad = g.ad(v);
    Matrix ad_star = g.gram().inverse() * ad.transpose() * g.gram();
    Matrix ad_theta = g.ad(g.theta(v));
    INFO(name);
    CHECK((ad_star + ad_theta).cwiseAbs().maxCoeff() < 1e-10 * std::max(1.0, ad.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("form ad-invariance for catalog algebras") {
  for (const auto& name : catalog::algebra_names()) {
    auto entry = catalog::algebra_by_name(name);
    const QuadraticLieAlgebra& g = *entry.algebra;
    double res = 0.0;
    for (int i = 0; i < g.dim(); ++i) {
      Matrix adi = g.bracket().ad_basis(i);
      res = std::max(res, (adi.transpose() * g.form() + g.form() * adi).cwiseAbs().maxCoeff());
    }
    INFO(name);
    CHECK(res <= 1e-10 * std::max(1.0, g.form().cwiseAbs().maxCoeff()));
  }
}
