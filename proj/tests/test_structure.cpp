#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "lievar/catalog.hpp"
#include "lievar/flow.hpp"
#include "lievar/random.hpp"
#include "lievar/structure.hpp"

using namespace lievar;

namespace {

const std::vector<std::string>& critical_corpus() {
  static const std::vector<std::string> names{
      "cartan-line-sl2R", "nilpotent-line-sl2R", "borel-sl2R",     "cartan-sl3",
      "heisenberg-sl3",   "borel-sl3",           "identity-su2",   "su2-line-product"};
  return names;
}

}  // namespace

TEST_CASE("criticality of the catalog corpus") {
  for (const auto& name : critical_corpus()) {
    CriticalityReport rep = criticality_test(catalog::pair_by_name(name), 1e-8);
    INFO(name << " residual " << rep.projection_residual);
    CHECK(rep.is_critical);
    CHECK(rep.D_min_eig >= -1e-8 * std::max(1.0, rep.D_spectrum.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("a perturbation inside the variety breaks criticality") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> dist;
  Pair p = catalog::pair_by_name("heisenberg-sl3");
  const QuadraticLieAlgebra& g = *p.codomain;
  Matrix a(p.n, p.n);
  for (int i = 0; i < p.n; ++i)
    for (int j = 0; j < p.n; ++j) a(i, j) = 1e-2 * dist(rng);
  Vector v(g.dim());
  for (int i = 0; i < g.dim(); ++i) v[i] = 1e-2 * dist(rng);
  Pair moved = group_act(group_exp(a, v, g), p);
  REQUIRE(residuals(moved).max() < 1e-12);  // still on the variety
  CriticalityReport rep = criticality_test(moved, 1e-6);
  CHECK_FALSE(rep.is_critical);
  CHECK(rep.projection_residual > 1e-4);
}

TEST_CASE("psd spectrum of D") {
  // minimal pairs: the whole spectrum vanishes
  PsdReport rep = psd_check(normalized(catalog::pair_by_name("identity-su2")));
  CHECK(rep.spectrum.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(rep.kernel_violations == 0);

  // Heisenberg: strictly positive spectrum matching the frozen rationals
  Pair h = catalog::pair_by_name("heisenberg-sl3");
  rep = psd_check(h);
  CHECK(rep.min_eig > 0);
  CHECK(rep.spectrum[0] == Catch::Approx(1.0 / 3));
  CHECK(rep.spectrum[1] == Catch::Approx(1.0 / 3));
  CHECK(rep.spectrum[2] == Catch::Approx(2.0 / 3));
  CHECK(rep.kernel_violations == 0);
}

TEST_CASE("rational spectrum reconstruction") {
  // minimal pair: zero spectrum, c = 1
  RationalSpectrum rs = rational_spectrum(catalog::pair_by_name("cartan-line-sl2R"));
  CHECK(rs.ok);
  CHECK(rs.c == Catch::Approx(1.0));
  for (long w : rs.D_ints) CHECK(w == 0);
  CHECK(rs.residual < 1e-12);

  // heisenberg-sl3, frozen from the exact-arithmetic fixture
  rs = rational_spectrum(catalog::pair_by_name("heisenberg-sl3"));
  CHECK(rs.ok);
  CHECK(rs.residual <= 1e-8);
  CHECK(rs.c == Catch::Approx(4.5));
  CHECK(rs.D_ints == std::vector<long>{1, 1, 2});
  CHECK(rs.adu_ints == std::vector<long>{-2, -1, -1, 0, 0, 1, 1, 2});

  // nilpotent line: weights 1 and (-1, 0, 1)
  rs = rational_spectrum(catalog::pair_by_name("nilpotent-line-sl2R"));
  CHECK(rs.ok);
  CHECK(rs.D_ints == std::vector<long>{1});
  CHECK(rs.adu_ints == std::vector<long>{-1, 0, 1});

  // a generic non-critical variety point fails reconstruction
  auto rp = random_pair(RandomMode::orbit_perturb, "sl3R", 3, 9, 0.5);
  REQUIRE_FALSE(criticality_test(rp.pair, 1e-6).is_critical);
  rs = rational_spectrum(rp.pair);
  CHECK_FALSE(rs.ok);
}

TEST_CASE("gradation of the Heisenberg pair") {
  Gradation gr = gradation(catalog::pair_by_name("heisenberg-sl3"));
  REQUIRE(gr.ok);
  REQUIRE(gr.h_blocks.size() == 2);
  CHECK(gr.h_blocks[0].weight == 1);
  CHECK(gr.h_blocks[0].basis.cols() == 2);
  CHECK(gr.h_blocks[1].weight == 2);
  CHECK(gr.h_blocks[1].basis.cols() == 1);
  REQUIRE(gr.g_blocks.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(gr.g_blocks[i].weight == static_cast<long>(i) - 2);
  CHECK(gr.compat_residual <= 1e-7);
  CHECK(gr.bracket_residual_g <= 1e-8);
}

TEST_CASE("gradation of a minimal pair is the trivial single block") {
  Gradation gr = gradation(catalog::pair_by_name("identity-su2"));
  REQUIRE(gr.ok);
  REQUIRE(gr.h_blocks.size() == 1);
  CHECK(gr.h_blocks[0].weight == 0);
  CHECK(gr.h_blocks[0].basis.cols() == 3);
  CHECK(gr.compat_residual <= 1e-10);
}

TEST_CASE("Levi decomposition") {
  LeviDecomposition ld = levi_decompose(catalog::pair_by_name("identity-su2"));
  CHECK(ld.m_part.dim() == 3);
  CHECK(ld.a_part.dim() == 0);
  CHECK(ld.n_part.dim() == 0);

  ld = levi_decompose(catalog::pair_by_name("cartan-sl3"));
  CHECK(ld.m_part.dim() == 0);
  CHECK(ld.a_part.dim() == 2);
  CHECK(ld.n_part.dim() == 0);

  ld = levi_decompose(catalog::pair_by_name("heisenberg-sl3"));
  CHECK(ld.m_part.dim() == 0);
  CHECK(ld.a_part.dim() == 0);
  CHECK(ld.n_part.dim() == 3);

  ld = levi_decompose(catalog::pair_by_name("borel-sl3"));
  CHECK(ld.m_part.dim() == 0);
  CHECK(ld.a_part.dim() == 2);
  CHECK(ld.n_part.dim() == 3);
  CHECK(ld.m_subalgebra_residual <= 1e-9);
  CHECK(ld.n_ideal_residual <= 1e-9);
  CHECK(ld.orthogonality_residual <= 1e-9);
}

TEST_CASE("restriction to the nilradical") {
  // nilpotent pair: the restriction is the pair itself up to basis change
  RestrictionReport rep = restrict_nilradical(catalog::pair_by_name("heisenberg-sl3"));
  REQUIRE_FALSE(rep.trivial);
  CHECK(rep.restricted.n == 3);
  CHECK(rep.u_residual <= 1e-12);
  CHECK(rep.D_residual <= 1e-12);
  CHECK(rep.criticality_residual <= 1e-6);

  // reductive pair: empty nilradical, trivial report
  rep = restrict_nilradical(catalog::pair_by_name("identity-su2"));
  CHECK(rep.trivial);
  CHECK(rep.ok);

  // mixed pair: restriction recovers the nilpotent part
  rep = restrict_nilradical(catalog::pair_by_name("borel-sl3"));
  REQUIRE_FALSE(rep.trivial);
  CHECK(rep.restricted.n == 3);
  CHECK(rep.u_residual <= 1e-7);
  CHECK(rep.D_residual <= 1e-7);
  CHECK(rep.criticality_residual <= 1e-6);
}

TEST_CASE("restriction identities hold on the whole corpus") {
  for (const auto& name : critical_corpus()) {
    RestrictionReport rep = restrict_nilradical(catalog::pair_by_name(name));
    INFO(name);
    CHECK(rep.ok);
  }
}

TEST_CASE("reductive part pair") {
  // borel-sl3: 2-dimensional reductive part into gc(3, sl3R)
  ReductivePartReport rep = reductive_part_pair(catalog::pair_by_name("borel-sl3"));
  CHECK(rep.reductive_pair.n == 2);
  CHECK(rep.reductive_pair.codomain->dim() == 9 + 8);
  CHECK(rep.energy_deviation <= 1e-7);
  CHECK(rep.k_deviation <= 1e-7);
  CHECK(rep.u_norm <= 1e-7);
  CHECK(rep.criticality_residual <= 1e-6);

  // trivial nilradical: gc(0, g) degenerates to g and the checks reduce to
  // minimality of the original pair
  rep = reductive_part_pair(catalog::pair_by_name("identity-su2"));
  CHECK(rep.reductive_pair.n == 3);
  CHECK(rep.reductive_pair.codomain->dim() == 3);
  CHECK(rep.ok);

  // trivial ker D is an error
  CHECK_THROWS_AS(reductive_part_pair(catalog::pair_by_name("heisenberg-sl3")), std::invalid_argument);
}

TEST_CASE("theta-invariant derivations") {
  // at minimal pairs der is theta~-invariant, so r is all of der
  for (const char* name : {"identity-su2", "cartan-line-sl2R"}) {
    Pair p = normalized(catalog::pair_by_name(name));
    DerivationSpace ds = derivation_space(p);
    ThetaInvariantDerivations tid = theta_invariant_derivations(p);
    INFO(name);
    CHECK(tid.dim() == ds.dim());
    CHECK(subspace_gap(tid.basis_packed, ds.packed(p.n, *p.codomain)) < 1e-7);
  }

  // heisenberg: dim r = 2, frozen from the exact-arithmetic fixture; every
  // element commutes with (D, u)
  Pair h = catalog::pair_by_name("heisenberg-sl3");
  ThetaInvariantDerivations tid = theta_invariant_derivations(h);
  CHECK(tid.dim() == 2);
  CHECK(tid.commutation_residual <= 1e-8);

  // a pair with trivial derivation space has trivial r (bypasses the
  // membership precondition; the operation is total in the input pair)
  auto rp = random_pair(RandomMode::ambient, "sl2R", 3, 4);
  if (derivation_space(normalized(rp.pair)).dim() == 0)
    CHECK(theta_invariant_derivations(rp.pair).dim() == 0);
}

TEST_CASE("the r algebra carries the restricted quadratic structure") {
  RAlgebra r = build_r_algebra(catalog::pair_by_name("heisenberg-sl3"));
  CHECK(r.algebra->dim() == 2);
  CHECK(r.closure_residual <= 1e-10);
  ValidationReport vr = validate_algebra(*r.algebra);
  for (const auto& it : vr.items) {
    INFO(it.name << " " << it.residual);
    CHECK(it.pass);
  }
}

TEST_CASE("semidirect extension of the Heisenberg pair by a toral line") {
  Pair base = catalog::pair_by_name("heisenberg-sl3");
  RAlgebra r = build_r_algebra(base);
  Pair ext = make_toral_extension(base, r);
  ExtensionReport rep = semidirect_extend(base, ext, r);
  CHECK(rep.product.n == 4);
  CHECK(rep.product_residuals.max() <= 1e-9);
  CHECK(rep.criticality_residual <= 1e-6);
  CHECK(rep.D_block_residual <= 1e-7);
  CHECK(rep.u_residual <= 1e-7);
  CHECK(rep.ok);

  // the product is a solvable critical pair; restriction recovers the base
  // nilradical data up to orthogonal conjugacy
  RestrictionReport rr = restrict_nilradical(rep.product);
  CHECK(rr.restricted.n == 3);
  CHECK(rr.ok);
  MomentValue mv_base = moment_explicit(normalized(base));
  MomentValue mv_restr = moment_explicit(rr.restricted);
  Eigen::SelfAdjointEigenSolver<Matrix> e1(mv_base.D), e2(mv_restr.D);
  // D spectra agree after matching the normalization (k values line up)
  CHECK(((e1.eigenvalues() / mv_base.k) - (e2.eigenvalues() / mv_restr.k)).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("semidirect extension edge cases") {
  Pair base = catalog::pair_by_name("heisenberg-sl3");
  RAlgebra r = build_r_algebra(base);

  // zero-dimensional extension: the product is the base, unchanged
  Pair ext0{0, StructureTensor(0), Matrix::Zero(r.algebra->dim(), 0), r.algebra};
  ExtensionReport rep = semidirect_extend(base, ext0, r);
  CHECK(rep.product.n == base.n);
  CHECK(rep.ok);

  // an unscaled extension is rescaled automatically and the rescale is logged
  Pair ext = make_toral_extension(base, r);
  ExtensionReport scaled_rep = semidirect_extend(base, scaled(ext, 3.0), r);
  CHECK(scaled_rep.rescale_factor == Catch::Approx(1.0 / 3.0).epsilon(1e-8));
  MomentValue mv_base = moment_explicit(normalized(base));
  // after normalization the k values agree
  Pair ext_applied = scaled(scaled(ext, 3.0), scaled_rep.rescale_factor);
  ext_applied.codomain = r.algebra;
  CHECK(std::abs(moment_explicit(ext_applied).k - moment_explicit(normalized(base)).k) <= 1e-10);

  // a base with nontrivial ker D is rejected
  CHECK_THROWS_AS(semidirect_extend(catalog::pair_by_name("borel-sl3"), ext, r), std::invalid_argument);

  // codomain mismatch is rejected
  Pair bad = ext;
  bad.codomain = catalog::make_su2().algebra;
  CHECK_THROWS_AS(semidirect_extend(base, bad, r), std::invalid_argument);
}

TEST_CASE("minimal decomposition") {
  // one simple factor plus one central line, orthogonal images
  MinimalDecomposition md = minimal_decompose(catalog::pair_by_name("su2-line-product"));
  REQUIRE(md.factors.size() == 2);
  CHECK(md.ok);
  CHECK(md.image_orthogonality_residual <= 1e-9);
  const MinimalFactor* center = nullptr;
  const MinimalFactor* simple = nullptr;
  for (const auto& f : md.factors) (f.is_center ? center : simple) = &f;
  REQUIRE(center);
  REQUIRE(simple);
  CHECK(center->basis.dim() == 1);
  CHECK(center->energy == Catch::Approx(1.0));
  CHECK(simple->basis.dim() == 3);
  CHECK(simple->energy == Catch::Approx(1.0 / 3));
  CHECK(simple->homothety_constant == Catch::Approx(2.0));
  CHECK(center->homothety_constant == Catch::Approx(3.0));

  // identity pair: a single simple factor with homothety constant 2
  md = minimal_decompose(catalog::pair_by_name("identity-su2"));
  REQUIRE(md.factors.size() == 1);
  CHECK_FALSE(md.factors[0].is_center);
  CHECK(md.factors[0].homothety_constant == Catch::Approx(2.0));
  CHECK(md.factors[0].energy == Catch::Approx(1.0 / 3));

  // abelian Cartan pair: center only, phi a homothety
  md = minimal_decompose(catalog::pair_by_name("cartan-sl3"));
  REQUIRE(md.factors.size() == 1);
  CHECK(md.factors[0].is_center);
  CHECK(md.factors[0].homothety_residual <= 1e-7);

  // non-minimal pairs are rejected
  CHECK_THROWS_AS(minimal_decompose(catalog::pair_by_name("heisenberg-sl3")), std::invalid_argument);
}

TEST_CASE("metric gauge") {
  // su(2) with theta' = id: the standard bracket is already gauged, g = I
  StructureTensor su2 = catalog::make_su2().algebra->bracket();
  MetricGaugeResult mg = minimal_metric_gauge(su2, Matrix::Identity(3, 3));
  CHECK((mg.gl - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(mg.moment_residual < 1e-12);

  // scaled input: the gauge is a scalar multiple of the identity
  MetricGaugeResult mg2 = minimal_metric_gauge(su2.scaled(2.0), Matrix::Identity(3, 3));
  Matrix off = mg2.gl - mg2.gl(0, 0) * Matrix::Identity(3, 3);
  CHECK(off.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(mg2.moment_residual < 1e-12);

  // sl(2,R) with the -transpose pullback involution: non-scalar gauge
  StructureTensor sl2 = catalog::pair_by_name("identity-sl2R").mu;
  Matrix tp = Matrix::Zero(3, 3);
  tp(0, 0) = -1;
  tp(1, 2) = -1;
  tp(2, 1) = -1;
  MetricGaugeResult mg3 = minimal_metric_gauge(sl2, tp);
  CHECK(mg3.moment_residual <= 1e-9);
  CHECK(mg3.gl(0, 0) == Catch::Approx(std::sqrt(4.0 / 3)));
  CHECK(mg3.gl(1, 1) == Catch::Approx(std::sqrt(2.0 / 3)));

  // the identity is not a Cartan involution of sl(2,R)
  CHECK_THROWS_AS(minimal_metric_gauge(sl2, Matrix::Identity(3, 3)), std::invalid_argument);
  // degenerate Killing form
  CHECK_THROWS_AS(minimal_metric_gauge(StructureTensor(3), Matrix::Identity(3, 3)),
                  std::invalid_argument);
}

TEST_CASE("compatible Cartan involution at the identity pair") {
  MostowReport rep = mostow_involution(catalog::pair_by_name("identity-su2"), 1e-8);
  CHECK(rep.ok);
  CHECK((rep.theta_prime - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(rep.metric_residual < 1e-10);

  // pairs away from the minimal energy are rejected
  CHECK_THROWS_AS(mostow_involution(catalog::pair_by_name("heisenberg-sl3"), 1e-6),
                  std::invalid_argument);
  CHECK_THROWS_AS(mostow_involution(catalog::pair_by_name("principal-sl2-sl3"), 1e-6),
                  std::invalid_argument);
  // pairs with a center have no semi-simple h_mu
  CHECK_THROWS_AS(mostow_involution(catalog::pair_by_name("cartan-sl3"), 1e-6),
                  std::invalid_argument);
}

TEST_CASE("compatible Cartan involution after norm minimization") {
  MinimizeResult mr = kempf_ness_minimize(catalog::pair_by_name("identity-sl2R"), Subgroup::det1);
  REQUIRE(mr.verdict == Verdict::polystable_candidate);
  MostowReport rep = mostow_involution(mr.minimizer, 1e-6);
  CHECK(rep.ok);
  CHECK(rep.compat_residual <= 1e-6);
}

TEST_CASE("abelian classification") {
  AbelianClassification ac = abelian_classify(catalog::pair_by_name("cartan-line-sl2R"));
  CHECK(ac.is_homothety);
  CHECK(ac.image_commutes);
  CHECK(ac.theta_invariant_envelope);
  CHECK(ac.minimal);

  // nilpotent line: a homothety with commuting image whose theta-envelope
  // fails to be abelian, hence not minimal
  ac = abelian_classify(catalog::pair_by_name("nilpotent-line-sl2R"));
  CHECK(ac.is_homothety);
  CHECK(ac.image_commutes);
  CHECK_FALSE(ac.theta_invariant_envelope);
  CHECK_FALSE(ac.minimal);
  CHECK(ac.energy == Catch::Approx(1.5));

  // cartan pair in sl3: all flags
  ac = abelian_classify(catalog::pair_by_name("cartan-sl3"));
  CHECK(ac.minimal);

  // nonzero mu and the zero pair are rejected
  CHECK_THROWS_AS(abelian_classify(catalog::pair_by_name("identity-su2")), std::invalid_argument);
  Pair z{1, StructureTensor(1), Matrix::Zero(3, 1), catalog::make_sl(2).algebra};
  CHECK_THROWS_AS(abelian_classify(z), std::invalid_argument);
}

TEST_CASE("adapted basis") {
  // minimal pair: D = 0, any orthonormal eigenbasis of phi*phi
  AdaptedBasis ab = adapted_basis(catalog::pair_by_name("identity-su2"));
  CHECK(ab.D_eigenvalues.cwiseAbs().maxCoeff() < 1e-12);
  CHECK((ab.basis * ab.basis.transpose() - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);

  // heisenberg: D-eigenvalues in the rational pattern, ascending
  ab = adapted_basis(catalog::pair_by_name("heisenberg-sl3"));
  CHECK(ab.commutator_norm <= 1e-10);
  const double k = moment_explicit(normalized(catalog::pair_by_name("heisenberg-sl3"))).k;
  CHECK(ab.D_eigenvalues[0] / k == Catch::Approx(2.0 / 9));
  CHECK(ab.D_eigenvalues[2] / k == Catch::Approx(4.0 / 9));

  // non-critical pairs fail the commutator check
  auto rp = random_pair(RandomMode::orbit_perturb, "sl3R", 3, 21, 0.5);
  CHECK_THROWS_AS(adapted_basis(rp.pair), std::runtime_error);
}

TEST_CASE("corpus-wide structural invariants") {
  for (const auto& name : critical_corpus()) {
    Pair p = normalized(catalog::pair_by_name(name));
    const QuadraticLieAlgebra& g = *p.codomain;
    MomentValue mv = moment_explicit(p);
    INFO(name);

    // trace identity
    CHECK(std::abs(mv.k * mv.D.trace() - mv.du_norm_sq(g)) <= 1e-10);
    // [D, phi*phi] = 0 at critical pairs
    Matrix w = p.phi.transpose() * g.gram() * p.phi;
    CHECK((mv.D * w - w * mv.D).cwiseAbs().maxCoeff() <= 1e-8);
    // gradation compatibility
    Gradation gr = gradation(p);
    CHECK(gr.ok);
    CHECK(gr.compat_residual <= 1e-7);
  }
}

TEST_CASE("inner derivations commute with phi*phi at minimal pairs") {
  for (const char* name : {"identity-su2", "su2-line-product", "cartan-sl3"}) {
    Pair p = normalized(catalog::pair_by_name(name));
    const QuadraticLieAlgebra& g = *p.codomain;
    Matrix w = p.phi.transpose() * g.gram() * p.phi;
    INFO(name);
    for (int i = 0; i < p.n; ++i) {
      Matrix ad = p.mu.ad(Vector::Unit(p.n, i));
      CHECK((w * ad - ad * w).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }
}

TEST_CASE("derivation dimension formula for semi-simple pairs") {
  // dim der(mu,phi) = dim z_g(im phi) + n
  for (const char* name : {"identity-su2", "identity-sl2R"}) {
    Pair p = catalog::pair_by_name(name);
    const QuadraticLieAlgebra& g = *p.codomain;
    Subspace image{column_space(p.phi, 1e-10), &g};
    const int z = centralizer(g, image).dim();
    INFO(name);
    CHECK(derivation_space(normalized(p)).dim() == z + p.n);
  }
}
