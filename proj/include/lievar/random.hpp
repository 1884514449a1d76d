#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "lievar/catalog.hpp"

namespace lievar {

enum class RandomMode { abelian, subalgebra, orbit_perturb, ambient };

inline const char* to_string(RandomMode m) {
  switch (m) {
    case RandomMode::abelian: return "abelian";
    case RandomMode::subalgebra: return "subalgebra";
    case RandomMode::orbit_perturb: return "orbit-perturb";
    default: return "ambient";
  }
}

inline RandomMode random_mode_from_string(const std::string& s) {
  if (s == "abelian") return RandomMode::abelian;
  if (s == "subalgebra") return RandomMode::subalgebra;
  if (s == "orbit-perturb") return RandomMode::orbit_perturb;
  if (s == "ambient") return RandomMode::ambient;
  throw std::invalid_argument("unknown random mode: " + s);
}

struct RandomPairResult {
  Pair pair;
  bool in_variety = false;
  std::string source;
};

namespace detail {

inline Matrix gaussian_matrix(std::mt19937_64& rng, int rows, int cols, double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = scale * dist(rng);
  return m;
}

inline Matrix random_orthogonal(std::mt19937_64& rng, int n) {
  Matrix a = gaussian_matrix(rng, n, n);
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < n; ++i)
    if (r(i, i) < 0) q.col(i) = -q.col(i);
  return q;
}

}  // namespace detail

/// Seeded pair generators. abelian, subalgebra and orbit-perturb construct
/// exact variety members when one is available (orbit-perturb acts by a group
/// element on a catalog point, which preserves the defining equations
/// exactly); ambient draws a raw V_n point with no membership claim.
inline RandomPairResult random_pair(RandomMode mode, const std::string& algebra, int n,
                                    std::uint64_t seed, double magnitude = 0.5) {
  std::mt19937_64 rng(seed);
  catalog::AlgebraEntry entry = catalog::algebra_by_name(algebra);
  const int d = entry.algebra->dim();
  RandomPairResult out;

  switch (mode) {
    case RandomMode::abelian: {
      out.pair = Pair{n, StructureTensor(n), detail::gaussian_matrix(rng, d, n), entry.algebra};
      out.source = "abelian";
      break;
    }
    case RandomMode::ambient: {
      StructureTensor mu(n);
      std::normal_distribution<double> dist(0.0, 1.0);
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
          for (int k = 0; k < n; ++k) mu.set_antisymmetric(i, j, k, dist(rng));
      out.pair = Pair{n, std::move(mu), detail::gaussian_matrix(rng, d, n), entry.algebra};
      out.source = "ambient";
      break;
    }
    case RandomMode::subalgebra: {
      auto name = catalog::seed_pair_name(algebra, n);
      Pair base;
      if (name) {
        base = catalog::pair_by_name(*name);
        out.source = *name;
      } else {
        // fall back to a random map into the distinguished Cartan subalgebra;
        // the image is abelian, so the pair is an exact variety member
        if (!entry.cartan) throw std::invalid_argument("subalgebra mode: no catalog seed for " + algebra);
        Matrix coeff = detail::gaussian_matrix(rng, entry.cartan->dim(), n);
        base = Pair{n, StructureTensor(n), entry.cartan->basis * coeff, entry.algebra};
        out.source = "cartan-random";
      }
      // random orthogonal base change plus a gram-orthogonal inner automorphism
      Matrix q = detail::random_orthogonal(rng, n);
      Matrix kbasis = entry.algebra->plus_eigenspace();
      Vector v = Vector::Zero(d);
      if (kbasis.cols() > 0) v = kbasis * detail::gaussian_matrix(rng, static_cast<int>(kbasis.cols()), 1, magnitude);
      GroupElement e{q, entry.algebra->ad(v).exp()};
      out.pair = group_act(e, base);
      break;
    }
    case RandomMode::orbit_perturb: {
      auto name = catalog::seed_pair_name(algebra, n);
      if (!name)
        throw std::invalid_argument("orbit-perturb mode: no catalog seed pair for (" + algebra + ", n=" +
                                    std::to_string(n) + ")");
      Pair base = catalog::pair_by_name(*name);
      Matrix a = detail::gaussian_matrix(rng, n, n, magnitude);
      Vector v = detail::gaussian_matrix(rng, d, 1, magnitude);
      out.pair = group_act(group_exp(a, v, *entry.algebra), base);
      out.source = *name;
      break;
    }
  }
  out.in_variety = residuals(out.pair).max() <= 1e-9;
  return out;
}

}  // namespace lievar
