#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "lievar/catalog.hpp"
#include "lievar/flow.hpp"
#include "lievar/structure.hpp"

namespace lievar {

using json = nlohmann::json;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace io {

inline json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

inline Matrix matrix_from_json(const json& j) {
  if (!j.is_array()) throw FormatError("expected a matrix (array of rows)");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return Matrix(0, 0);
  const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j[i].size()) != cols) throw FormatError("ragged matrix rows");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

inline json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

/// Structure constants as quadruples [i, j, k, value] with i < j; the
/// antisymmetric completion is implied.
inline json tensor_to_json(const StructureTensor& t) {
  json out = json::array();
  for (int i = 0; i < t.dim(); ++i)
    for (int j = i + 1; j < t.dim(); ++j)
      for (int k = 0; k < t.dim(); ++k)
        if (double v = t(i, j, k); v != 0.0) out.push_back(json::array({i, j, k, v}));
  return out;
}

inline StructureTensor tensor_from_json(const json& j, int dim) {
  StructureTensor t(dim);
  std::vector<bool> seen(static_cast<std::size_t>(dim) * dim * dim, false);
  auto key = [dim](int i, int jj, int k) { return (static_cast<std::size_t>(i) * dim + jj) * dim + k; };
  for (const auto& quad : j) {
    if (!quad.is_array() || quad.size() != 4) throw FormatError("structure constant entries must be [i,j,k,value]");
    const int i = quad[0].get<int>(), jj = quad[1].get<int>(), k = quad[2].get<int>();
    const double v = quad[3].get<double>();
    if (i < 0 || jj < 0 || k < 0 || i >= dim || jj >= dim || k >= dim)
      throw FormatError("structure constant index out of range");
    if (i == jj && v != 0.0) throw FormatError("completed tensor fails antisymmetry: nonzero [i,i,k] entry");
    if (seen[key(i, jj, k)] && t(i, jj, k) != v)
      throw FormatError("completed tensor fails antisymmetry: conflicting duplicate entry");
    if (seen[key(jj, i, k)] && t(jj, i, k) != -v)
      throw FormatError("completed tensor fails antisymmetry: entry conflicts with its mirror");
    t.at(i, jj, k) = v;
    t.at(jj, i, k) = -v;
    seen[key(i, jj, k)] = seen[key(jj, i, k)] = true;
  }
  return t;
}

inline json algebra_to_json(const QuadraticLieAlgebra& alg) {
  json out;
  out["name"] = alg.label();
  out["dim"] = alg.dim();
  out["structure_constants"] = tensor_to_json(alg.bracket());
  Matrix killing = killing_form(alg.bracket());
  const double scale = std::max(killing.cwiseAbs().maxCoeff(), 1e-300);
  if ((alg.form() - killing).cwiseAbs().maxCoeff() <= 1e-12 * scale)
    out["form"] = "killing";
  else
    out["form"] = matrix_to_json(alg.form());
  out["involution"] = matrix_to_json(alg.involution());
  return out;
}

inline QuadraticLieAlgebra algebra_from_json(const json& j) {
  if (!j.contains("dim")) throw FormatError("algebra file: missing dim");
  const int dim = j.at("dim").get<int>();
  if (dim < 0) throw FormatError("algebra file: negative dim");
  StructureTensor t = tensor_from_json(j.value("structure_constants", json::array()), dim);
  Matrix form;
  if (j.contains("form") && j.at("form").is_string()) {
    if (j.at("form").get<std::string>() != "killing") throw FormatError("algebra file: unknown form keyword");
    form = killing_form(t);
  } else if (j.contains("form")) {
    form = matrix_from_json(j.at("form"));
  } else {
    throw FormatError("algebra file: missing form");
  }
  if (!j.contains("involution")) throw FormatError("algebra file: missing involution");
  Matrix theta = matrix_from_json(j.at("involution"));
  if (form.rows() != dim || form.cols() != dim || theta.rows() != dim || theta.cols() != dim)
    throw FormatError("algebra file: form/involution dimensions do not match dim");
  return QuadraticLieAlgebra(j.value("name", "algebra"), std::move(t), std::move(form), std::move(theta));
}

inline bool is_catalog_algebra(const std::string& name) {
  try {
    catalog::algebra_by_name(name);
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

inline json pair_to_json(const Pair& p, std::optional<bool> in_variety = std::nullopt) {
  json out;
  out["n"] = p.n;
  const std::string& label = p.codomain->label();
  if (is_catalog_algebra(label))
    out["algebra"] = label;
  else
    out["algebra"] = algebra_to_json(*p.codomain);
  out["mu"] = tensor_to_json(p.mu);
  out["phi"] = matrix_to_json(p.phi);
  if (in_variety.has_value()) out["in_variety"] = *in_variety;
  return out;
}

inline Pair pair_from_json(const json& j) {
  if (!j.contains("n")) throw FormatError("pair file: missing n");
  const int n = j.at("n").get<int>();
  if (n < 0) throw FormatError("pair file: negative n");
  AlgebraPtr alg;
  if (!j.contains("algebra")) throw FormatError("pair file: missing algebra");
  if (j.at("algebra").is_string()) {
    alg = catalog::algebra_by_name(j.at("algebra").get<std::string>()).algebra;
  } else {
    alg = std::make_shared<const QuadraticLieAlgebra>(algebra_from_json(j.at("algebra")));
  }
  StructureTensor mu = tensor_from_json(j.value("mu", json::array()), n);
  Matrix phi = j.contains("phi") ? matrix_from_json(j.at("phi")) : Matrix::Zero(alg->dim(), n);
  if (phi.rows() != alg->dim() || phi.cols() != n)
    throw FormatError("pair file: phi must be dim(g) x n");
  return Pair{n, std::move(mu), std::move(phi), alg};
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw FormatError("parse error in " + path + ": " + e.what());
  }
  return j;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// report serialization
// ---------------------------------------------------------------------------

inline json to_json(const Residuals& r) { return json{{"jacobi", r.jacobi}, {"hom", r.hom}}; }

inline json to_json(const ValidationReport& rep) {
  json items = json::array();
  for (const auto& it : rep.items)
    items.push_back(json{{"name", it.name}, {"residual", it.residual}, {"pass", it.pass}});
  return json{{"ok", rep.ok}, {"items", items}};
}

inline json to_json(const MomentValue& mv, const QuadraticLieAlgebra& g) {
  return json{{"M_gl", matrix_to_json(mv.M_gl)},   {"u", vector_to_json(mv.M_g)},
              {"norm_pair_sq", mv.norm_pair_sq},   {"k", mv.k},
              {"D", matrix_to_json(mv.D)},         {"energy", mv.energy},
              {"moment_norm_sq", mv.norm_sq(g)}};
}

inline json to_json(const CriticalityReport& rep) {
  return json{{"projection_residual", rep.projection_residual},
              {"is_critical", rep.is_critical},
              {"tolerance", rep.tolerance},
              {"energy", rep.energy},
              {"D_spectrum", vector_to_json(rep.D_spectrum)},
              {"D_min_eig", rep.D_min_eig},
              {"der_dim", rep.der_dim}};
}

inline json to_json(const DerivationSpace& ds) {
  return json{{"dim", ds.dim()},
              {"cutoff", ds.cutoff},
              {"singular_values", vector_to_json(ds.singular_values)}};
}

inline json to_json(const FlowResult& fr) {
  return json{{"limit_energy", fr.limit_energy}, {"stratum_label", fr.stratum_label},
              {"steps", fr.steps},               {"converged", fr.converged},
              {"guard_violated", fr.guard_violated}, {"final_grad_norm", fr.final_grad_norm}};
}

inline json to_json(const MinimizeResult& mr) {
  return json{{"verdict", to_string(mr.verdict)},
              {"initial_norm", mr.initial_norm},
              {"final_norm", mr.final_norm},
              {"steps", mr.steps},
              {"final_stationarity", mr.final_stationarity}};
}

inline json to_json(const PsdReport& rep) {
  return json{{"min_eig", rep.min_eig},
              {"spectrum", vector_to_json(rep.spectrum)},
              {"kernel_violations", rep.kernel_violations}};
}

inline json to_json(const RationalSpectrum& rs) {
  return json{{"c", rs.c},           {"D_ints", rs.D_ints},       {"adu_ints", rs.adu_ints},
              {"residual", rs.residual}, {"ok", rs.ok},
              {"D_eigs", vector_to_json(rs.D_eigs)}, {"adu_eigs", vector_to_json(rs.adu_eigs)}};
}

inline json to_json(const Gradation& gr) {
  json hb = json::array(), gb = json::array();
  for (const auto& b : gr.h_blocks) hb.push_back(json{{"weight", b.weight}, {"dim", b.basis.cols()}});
  for (const auto& b : gr.g_blocks) gb.push_back(json{{"weight", b.weight}, {"dim", b.basis.cols()}});
  return json{{"c", gr.c},
              {"h_blocks", hb},
              {"g_blocks", gb},
              {"bracket_residual_h", gr.bracket_residual_h},
              {"bracket_residual_g", gr.bracket_residual_g},
              {"phi_residual", gr.phi_residual},
              {"compat_residual", gr.compat_residual},
              {"ok", gr.ok}};
}

inline json to_json(const LeviDecomposition& ld) {
  return json{{"dim_m", ld.m_part.dim()},
              {"dim_a", ld.a_part.dim()},
              {"dim_n", ld.n_part.dim()},
              {"m_subalgebra_residual", ld.m_subalgebra_residual},
              {"n_ideal_residual", ld.n_ideal_residual},
              {"orthogonality_residual", ld.orthogonality_residual}};
}

inline json to_json(const RestrictionReport& rep) {
  return json{{"trivial", rep.trivial},
              {"dim", rep.restricted.n},
              {"u_residual", rep.u_residual},
              {"D_residual", rep.D_residual},
              {"criticality_residual", rep.criticality_residual},
              {"ok", rep.ok}};
}

inline json to_json(const ReductivePartReport& rep) {
  return json{{"dim_l", rep.reductive_pair.n},
              {"codomain", rep.reductive_pair.codomain->label()},
              {"criticality_residual", rep.criticality_residual},
              {"energy_deviation", rep.energy_deviation},
              {"k_deviation", rep.k_deviation},
              {"u_norm", rep.u_norm},
              {"ok", rep.ok}};
}

inline json to_json(const ExtensionReport& rep) {
  return json{{"product_n", rep.product.n},
              {"rescale_factor", rep.rescale_factor},
              {"residuals", to_json(rep.product_residuals)},
              {"criticality_residual", rep.criticality_residual},
              {"D_block_residual", rep.D_block_residual},
              {"u_residual", rep.u_residual},
              {"ok", rep.ok}};
}

inline json to_json(const MinimalDecomposition& md) {
  json factors = json::array();
  for (const auto& f : md.factors)
    factors.push_back(json{{"dim", f.basis.dim()},
                           {"is_center", f.is_center},
                           {"homothety_constant", f.homothety_constant},
                           {"homothety_residual", f.homothety_residual},
                           {"energy", f.energy},
                           {"energy_deviation", f.energy_deviation}});
  return json{{"factors", factors},
              {"image_orthogonality_residual", md.image_orthogonality_residual},
              {"ok", md.ok}};
}

inline json to_json(const MostowReport& rep) {
  return json{{"theta_prime", matrix_to_json(rep.theta_prime)},
              {"involution_residual", rep.involution_residual},
              {"automorphism_residual", rep.automorphism_residual},
              {"compat_residual", rep.compat_residual},
              {"metric_residual", rep.metric_residual},
              {"ok", rep.ok}};
}

inline json to_json(const AbelianClassification& ac) {
  return json{{"is_homothety", ac.is_homothety},
              {"image_commutes", ac.image_commutes},
              {"theta_invariant_envelope", ac.theta_invariant_envelope},
              {"minimal", ac.minimal},
              {"homothety_residual", ac.homothety_residual},
              {"commutation_residual", ac.commutation_residual},
              {"envelope_residual", ac.envelope_residual},
              {"energy", ac.energy}};
}

inline json to_json(const AdaptedBasis& ab) {
  return json{{"basis", matrix_to_json(ab.basis)},
              {"D_eigenvalues", vector_to_json(ab.D_eigenvalues)},
              {"W_eigenvalues", vector_to_json(ab.W_eigenvalues)},
              {"commutator_norm", ab.commutator_norm}};
}

inline json to_json(const MetricGaugeResult& mg) {
  return json{{"gl", matrix_to_json(mg.gl)},
              {"moment_residual", mg.moment_residual},
              {"involution_residual", mg.involution_residual},
              {"automorphism_residual", mg.automorphism_residual}};
}

/// Trajectory CSV: step, energy, grad_norm, jacobi_res, hom_res, norm.
inline std::string trajectory_csv(const FlowResult& fr) {
  std::ostringstream out;
  out.precision(17);
  out << "step,energy,grad_norm,jacobi_res,hom_res,norm\n";
  for (const auto& s : fr.trajectory)
    out << s.step << ',' << s.energy << ',' << s.grad_norm << ',' << s.jacobi_res << ',' << s.hom_res
        << ',' << s.norm << '\n';
  return out.str();
}

}  // namespace io
}  // namespace lievar
