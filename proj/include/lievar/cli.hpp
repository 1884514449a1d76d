#pragma once

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lievar/io.hpp"
#include "lievar/random.hpp"

namespace lievar {
namespace cli {

// exit codes: 0 success, 1 validation failure, 2 numerical failure, 3 I/O error
enum ExitCode : int { exit_ok = 0, exit_validation = 1, exit_numerical = 2, exit_io = 3 };

namespace detail {

inline double env_default_tol(double fallback) {
  if (const char* e = std::getenv("LIEVAR_TOL")) {
    try {
      return std::stod(e);
    } catch (...) {
    }
  }
  return fallback;
}

inline Pair load_pair(const std::string& arg) {
  for (const auto& name : catalog::pair_names())
    if (name == arg) return catalog::pair_by_name(name);
  return io::pair_from_json(io::load_json_file(arg));
}

/// key = value lines with dotted paths; matrices/arrays stay inline
inline void print_text(const json& j, std::ostream& out, const std::string& prefix = "") {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      print_text(it.value(), out, prefix.empty() ? it.key() : prefix + "." + it.key());
  } else {
    out << prefix << " = " << j.dump() << "\n";
  }
}

inline void emit(const json& report, const std::string& format, const std::string& out_path,
                 std::ostream& out) {
  if (!out_path.empty()) {
    io::write_text_file(out_path, io::dump(report));
    return;
  }
  if (format == "json")
    out << io::dump(report);
  else
    print_text(report, out);
}

inline json fixtures_json() {
  // frozen expected values for the named critical instances, computed once in
  // exact rational arithmetic from the closed moment formula
  json fix;
  fix["heisenberg-sl3"] = {
      {"k", 1.5},
      {"norm_pair_sq", 19.0 / 6.0},
      {"energy", 9.0 / 19.0},
      {"D_diagonal", {1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0}},
      {"u_coordinates", {1.0 / 3.0, 1.0 / 3.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0}},
      {"spectrum_scaling_c", 4.5},
      {"D_weights", {1, 1, 2}},
      {"adu_weights", {-2, -1, -1, 0, 0, 1, 1, 2}},
  };
  fix["borel-sl3"] = {
      {"k", 1.5},
      {"norm_pair_sq", 37.0 / 6.0},
      {"energy", 9.0 / 37.0},
      {"D_diagonal", {0.0, 0.0, 1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0}},
      {"u_coordinates", {1.0 / 3.0, 1.0 / 3.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0}},
      {"reductive_part_energy", 0.5},
      {"reductive_part_k", 1.5},
  };
  return fix;
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"moment maps, energy flows and critical pairs on varieties of Lie algebra homomorphisms"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string format = "text";
  app.add_option("--format", format, "output format: text or json")->check(CLI::IsMember({"text", "json"}));
  std::string out_path;
  app.add_option("--out", out_path, "write the report/file here instead of stdout");

  double tol = detail::env_default_tol(1e-6);
  std::uint64_t seed = 0;
  FlowOptions fopts;
  MinimizeOptions mopts;
  std::string input, ext_path, csv_path, emit_ext_path, theta_prime_path, subgroup_str = "det1",
                     mode_str = "orbit-perturb", algebra = "sl2R";
  int n = 2;
  double magnitude = 0.5;
  bool oracle = false, minimize_first = false;
  std::int64_t max_den = 64;

  auto* c_validate = app.add_subcommand("validate", "validate an algebra or pair file");
  c_validate->add_option("input", input)->required();

  auto* c_moment = app.add_subcommand("moment", "moment value report");
  c_moment->add_option("input", input)->required();
  c_moment->add_flag("--oracle", oracle, "cross-check against the definitional moment map");

  auto* c_der = app.add_subcommand("derivations", "pair derivation space");
  c_der->add_option("input", input)->required();
  c_der->add_option("--tol", tol, "kernel cutoff (relative)");

  auto* c_crit = app.add_subcommand("critical", "criticality test");
  c_crit->add_option("input", input)->required();
  c_crit->add_option("--tol", tol, "criticality tolerance");

  auto* c_flow = app.add_subcommand("flow", "negative gradient flow of the energy");
  c_flow->add_option("input", input, "pair file, catalog name, or 'random'")->required();
  c_flow->add_option("--step", fopts.step_init);
  c_flow->add_option("--tol", fopts.tol_grad);
  c_flow->add_option("--max-steps", fopts.max_steps);
  c_flow->add_option("--guard", fopts.residual_guard);
  c_flow->add_option("--record-every", fopts.record_every);
  c_flow->add_option("--seed", seed);
  c_flow->add_option("--mode", mode_str);
  c_flow->add_option("--algebra", algebra);
  c_flow->add_option("--n", n);
  c_flow->add_option("--magnitude", magnitude);
  c_flow->add_option("--csv", csv_path, "write the trajectory CSV here");

  auto* c_min = app.add_subcommand("minimize", "Kempf-Ness norm minimization over the orbit");
  c_min->add_option("input", input)->required();
  c_min->add_option("--subgroup", subgroup_str)->check(CLI::IsMember({"full", "det1"}));
  c_min->add_option("--step", mopts.step_init);
  c_min->add_option("--tol", mopts.tol_moment);
  c_min->add_option("--max-steps", mopts.max_steps);
  c_min->add_option("--collapse", mopts.collapse_ratio);
  c_min->add_option("--record-every", mopts.record_every);

  auto* c_dec = app.add_subcommand("decompose", "Levi decomposition and nilradical restriction");
  c_dec->add_option("input", input)->required();

  auto* c_grad = app.add_subcommand("gradation", "rational spectrum and compatible gradations");
  c_grad->add_option("input", input)->required();
  c_grad->add_option("--max-den", max_den);

  auto* c_red = app.add_subcommand("reductive", "reductive part pair over gc(m, g)");
  c_red->add_option("input", input)->required();

  auto* c_ext = app.add_subcommand("extend", "semi-direct extension of a nilpotent critical pair");
  c_ext->add_option("input", input)->required();
  c_ext->add_option("--ext", ext_path, "extension pair file (default: toral line along (D,u))");
  c_ext->add_option("--emit-ext", emit_ext_path, "write the auto-generated extension pair here");

  auto* c_mostow = app.add_subcommand("mostow", "compatible Cartan involution theta' = phi* theta phi");
  c_mostow->add_option("input", input)->required();
  c_mostow->add_option("--tol", tol);
  c_mostow->add_flag("--minimize-first", minimize_first, "run det1 norm minimization before the construction");

  auto* c_ab = app.add_subcommand("classify-abelian", "minimality classification of an abelian pair");
  c_ab->add_option("input", input)->required();

  auto* c_gauge = app.add_subcommand("gauge", "metric gauge for a semi-simple bracket");
  c_gauge->add_option("input", input)->required();
  c_gauge->add_option("--theta-prime", theta_prime_path, "JSON matrix file (default: identity)");

  auto* c_cat = app.add_subcommand("catalog", "built-in algebras and pairs");
  auto* c_cat_list = c_cat->add_subcommand("list", "list catalog entries");
  auto* c_cat_emit = c_cat->add_subcommand("emit", "emit a catalog entry as a file");
  c_cat_emit->add_option("name", input)->required();
  auto* c_cat_fix = c_cat->add_subcommand("fixtures", "frozen exact-arithmetic expected values");

  auto* c_rand = app.add_subcommand("random", "seeded random pair generators");
  c_rand->add_option("--mode", mode_str)->check(CLI::IsMember({"abelian", "subalgebra", "orbit-perturb", "ambient"}));
  c_rand->add_option("--algebra", algebra);
  c_rand->add_option("--n", n);
  c_rand->add_option("--seed", seed);
  c_rand->add_option("--magnitude", magnitude);

  std::vector<std::string> argv_like(args.rbegin(), args.rend());
  try {
    app.parse(argv_like);
  } catch (const CLI::ParseError& e) {
    std::stringstream so, se;
    const int code = app.exit(e, so, se);
    out << so.str();
    err << se.str();
    return code == 0 ? exit_ok : exit_validation;
  }

  try {
    if (*c_validate) {
      json j = io::load_json_file(input);
      json rep;
      bool ok = true;
      if (j.contains("mu") || j.contains("phi")) {
        Pair p = io::pair_from_json(j);
        Residuals r = residuals(p);
        ValidationReport ar = validate_algebra(*p.codomain);
        rep["residuals"] = io::to_json(r);
        rep["algebra"] = io::to_json(ar);
        rep["norm"] = pair_norm(p);
        ok = ar.ok;
      } else {
        QuadraticLieAlgebra alg = io::algebra_from_json(j);
        ValidationReport ar = validate_algebra(alg);
        rep = io::to_json(ar);
        ok = ar.ok;
      }
      detail::emit(rep, format, out_path, out);
      return ok ? exit_ok : exit_validation;
    }

    if (*c_moment) {
      Pair p = detail::load_pair(input);
      MomentValue mv = moment_explicit(p);
      json rep = io::to_json(mv, *p.codomain);
      rep["residuals"] = io::to_json(residuals(p));
      if (oracle) {
        MomentValue mo = moment_definitional(p);
        const double disc = std::sqrt((mv.M_gl - mo.M_gl).squaredNorm() +
                                      (mv.M_g - mo.M_g).dot(p.codomain->gram() * (mv.M_g - mo.M_g)));
        rep["oracle_discrepancy"] = disc / std::max(1e-300, std::sqrt(mv.norm_sq(*p.codomain)));
      }
      detail::emit(rep, format, out_path, out);
      return exit_ok;
    }

    if (*c_der) {
      Pair p = detail::load_pair(input);
      DerivationSpace ds = derivation_space(normalized(p), tol);
      json rep = io::to_json(ds);
      rep["orthogonality_check"] = derivation_orthogonality_check(normalized(p), ds);
      detail::emit(rep, format, out_path, out);
      return exit_ok;
    }

    if (*c_crit) {
      Pair p = detail::load_pair(input);
      CriticalityReport rep = criticality_test(p, tol);
      detail::emit(io::to_json(rep), format, out_path, out);
      return rep.is_critical ? exit_ok : exit_validation;
    }

    if (*c_flow) {
      Pair p;
      json rep;
      if (input == "random") {
        RandomPairResult rp = random_pair(random_mode_from_string(mode_str), algebra, n, seed, magnitude);
        p = rp.pair;
        rep["seed"] = seed;
        rep["source"] = rp.source;
      } else {
        p = detail::load_pair(input);
      }
      FlowResult fr = flow_energy(p, fopts);
      rep.update(io::to_json(fr));
      if (!csv_path.empty()) io::write_text_file(csv_path, io::trajectory_csv(fr));
      detail::emit(rep, format, out_path, out);
      return fr.converged ? exit_ok : exit_numerical;
    }

    if (*c_min) {
      Pair p = detail::load_pair(input);
      MinimizeResult mr =
          kempf_ness_minimize(p, subgroup_str == "full" ? Subgroup::full : Subgroup::det1, mopts);
      detail::emit(io::to_json(mr), format, out_path, out);
      return mr.verdict == Verdict::inconclusive ? exit_numerical : exit_ok;
    }

    if (*c_dec) {
      Pair p = detail::load_pair(input);
      LeviDecomposition ld = levi_decompose(p);
      RestrictionReport rr = restrict_nilradical(p);
      json rep{{"levi", io::to_json(ld)}, {"restriction", io::to_json(rr)}};
      detail::emit(rep, format, out_path, out);
      return rr.ok ? exit_ok : exit_numerical;
    }

    if (*c_grad) {
      Pair p = detail::load_pair(input);
      Gradation gr = gradation(p, max_den);
      json rep = io::to_json(gr);
      rep["spectrum"] = io::to_json(gr.spectrum);
      detail::emit(rep, format, out_path, out);
      return gr.ok ? exit_ok : exit_numerical;
    }

    if (*c_red) {
      Pair p = detail::load_pair(input);
      ReductivePartReport rep = reductive_part_pair(p);
      detail::emit(io::to_json(rep), format, out_path, out);
      return rep.ok ? exit_ok : exit_numerical;
    }

    if (*c_ext) {
      Pair base = detail::load_pair(input);
      RAlgebra r = build_r_algebra(base);
      ValidationReport vr = validate_algebra(*r.algebra);
      Pair ext = ext_path.empty() ? make_toral_extension(base, r)
                                  : io::pair_from_json(io::load_json_file(ext_path));
      if (!emit_ext_path.empty()) io::write_text_file(emit_ext_path, io::dump(io::pair_to_json(ext)));
      ExtensionReport rep = semidirect_extend(base, ext, r);
      json jrep = io::to_json(rep);
      jrep["r_dim"] = r.algebra->dim();
      jrep["r_valid"] = vr.ok;
      if (!out_path.empty()) {
        io::write_text_file(out_path, io::dump(io::pair_to_json(rep.product)));
        if (format == "json")
          out << io::dump(jrep);
        else
          detail::print_text(jrep, out);
      } else {
        detail::emit(jrep, format, out_path, out);
      }
      return rep.ok ? exit_ok : exit_numerical;
    }

    if (*c_mostow) {
      Pair p = detail::load_pair(input);
      json rep;
      if (minimize_first) {
        MinimizeResult mr = kempf_ness_minimize(p, Subgroup::det1, mopts);
        rep["minimization"] = io::to_json(mr);
        p = mr.minimizer;
      }
      MostowReport mrep = mostow_involution(p, tol);
      rep.update(io::to_json(mrep));
      detail::emit(rep, format, out_path, out);
      return mrep.ok ? exit_ok : exit_numerical;
    }

    if (*c_ab) {
      Pair p = detail::load_pair(input);
      AbelianClassification ac = abelian_classify(p);
      detail::emit(io::to_json(ac), format, out_path, out);
      return exit_ok;
    }

    if (*c_gauge) {
      Pair p = detail::load_pair(input);
      Matrix theta_prime = theta_prime_path.empty()
                               ? Matrix(Matrix::Identity(p.n, p.n))
                               : io::matrix_from_json(io::load_json_file(theta_prime_path));
      MetricGaugeResult mg = minimal_metric_gauge(p.mu, theta_prime);
      detail::emit(io::to_json(mg), format, out_path, out);
      return exit_ok;
    }

    if (*c_cat) {
      if (*c_cat_list || (!*c_cat_emit && !*c_cat_fix)) {
        json rep{{"algebras", catalog::algebra_names()}, {"pairs", catalog::pair_names()}};
        detail::emit(rep, format, out_path, out);
        return exit_ok;
      }
      if (*c_cat_fix) {
        detail::emit(detail::fixtures_json(), format, out_path, out);
        return exit_ok;
      }
      // emit
      json file;
      bool found = false;
      for (const auto& name : catalog::pair_names())
        if (name == input) {
          file = io::pair_to_json(catalog::pair_by_name(name));
          found = true;
        }
      if (!found)
        for (const auto& name : catalog::algebra_names())
          if (name == input) {
            file = io::algebra_to_json(*catalog::algebra_by_name(name).algebra);
            found = true;
          }
      if (!found) throw std::invalid_argument("unknown catalog entry: " + input);
      if (!out_path.empty())
        io::write_text_file(out_path, io::dump(file));
      else
        out << io::dump(file);
      return exit_ok;
    }

    if (*c_rand) {
      RandomPairResult rp = random_pair(random_mode_from_string(mode_str), algebra, n, seed, magnitude);
      json file = io::pair_to_json(rp.pair, rp.in_variety);
      file["seed"] = seed;
      file["mode"] = mode_str;
      file["source"] = rp.source;
      if (!out_path.empty())
        io::write_text_file(out_path, io::dump(file));
      else
        out << io::dump(file);
      return exit_ok;
    }
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return exit_io;
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << "\n";
    return exit_io;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << "\n";
    return exit_validation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_numerical;
  }
  return exit_ok;
}

}  // namespace cli
}  // namespace lievar
