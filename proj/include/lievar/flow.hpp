#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "lievar/moment.hpp"

namespace lievar {

struct FlowOptions {
  double step_init = 1e-2;
  double tol_grad = 1e-8;
  long max_steps = 200000;
  double residual_guard = 1e-6;
  long record_every = 100;
};

struct FlowSample {
  long step = 0;
  double energy = 0.0;
  double grad_norm = 0.0;
  double jacobi_res = 0.0;
  double hom_res = 0.0;
  double norm = 1.0;
};

struct FlowResult {
  Pair limit;
  double limit_energy = 0.0;
  double stratum_label = 0.0;  // relabelled by cluster_strata for batch runs
  long steps = 0;
  bool converged = false;
  bool guard_violated = false;
  double final_grad_norm = 0.0;
  std::vector<FlowSample> trajectory;
};

/// Normalized negative gradient flow of the energy. Steps are taken along the
/// group orbit, x <- normalize(exp(-4h (D,u)) . x), with Armijo backtracking;
/// this realizes x - h grad E(x) to first order while keeping the defining
/// equations satisfied to machine precision, since grad E is tangent to the
/// orbit. Stops when |grad E| <= tol_grad.
inline FlowResult flow_energy(const Pair& start, const FlowOptions& opts = {}) {
  if (start.is_zero()) throw std::invalid_argument("flow_energy: zero pair");
  const QuadraticLieAlgebra& g = *start.codomain;
  Pair x = normalized(start);
  {
    Residuals r0 = residuals(x);
    if (r0.max() > opts.residual_guard)
      throw std::invalid_argument("flow_energy: initial residuals exceed residual_guard");
  }

  FlowResult out;
  double h = opts.step_init;
  const double armijo = 0.1;
  MomentValue mv = moment_explicit(x);
  Residuals res = residuals(x);

  auto record = [&](long step, double grad_norm) {
    res = residuals(x);
    out.trajectory.push_back({step, mv.energy, grad_norm, res.jacobi, res.hom, 1.0});
  };

  long step = 0;
  for (; step < opts.max_steps; ++step) {
    TangentElement grad = inf_act(mv.D, mv.M_g, x);
    const double grad_norm = 4.0 * tangent_norm(grad, g);
    out.final_grad_norm = grad_norm;
    if (step % std::max<long>(1, opts.record_every) == 0) record(step, grad_norm);
    if (grad_norm <= opts.tol_grad) {
      out.converged = true;
      break;
    }
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      GroupElement e{exp_symmetric(-4.0 * h * mv.D), g.ad(-4.0 * h * mv.M_g).exp()};
      Pair trial = normalized(group_act(e, x));
      MomentValue mv_trial = moment_explicit(trial);
      const double predicted = armijo * h * grad_norm * grad_norm;
      // once the predicted decrease falls below the floating-point resolution
      // of E, the energy comparison is pure noise; gate on the gradient norm
      // instead so the contraction continues
      const bool below_resolution = predicted <= 1e-14 * std::max(1.0, mv.energy);
      bool accept;
      if (below_resolution) {
        TangentElement trial_grad = inf_act(mv_trial.D, mv_trial.M_g, trial);
        accept = mv_trial.energy <= mv.energy + 1e-15 &&
                 4.0 * tangent_norm(trial_grad, g) <= grad_norm;
      } else {
        accept = mv_trial.energy <= mv.energy - predicted;
      }
      if (accept) {
        x = std::move(trial);
        mv = mv_trial;
        accepted = true;
        h = std::min(2.0 * h, 1e3 * opts.step_init);
        break;
      }
      h *= 0.5;
      if (h < 1e-16) break;
    }
    if (!accepted) break;  // line search exhausted; gradient stagnates at roundoff
    res = residuals(x);
    if (res.max() > 1e-12) {
      // expanding directions of the step operator amplify roundoff off the
      // variety; reproject before the drift becomes visible
      x = normalized(purify_to_variety(x));
      mv = moment_explicit(x);
      res = residuals(x);
      if (res.max() > opts.residual_guard) {
        out.guard_violated = true;
        break;
      }
    }
  }
  if (out.trajectory.empty() || out.trajectory.back().step != step) record(step, out.final_grad_norm);
  out.limit = x;
  out.limit_energy = mv.energy;
  out.stratum_label = mv.energy;
  out.steps = step;
  return out;
}

/// Groups limit energies that agree within tol and relabels each with the
/// cluster mean. The set of critical values is finite, so clusters at desk
/// scale are well separated.
inline std::vector<double> cluster_strata(const std::vector<double>& energies, double tol = 1e-4) {
  std::vector<double> labels(energies.size(), 0.0);
  std::vector<std::size_t> order(energies.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return energies[a] < energies[b]; });
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    double sum = 0.0;
    while (j < order.size() && energies[order[j]] - energies[order[i]] <= tol) sum += energies[order[j++]];
    const double mean = sum / static_cast<double>(j - i);
    for (std::size_t a = i; a < j; ++a) labels[order[a]] = mean;
    i = j;
  }
  return labels;
}

enum class Subgroup { full, det1 };
enum class Verdict { polystable_candidate, unstable_candidate, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::polystable_candidate: return "polystable_candidate";
    case Verdict::unstable_candidate: return "unstable_candidate";
    default: return "inconclusive";
  }
}

struct MinimizeOptions {
  double step_init = 0.1;
  double tol_moment = 1e-9;  // stop when |M_projected| / |q|^2 falls below
  long max_steps = 200000;
  double collapse_ratio = 1e-8;
  long record_every = 100;
};

struct MinimizeResult {
  Pair minimizer;
  GroupElement group_log;
  double initial_norm = 0.0;
  double final_norm = 0.0;
  std::vector<double> norm_history;
  Verdict verdict = Verdict::inconclusive;
  long steps = 0;
  double final_stationarity = 0.0;
};

/// Norm minimization over the orbit of the chosen subgroup: descends
/// |g . p|^2 along exponential steps exp(-h M_projected), where M_projected is
/// the moment value restricted to the subgroup (for det1 the trace of the gl
/// component is removed). A vanishing projected moment characterizes the
/// minimal-norm point; collapse of the norm below collapse_ratio x initial is
/// reported as the unstable candidate verdict.
inline MinimizeResult kempf_ness_minimize(const Pair& p, Subgroup subgroup,
                                          const MinimizeOptions& opts = {}) {
  if (p.is_zero()) throw std::invalid_argument("kempf_ness_minimize: zero pair");
  const QuadraticLieAlgebra& g = *p.codomain;
  const int n = p.n;
  MinimizeResult out;
  out.minimizer = p;
  out.group_log = GroupElement::identity(n, g);
  out.initial_norm = pair_norm(p);
  out.norm_history.push_back(out.initial_norm);

  Pair q = p;
  double h = opts.step_init;
  const double armijo = 0.1;
  double nsq = pair_norm_sq(q);
  MomentValue mv = moment_explicit(q);

  auto projected = [&](const MomentValue& m) {
    Matrix a = m.M_gl;
    if (subgroup == Subgroup::det1) a -= (a.trace() / n) * Matrix::Identity(n, n);
    return std::make_pair(a, m.M_g);
  };

  long step = 0;
  for (; step < opts.max_steps; ++step) {
    auto [a, u] = projected(mv);
    const double stat = gc_norm(a, u, g) / nsq;
    out.final_stationarity = stat;
    if (stat <= opts.tol_moment) {
      out.verdict = Verdict::polystable_candidate;
      break;
    }
    if (std::sqrt(nsq) <= opts.collapse_ratio * out.initial_norm) {
      out.verdict = Verdict::unstable_candidate;
      break;
    }
    // scale-free direction: the projected moment of the projectivized point
    Matrix dir_a = a / nsq;
    Vector dir_u = u / nsq;
    const double slope = 2.0 * gc_ip(a, u, dir_a, dir_u, g);  // = 2 stat^2 nsq
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      GroupElement e{exp_symmetric(-h * dir_a), g.ad(-h * dir_u).exp()};
      Pair trial = group_act(e, q);
      const double trial_nsq = pair_norm_sq(trial);
      if (trial_nsq <= nsq - armijo * h * slope) {
        if (residuals(trial).max() > 1e-12) trial = purify_to_variety(std::move(trial));
        q = std::move(trial);
        nsq = pair_norm_sq(q);
        mv = moment_explicit(q);
        out.group_log = compose(e, out.group_log);
        accepted = true;
        h = std::min(2.0 * h, 1e3 * opts.step_init);
        break;
      }
      h *= 0.5;
      if (h < 1e-16) break;
    }
    if (!accepted) break;
    if (step % std::max<long>(1, opts.record_every) == 0) out.norm_history.push_back(std::sqrt(nsq));
  }
  out.minimizer = q;
  out.final_norm = std::sqrt(nsq);
  out.norm_history.push_back(out.final_norm);
  out.steps = step;
  if (out.verdict == Verdict::inconclusive && out.final_norm <= opts.collapse_ratio * out.initial_norm)
    out.verdict = Verdict::unstable_candidate;
  return out;
}

}  // namespace lievar
