#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mind/dictionary.hpp"
#include "mind/problem.hpp"
#include "mind/regularizer.hpp"

namespace mind {

/// Primal-dual step configuration. Convergence needs tau * delta <= ||K||^-2,
/// which validate() enforces against the stored operator norm.
struct CPConfig {
  double theta = 1.0;
  double delta = 0.0;
  double tau = 0.0;
  double op_norm = 0.0;
  int max_iter = 3000;
  double rel_change_tol = 1e-6;
  double gap_tol = 1e-3;

  /// theta = 1, delta = b sqrt(n) / ||K||, tau = 1 / (b sqrt(n) ||K||) with
  /// balance b. b = 1 is the plain sqrt(n) split.
  static CPConfig defaults(double op_norm, std::size_t n, double balance = 1.0) {
    if (!(op_norm > 0.0)) throw std::invalid_argument("CPConfig: operator norm must be > 0");
    if (!(balance > 0.0)) throw std::invalid_argument("CPConfig: balance must be > 0");
    CPConfig c;
    c.op_norm = op_norm;
    const double sn = std::sqrt(static_cast<double>(n));
    c.delta = balance * sn / op_norm;
    c.tau = 1.0 / (balance * sn * op_norm);
    return c;
  }
  static CPConfig defaults(const Dictionary& dict, RegularizerKind kind) {
    return defaults(operator_norm(dict, 1e-10, 5000).value, dict.n(), default_balance(kind));
  }

  /// Step balance for intensities on [0, 1]. Quadratic R is scale free; for
  /// the 1-homogeneous TV and Huber-TV the dual step must grow with the
  /// inverse intensity scale.
  static double default_balance(RegularizerKind kind) {
    return kind == RegularizerKind::H1Squared ? 1.0 : 20.0;
  }

  /// Replaces the step sizes, rechecking the step-size condition.
  CPConfig with_steps(double new_delta, double new_tau) const {
    CPConfig c = *this;
    c.delta = new_delta;
    c.tau = new_tau;
    c.validate();
    return c;
  }

  void validate() const {
    if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("CPConfig: theta must lie in [0, 1]");
    if (!(delta > 0.0 && tau > 0.0)) throw std::invalid_argument("CPConfig: delta and tau must be > 0");
    if (!(op_norm > 0.0)) throw std::invalid_argument("CPConfig: operator norm must be > 0");
    if (tau * delta * op_norm * op_norm > 1.0 + 1e-12)
      throw std::invalid_argument("CPConfig: step sizes violate tau * delta <= ||K||^-2");
    if (max_iter < 1) throw std::invalid_argument("CPConfig: max_iter must be >= 1");
  }
};

/// Chambolle-Pock iteration started from v = Y, w = 0:
///   w <- prox_{delta F*}(w + delta K v_bar)
///   v <- prox_{tau R}(v - tau K* w)
///   v_bar <- v + theta (v - v_prev)
/// K v_bar is formed from K v and K v_prev, so each step costs one analysis
/// and one adjoint.
inline SolveResult chambolle_pock(const MindProblem& p, const CPConfig& cfg) {
  cfg.validate();
  const Dictionary& dict = p.dictionary();
  const auto& ky = p.data_coefficients();
  const double q = p.threshold();
  const std::size_t m = dict.element_count(), n = dict.n();
  detail::Stopwatch clock;

  Image v = p.data();
  std::vector<double> w(m, 0.0), kv = ky, kv_bar = ky, kv_new(m), kstar_w(n), arg(m);
  ProxState state;
  SolveReport rep;
  rep.solver = "chambolle-pock";
  for (int k = 0; k < cfg.max_iter; ++k) {
    for (std::size_t i = 0; i < m; ++i) arg[i] = w[i] + cfg.delta * kv_bar[i];
    w = prox_F_star(ky, q, arg, cfg.delta);
    dict.adjoint(w, kstar_w);
    Image u = v;
    for (std::size_t i = 0; i < n; ++i) u[i] -= cfg.tau * kstar_w[i];
    auto px = prox(p.regularizer(), u, cfg.tau, &state);
    rep.record_inner(px.iterations, px.converged);
    dict.analyze(px.x.values(), kv_new);
    for (std::size_t i = 0; i < m; ++i) kv_bar[i] = kv_new[i] + cfg.theta * (kv_new[i] - kv[i]);

    const double change = linalg::distance(px.x.values(), v.values());
    const double scale = linalg::norm2(px.x.values());
    const double gap = relative_gap(max_abs_difference(kv_new, ky), q, ky);
    v = std::move(px.x);
    std::swap(kv, kv_new);
    rep.record(value(p.regularizer(), v), gap, clock.seconds());
    detail::trace_distance(p, rep, v.values());
    if (change <= cfg.rel_change_tol * std::max(scale, 1e-300) && gap <= cfg.gap_tol) {
      rep.converged = true;
      break;
    }
  }
  rep.wall_time = clock.seconds();
  rep.message = rep.converged ? "converged" : "iteration budget exhausted";
  return SolveResult{std::move(v), std::move(rep)};
}

}  // namespace mind
