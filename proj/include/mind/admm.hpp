#pragma once

#include <cmath>
#include <stdexcept>

#include "mind/dictionary.hpp"
#include "mind/linalg.hpp"
#include "mind/problem.hpp"
#include "mind/regularizer.hpp"

namespace mind {

struct ADMMConfig {
  double rho = 5000.0;     // augmented-Lagrangian penalty
  int inner_budget = 50;   // TV / Huber v-step: inner primal-dual iterations
  double inner_tol = 1e-10;  // H1 v-step: CG relative residual
  int max_iter = 300;
  /// Stopping level for max(||Kv - w||, ||K(v - v_prev)||). Zero selects
  /// gap_tol * q_n, which bounds the relative constraint gap of v by gap_tol.
  double eps_stop = 0.0;
  double gap_tol = 1e-3;

  /// Penalty for [0, 1] intensities and the unit-variance coefficient
  /// scaling. ||K||^2 falls like 1/n, so rho grows like n: factors 1.2
  /// (H1Squared), 30 (TV), 10 (Huber-TV).
  static ADMMConfig defaults(RegularizerKind kind, std::size_t n) {
    ADMMConfig c;
    c.rho = default_rho(kind, n);
    return c;
  }
  static double default_rho(RegularizerKind kind, std::size_t n) {
    const double c = kind == RegularizerKind::H1Squared ? 1.2 : kind == RegularizerKind::TV ? 30.0 : 10.0;
    return c * static_cast<double>(n);
  }

  void validate() const {
    if (!(rho > 0.0)) throw std::invalid_argument("ADMMConfig: rho must be > 0");
    if (inner_budget < 1) throw std::invalid_argument("ADMMConfig: inner_budget must be >= 1");
    if (max_iter < 1) throw std::invalid_argument("ADMMConfig: max_iter must be >= 1");
    if (!(eps_stop >= 0.0)) throw std::invalid_argument("ADMMConfig: eps_stop must be >= 0");
  }
};

namespace detail {

// Workspace for argmin_v (rho/2) ||K v - z||^2 + R(v) with a nonsmooth or
// Huber R, solved by a linearized primal-dual loop on the gradient field:
//   v <- v - s (rho K*(K v - z) + grad^T p)
//   p <- prox_{sigma R*}(p + sigma grad(2 v_new - v))
// with 1/s = rho ||K||^2 + 8 sigma, so the data term's Lipschitz constant is
// covered with margin.
struct AdmmInnerPrimalDual {
  std::vector<double> p;  // 2n dual field, warm-started across outer steps
  double s = 0.0, sigma = 0.0;

  void solve(const Regularizer& R, const Dictionary& dict, double rho, std::span<const double> z,
             std::span<double> v, int budget) {
    const ImageGrid& g = dict.grid();
    const std::size_t n = v.size();
    if (p.size() != 2 * n) p.assign(2 * n, 0.0);
    std::vector<double> kv(dict.element_count()), grad(n), gt(n), v_new(n), dx(n), dy(n), bar(n);
    const double beta_half = R.kind == RegularizerKind::HuberTV ? 0.5 * R.beta : 0.0;
    for (int it = 0; it < budget; ++it) {
      dict.analyze(v, kv);
      for (std::size_t i = 0; i < kv.size(); ++i) kv[i] = rho * (kv[i] - z[i]);
      dict.adjoint(kv, grad);
      gradient_transpose(g, std::span<const double>(p.data(), n), std::span<const double>(p.data() + n, n), gt);
      for (std::size_t i = 0; i < n; ++i) {
        v_new[i] = v[i] - s * (grad[i] + gt[i]);
        bar[i] = 2.0 * v_new[i] - v[i];
      }
      forward_gradient(g, bar, dx, dy);
      for (std::size_t i = 0; i < n; ++i) {
        // Conjugate of the Huber profile: (beta/4)|p|^2 on the unit ball.
        double px = (p[i] + sigma * dx[i]) / (1.0 + sigma * beta_half);
        double py = (p[n + i] + sigma * dy[i]) / (1.0 + sigma * beta_half);
        const double mag = std::hypot(px, py);
        if (mag > 1.0) {
          px /= mag;
          py /= mag;
        }
        p[i] = px;
        p[n + i] = py;
      }
      std::copy(v_new.begin(), v_new.end(), v.begin());
    }
  }
};

}  // namespace detail

/// ADMM on min F(w) + R(v) s.t. K v = w, started from v = Y, w = K Y, h = 0.
/// The w-step is the exact box projection of K v + h / rho.
inline SolveResult admm(const MindProblem& p, const ADMMConfig& cfg) {
  cfg.validate();
  const Dictionary& dict = p.dictionary();
  const Regularizer& R = p.regularizer();
  const auto& ky = p.data_coefficients();
  const double q = p.threshold();
  const std::size_t m = dict.element_count(), n = dict.n();
  const double eps = cfg.eps_stop > 0.0 ? cfg.eps_stop
                                        : (q > 0.0 ? cfg.gap_tol * q : 1e-9 * std::max(linalg::norm_inf(ky), 1e-300));
  detail::Stopwatch clock;

  std::vector<double> v(p.data().data()), v_prev(n), w = ky, h(m, 0.0), kv = ky, kv_prev(m), z(m), rhs(n);
  SolveReport rep;
  rep.solver = "admm";

  // H1Squared v-step: (rho K*K + L) v = rho K*(w - h / rho), Jacobi-preconditioned CG.
  std::vector<double> inv_diag;
  if (R.kind == RegularizerKind::H1Squared) {
    const auto gram = dict.weighted_gram_diagonal(std::vector<double>(m, 1.0));
    const auto lap = hessian_diagonal(R, dict.grid(), v);
    inv_diag.resize(n);
    for (std::size_t i = 0; i < n; ++i) inv_diag[i] = 1.0 / (cfg.rho * gram[i] + lap[i]);
  }
  std::vector<double> coeff_tmp(m);
  auto normal_apply = [&](std::span<const double> x, std::span<double> out) {
    dict.analyze(x, coeff_tmp);
    dict.adjoint(coeff_tmp, out);
    std::vector<double> lx(x.size());
    laplacian(dict.grid(), x, lx);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = cfg.rho * out[i] + lx[i];
  };

  detail::AdmmInnerPrimalDual inner;
  if (R.kind != RegularizerKind::H1Squared) {
    const double knorm = operator_norm(dict, 1e-8, 2000).value;
    const double lf = cfg.rho * knorm * knorm;
    // Balance the primal and dual steps: s * sigma * 8 = 1/2 and 1/s = lf + 8 sigma.
    inner.s = 1.0 / (2.0 * std::max(lf, 1e-300));
    inner.sigma = 1.0 / (16.0 * inner.s);
  }

  bool inner_ok = true;
  for (int k = 0; k < cfg.max_iter; ++k) {
    v_prev = v;
    kv_prev = kv;
    for (std::size_t i = 0; i < m; ++i) z[i] = w[i] - h[i] / cfg.rho;
    if (R.kind == RegularizerKind::H1Squared) {
      dict.adjoint(z, rhs);
      for (double& x : rhs) x *= cfg.rho;
      const auto cg = linalg::conjugate_gradient(normal_apply, rhs, v, cfg.inner_tol, 5000, inv_diag);
      inner_ok = inner_ok && cg.converged;
      rep.record_inner(cg.iterations, cg.converged);
    } else {
      inner.solve(R, dict, cfg.rho, z, v, cfg.inner_budget);
      rep.record_inner(cfg.inner_budget, true);
    }
    dict.analyze(v, kv);
    for (std::size_t i = 0; i < m; ++i) z[i] = kv[i] + h[i] / cfg.rho;
    w = project_box(ky, q, z);
    double primal_res = 0.0, dual_res = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double r = kv[i] - w[i];
      h[i] += cfg.rho * r;
      primal_res += r * r;
      dual_res += (kv[i] - kv_prev[i]) * (kv[i] - kv_prev[i]);
    }
    const Image vi(dict.grid(), v);
    rep.record(value(R, vi), relative_gap(max_abs_difference(kv, ky), q, ky), clock.seconds());
    detail::trace_distance(p, rep, v);
    if (std::max(std::sqrt(primal_res), std::sqrt(dual_res)) <= eps) {
      rep.converged = true;
      break;
    }
  }
  rep.wall_time = clock.seconds();
  rep.message = rep.converged ? "converged" : "iteration budget exhausted";
  if (!inner_ok) rep.message += "; inner linear solve did not reach tolerance";
  return SolveResult{Image(dict.grid(), std::move(v)), std::move(rep)};
}

}  // namespace mind
