#pragma once

// Semismooth Newton method with path continuation on the Moreau-Yosida
// regularized optimality system
//
//     T_delta(v) = grad R(v) + delta^-1 B^T max{0, B v - B Y - q} = 0,
//     B = [K; -K],
//
// for smooth regularizers. With c = K(v - Y) the penalty term reads
// delta^-1 K*(max{0, c - q} - max{0, -c - q}), and its generalized Jacobian is
// delta^-1 K* M K where M is the 0/1 diagonal of violated constraints.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "mind/dictionary.hpp"
#include "mind/linalg.hpp"
#include "mind/problem.hpp"
#include "mind/regularizer.hpp"

namespace mind {

class UnsupportedRegularizer : public std::invalid_argument {
 public:
  explicit UnsupportedRegularizer(const std::string& what) : std::invalid_argument(what) {}
};

class NewtonDivergence : public std::runtime_error {
 public:
  explicit NewtonDivergence(const std::string& what) : std::runtime_error(what) {}
};

struct SSNConfig {
  double delta_init = 1.0 / 3.0;
  double delta_factor = 1.0 / 3.0;
  double delta_min = 1e-12;
  double rho_min = 0.01;  // bound on the fraction of violated constraints
  double r_min = 1e-6;    // bound on ||violation|| / ||v||
  // A constraint counts as violated once it is exceeded by more than
  // violation_tol * q_n (relative to ||KY||_inf when q_n = 0).
  double violation_tol = 1e-3;
  double linear_solve_tol = 1e-10;
  int linear_max_iter = 2000;
  int max_newton_per_stage = 50;
  double newton_tol = 1e-8;  // relative ||T_delta|| ending a stage; kept 100x above linear_solve_tol
  // Below this relative residual a step that fails to halve it is taken as
  // the rounding floor and also ends the stage.
  double floor_tol = 1e-6;
  double gap_tol = 1e-3;  // relative constraint gap required on top of rho_min and r_min
  double ridge = 1e-12;      // Jacobian ridge, relative to its mean diagonal
  bool line_search = true;   // Armijo damping of the Newton step; false takes full steps

  void validate() const {
    if (!(delta_init > 0.0)) throw std::invalid_argument("SSNConfig: delta_init must be > 0");
    if (!(delta_factor > 0.0 && delta_factor < 1.0))
      throw std::invalid_argument("SSNConfig: delta_factor must lie in (0, 1)");
    if (!(delta_min > 0.0)) throw std::invalid_argument("SSNConfig: delta_min must be > 0");
    if (!(violation_tol >= 0.0)) throw std::invalid_argument("SSNConfig: violation_tol must be >= 0");
    if (!(linear_solve_tol > 0.0)) throw std::invalid_argument("SSNConfig: linear_solve_tol must be > 0");
    if (!(gap_tol >= 0.0)) throw std::invalid_argument("SSNConfig: gap_tol must be >= 0");
  }
};

namespace detail {

struct ConstraintState {
  std::vector<double> penalty;  // max{0, c - q} - max{0, -c - q}
  std::vector<double> mask;     // 1 where a constraint is violated
  std::size_t violated = 0;
  double violation_norm = 0.0;
};

inline ConstraintState constraint_state(std::span<const double> kv, std::span<const double> ky, double q,
                                        double count_above = 0.0) {
  ConstraintState s;
  s.penalty.resize(kv.size());
  s.mask.resize(kv.size());
  double sq = 0.0;
  for (std::size_t i = 0; i < kv.size(); ++i) {
    const double c = kv[i] - ky[i];
    double e = 0.0;
    if (c > q)
      e = c - q;
    else if (c < -q)
      e = c + q;
    s.penalty[i] = e;
    s.mask[i] = e != 0.0 ? 1.0 : 0.0;
    if (std::abs(e) > count_above) ++s.violated;
    sq += e * e;
  }
  s.violation_norm = std::sqrt(sq);
  return s;
}

}  // namespace detail

inline SolveResult semismooth_newton(const MindProblem& p, const SSNConfig& cfg) {
  cfg.validate();
  const Regularizer& R = p.regularizer();
  if (R.kind == RegularizerKind::TV)
    throw UnsupportedRegularizer(
        "semismooth Newton needs a smooth regularizer (h1 or huber-tv); continuation in both "
        "the penalty and a TV smoothing parameter is unstable");
  const Dictionary& dict = p.dictionary();
  const ImageGrid& grid = dict.grid();
  const auto& ky = p.data_coefficients();
  const double q = p.threshold();
  const std::size_t m = dict.element_count(), n = dict.n();
  detail::Stopwatch clock;

  std::vector<double> v(p.data().data()), kv = ky, kstar(n), step(n), rhs(n), coeff(m), kstep(m), trial(n),
      kv_trial(m);
  SolveReport rep;
  rep.solver = "semismooth-newton";
  const double count_above = cfg.violation_tol * (q > 0.0 ? q : std::max(linalg::norm_inf(ky), 1e-300));
  double delta = cfg.delta_init;
  int stage = 0;
  bool criteria_met = false;

  while (delta > cfg.delta_min) {
    auto cs = detail::constraint_state(kv, ky, q, count_above);
    double prev_residual = std::numeric_limits<double>::infinity();
    int increases = 0;
    for (int it = 0; it < cfg.max_newton_per_stage; ++it) {
      // Residual T_delta(v).
      const Image vi(grid, v);
      const Image gr = gradient(R, vi);
      dict.adjoint(cs.penalty, kstar);
      for (std::size_t i = 0; i < n; ++i) rhs[i] = -(gr[i] + kstar[i] / delta);
      const double scale = std::max({linalg::norm2(gr.values()), linalg::norm2(kstar) / delta, 1e-300});
      if (linalg::norm2(rhs) <= cfg.newton_tol * scale) break;

      // Jacobian J = hess R(v) + delta^-1 K* M K + ridge I.
      const auto hdiag = hessian_diagonal(R, grid, v);
      const auto gdiag = dict.weighted_gram_diagonal(cs.mask);
      std::vector<double> inv_diag(n);
      double mean_diag = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean_diag += hdiag[i] + gdiag[i] / delta;
      mean_diag /= static_cast<double>(n);
      const double ridge = cfg.ridge * std::max(mean_diag, 1e-300);
      for (std::size_t i = 0; i < n; ++i) inv_diag[i] = 1.0 / (hdiag[i] + gdiag[i] / delta + ridge);
      std::vector<double> hu(n);
      auto jacobian = [&](std::span<const double> u, std::span<double> out) {
        hessian_apply(R, grid, v, u, hu);
        dict.analyze(u, coeff);
        for (std::size_t i = 0; i < m; ++i) coeff[i] *= cs.mask[i];
        dict.adjoint(coeff, out);
        for (std::size_t i = 0; i < n; ++i) out[i] = hu[i] + out[i] / delta + ridge * u[i];
      };
      std::fill(step.begin(), step.end(), 0.0);
      const auto cg = linalg::conjugate_gradient(jacobian, rhs, step, cfg.linear_solve_tol, cfg.linear_max_iter,
                                                 inv_diag);
      // Armijo backtracking on the regularized objective
      // J(v) = R(v) + (2 delta)^-1 ||max{0, B v - B Y - q}||^2, whose gradient is T_delta.
      double t = 1.0;
      bool stalled = false;
      if (cfg.line_search) {
        const double j0 = value(R, vi) + linalg::dot(cs.penalty, cs.penalty) / (2.0 * delta);
        const double slope = -linalg::dot(rhs, step);
        dict.analyze(step, kstep);
        for (;; t *= 0.5) {
          for (std::size_t i = 0; i < n; ++i) trial[i] = v[i] + t * step[i];
          for (std::size_t i = 0; i < m; ++i) kv_trial[i] = kv[i] + t * kstep[i];
          const auto ts = detail::constraint_state(kv_trial, ky, q, count_above);
          const double jt = value(R, Image(grid, trial)) + linalg::dot(ts.penalty, ts.penalty) / (2.0 * delta);
          if (jt <= j0 + 1e-4 * t * slope) break;
          if (t < 1e-10) {
            stalled = true;
            break;
          }
        }
      }
      if (stalled) break;
      for (std::size_t i = 0; i < n; ++i) v[i] += t * step[i];

      dict.analyze(v, kv);
      cs = detail::constraint_state(kv, ky, q, count_above);
      const Image vn(grid, v);
      const Image gn = gradient(R, vn);
      dict.adjoint(cs.penalty, kstar);
      double res = 0.0;
      for (std::size_t i = 0; i < n; ++i) res += std::pow(gn[i] + kstar[i] / delta, 2);
      const double res_scale = std::max({linalg::norm2(gn.values()), linalg::norm2(kstar) / delta, 1e-300});
      const double rel_res = std::sqrt(res) / res_scale;

      rep.record(value(R, vn), relative_gap(max_abs_difference(kv, ky), q, ky), clock.seconds());
      rep.record_inner(cg.iterations, cg.converged);
      rep.delta.push_back(delta);
      rep.stage.push_back(stage);
      rep.newton_residual.push_back(rel_res);
      detail::trace_distance(p, rep, v);

      // Growth by less than 1e-6 relative is rounding noise, not an increase.
      increases = rel_res > prev_residual * (1.0 + 1e-6) ? increases + 1 : 0;
      const bool at_floor = rel_res <= cfg.floor_tol && rel_res > 0.5 * prev_residual;
      prev_residual = rel_res;
      if (increases >= 10) {
        std::ostringstream os;
        os << "semismooth Newton diverged at delta = " << delta
           << " (residual grew over 10 consecutive steps); restart with a larger delta_init";
        throw NewtonDivergence(os.str());
      }
      if (rel_res <= cfg.newton_tol || at_floor) break;
    }

    const double ratio = static_cast<double>(cs.violated) / (2.0 * static_cast<double>(m));
    const double vnorm = linalg::norm2(v);
    const double res = cs.violation_norm / (vnorm > 0.0 ? vnorm : 1.0);
    const double gap = relative_gap(max_abs_difference(kv, ky), q, ky);
    if (ratio <= cfg.rho_min && res <= cfg.r_min && gap <= cfg.gap_tol) {
      criteria_met = true;
      break;
    }
    delta *= cfg.delta_factor;
    ++stage;
  }
  rep.wall_time = clock.seconds();
  rep.converged = criteria_met;
  rep.message = criteria_met ? "converged" : "continuation reached delta_min before the violation criteria";
  return SolveResult{Image(grid, std::move(v)), std::move(rep)};
}

}  // namespace mind
