#pragma once

// The constrained program
//     minimize R(g)  subject to  max_l |<phi_l, g - Y>| <= q_n
// and the pieces shared by all solvers: the conjugate-box prox, the box
// projection, constraint diagnostics and per-iteration reports.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mind/dictionary.hpp"
#include "mind/image.hpp"
#include "mind/linalg.hpp"
#include "mind/regularizer.hpp"

namespace mind {

class MindProblem {
 public:
  MindProblem(Image y, Dictionary dict, Regularizer r, double q_n)
      : y_(std::move(y)), dict_(std::move(dict)), r_(r), q_(q_n) {
    if (!(q_ >= 0.0)) throw std::invalid_argument("MindProblem: q_n must be >= 0");
    if (y_.grid() != dict_.grid()) throw std::invalid_argument("MindProblem: data not on dictionary grid");
    if (!y_.all_finite()) throw std::invalid_argument("MindProblem: data must be finite");
    r_.validate();
    ky_ = dict_.analyze(y_.values());
  }

  [[nodiscard]] const Image& data() const { return y_; }
  [[nodiscard]] const Dictionary& dictionary() const { return dict_; }
  [[nodiscard]] const Regularizer& regularizer() const { return r_; }
  [[nodiscard]] double threshold() const { return q_; }
  /// Coefficients of the data, K Y.
  [[nodiscard]] const std::vector<double>& data_coefficients() const { return ky_; }

  /// Optional long-run solution; when set, solvers trace ||g_k - g_inf||.
  std::optional<Image> reference;

 private:
  Image y_;
  Dictionary dict_;
  Regularizer r_;
  double q_;
  std::vector<double> ky_;
};

/// (max_l |[K(v - Y)]_l| - q) / q. For q = 0 the excess is measured relative
/// to ||K Y||_inf instead.
inline double relative_gap(double max_residual, double q, std::span<const double> ky) {
  if (q > 0.0) return (max_residual - q) / q;
  const double scale = linalg::norm_inf(ky);
  return max_residual / (scale > 0.0 ? scale : 1.0);
}

inline double max_abs_difference(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

struct KktRecord {
  double objective = 0.0;
  double max_residual = 0.0;  // max_l |<phi_l, v - Y>|
  double gap = 0.0;           // max_residual - q
  double relative_gap = 0.0;
  bool feasible = false;      // gap <= 0
};

inline KktRecord kkt_diagnostics(const MindProblem& p, const Image& v) {
  if (v.grid() != p.data().grid()) throw std::invalid_argument("kkt_diagnostics: grid mismatch");
  const auto kv = p.dictionary().analyze(v.values());
  KktRecord k;
  k.objective = value(p.regularizer(), v);
  k.max_residual = max_abs_difference(kv, p.data_coefficients());
  k.gap = k.max_residual - p.threshold();
  k.relative_gap = relative_gap(k.max_residual, p.threshold(), p.data_coefficients());
  k.feasible = k.gap <= 0.0;
  return k;
}

/// Resolvent of delta dF* for the box indicator F of {w : |w - KY| <= q}:
/// w - delta * clip(w / delta, KY - q, KY + q), i.e. delta times the soft
/// shrinkage of w / delta - KY by q.
inline std::vector<double> prox_F_star(std::span<const double> ky, double q,
                                       std::span<const double> w, double delta) {
  if (w.size() != ky.size()) throw std::invalid_argument("prox_F_star: length mismatch");
  if (!(delta > 0.0)) throw std::invalid_argument("prox_F_star: delta must be > 0");
  std::vector<double> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double z = w[i] / delta;
    out[i] = w[i] - delta * std::clamp(z, ky[i] - q, ky[i] + q);
  }
  return out;
}

/// Orthogonal projection onto the box {w : |w - KY| <= q} (componentwise clip).
inline std::vector<double> project_box(std::span<const double> ky, double q, std::span<const double> z) {
  if (z.size() != ky.size()) throw std::invalid_argument("project_box: length mismatch");
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = std::clamp(z[i], ky[i] - q, ky[i] + q);
  return out;
}

struct SolveReport {
  std::string solver;
  int iterations = 0;
  std::vector<double> objective;     // R(g_k)
  std::vector<double> relative_gap;  // (max |<phi, g_k - Y>| - q) / q
  std::vector<double> time;          // seconds since start
  std::vector<double> distance;      // ||g_k - g_inf|| when a reference is supplied
  // Semismooth Newton only: continuation parameter, stage index and relative
  // Newton residual ||T_delta(g_k)|| after each step.
  std::vector<double> delta;
  std::vector<int> stage;
  std::vector<double> newton_residual;
  // Inner solver work per outer iteration (prox, v-step or linear solve) and
  // the number of inner solves that hit their budget.
  std::vector<int> inner_iterations;
  int inner_unconverged = 0;
  double wall_time = 0.0;
  bool converged = false;
  std::string message;

  void record_inner(int iterations_used, bool inner_converged) {
    inner_iterations.push_back(iterations_used);
    if (!inner_converged) ++inner_unconverged;
  }

  void record(double obj, double gap, double t) {
    objective.push_back(obj);
    relative_gap.push_back(gap);
    time.push_back(t);
    ++iterations;
  }

  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json j = {{"solver", solver},         {"iterations", iterations},
                        {"converged", converged},   {"wall_time", wall_time},
                        {"message", message},       {"objective", objective},
                        {"relative_gap", relative_gap}, {"time", time},
                        {"inner_iterations", inner_iterations},
                        {"inner_unconverged", inner_unconverged}};
    if (!distance.empty()) j["distance"] = distance;
    if (!delta.empty()) {
      j["delta"] = delta;
      j["stage"] = stage;
      j["newton_residual"] = newton_residual;
    }
    return j;
  }

  void write_csv(std::ostream& out) const {
    out << "iteration,objective,relative_gap,time";
    if (!distance.empty()) out << ",distance";
    if (!delta.empty()) out << ",delta,stage,newton_residual";
    out << '\n';
    out.precision(17);
    for (int k = 0; k < iterations; ++k) {
      out << k + 1 << ',' << objective[k] << ',' << relative_gap[k] << ',' << time[k];
      if (!distance.empty()) out << ',' << distance[k];
      if (!delta.empty()) out << ',' << delta[k] << ',' << stage[k] << ',' << newton_residual[k];
      out << '\n';
    }
  }
};

struct SolveResult {
  Image solution;
  SolveReport report;
};

namespace detail {

class Stopwatch {
 public:
  [[nodiscard]] double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline void trace_distance(const MindProblem& p, SolveReport& rep, std::span<const double> v) {
  if (p.reference) rep.distance.push_back(linalg::distance(v, p.reference->values()));
}

}  // namespace detail

}  // namespace mind
