// Acceptance run: one PASS/FAIL line per criterion, tolerances fixed below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mind/mind.hpp"

using namespace mind;

namespace {

int failures = 0;

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

void verdict(int id, bool ok, double secs, double budget, const std::string& detail) {
  const bool in_time = secs < budget;
  if (!(ok && in_time)) ++failures;
  std::printf("criterion %2d: %s  [%.2f s / %.0f s]  %s%s\n", id, ok && in_time ? "PASS" : "FAIL", secs,
              budget, detail.c_str(), in_time ? "" : "  (over time budget)");
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

std::vector<double> gaussian(std::size_t n, std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  std::vector<double> v(n);
  for (double& x : v) x = nd(gen);
  return v;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Zoomed grid search for a convex function of dim variables.
std::vector<double> grid_minimize(const std::function<double(const std::vector<double>&)>& f,
                                  std::vector<double> center, double half, int points, int levels) {
  const int dim = static_cast<int>(center.size());
  std::vector<double> best = center, x(dim);
  double fbest = f(center);
  std::size_t total = 1;
  for (int d = 0; d < dim; ++d) total *= static_cast<std::size_t>(points);
  for (int lev = 0; lev < levels; ++lev) {
    const std::vector<double> c = best;
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::size_t rest = idx;
      for (int d = 0; d < dim; ++d) {
        const int k = static_cast<int>(rest % points);
        rest /= points;
        x[d] = c[d] - half + 2.0 * half * k / (points - 1);
      }
      const double fx = f(x);
      if (fx < fbest) {
        fbest = fx;
        best = x;
      }
    }
    half *= 0.6;
  }
  return best;
}

// 1. K and K* are adjoint for the Euclidean dot products.
void criterion1() {
  Timer t;
  std::mt19937_64 gen(101);
  std::uniform_int_distribution<int> side(1, 16), pow2(0, 4), kind(0, 2);
  double worst = 0.0;
  int pairs = 0;
  for (; pairs < 200; ++pairs) {
    ImageGrid g(1, 1);
    DictionaryKind k = static_cast<DictionaryKind>(pairs % 3);
    DictionaryParams dp;
    if (k == DictionaryKind::DyadicCubes) {
      const int s = 1 << pow2(gen);
      g = ImageGrid(s, s);
    } else if (k == DictionaryKind::SmallCubes) {
      g = ImageGrid(side(gen), side(gen));
      dp.max_edge = std::uniform_int_distribution<int>(1, std::min(g.width, g.height))(gen);
    } else {
      g = ImageGrid(1 << pow2(gen), 1 << pow2(gen));
      dp.filter = pairs % 2 ? wavelet::Filter::Sym6 : wavelet::Filter::Haar;
    }
    const Dictionary d(g, k, dp);
    const auto v = gaussian(d.n(), gen), w = gaussian(d.element_count(), gen);
    const double lhs = dot(d.analyze(v), w), rhs = dot(v, d.adjoint(w));
    worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + std::abs(lhs)));
  }
  verdict(1, worst <= 1e-12, t.seconds(), 10, fmt("%.0f pairs, worst scaled mismatch %.2e (tol 1e-12)", pairs, worst));
}

// 2. Cardinalities at 256 x 256.
void criterion2() {
  Timer t;
  DictionaryParams dp;
  dp.max_edge = 30;
  const auto small = Dictionary(ImageGrid(256, 256), DictionaryKind::SmallCubes, dp).element_count();
  const auto dyadic = Dictionary(ImageGrid(256, 256), DictionaryKind::DyadicCubes).element_count();
  verdict(2, small == 1751915 && dyadic == 87381, t.seconds(), 1,
          fmt("small cubes %.0f (want 1751915), dyadic %.0f (want 87381)", double(small), double(dyadic)));
}

// 3. Prox operators against brute-force minimization.
void criterion3() {
  Timer t;
  std::mt19937_64 gen(303);
  std::uniform_real_distribution<double> u(-2.0, 2.0), pos(0.1, 2.0);
  double worst_f = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = trial % 2 + 1;
    std::vector<double> ky(dim), w(dim);
    for (int i = 0; i < dim; ++i) {
      ky[i] = u(gen);
      w[i] = 3.0 * u(gen);
    }
    double qq = pos(gen), dd = pos(gen);
    if (trial == 0) {  // KY = 0, q = 1, delta = 1, w = 3 -> 2
      ky = {0.0};
      w = {3.0};
      qq = dd = 1.0;
    }
    // F*(x) = <x, KY> + q |x|_1 for the box indicator F.
    auto obj = [&](const std::vector<double>& x) {
      double s = 0.0;
      for (int i = 0; i < dim; ++i)
        s += (x[i] - w[i]) * (x[i] - w[i]) / (2.0 * dd) + x[i] * ky[i] + qq * std::abs(x[i]);
      return s;
    };
    const auto ref = grid_minimize(obj, w, 8.0, dim == 1 ? 201 : 41, 60);
    const auto got = prox_F_star(ky, qq, w, dd);
    for (int i = 0; i < dim; ++i) worst_f = std::max(worst_f, std::abs(got[i] - ref[i]));
  }

  double worst_r = 0.0;
  Regularizer tv{RegularizerKind::TV, 0.05, 1e-13, 500000};
  Regularizer h1{RegularizerKind::H1Squared, 0.05, 1e-13, 500000};
  for (int trial = 0; trial < 8; ++trial) {
    const ImageGrid g = trial < 4 ? ImageGrid(2, 1) : ImageGrid(2, 2);
    Image v(g, 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = u(gen);
    if (trial == 0) v = Image(g, std::vector<double>{0.0, 1.0});
    const double tau = trial == 0 ? 0.1 : pos(gen) * 0.5;
    for (const Regularizer* R : {&tv, &h1}) {
      auto obj = [&](const std::vector<double>& x) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - v[i]) * (x[i] - v[i]);
        return s / (2.0 * tau) + value(*R, Image(g, x));
      };
      const auto ref = grid_minimize(obj, v.data(), 3.0, g.size() == 2 ? 41 : 13, 70);
      const auto got = prox(*R, v, tau).x;
      for (std::size_t i = 0; i < v.size(); ++i) worst_r = std::max(worst_r, std::abs(got[i] - ref[i]));
    }
  }
  verdict(3, worst_f <= 1e-6 && worst_r <= 1e-4, t.seconds(), 30,
          fmt("conjugate-box prox max dev %.2e (tol 1e-6); TV/H1 prox max dev %.2e (tol 1e-4)", worst_f, worst_r));
}

struct SolverRun {
  std::string name;
  double objective;
  double gap;
  bool converged;
};

Image noisy_phantom(ImageGrid g, PhantomKind kind, std::uint64_t seed, double snr, Image* truth = nullptr) {
  Image f = make_phantom(g, kind, seed);
  if (truth) *truth = f;
  return add_noise(f, NoiseSpec{snr_to_sigma(f, snr), seed + 1000});
}

// 4. All applicable solvers reach the same objective on feasible outputs.
void criterion4() {
  Timer t;
  const ImageGrid g(64, 64);
  const Dictionary dict(g, DictionaryKind::DyadicCubes);
  const CPConfig base = CPConfig::defaults(operator_norm(dict, 1e-10, 5000).value, g.size());
  double worst_spread = 0.0, worst_gap = -1.0;
  int problems = 0, unconverged = 0;
  std::string per_reg;
  for (RegularizerKind kind : {RegularizerKind::TV, RegularizerKind::H1Squared, RegularizerKind::HuberTV}) {
    double reg_spread = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      Image truth;
      const Image y = noisy_phantom(g, PhantomKind::Mixed, seed, 20.0, &truth);
      const double sigma = snr_to_sigma(truth, 20.0);
      const double q = monte_carlo_quantile(dict, ThresholdSpec{0.5, 1000, 42, sigma});
      Regularizer R;
      R.kind = kind;
      const MindProblem p(y, dict, R, q);
      std::vector<SolverRun> runs;
      auto record = [&](const std::string& name, const SolveResult& r) {
        const auto k = kkt_diagnostics(p, r.solution);
        runs.push_back({name, k.objective, k.relative_gap, r.report.converged});
      };
      CPConfig cp = base;
      const double b = CPConfig::default_balance(kind);
      cp = cp.with_steps(base.delta * b, base.tau / b);
      record("cp", chambolle_pock(p, cp));
      record("admm", admm(p, ADMMConfig::defaults(kind, g.size())));
      if (kind != RegularizerKind::TV) record("ssn", semismooth_newton(p, SSNConfig{}));
      double lo = runs[0].objective, hi = lo;
      for (const auto& r : runs) {
        lo = std::min(lo, r.objective);
        hi = std::max(hi, r.objective);
        worst_gap = std::max(worst_gap, r.gap);
        if (!r.converged) ++unconverged;
      }
      reg_spread = std::max(reg_spread, (hi - lo) / lo);
      ++problems;
    }
    worst_spread = std::max(worst_spread, reg_spread);
    per_reg += std::string(to_string(kind)) + fmt(" %.2e ", reg_spread);
  }
  verdict(4, worst_spread <= 0.01 && worst_gap <= 1e-3, t.seconds(), 600,
          fmt("%.0f problems, worst objective spread %.2e (tol 1e-2), worst relative gap %.2e (tol 1e-3), "
              "%.0f solver runs unconverged; ",
              problems, worst_spread, worst_gap, unconverged) +
              "spread by regularizer: " + per_reg);
}

// 5. q = 0 with small cubes pins every solver to the data.
void criterion5() {
  Timer t;
  const ImageGrid g(16, 16);
  DictionaryParams dp;
  dp.max_edge = 4;
  const Dictionary dict(g, DictionaryKind::SmallCubes, dp);
  const Image y = noisy_phantom(g, PhantomKind::Mixed, 5, 20.0);
  const double ynorm = linalg::norm2(y.values());
  double worst = 0.0;
  std::string detail;
  auto check = [&](const char* name, const SolveResult& r) {
    const double e = linalg::distance(r.solution.values(), y.values()) / ynorm;
    worst = std::max(worst, e);
    detail += std::string(name) + fmt(" %.1e ", e);
  };
  for (RegularizerKind kind : {RegularizerKind::TV, RegularizerKind::H1Squared, RegularizerKind::HuberTV}) {
    Regularizer R;
    R.kind = kind;
    const MindProblem p(y, dict, R, 0.0);
    const std::string tag = to_string(kind);
    auto cp = CPConfig::defaults(dict, kind);
    cp.gap_tol = 1e-9;  // Y is the only feasible point; stop on iterate change only
    cp.rel_change_tol = 1e-9;
    cp.max_iter = 20000;
    check((tag + "/cp").c_str(), chambolle_pock(p, cp));
    check((tag + "/admm").c_str(), admm(p, ADMMConfig::defaults(kind, g.size())));
    if (kind != RegularizerKind::TV) check((tag + "/ssn").c_str(), semismooth_newton(p, SSNConfig{}));
  }
  verdict(5, worst <= 1e-5, t.seconds(), 60, fmt("worst relative l2 distance to Y %.2e (tol 1e-5): ", worst) + detail);
}

// 6. Monte-Carlo median against the half-normal median; homogeneity in sigma.
void criterion6() {
  Timer t;
  const ImageGrid g(64, 64);
  DictionaryParams dp;
  dp.max_level = 0;
  const Dictionary dict(g, DictionaryKind::DyadicCubes, dp);
  const int reps = 10000;
  const double s = 1.0 / std::sqrt(static_cast<double>(g.size()));
  const double q = monte_carlo_quantile(dict, ThresholdSpec{0.5, reps, 7, 1.0});
  const double analytic = 0.6744897501960817 * s;
  // SE of the sample median: 0.5 / (sqrt(N) f(m)) with f(m) = 2 phi(0.6745) / s.
  const double se = 0.5 / (std::sqrt(double(reps)) * 2.0 * 0.3177765 / s);
  const double q1 = monte_carlo_quantile(dict, ThresholdSpec{0.5, 1000, 11, 0.3});
  const double q2 = monte_carlo_quantile(dict, ThresholdSpec{0.5, 1000, 11, 0.6});
  const bool ok = dict.element_count() == 1 && std::abs(q - analytic) <= 3.0 * se && q2 == 2.0 * q1;
  verdict(6, ok, t.seconds(), 60,
          fmt("median %.6f vs analytic %.6f, |diff| = %.2f SE (tol 3); q(2 sigma) - 2 q(sigma) = %.1e", q, analytic,
              std::abs(q - analytic) / se, q2 - 2.0 * q1));
}

// 7. Difference-based noise estimate on pure noise and on affine images.
void criterion7() {
  Timer t;
  const ImageGrid g(256, 256);
  const double sigma = 12.6 / 255.0;
  int within = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const Image y = add_noise(Image(g, 0.0), NoiseSpec{sigma, seed});
    const double rel = std::abs(estimate_sigma(y).sigma_hat - sigma) / sigma;
    worst = std::max(worst, rel);
    if (rel <= 0.02) ++within;
  }
  double affine_max = 0.0;
  for (const auto& [a, b, c] : std::vector<std::array<double, 3>>{{0.25, 0.5, -0.125}, {0.0, 1.0, 1.0}, {3.0, -2.0, 0.75}}) {
    Image y(g, 0.0);
    for (int r = 0; r < g.height; ++r)
      for (int col = 0; col < g.width; ++col)
        y(r, col) = a + b * (col + 0.5) / g.width + c * (r + 0.5) / g.height;
    affine_max = std::max(affine_max, estimate_sigma(y).sigma_hat);
  }
  verdict(7, within >= 47 && affine_max == 0.0, t.seconds(), 60,
          fmt("%.0f/50 within 2%% (need 47), worst relative error %.4f; affine estimate %.1e (need exactly 0)", within,
              worst, affine_max));
}

// 8. PSNR gain on a piecewise-constant phantom.
void criterion8() {
  Timer t;
  const ImageGrid g(64, 64);
  Image truth;
  const Image y = noisy_phantom(g, PhantomKind::Quadrants, 1, 20.0, &truth);
  const double sigma = snr_to_sigma(truth, 20.0);
  const double psnr_in = psnr(y, truth);

  DictionaryParams dp;
  dp.max_edge = 30;
  const Dictionary small(g, DictionaryKind::SmallCubes, dp);
  Regularizer tv;
  const MindProblem p_tv(y, small, tv, monte_carlo_quantile(small, ThresholdSpec{0.5, 1000, 42, sigma}));
  const auto r_tv = chambolle_pock(p_tv, CPConfig::defaults(small, RegularizerKind::TV));
  const double gain_tv = psnr(r_tv.solution, truth) - psnr_in;

  const Dictionary dyadic(g, DictionaryKind::DyadicCubes);
  Regularizer h1;
  h1.kind = RegularizerKind::H1Squared;
  const MindProblem p_h1(y, dyadic, h1, monte_carlo_quantile(dyadic, ThresholdSpec{0.5, 1000, 42, sigma}));
  const auto r_h1 = chambolle_pock(p_h1, CPConfig::defaults(dyadic, RegularizerKind::H1Squared));
  const double gain_h1 = psnr(r_h1.solution, truth) - psnr_in;

  verdict(8, gain_tv >= 2.0 && gain_h1 >= 1.0, t.seconds(), 300,
          fmt("input %.2f dB; TV+small cubes gain %.2f dB (need 2, final gap %.1e); H1+dyadic gain %.2f dB (need 1)",
              psnr_in, gain_tv, kkt_diagnostics(p_tv, r_tv.solution).relative_gap, gain_h1));
}

// 9. PSNR for MISE 0.00149 at peak 1.
void criterion9() {
  Timer t;
  const ImageGrid g(100, 100);
  const Image f(g, 0.0), fhat(g, std::sqrt(0.00149));
  const double m = mise(fhat, f), p = psnr(fhat, f, 1.0);
  verdict(9, std::abs(m - 0.00149) <= 1e-12 && std::abs(p - 28.3) <= 0.05, t.seconds(), 1,
          fmt("MISE %.6f -> PSNR %.3f dB (target 28.3 +- 0.05)", m, p));
}

// 10. Semismooth Newton: final-stage residual descent, active ratio, TV refusal.
void criterion10() {
  Timer t;
  const ImageGrid g(32, 32);
  const Dictionary dict(g, DictionaryKind::DyadicCubes);
  Image truth;
  const Image y = noisy_phantom(g, PhantomKind::Mixed, 1, 20.0, &truth);
  const double q = monte_carlo_quantile(dict, ThresholdSpec{0.5, 1000, 42, snr_to_sigma(truth, 20.0)});
  Regularizer h1;
  h1.kind = RegularizerKind::H1Squared;
  SSNConfig cfg;
  cfg.delta_init = 1e-4;
  cfg.delta_factor = 1e-4;
  const auto r = semismooth_newton(MindProblem(y, dict, h1, q), cfg);
  const auto& rep = r.report;
  const int last_stage = rep.stage.empty() ? -1 : rep.stage.back();
  std::vector<double> tail;
  for (int k = 0; k < rep.iterations; ++k)
    if (rep.stage[k] == last_stage) tail.push_back(rep.newton_residual[k]);
  bool monotone = tail.size() >= 5;
  for (std::size_t k = tail.size() >= 5 ? tail.size() - 4 : 1; monotone && k < tail.size(); ++k)
    monotone = tail[k] < tail[k - 1];

  // Violated fraction of the 2 #Lambda one-sided constraints at the returned point.
  const auto kv = dict.analyze(r.solution.values());
  const auto& ky = dict.analyze(y.values());
  std::size_t violated = 0;
  for (std::size_t i = 0; i < kv.size(); ++i)
    if (std::abs(kv[i] - ky[i]) - q > cfg.violation_tol * q) ++violated;
  const double ratio = static_cast<double>(violated) / (2.0 * static_cast<double>(kv.size()));

  bool refused = false;
  try {
    Regularizer tv;
    semismooth_newton(MindProblem(y, dict, tv, q), SSNConfig{});
  } catch (const UnsupportedRegularizer&) {
    refused = true;
  }
  std::string res_list;
  for (std::size_t k = tail.size() >= 5 ? tail.size() - 5 : 0; k < tail.size(); ++k) res_list += fmt(" %.2e", tail[k]);
  verdict(10, monotone && ratio <= cfg.rho_min && rep.converged && refused, t.seconds(), 120,
          fmt("final stage %.0f steps, last residuals:", double(tail.size())) + res_list +
              fmt("; violated ratio %.4f (tol %.2f); TV refused: ", ratio, cfg.rho_min) + (refused ? "yes" : "no"));
}

}  // namespace

int main(int argc, char** argv) {
  // Optional arguments select a subset of criteria, e.g. `mind_acceptance 5 10`.
  void (*const all[])() = {criterion1, criterion2, criterion3, criterion4, criterion5,
                           criterion6, criterion7, criterion8, criterion9, criterion10};
  std::vector<int> pick;
  for (int i = 1; i < argc; ++i) {
    const int id = std::atoi(argv[i]);
    if (id < 1 || id > 10) {
      std::fprintf(stderr, "unknown criterion '%s'\n", argv[i]);
      return 2;
    }
    pick.push_back(id);
  }
  if (pick.empty())
    for (int id = 1; id <= 10; ++id) pick.push_back(id);
  for (int id : pick) all[id - 1]();
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
