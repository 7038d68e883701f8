// mind: denoising, threshold calibration, solver comparison and image metrics.
//
// All options live on the top-level command so a flat key=value file given by
// --config can set any of them; flags on the command line override the file.
// Exit status: 0 when every output was written (and, for solver runs, every
// solver converged); 2 when outputs were written but a solver did not
// converge; 1 on invalid input or configuration.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "mind/mind.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mind;

namespace {

constexpr int kExitNotConverged = 2;

struct Options {
  // input
  std::string input, truth, phantom;
  int size = 64;
  std::uint64_t phantom_seed = 1;
  double snr = 0.0, noise_sigma = -1.0;
  std::uint64_t noise_seed = 1;
  // output
  std::string output_dir = "mind-out", output;
  int bits = 16;
  bool omit_timing = false;
  // dictionary
  std::string dict = "small-cubes", filter = "haar";
  int max_edge = 30, depth = 0, max_level = -1;
  // regularizer
  std::string reg = "tv";
  double beta = 0.05, prox_tol = 1e-6;
  int prox_max_iter = 200;
  // solver
  std::string solver = "cp";
  double theta = 1.0, cp_delta = 0.0, cp_tau = 0.0, balance = 0.0;
  int max_iter = 0;
  double gap_tol = 1e-3, rel_change_tol = 1e-6;
  double rho = 0.0, eps_stop = 0.0;
  int inner_budget = 50;
  double ssn_delta_init = 1.0 / 3.0, ssn_delta_factor = 1.0 / 3.0, ssn_delta_min = 1e-12;
  double rho_min = 0.01, r_min = 1e-6, linear_tol = 1e-10, violation_tol = 1e-3;
  // threshold and noise level
  double alpha = 0.5, universal_c = 0.0, q = -1.0, sigma = -1.0;
  int reps = 1000;
  std::uint64_t seed = 0;
  std::string cache;
  // misc
  double peak = 1.0;
  std::string a, b, reference;
  int reference_iters = 0;
  int width = 0, height = 0;
};

json finite_or_sentinel(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  return x;
}

json quality_json(const QualityReport& r) {
  return {{"mise", r.mise}, {"psnr", finite_or_sentinel(r.psnr)}, {"ssim", r.ssim}};
}

json options_json(const CLI::App& app) {
  json j = json::object();
  for (const CLI::Option* opt : app.get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config") continue;
    const auto res = opt->results();
    if (opt->get_expected_min() == 0) {
      j[name] = opt->count() > 0;
    } else if (!res.empty()) {
      j[name] = res.back();
    } else if (!opt->get_default_str().empty()) {
      j[name] = opt->get_default_str();
    }
  }
  return j;
}

struct Loaded {
  Image y;
  std::optional<Image> truth;
  json source;
};

Loaded load_input(const Options& o) {
  Loaded L{Image(ImageGrid(1, 1)), std::nullopt, json::object()};
  if (!o.phantom.empty() == !o.input.empty())
    throw std::invalid_argument("give exactly one of --input and --phantom");
  if (!o.input.empty()) {
    L.y = pgm::read(o.input);
    L.source = {{"input", o.input}};
  } else {
    Image f = make_phantom(ImageGrid(o.size, o.size), phantom_kind_from_string(o.phantom), o.phantom_seed);
    double s = o.noise_sigma;
    if (o.snr > 0.0) {
      if (s >= 0.0) throw std::invalid_argument("give at most one of --snr and --noise-sigma");
      s = snr_to_sigma(f, o.snr);
    }
    if (s < 0.0) s = 0.0;
    L.y = add_noise(f, NoiseSpec{s, o.noise_seed});
    L.truth = std::move(f);
    L.source = {{"phantom", o.phantom}, {"size", o.size}, {"phantom_seed", o.phantom_seed},
                {"noise_sigma", s},      {"noise_seed", o.noise_seed}};
  }
  if (!o.truth.empty()) L.truth = pgm::read(o.truth);
  return L;
}

Dictionary build_dictionary(const Options& o, ImageGrid grid) {
  DictionaryParams p;
  p.max_edge = std::min(o.max_edge, std::min(grid.width, grid.height));
  p.depth = o.depth;
  p.max_level = o.max_level;
  if (o.filter == "haar") {
    p.filter = wavelet::Filter::Haar;
  } else if (o.filter == "sym6") {
    p.filter = wavelet::Filter::Sym6;
  } else {
    throw std::invalid_argument("unknown wavelet filter: " + o.filter);
  }
  return Dictionary(grid, dictionary_kind_from_string(o.dict), p);
}

Regularizer build_regularizer(const Options& o) {
  Regularizer R;
  R.kind = regularizer_kind_from_string(o.reg);
  R.beta = o.beta;
  R.prox_tol = o.prox_tol;
  R.prox_max_iter = o.prox_max_iter;
  R.validate();
  return R;
}

struct Resolved {
  double sigma = 0.0;
  std::string sigma_mode;
  double q = 0.0;
  json threshold;
};

Resolved resolve_threshold(const Options& o, const Image& y, const Dictionary& dict) {
  Resolved r;
  if (o.sigma >= 0.0) {
    r.sigma = o.sigma;
    r.sigma_mode = "known";
  } else {
    const auto est = estimate_sigma(y);
    r.sigma = est.sigma_hat;
    r.sigma_mode = "estimated:" + est.method;
  }
  const int modes = (o.q >= 0.0) + (o.universal_c > 0.0);
  if (modes > 1) throw std::invalid_argument("give at most one of --q and --universal-c");
  if (o.q >= 0.0) {
    r.q = o.q;
    r.threshold = {{"mode", "explicit"}};
  } else if (o.universal_c > 0.0) {
    r.q = universal_threshold(o.universal_c, r.sigma, dict.n());
    r.threshold = {{"mode", "universal"}, {"C", o.universal_c}};
  } else {
    const ThresholdSpec spec{o.alpha, o.reps, o.seed, 1.0};
    spec.validate();
    const ThresholdCacheKey key{dict.fingerprint(), dict.n(), o.alpha, o.reps, o.seed, kGeneratorName};
    std::optional<double> unit;
    if (!o.cache.empty()) unit = cache_lookup(o.cache, key);
    const bool hit = unit.has_value();
    if (!unit) unit = monte_carlo_quantile(dict, spec);
    if (!o.cache.empty() && !hit) cache_store(o.cache, key, *unit);
    r.q = r.sigma * *unit;
    r.threshold = {{"mode", "monte-carlo"}, {"alpha", o.alpha},     {"reps", o.reps},
                   {"seed", o.seed},        {"unit_quantile", *unit}, {"cache_hit", hit}};
  }
  r.threshold["q_n"] = r.q;
  return r;
}

struct SolverOutcome {
  SolveResult result;
  json config;
};

SolverOutcome run_solver(const std::string& name, const MindProblem& p, const Options& o) {
  const RegularizerKind kind = p.regularizer().kind;
  if (name == "cp") {
    const auto norm = operator_norm(p.dictionary(), 1e-10, 5000);
    const double b = o.balance > 0.0 ? o.balance : CPConfig::default_balance(kind);
    CPConfig c = CPConfig::defaults(norm.value, p.dictionary().n(), b);
    c.theta = o.theta;
    if (o.cp_delta > 0.0 || o.cp_tau > 0.0) {
      if (!(o.cp_delta > 0.0 && o.cp_tau > 0.0)) throw std::invalid_argument("give both --cp-delta and --cp-tau");
      c = c.with_steps(o.cp_delta, o.cp_tau);
    }
    if (o.max_iter > 0) c.max_iter = o.max_iter;
    c.gap_tol = o.gap_tol;
    c.rel_change_tol = o.rel_change_tol;
    json cfg = {{"theta", c.theta},       {"delta", c.delta},       {"tau", c.tau},
                {"balance", b},           {"operator_norm", c.op_norm}, {"operator_norm_converged", norm.converged},
                {"max_iter", c.max_iter}, {"gap_tol", c.gap_tol},   {"rel_change_tol", c.rel_change_tol}};
    return {chambolle_pock(p, c), cfg};
  }
  if (name == "admm") {
    ADMMConfig c = ADMMConfig::defaults(kind, p.dictionary().n());
    if (o.rho > 0.0) c.rho = o.rho;
    if (o.max_iter > 0) c.max_iter = o.max_iter;
    c.inner_budget = o.inner_budget;
    c.eps_stop = o.eps_stop;
    c.gap_tol = o.gap_tol;
    json cfg = {{"rho", c.rho},           {"inner_budget", c.inner_budget}, {"max_iter", c.max_iter},
                {"eps_stop", c.eps_stop}, {"gap_tol", c.gap_tol}};
    return {admm(p, c), cfg};
  }
  if (name == "ssn") {
    SSNConfig c;
    c.delta_init = o.ssn_delta_init;
    c.delta_factor = o.ssn_delta_factor;
    c.delta_min = o.ssn_delta_min;
    c.rho_min = o.rho_min;
    c.r_min = o.r_min;
    c.linear_solve_tol = o.linear_tol;
    c.violation_tol = o.violation_tol;
    json cfg = {{"delta_init", c.delta_init}, {"delta_factor", c.delta_factor}, {"delta_min", c.delta_min},
                {"rho_min", c.rho_min},       {"r_min", c.r_min},               {"linear_solve_tol", c.linear_solve_tol},
                {"violation_tol", c.violation_tol}};
    return {semismooth_newton(p, c), cfg};
  }
  throw std::invalid_argument("unknown solver: " + name);
}

json report_json(const SolveReport& r, bool omit_timing) {
  json j = r.to_json();
  if (omit_timing) {
    j.erase("time");
    j.erase("wall_time");
  }
  return j;
}

void write_trace(const fs::path& path, const SolveReport& r, bool omit_timing) {
  std::ofstream out(path);
  if (omit_timing) {
    SolveReport copy = r;
    std::fill(copy.time.begin(), copy.time.end(), 0.0);
    copy.write_csv(out);
  } else {
    r.write_csv(out);
  }
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

json base_report(const CLI::App& app, const std::string& command, const Loaded& in, const Dictionary& dict,
                 const Regularizer& R, const Resolved& res) {
  return {{"command", command},
          {"options", options_json(app)},
          {"source", in.source},
          {"grid", {{"width", dict.grid().width}, {"height", dict.grid().height}}},
          {"generator", kGeneratorName},
          {"dictionary", {{"fingerprint", dict.fingerprint()}, {"element_count", dict.element_count()}}},
          {"regularizer", {{"kind", to_string(R.kind)}, {"beta", R.beta}, {"prox_tol", R.prox_tol},
                           {"prox_max_iter", R.prox_max_iter}}},
          {"sigma", {{"value", res.sigma}, {"mode", res.sigma_mode}}},
          {"threshold", res.threshold}};
}

int cmd_denoise(const CLI::App& app, const Options& o) {
  const Loaded in = load_input(o);
  const Dictionary dict = build_dictionary(o, in.y.grid());
  const Regularizer R = build_regularizer(o);
  const Resolved res = resolve_threshold(o, in.y, dict);
  const MindProblem p(in.y, dict, R, res.q);
  auto [result, solver_cfg] = run_solver(o.solver, p, o);

  fs::create_directories(o.output_dir);
  const fs::path dir(o.output_dir);
  const fs::path image_path = o.output.empty() ? dir / "denoised.pgm" : fs::path(o.output);
  pgm::write(image_path.string(), result.solution, o.bits);
  write_trace(dir / "trace.csv", result.report, o.omit_timing);

  json rep = base_report(app, "denoise", in, dict, R, res);
  const auto kkt = kkt_diagnostics(p, result.solution);
  rep["solver"] = {{"name", o.solver}, {"config", solver_cfg}};
  rep["report"] = report_json(result.report, o.omit_timing);
  rep["kkt"] = {{"objective", kkt.objective}, {"max_residual", kkt.max_residual},
                {"relative_gap", kkt.relative_gap}, {"feasible", kkt.feasible}};
  if (in.truth) {
    rep["quality"] = {{"peak", o.peak},
                      {"input", quality_json(quality(in.y, *in.truth, o.peak))},
                      {"output", quality_json(quality(result.solution, *in.truth, o.peak))}};
  }
  rep["outputs"] = {{"image", image_path.string()}, {"trace", (dir / "trace.csv").string()},
                    {"report", (dir / "report.json").string()}};
  write_json(dir / "report.json", rep);
  std::cout << "wrote " << image_path.string() << "; " << result.report.message << " after "
            << result.report.iterations << " iterations, objective " << kkt.objective << ", relative gap "
            << kkt.relative_gap << '\n';
  return result.report.converged ? 0 : kExitNotConverged;
}

int cmd_compare(const CLI::App& app, const Options& o) {
  const Loaded in = load_input(o);
  const Dictionary dict = build_dictionary(o, in.y.grid());
  const Regularizer R = build_regularizer(o);
  const Resolved res = resolve_threshold(o, in.y, dict);
  MindProblem p(in.y, dict, R, res.q);
  if (!o.reference.empty()) {
    p.reference = pgm::read(o.reference);
  } else if (o.reference_iters > 0) {
    Options long_run = o;
    long_run.max_iter = o.reference_iters;
    long_run.gap_tol = 0.0;
    long_run.rel_change_tol = 0.0;
    p.reference = run_solver("cp", p, long_run).result.solution;
  }

  fs::create_directories(o.output_dir);
  const fs::path dir(o.output_dir);
  json rep = base_report(app, "compare", in, dict, R, res);
  rep["solvers"] = json::array();
  rep["skipped"] = json::array();
  bool all_converged = true;
  std::vector<std::pair<std::string, double>> objectives;
  std::printf("%-6s %10s %14s %14s %10s %s\n", "solver", "iterations", "objective", "relative_gap", "seconds",
              "status");
  for (const std::string name : {"cp", "admm", "ssn"}) {
    if (name == "ssn" && R.kind == RegularizerKind::TV) {
      const std::string why = "semismooth Newton skipped: TV is nonsmooth and unsupported (use h1 or huber)";
      rep["skipped"].push_back({{"solver", name}, {"reason", why}});
      std::printf("%-6s %s\n", name.c_str(), why.c_str());
      continue;
    }
    auto [result, cfg] = run_solver(name, p, o);
    const fs::path trace = dir / ("trace_" + name + ".csv");
    write_trace(trace, result.report, o.omit_timing);
    const auto kkt = kkt_diagnostics(p, result.solution);
    all_converged = all_converged && result.report.converged;
    objectives.emplace_back(name, kkt.objective);
    rep["solvers"].push_back({{"solver", name},
                              {"config", cfg},
                              {"trace", trace.string()},
                              {"iterations", result.report.iterations},
                              {"converged", result.report.converged},
                              {"objective", kkt.objective},
                              {"relative_gap", kkt.relative_gap},
                              {"wall_time", o.omit_timing ? 0.0 : result.report.wall_time}});
    std::printf("%-6s %10d %14.8g %14.4e %10.3f %s\n", name.c_str(), result.report.iterations, kkt.objective,
                kkt.relative_gap, result.report.wall_time, result.report.message.c_str());
  }
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& [name, obj] : objectives) {
    lo = std::min(lo, obj);
    hi = std::max(hi, obj);
  }
  const double spread = lo > 0.0 ? (hi - lo) / lo : hi - lo;
  rep["objective_spread"] = spread;
  write_json(dir / "compare.json", rep);
  std::printf("relative objective spread %.3e\n", spread);
  return all_converged ? 0 : kExitNotConverged;
}

int cmd_threshold(const Options& o) {
  ImageGrid grid(o.width, o.height);
  if (!o.input.empty()) grid = pgm::read(o.input).grid();
  const Dictionary dict = build_dictionary(o, grid);
  const double sigma = o.sigma >= 0.0 ? o.sigma : 1.0;
  const ThresholdSpec spec{o.alpha, o.reps, o.seed, 1.0};
  spec.validate();
  const ThresholdCacheKey key{dict.fingerprint(), dict.n(), o.alpha, o.reps, o.seed, kGeneratorName};
  std::optional<double> unit;
  if (!o.cache.empty()) unit = cache_lookup(o.cache, key);
  const bool hit = unit.has_value();
  if (!unit) unit = monte_carlo_quantile(dict, spec);
  if (!o.cache.empty() && !hit) cache_store(o.cache, key, *unit);
  const json j = {{"q_n", sigma * *unit},  {"sigma", sigma},     {"unit_quantile", *unit},
                  {"key", key.to_json()},  {"cache_hit", hit},   {"element_count", dict.element_count()}};
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_metrics(const Options& o) {
  const Image a = pgm::read(o.a), b = pgm::read(o.b);
  if (a.grid() != b.grid()) throw std::invalid_argument("metrics: images differ in dimensions");
  QualityReport r;
  r.mise = mise(a, b);
  r.psnr = psnr(a, b, o.peak);
  const bool ssim_ok = a.width() >= 11 && a.height() >= 11;
  if (ssim_ok) r.ssim = ssim(a, b, o.peak);
  json j = quality_json(r);
  if (!ssim_ok) j["ssim"] = nullptr;
  j["peak"] = o.peak;
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_add_noise(const Options& o) {
  if (o.input.empty() || o.output.empty()) throw std::invalid_argument("add-noise needs --input and --output");
  const Image f = pgm::read(o.input);
  double s = o.noise_sigma;
  if (o.snr > 0.0) {
    if (s >= 0.0) throw std::invalid_argument("give at most one of --snr and --noise-sigma");
    s = snr_to_sigma(f, o.snr);
  }
  if (s < 0.0) throw std::invalid_argument("add-noise needs --snr or --noise-sigma");
  pgm::write(o.output, add_noise(f, NoiseSpec{s, o.noise_seed}), o.bits);
  std::cout << json{{"sigma", s}, {"seed", o.noise_seed}, {"generator", kGeneratorName}, {"output", o.output}}.dump(2)
            << '\n';
  return 0;
}

int cmd_estimate_noise(const Options& o) {
  const auto est = estimate_sigma(pgm::read(o.input));
  std::cout << json{{"sigma_hat", est.sigma_hat}, {"method", est.method}}.dump(2) << '\n';
  return 0;
}

int cmd_phantom(const Options& o) {
  if (o.output.empty()) throw std::invalid_argument("phantom needs --output");
  const Loaded in = load_input(o);
  pgm::write(o.output, in.y, o.bits);
  std::cout << json{{"output", o.output}, {"source", in.source}}.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("Multiscale Nemirovski-Dantzig estimator: constrained variational denoising");
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();
  app.set_config("--config", "", "flat key=value file; command-line flags override it");
  app.fallthrough();
  app.require_subcommand(1);
  Options o;

  auto* denoise = app.add_subcommand("denoise", "solve the MIND program for one image");
  auto* threshold = app.add_subcommand("threshold", "calibrate q_n by Monte Carlo (optionally cached)");
  auto* compare = app.add_subcommand("compare", "run every applicable solver on one problem");
  auto* metrics = app.add_subcommand("metrics", "MISE / PSNR / SSIM between --a and --b");
  auto* add_noise_cmd = app.add_subcommand("add-noise", "add seeded Gaussian noise to an image");
  auto* estimate = app.add_subcommand("estimate-noise", "difference-based noise level estimate");
  auto* phantom = app.add_subcommand("phantom", "write a synthetic test image (noisy with --snr)");

  app.add_option("--input", o.input, "PGM input (P5, 8 or 16 bit)")->group("Input");
  app.add_option("--phantom", o.phantom, "synthetic input: blocks, ramp, bubbles, mixed, quadrants")->group("Input");
  app.add_option("--size", o.size, "phantom side length")->group("Input");
  app.add_option("--phantom-seed", o.phantom_seed)->group("Input");
  app.add_option("--snr", o.snr, "noise level as max|f| / sigma")->group("Input");
  app.add_option("--noise-sigma", o.noise_sigma, "noise level on [0,1] intensities")->group("Input");
  app.add_option("--noise-seed", o.noise_seed)->group("Input");
  app.add_option("--truth", o.truth, "ground truth PGM for the quality report")->group("Input");
  app.add_option("--width", o.width, "grid width (threshold without --input)")->group("Input");
  app.add_option("--height", o.height, "grid height (threshold without --input)")->group("Input");

  app.add_option("--output-dir", o.output_dir, "directory for reports and traces")->group("Output");
  app.add_option("--output", o.output, "output image path")->group("Output");
  app.add_option("--bits", o.bits, "PGM bit depth of written images")->check(CLI::IsMember({8, 16}))->group("Output");
  app.add_flag("--omit-timing", o.omit_timing, "drop wall-clock data so reruns are byte-identical")->group("Output");

  app.add_option("--dict", o.dict, "dyadic-cubes, small-cubes or wavelet")->group("Dictionary");
  app.add_option("--max-edge", o.max_edge, "small cubes: largest edge")->group("Dictionary");
  app.add_option("--max-level", o.max_level, "dyadic cubes: finest level, -1 for single pixels")->group("Dictionary");
  app.add_option("--filter", o.filter, "wavelets: haar or sym6")->group("Dictionary");
  app.add_option("--depth", o.depth, "wavelets: decomposition depth, 0 for full")->group("Dictionary");

  app.add_option("--reg", o.reg, "tv, h1 or huber")->group("Regularizer");
  app.add_option("--beta", o.beta, "Huber parameter")->group("Regularizer");
  app.add_option("--prox-tol", o.prox_tol)->group("Regularizer");
  app.add_option("--prox-max-iter", o.prox_max_iter)->group("Regularizer");

  app.add_option("--solver", o.solver, "cp, admm or ssn")->group("Solver");
  app.add_option("--theta", o.theta, "CP extrapolation")->group("Solver");
  app.add_option("--cp-delta", o.cp_delta, "CP dual step (with --cp-tau; default from ||K||)")->group("Solver");
  app.add_option("--cp-tau", o.cp_tau, "CP primal step")->group("Solver");
  app.add_option("--balance", o.balance, "CP step balance b (delta*b, tau/b); default 1 for h1, 20 otherwise")
      ->group("Solver");
  app.add_option("--max-iter", o.max_iter, "outer budget; default 3000 (cp), 300 (admm)")->group("Solver");
  app.add_option("--gap-tol", o.gap_tol)->group("Solver");
  app.add_option("--rel-change-tol", o.rel_change_tol)->group("Solver");
  app.add_option("--rho", o.rho, "ADMM penalty; default 1.2 n (h1), 30 n (tv), 10 n (huber)")->group("Solver");
  app.add_option("--inner-budget", o.inner_budget, "ADMM TV/Huber v-step iterations")->group("Solver");
  app.add_option("--eps-stop", o.eps_stop, "ADMM residual stop; 0 selects gap_tol * q_n")->group("Solver");
  app.add_option("--ssn-delta-init", o.ssn_delta_init)->group("Solver");
  app.add_option("--ssn-delta-factor", o.ssn_delta_factor)->group("Solver");
  app.add_option("--ssn-delta-min", o.ssn_delta_min)->group("Solver");
  app.add_option("--rho-min", o.rho_min, "SSN bound on the violated fraction")->group("Solver");
  app.add_option("--r-min", o.r_min, "SSN bound on ||violation|| / ||v||")->group("Solver");
  app.add_option("--violation-tol", o.violation_tol, "SSN counting slack relative to q_n")->group("Solver");
  app.add_option("--linear-tol", o.linear_tol, "SSN linear solve tolerance")->group("Solver");
  app.add_option("--reference", o.reference, "compare: long-run solution PGM for distance traces")->group("Solver");
  app.add_option("--reference-iters", o.reference_iters, "compare: compute the reference with this many CP steps")
      ->group("Solver");

  app.add_option("--alpha", o.alpha, "Monte-Carlo level; q_n is the (1-alpha)-quantile")->group("Threshold");
  app.add_option("--reps", o.reps, "Monte-Carlo repetitions")->group("Threshold");
  app.add_option("--seed", o.seed, "Monte-Carlo seed")->group("Threshold");
  app.add_option("--universal-c", o.universal_c, "use q_n = C sigma sqrt(log n / n)")->group("Threshold");
  app.add_option("--q", o.q, "explicit q_n")->group("Threshold");
  app.add_option("--sigma", o.sigma, "known noise level; estimated from the data when absent")->group("Threshold");
  app.add_option("--cache", o.cache, "JSON threshold cache file")->group("Threshold");

  app.add_option("--peak", o.peak, "PSNR/SSIM peak value")->group("Metrics");
  app.add_option("--a", o.a, "metrics: first image")->group("Metrics");
  app.add_option("--b", o.b, "metrics: second image")->group("Metrics");

  CLI11_PARSE(app, argc, argv);
  try {
    if (denoise->parsed()) return cmd_denoise(app, o);
    if (compare->parsed()) return cmd_compare(app, o);
    if (threshold->parsed()) return cmd_threshold(o);
    if (metrics->parsed()) return cmd_metrics(o);
    if (add_noise_cmd->parsed()) return cmd_add_noise(o);
    if (estimate->parsed()) return cmd_estimate_noise(o);
    if (phantom->parsed()) return cmd_phantom(o);
  } catch (const std::exception& e) {
    std::cerr << "mind: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
