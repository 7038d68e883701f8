#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "mind/mind.hpp"
#include "oracle.hpp"

using namespace mind;

namespace {

Regularizer reg(RegularizerKind k) {
  Regularizer r;
  r.kind = k;
  return r;
}

Dictionary small_cubes(int w, int h, int max_edge) {
  DictionaryParams p;
  p.max_edge = max_edge;
  return Dictionary(ImageGrid(w, h), DictionaryKind::SmallCubes, p);
}

Image noisy(ImageGrid g, std::uint64_t seed, Image* truth = nullptr) {
  const Image f = make_phantom(g, PhantomKind::Mixed, seed);
  if (truth) *truth = f;
  return add_noise(f, {snr_to_sigma(f, 20.0), seed + 1000});
}

double rel_dist(const Image& a, const Image& b) {
  return linalg::distance(a.values(), b.values()) / linalg::norm2(b.values());
}

}  // namespace

TEST(ProxFStar, SoftShrinkExamples) {
  const std::vector<double> ky{0.0, 0.0, 0.0}, w{3.0, 0.5, -3.0};
  const auto out = prox_F_star(ky, 1.0, w, 1.0);
  EXPECT_DOUBLE_EQ(out[0], 2.0);
  EXPECT_DOUBLE_EQ(out[1], 0.0);
  EXPECT_DOUBLE_EQ(out[2], -2.0);
}

TEST(ProxFStar, MoreauIdentityWithBoxProjection) {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 20; ++t) {
    std::vector<double> ky(9), w(9), wd(9);
    for (int i = 0; i < 9; ++i) {
      ky[i] = nd(gen);
      w[i] = 3.0 * nd(gen);
    }
    const double q = std::abs(nd(gen)), delta = 0.1 + std::abs(nd(gen));
    for (int i = 0; i < 9; ++i) wd[i] = w[i] / delta;
    const auto a = prox_F_star(ky, q, w, delta);
    const auto b = project_box(ky, q, wd);
    for (int i = 0; i < 9; ++i) EXPECT_NEAR(a[i] + delta * b[i], w[i], 1e-12);
  }
}

TEST(ProxFStar, Errors) {
  const std::vector<double> ky{0.0, 1.0}, w{1.0};
  EXPECT_THROW(prox_F_star(ky, 1.0, w, 1.0), std::invalid_argument);
  EXPECT_THROW(prox_F_star(ky, 1.0, ky, 0.0), std::invalid_argument);
}

TEST(ProjectBox, ClipsAndIsIdempotent) {
  const std::vector<double> ky{0.0, 1.0, -1.0}, z{5.0, 1.2, -3.0};
  const auto p = project_box(ky, 0.5, z);
  EXPECT_EQ(p, (std::vector<double>{0.5, 1.2, -1.5}));
  EXPECT_EQ(project_box(ky, 0.5, p), p);
}

TEST(Problem, RejectsInvalidInput) {
  const Dictionary d(ImageGrid(4, 4), DictionaryKind::DyadicCubes);
  EXPECT_THROW(MindProblem(Image(ImageGrid(4, 4)), d, reg(RegularizerKind::TV), -1.0), std::invalid_argument);
  EXPECT_THROW(MindProblem(Image(ImageGrid(4, 2)), d, reg(RegularizerKind::TV), 0.1), std::invalid_argument);
  Image bad(ImageGrid(4, 4));
  bad[3] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(MindProblem(bad, d, reg(RegularizerKind::TV), 0.1), std::invalid_argument);
}

TEST(Kkt, DataPointHasFullSlack) {
  const Dictionary d(ImageGrid(8, 8), DictionaryKind::DyadicCubes);
  const Image y = noisy(d.grid(), 3);
  const MindProblem p(y, d, reg(RegularizerKind::TV), 0.05);
  const auto k = kkt_diagnostics(p, y);
  EXPECT_EQ(k.max_residual, 0.0);
  EXPECT_DOUBLE_EQ(k.relative_gap, -1.0);
  EXPECT_TRUE(k.feasible);
}

TEST(Kkt, ConstantOffsetViolation) {
  DictionaryParams dp;
  dp.max_level = 0;
  const Dictionary d(ImageGrid(8, 8), DictionaryKind::DyadicCubes, dp);
  const Image y(d.grid(), 0.3);
  const MindProblem p(y, d, reg(RegularizerKind::TV), 0.1);
  const auto k = kkt_diagnostics(p, Image(d.grid(), 0.5));
  EXPECT_NEAR(k.max_residual, 0.2, 1e-15);
  EXPECT_NEAR(k.relative_gap, 1.0, 1e-13);
  EXPECT_FALSE(k.feasible);
}

TEST(Kkt, MatchesDenseOracle) {
  const Dictionary d = small_cubes(7, 6, 3);
  const Image y = noisy(d.grid(), 4);
  const MindProblem p(y, d, reg(RegularizerKind::H1Squared), 0.02);
  const Image v = make_phantom(d.grid(), PhantomKind::Ramp, 0);
  const auto A = oracle::cube_matrix(d.grid(), DictionaryKind::SmallCubes, 3);
  Eigen::VectorXd diff = oracle::to_eigen(v.data()) - oracle::to_eigen(y.data());
  const double ref = (A * diff).cwiseAbs().maxCoeff();
  const auto k = kkt_diagnostics(p, v);
  EXPECT_NEAR(k.max_residual, ref, 1e-13);
  EXPECT_NEAR(k.relative_gap, (ref - 0.02) / 0.02, 1e-10);
  EXPECT_NEAR(k.objective, value(p.regularizer(), v), 0.0);
}

TEST(ChambollePock, StepContract) {
  const Dictionary d(ImageGrid(16, 16), DictionaryKind::DyadicCubes);
  const auto c = CPConfig::defaults(d, RegularizerKind::H1Squared);
  EXPECT_NEAR(c.tau * c.delta * c.op_norm * c.op_norm, 1.0, 1e-12);
  EXPECT_THROW(c.with_steps(2.0 * c.delta, c.tau), std::invalid_argument);
  EXPECT_NO_THROW(c.with_steps(c.delta / 4.0, c.tau));
  auto bad = c;
  bad.theta = 1.5;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  EXPECT_THROW(CPConfig::defaults(0.0, 4), std::invalid_argument);
}

class ZeroThreshold : public ::testing::TestWithParam<RegularizerKind> {};

TEST_P(ZeroThreshold, EverySolverInterpolates) {
  const Dictionary d = small_cubes(10, 10, 3);
  const Image y = noisy(d.grid(), 5);
  const MindProblem p(y, d, reg(GetParam()), 0.0);
  auto cp = CPConfig::defaults(d, GetParam());
  cp.gap_tol = 1e-9;
  cp.rel_change_tol = 1e-9;
  cp.max_iter = 20000;
  EXPECT_LE(rel_dist(chambolle_pock(p, cp).solution, y), 1e-5);
  EXPECT_LE(rel_dist(admm(p, ADMMConfig::defaults(GetParam(), d.n())).solution, y), 1e-5);
  if (GetParam() != RegularizerKind::TV) {
    EXPECT_LE(rel_dist(semismooth_newton(p, SSNConfig{}).solution, y), 1e-5);
  }
}

INSTANTIATE_TEST_SUITE_P(Regularizers, ZeroThreshold,
                         ::testing::Values(RegularizerKind::TV, RegularizerKind::H1Squared, RegularizerKind::HuberTV),
                         [](const auto& info) { return std::string(to_string(info.param)) == "huber-tv"
                                                           ? std::string("huber")
                                                           : std::string(to_string(info.param)); });

TEST(Solvers, ConstantDataIsFixedPoint) {
  const Dictionary d(ImageGrid(16, 16), DictionaryKind::DyadicCubes);
  const Image y(d.grid(), 0.4);
  for (auto k : {RegularizerKind::TV, RegularizerKind::H1Squared, RegularizerKind::HuberTV}) {
    const MindProblem p(y, d, reg(k), 0.01);
    const auto cp = chambolle_pock(p, CPConfig::defaults(d, k));
    EXPECT_LE(rel_dist(cp.solution, y), 1e-12);
    EXPECT_TRUE(cp.report.converged);
    const auto ad = admm(p, ADMMConfig::defaults(k, d.n()));
    EXPECT_LE(rel_dist(ad.solution, y), 1e-12);
    EXPECT_LE(ad.report.iterations, 2);
    if (k != RegularizerKind::TV) {
      const auto sn = semismooth_newton(p, SSNConfig{});
      EXPECT_LE(rel_dist(sn.solution, y), 1e-12);
      EXPECT_TRUE(sn.report.converged);
    }
  }
}

TEST(SemismoothNewton, RefusesTv) {
  const Dictionary d(ImageGrid(8, 8), DictionaryKind::DyadicCubes);
  EXPECT_THROW(semismooth_newton(MindProblem(Image(d.grid(), 0.1), d, reg(RegularizerKind::TV), 0.1), SSNConfig{}),
               UnsupportedRegularizer);
}

TEST(SemismoothNewton, RejectsInvalidConfig) {
  SSNConfig c;
  c.delta_factor = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = SSNConfig{};
  c.delta_init = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(SemismoothNewton, FinalStageResidualDecreases) {
  const Dictionary d(ImageGrid(32, 32), DictionaryKind::DyadicCubes);
  Image truth;
  const Image y = noisy(d.grid(), 1, &truth);
  const double q = monte_carlo_quantile(d, {0.5, 200, 42, snr_to_sigma(truth, 20.0)});
  SSNConfig cfg;
  cfg.delta_init = 1e-4;
  cfg.delta_factor = 1e-4;
  const auto r = semismooth_newton(MindProblem(y, d, reg(RegularizerKind::H1Squared), q), cfg);
  ASSERT_TRUE(r.report.converged);
  std::vector<double> tail;
  for (int k = 0; k < r.report.iterations; ++k)
    if (r.report.stage[k] == r.report.stage.back()) tail.push_back(r.report.newton_residual[k]);
  ASSERT_GE(tail.size(), 2u);
  for (std::size_t k = 1; k < tail.size(); ++k) EXPECT_LT(tail[k], tail[k - 1]);
}

TEST(Solvers, AgreeOnH1Objective) {
  const Dictionary d(ImageGrid(32, 32), DictionaryKind::DyadicCubes);
  Image truth;
  const Image y = noisy(d.grid(), 2, &truth);
  const double q = monte_carlo_quantile(d, {0.5, 200, 42, snr_to_sigma(truth, 20.0)});
  const MindProblem p(y, d, reg(RegularizerKind::H1Squared), q);
  const auto cp = chambolle_pock(p, CPConfig::defaults(d, RegularizerKind::H1Squared));
  const auto ad = admm(p, ADMMConfig::defaults(RegularizerKind::H1Squared, d.n()));
  const auto sn = semismooth_newton(p, SSNConfig{});
  const double ry = value(p.regularizer(), y);
  std::vector<double> obj;
  for (const auto* r : {&cp, &ad, &sn}) {
    const auto k = kkt_diagnostics(p, r->solution);
    EXPECT_LE(k.relative_gap, 1e-3) << r->report.solver;
    EXPECT_LE(k.objective, ry) << r->report.solver;
    obj.push_back(k.objective);
  }
  const double lo = *std::min_element(obj.begin(), obj.end()), hi = *std::max_element(obj.begin(), obj.end());
  EXPECT_LE((hi - lo) / lo, 0.01);
}

TEST(Solvers, TvCpAndAdmmAgree) {
  const Dictionary d(ImageGrid(16, 16), DictionaryKind::DyadicCubes);
  Image truth;
  const Image y = noisy(d.grid(), 6, &truth);
  const double q = monte_carlo_quantile(d, {0.5, 200, 42, snr_to_sigma(truth, 20.0)});
  const MindProblem p(y, d, reg(RegularizerKind::TV), q);
  auto cpc = CPConfig::defaults(d, RegularizerKind::TV);
  cpc.max_iter = 20000;
  const auto cp = chambolle_pock(p, cpc);
  auto adc = ADMMConfig::defaults(RegularizerKind::TV, d.n());
  adc.max_iter = 2000;
  const auto ad = admm(p, adc);
  const double a = kkt_diagnostics(p, cp.solution).objective, b = kkt_diagnostics(p, ad.solution).objective;
  EXPECT_LE(std::abs(a - b) / std::min(a, b), 0.01);
}

TEST(Report, TraceShapesAndExport) {
  const Dictionary d(ImageGrid(16, 16), DictionaryKind::DyadicCubes);
  Image truth;
  const Image y = noisy(d.grid(), 7, &truth);
  MindProblem p(y, d, reg(RegularizerKind::H1Squared), 0.02);
  p.reference = truth;
  auto cfg = CPConfig::defaults(d, RegularizerKind::H1Squared);
  cfg.max_iter = 25;
  const auto r = chambolle_pock(p, cfg);
  const auto& rep = r.report;
  EXPECT_EQ(rep.solver, "chambolle-pock");
  EXPECT_GE(rep.iterations, 1);
  EXPECT_LE(rep.iterations, 25);
  EXPECT_EQ(rep.objective.size(), std::size_t(rep.iterations));
  EXPECT_EQ(rep.relative_gap.size(), std::size_t(rep.iterations));
  EXPECT_EQ(rep.distance.size(), std::size_t(rep.iterations));
  EXPECT_TRUE(std::is_sorted(rep.time.begin(), rep.time.end()));

  const auto j = rep.to_json();
  EXPECT_EQ(j["iterations"], rep.iterations);
  EXPECT_EQ(j["objective"].size(), std::size_t(rep.iterations));
  EXPECT_TRUE(j.contains("distance"));
  EXPECT_FALSE(j.contains("delta"));

  std::ostringstream csv;
  rep.write_csv(csv);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "iteration,objective,relative_gap,time,distance");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, rep.iterations);
}

TEST(Report, NewtonColumns) {
  const Dictionary d(ImageGrid(8, 8), DictionaryKind::DyadicCubes);
  const auto r = semismooth_newton(MindProblem(noisy(d.grid(), 8), d, reg(RegularizerKind::H1Squared), 0.01), SSNConfig{});
  EXPECT_EQ(r.report.delta.size(), std::size_t(r.report.iterations));
  EXPECT_EQ(r.report.stage.size(), std::size_t(r.report.iterations));
  std::ostringstream csv;
  r.report.write_csv(csv);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "iteration,objective,relative_gap,time,delta,stage,newton_residual");
}
