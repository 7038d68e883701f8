#include <gtest/gtest.h>

#include <Eigen/SVD>
#include <random>
#include <sstream>

#include "mind/dictionary.hpp"
#include "oracle.hpp"

using namespace mind;

namespace {

std::vector<double> randn(std::size_t n, std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  std::vector<double> v(n);
  for (double& x : v) x = nd(gen);
  return v;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<Dictionary> assorted() {
  std::vector<Dictionary> out;
  for (int s : {1, 2, 4, 8, 16}) out.emplace_back(ImageGrid(s, s), DictionaryKind::DyadicCubes);
  for (auto [w, h, e] : std::vector<std::array<int, 3>>{{1, 1, 1}, {5, 3, 2}, {16, 16, 5}, {7, 12, 7}, {16, 9, 9}}) {
    DictionaryParams p;
    p.max_edge = e;
    out.emplace_back(ImageGrid(w, h), DictionaryKind::SmallCubes, p);
  }
  for (auto f : {wavelet::Filter::Haar, wavelet::Filter::Sym6})
    for (auto [w, h, d] : std::vector<std::array<int, 3>>{{8, 8, 0}, {16, 4, 2}, {16, 16, 1}, {2, 2, 0}}) {
      DictionaryParams p;
      p.filter = f;
      p.depth = d;
      out.emplace_back(ImageGrid(w, h), DictionaryKind::Wavelet, p);
    }
  return out;
}

}  // namespace

TEST(Build, Cardinalities) {
  DictionaryParams p;
  p.max_edge = 30;
  EXPECT_EQ(Dictionary(ImageGrid(256, 256), DictionaryKind::SmallCubes, p).element_count(), 1751915u);
  EXPECT_EQ(Dictionary(ImageGrid(256, 256), DictionaryKind::DyadicCubes).element_count(), 87381u);
  EXPECT_EQ(Dictionary(ImageGrid(1, 1), DictionaryKind::DyadicCubes).element_count(), 1u);
  EXPECT_EQ(Dictionary(ImageGrid(32, 16), DictionaryKind::Wavelet).element_count(), 512u);
}

TEST(Build, SmallCubeCountMatchesEnumeration) {
  for (int W = 1; W <= 16; ++W)
    for (int H = 1; H <= 16; ++H)
      for (int L = 1; L <= std::min(W, H); L += 3) {
        DictionaryParams p;
        p.max_edge = L;
        const Dictionary d(ImageGrid(W, H), DictionaryKind::SmallCubes, p);
        std::size_t formula = 0;
        for (int l = 1; l <= L; ++l) formula += static_cast<std::size_t>(W - l + 1) * (H - l + 1);
        ASSERT_EQ(d.element_count(), formula);
        ASSERT_EQ(d.elements().size(), formula);
      }
}

TEST(Build, InvalidParameters) {
  EXPECT_THROW(Dictionary(ImageGrid(6, 6), DictionaryKind::DyadicCubes), std::invalid_argument);
  EXPECT_THROW(Dictionary(ImageGrid(8, 4), DictionaryKind::DyadicCubes), std::invalid_argument);
  DictionaryParams p;
  p.max_edge = 9;
  EXPECT_THROW(Dictionary(ImageGrid(8, 16), DictionaryKind::SmallCubes, p), std::invalid_argument);
  p.max_edge = 0;
  EXPECT_THROW(Dictionary(ImageGrid(8, 16), DictionaryKind::SmallCubes, p), std::invalid_argument);
  DictionaryParams w;
  w.depth = 3;
  EXPECT_THROW(Dictionary(ImageGrid(12, 8), DictionaryKind::Wavelet, w), std::invalid_argument);
  DictionaryParams lv;
  lv.max_level = 4;
  EXPECT_THROW(Dictionary(ImageGrid(8, 8), DictionaryKind::DyadicCubes, lv), std::invalid_argument);
}

TEST(Build, CoarseDyadicLevels) {
  DictionaryParams p;
  p.max_level = 0;
  const Dictionary one(ImageGrid(64, 64), DictionaryKind::DyadicCubes, p);
  EXPECT_EQ(one.element_count(), 1u);
  p.max_level = 2;
  EXPECT_EQ(Dictionary(ImageGrid(64, 64), DictionaryKind::DyadicCubes, p).element_count(), 21u);
  EXPECT_NE(one.fingerprint(), Dictionary(ImageGrid(64, 64), DictionaryKind::DyadicCubes).fingerprint());
}

TEST(Build, CanonicalOrder) {
  DictionaryParams p;
  p.max_edge = 2;
  const auto ids = Dictionary(ImageGrid(3, 2), DictionaryKind::SmallCubes, p).elements();
  ASSERT_EQ(ids.size(), 8u);
  EXPECT_EQ(ids[0], (ElementId{DictionaryKind::SmallCubes, 1, 0, 0, 0}));
  EXPECT_EQ(ids[3], (ElementId{DictionaryKind::SmallCubes, 1, 1, 0, 0}));
  EXPECT_EQ(ids[6], (ElementId{DictionaryKind::SmallCubes, 2, 0, 0, 0}));
  EXPECT_EQ(ids[7], (ElementId{DictionaryKind::SmallCubes, 2, 0, 1, 0}));
  const auto dy = Dictionary(ImageGrid(4, 4), DictionaryKind::DyadicCubes).elements();
  EXPECT_EQ(dy[0].level, 0);
  EXPECT_EQ(dy[2], (ElementId{DictionaryKind::DyadicCubes, 1, 0, 2, 0}));
  EXPECT_EQ(dy[5], (ElementId{DictionaryKind::DyadicCubes, 2, 0, 0, 0}));
}

TEST(Analyze, MatchesDenseCubeOracle) {
  std::mt19937_64 gen(11);
  const ImageGrid g8(8, 8);
  const auto y = randn(g8.size(), gen);
  {
    const Dictionary d(g8, DictionaryKind::DyadicCubes);
    const Eigen::VectorXd ref = oracle::cube_matrix(g8, DictionaryKind::DyadicCubes) * oracle::to_eigen(y);
    EXPECT_LE((oracle::to_eigen(d.analyze(y)) - ref).cwiseAbs().maxCoeff(), 1e-12);
  }
  for (int e : {1, 3, 8}) {
    DictionaryParams p;
    p.max_edge = e;
    const Dictionary d(g8, DictionaryKind::SmallCubes, p);
    const Eigen::VectorXd ref = oracle::cube_matrix(g8, DictionaryKind::SmallCubes, e) * oracle::to_eigen(y);
    EXPECT_LE((oracle::to_eigen(d.analyze(y)) - ref).cwiseAbs().maxCoeff(), 1e-12);
  }
  const ImageGrid g(11, 6);
  DictionaryParams p;
  p.max_edge = 6;
  const auto z = randn(g.size(), gen);
  const Eigen::VectorXd ref = oracle::cube_matrix(g, DictionaryKind::SmallCubes, 6) * oracle::to_eigen(z);
  EXPECT_LE((oracle::to_eigen(Dictionary(g, DictionaryKind::SmallCubes, p).analyze(z)) - ref).cwiseAbs().maxCoeff(),
            1e-12);
}

TEST(Analyze, MatchesDenseWaveletOracle) {
  std::mt19937_64 gen(12);
  for (auto f : {wavelet::Filter::Haar, wavelet::Filter::Sym6})
    for (auto [w, h, depth] : std::vector<std::array<int, 3>>{{8, 8, 3}, {16, 8, 2}, {4, 4, 1}}) {
      DictionaryParams p;
      p.filter = f;
      p.depth = depth;
      const Dictionary d(ImageGrid(w, h), DictionaryKind::Wavelet, p);
      const auto y = randn(d.n(), gen);
      const Eigen::VectorXd ref = oracle::wavelet_matrix(w, h, depth, f) * oracle::to_eigen(y);
      EXPECT_LE((oracle::to_eigen(d.analyze(y)) - ref).cwiseAbs().maxCoeff(), 1e-12)
          << wavelet::name(f) << ' ' << w << 'x' << h;
    }
}

TEST(Analyze, ConstantOnFullDomainElement) {
  const Dictionary d(ImageGrid(8, 8), DictionaryKind::DyadicCubes);
  EXPECT_NEAR(d.analyze(std::vector<double>(64, 0.7))[0], 0.7, 1e-15);
  const Dictionary w(ImageGrid(8, 8), DictionaryKind::Wavelet);
  EXPECT_NEAR(w.analyze(std::vector<double>(64, 0.7))[0], 0.7, 1e-14);
  const auto zero = d.analyze(std::vector<double>(64, 0.0));
  EXPECT_TRUE(std::all_of(zero.begin(), zero.end(), [](double c) { return c == 0.0; }));
}

TEST(Analyze, GridMismatchThrows) {
  const Dictionary d(ImageGrid(4, 4), DictionaryKind::DyadicCubes);
  EXPECT_THROW(analyze(d, Image(ImageGrid(2, 8))), std::invalid_argument);
  EXPECT_THROW(d.adjoint(std::vector<double>(3)), std::invalid_argument);
}

TEST(Analyze, Linear) {
  std::mt19937_64 gen(13);
  for (const auto& d : assorted()) {
    const auto a = randn(d.n(), gen), b = randn(d.n(), gen);
    std::vector<double> mix(d.n());
    for (std::size_t i = 0; i < d.n(); ++i) mix[i] = 1.5 * a[i] - 0.25 * b[i];
    const auto ka = d.analyze(a), kb = d.analyze(b), km = d.analyze(mix);
    for (std::size_t k = 0; k < km.size(); ++k) ASSERT_NEAR(km[k], 1.5 * ka[k] - 0.25 * kb[k], 1e-12);
  }
}

TEST(Adjoint, Examples) {
  DictionaryParams p;
  p.max_level = 0;
  const Dictionary d(ImageGrid(2, 2), DictionaryKind::DyadicCubes, p);
  const auto img = d.adjoint(std::vector<double>{1.0});
  for (double v : img) EXPECT_DOUBLE_EQ(v, 0.25);
  const Dictionary full(ImageGrid(4, 4), DictionaryKind::DyadicCubes);
  const auto z = full.adjoint(std::vector<double>(full.element_count(), 0.0));
  EXPECT_TRUE(std::all_of(z.begin(), z.end(), [](double v) { return v == 0.0; }));
}

TEST(Adjoint, IdentityOnRandomPairs) {
  std::mt19937_64 gen(14);
  for (const auto& d : assorted())
    for (int t = 0; t < 5; ++t) {
      const auto v = randn(d.n(), gen), w = randn(d.element_count(), gen);
      const double lhs = dot(d.analyze(v), w), rhs = dot(v, d.adjoint(w));
      ASSERT_LE(std::abs(lhs - rhs), 1e-12 * (1.0 + std::abs(lhs))) << d.fingerprint();
    }
}

TEST(Adjoint, MatchesTransposeOfProbedMatrix) {
  std::mt19937_64 gen(15);
  for (const auto& d : assorted()) {
    if (d.n() > 256) continue;
    const Eigen::MatrixXd M = oracle::probe(d);
    const auto w = randn(d.element_count(), gen);
    const Eigen::VectorXd ref = M.transpose() * oracle::to_eigen(w);
    ASSERT_LE((oracle::to_eigen(d.adjoint(w)) - ref).cwiseAbs().maxCoeff(), 1e-12) << d.fingerprint();
  }
}

TEST(Normalization, EveryElementHasSquaredNormN) {
  for (const auto& d : assorted()) {
    if (d.n() > 256) continue;
    const Eigen::MatrixXd M = oracle::probe(d) * static_cast<double>(d.n());  // rows phi_l(x_i)
    for (Eigen::Index k = 0; k < M.rows(); ++k)
      ASSERT_NEAR(M.row(k).squaredNorm(), static_cast<double>(d.n()), 1e-9 * d.n()) << d.fingerprint() << " row " << k;
  }
}

TEST(Normalization, GramDiagonalMatchesDense) {
  std::mt19937_64 gen(16);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& d : assorted()) {
    if (d.n() > 256 || d.kind() == DictionaryKind::Wavelet) continue;
    std::vector<double> m(d.element_count());
    for (double& x : m) x = u(gen) < 0.5 ? 1.0 : 0.0;
    const Eigen::MatrixXd M = oracle::probe(d);
    const auto diag = d.weighted_gram_diagonal(m);
    for (Eigen::Index i = 0; i < M.cols(); ++i) {
      double s = 0.0;
      for (Eigen::Index k = 0; k < M.rows(); ++k) s += m[k] * M(k, i) * M(k, i);
      ASSERT_NEAR(diag[i], s, 1e-12);
    }
  }
}

TEST(OperatorNorm, SingleFullDomainElement) {
  DictionaryParams p;
  p.max_level = 0;
  const auto r = operator_norm(Dictionary(ImageGrid(2, 2), DictionaryKind::DyadicCubes, p), 1e-12, 100);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, 0.5, 1e-12);
}

TEST(OperatorNorm, OrthonormalWavelets) {
  for (auto f : {wavelet::Filter::Haar, wavelet::Filter::Sym6}) {
    DictionaryParams p;
    p.filter = f;
    const Dictionary d(ImageGrid(16, 16), DictionaryKind::Wavelet, p);
    EXPECT_NEAR(operator_norm(d, 1e-12, 100).value, 1.0 / 16.0, 1e-12);
    // K* K = I / n; rescaling by n = 256 amplifies tap rounding to ~1e-12.
    const Eigen::MatrixXd M = oracle::probe(d);
    EXPECT_LE(((M.transpose() * M) * 256.0 - Eigen::MatrixXd::Identity(256, 256)).cwiseAbs().maxCoeff(), 1e-11);
  }
}

TEST(OperatorNorm, DyadicAgainstDenseSvd) {
  const ImageGrid g(8, 8);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(oracle::cube_matrix(g, DictionaryKind::DyadicCubes));
  const double ref = svd.singularValues()(0);
  const auto r = operator_norm(Dictionary(g, DictionaryKind::DyadicCubes), 1e-12, 5000);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, ref, 1e-6 * ref);
}

TEST(OperatorNorm, SmallCubesAgainstDenseSvd) {
  const ImageGrid g(9, 7);
  DictionaryParams p;
  p.max_edge = 4;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(oracle::cube_matrix(g, DictionaryKind::SmallCubes, 4));
  const double ref = svd.singularValues()(0);
  const double est = operator_norm(Dictionary(g, DictionaryKind::SmallCubes, p), 1e-12, 5000).value;
  EXPECT_NEAR(est, ref, 1e-6 * ref);
}

TEST(OperatorNorm, ReportsNonConvergence) {
  const auto r = operator_norm(Dictionary(ImageGrid(16, 16), DictionaryKind::DyadicCubes), 1e-15, 2);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 2);
  EXPECT_THROW(operator_norm(Dictionary(ImageGrid(2, 2), DictionaryKind::DyadicCubes), 0.0), std::invalid_argument);
}

TEST(CoefficientDump, RoundTripAndLayout) {
  const std::vector<double> c = {1.5, -0.0, 3e-300, 42.0};
  std::stringstream ss;
  write_coefficients(ss, c);
  const std::string bytes = ss.str();
  ASSERT_EQ(bytes.size(), 16u + 8u * c.size());
  EXPECT_EQ(bytes.substr(0, 8), "MINDCOEF");
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 4u);  // little-endian count
  EXPECT_EQ(read_coefficients(ss), c);
  std::stringstream bad("NOTACOEF");
  EXPECT_THROW(read_coefficients(bad), std::runtime_error);
}

TEST(Wavelet, FilterProperties) {
  for (auto f : {wavelet::Filter::Haar, wavelet::Filter::Sym6}) {
    const auto h = wavelet::lowpass(f);
    double s = 0, s2 = 0;
    for (double x : h) {
      s += x;
      s2 += x * x;
    }
    EXPECT_NEAR(s, std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(s2, 1.0, 1e-12);
  }
  // Six vanishing moments of the symlet high-pass filter.
  const auto g = wavelet::highpass(wavelet::lowpass(wavelet::Filter::Sym6));
  for (int p = 0; p < 6; ++p) {
    double m = 0;
    for (std::size_t k = 0; k < g.size(); ++k) m += std::pow(static_cast<double>(k), p) * g[k];
    EXPECT_NEAR(m, 0.0, 1e-7 * std::pow(11.0, p)) << "moment " << p;
  }
}
