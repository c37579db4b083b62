#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "mflk/measures.hpp"

using namespace mflk;

namespace {

DiscreteMeasure uniform_on(const BoxDomain& dom, const Eigen::MatrixXd& pts) {
  const auto n = pts.cols();
  return DiscreteMeasure(dom, pts, Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)));
}

// Brute force over permutations: W1 between two uniform n-point measures is an
// assignment problem (Birkhoff).
double assignment_oracle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  std::vector<int> p(static_cast<std::size_t>(a.cols()));
  std::iota(p.begin(), p.end(), 0);
  double best = 1e300;
  do {
    double c = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) c += (a.col(static_cast<int>(i)) - b.col(p[i])).norm();
    best = std::min(best, c);
  } while (std::next_permutation(p.begin(), p.end()));
  return best / static_cast<double>(a.cols());
}

}  // namespace

TEST(BoxDomain, RejectsInvertedBounds) {
  EXPECT_THROW(BoxDomain(Eigen::VectorXd::Ones(1), Eigen::VectorXd::Zero(1)), std::invalid_argument);
}

TEST(BoxDomain, UnitCube) {
  const auto dom = BoxDomain::unit(2);
  EXPECT_DOUBLE_EQ(dom.diameter(), std::sqrt(2.0));
  EXPECT_TRUE(dom.contains(Eigen::Vector2d(0.0, 1.0)));
  EXPECT_FALSE(dom.contains(Eigen::Vector2d(0.0, 1.1)));
  EXPECT_TRUE(dom.contains(dom.clamp(Eigen::Vector2d(-3.0, 4.0))));
}

TEST(Configuration, RejectsPointsOutsideBox) {
  Eigen::MatrixXd pts(1, 2);
  pts << 0.5, 1.5;
  EXPECT_THROW(Configuration(BoxDomain::unit(1), pts), std::invalid_argument);
}

TEST(DiscreteMeasure, RejectsBadWeights) {
  const auto dom = BoxDomain::unit(1);
  Eigen::MatrixXd a(1, 2);
  a << 0.1, 0.2;
  EXPECT_THROW(DiscreteMeasure(dom, a, Eigen::Vector2d(0.5, 0.6)), std::invalid_argument);
  EXPECT_THROW(DiscreteMeasure(dom, a, Eigen::Vector2d(1.5, -0.5)), std::invalid_argument);
}

TEST(EmpiricalMeasure, UniformWeights) {
  Rng rng(1);
  const auto x = uniform_configuration(BoxDomain::unit(2), 7, rng);
  const auto mu = empirical_measure(x);
  EXPECT_EQ(mu.size(), 7);
  for (int i = 0; i < 7; ++i) EXPECT_DOUBLE_EQ(mu.weights()[i], 1.0 / 7.0);
}

TEST(Canonicalize, MergesDuplicatesAndDropsZeros) {
  const auto dom = BoxDomain::unit(1);
  Eigen::MatrixXd a(1, 4);
  a << 0.7, 0.2, 0.7, 0.9;
  const auto mu = canonicalize(DiscreteMeasure(dom, a, Eigen::Vector4d(0.25, 0.25, 0.5, 0.0)));
  ASSERT_EQ(mu.size(), 2);
  EXPECT_DOUBLE_EQ(mu.atom(0)[0], 0.2);
  EXPECT_DOUBLE_EQ(mu.atom(1)[0], 0.7);
  EXPECT_DOUBLE_EQ(mu.weights()[1], 0.75);
}

TEST(Wasserstein1, DiracToDirac) {
  const auto dom = BoxDomain::unit(2);
  const auto d = wasserstein1(DiscreteMeasure::dirac(dom, Eigen::Vector2d(0.0, 0.0)),
                              DiscreteMeasure::dirac(dom, Eigen::Vector2d(0.3, 0.4)));
  EXPECT_NEAR(d.distance, 0.5, 1e-15);
}

TEST(Wasserstein1, TwoPointsToMidpoint) {
  const auto dom = BoxDomain::unit(1);
  Eigen::MatrixXd a(1, 2);
  a << 0.0, 1.0;
  const auto d = wasserstein1(uniform_on(dom, a), DiscreteMeasure::dirac(dom, Eigen::VectorXd::Constant(1, 0.5)));
  EXPECT_NEAR(d.distance, 0.5, 1e-15);
}

TEST(Wasserstein1, MatchesQuantileOracleIn1D) {
  Rng rng(11);
  const auto dom = BoxDomain::unit(1);
  for (int t = 0; t < 200; ++t) {
    const int n = 1 + static_cast<int>(rng() % 20), m = 1 + static_cast<int>(rng() % 20);
    const auto mu = random_measure(dom, n, rng), nu = random_measure(dom, m, rng);
    EXPECT_NEAR(wasserstein1(mu, nu).distance, wasserstein1_1d_oracle(mu, nu), 1e-9);
  }
}

TEST(Wasserstein1, MatchesAssignmentOracleIn2D) {
  Rng rng(12);
  const auto dom = BoxDomain::unit(2);
  for (int t = 0; t < 30; ++t) {
    const int n = 2 + static_cast<int>(rng() % 5);
    const auto x = uniform_configuration(dom, n, rng), y = uniform_configuration(dom, n, rng);
    EXPECT_NEAR(wasserstein1(empirical_measure(x), empirical_measure(y)).distance,
                assignment_oracle(x.points(), y.points()), 1e-12);
  }
}

TEST(Wasserstein1, PlanHasCorrectMarginalsAndCost) {
  Rng rng(13);
  const auto dom = BoxDomain::unit(2);
  for (int t = 0; t < 20; ++t) {
    const auto mu = random_measure(dom, 9, rng), nu = random_measure(dom, 5, rng);
    const auto r = wasserstein1(mu, nu);
    EXPECT_TRUE((r.plan.mass.array() >= 0.0).all());
    EXPECT_LE((r.plan.mass.rowwise().sum() - mu.weights()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((r.plan.mass.colwise().sum().transpose() - nu.weights()).cwiseAbs().maxCoeff(), 1e-12);
    double cost = 0.0;
    for (int i = 0; i < mu.size(); ++i)
      for (int j = 0; j < nu.size(); ++j) cost += r.plan.mass(i, j) * (mu.atom(i) - nu.atom(j)).norm();
    EXPECT_NEAR(cost, r.distance, 1e-12);
  }
}

TEST(Wasserstein1, MetricProperties) {
  Rng rng(14);
  const auto dom = BoxDomain::unit(2);
  for (int t = 0; t < 20; ++t) {
    const auto a = random_measure(dom, 6, rng), b = random_measure(dom, 7, rng), c = random_measure(dom, 4, rng);
    const double ab = wasserstein1(a, b).distance;
    EXPECT_NEAR(ab, wasserstein1(b, a).distance, 1e-12);
    EXPECT_NEAR(wasserstein1(a, a).distance, 0.0, 1e-12);
    EXPECT_LE(ab, wasserstein1(a, c).distance + wasserstein1(c, b).distance + 1e-12);
  }
}

TEST(Wasserstein1, InvariantUnderAtomRelabelling) {
  Rng rng(15);
  const auto dom = BoxDomain::unit(2);
  const auto x = uniform_configuration(dom, 12, rng);
  const auto nu = random_measure(dom, 8, rng);
  std::vector<int> perm(12);
  std::iota(perm.begin(), perm.end(), 0);
  const double ref = wasserstein1(empirical_measure(x), nu).distance;
  for (int t = 0; t < 5; ++t) {
    std::shuffle(perm.begin(), perm.end(), rng);
    EXPECT_EQ(wasserstein1(empirical_measure(x.permuted(perm)), nu).distance, ref);
  }
}

TEST(Dkr2, SumsComponentDistances) {
  Rng rng(16);
  const auto dom = BoxDomain::unit(1);
  const auto a = random_measure(dom, 3, rng), b = random_measure(dom, 4, rng);
  const auto c = random_measure(dom, 5, rng), d = random_measure(dom, 2, rng);
  EXPECT_NEAR(dkr2({a, b}, {c, d}), wasserstein1_1d_oracle(a, c) + wasserstein1_1d_oracle(b, d), 1e-12);
  EXPECT_THROW(dkr2({a, b}, {random_measure(BoxDomain::unit(2), 2, rng), d}), std::invalid_argument);
}

TEST(SampleConfiguration, DrawsFromSupportWithCorrectFrequencies) {
  const auto dom = BoxDomain::unit(1);
  Eigen::MatrixXd a(1, 2);
  a << 0.25, 0.75;
  const DiscreteMeasure mu(dom, a, Eigen::Vector2d(0.2, 0.8));
  Rng rng(17);
  const auto x = sample_configuration(mu, 20000, rng);
  int low = 0;
  for (int i = 0; i < x.size(); ++i) {
    ASSERT_TRUE(x.point(i)[0] == 0.25 || x.point(i)[0] == 0.75);
    low += x.point(i)[0] == 0.25;
  }
  EXPECT_NEAR(low / 20000.0, 0.2, 0.01);
  EXPECT_THROW(sample_configuration(mu, 0, rng), std::invalid_argument);
}

TEST(SampleConfiguration, EmpiricalMeasureConvergesInW1) {
  const auto dom = BoxDomain::unit(1);
  Rng rng(18);
  const auto mu = random_bump_measure(dom, 32, rng);
  auto median_gap = [&](int M) {
    std::vector<double> g;
    for (int s = 0; s < 15; ++s) {
      Rng r = derive_stream(5, {static_cast<std::uint64_t>(M), static_cast<std::uint64_t>(s)});
      g.push_back(wasserstein1_1d_oracle(empirical_measure(sample_configuration(mu, M, r)), mu));
    }
    std::nth_element(g.begin(), g.begin() + 7, g.end());
    return g[7];
  };
  EXPECT_LT(median_gap(160), median_gap(20));
}

TEST(RandomStreams, DerivedStreamsAreReproducibleAndDistinct) {
  Rng a = derive_stream(7, {1, 2}), b = derive_stream(7, {1, 2}), c = derive_stream(7, {2, 1});
  const auto va = a();
  EXPECT_EQ(va, b());
  EXPECT_NE(va, c());
}
