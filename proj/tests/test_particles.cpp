#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "mflk/particles.hpp"

using namespace mflk;

namespace {

std::vector<int> shuffled(int n, Rng& rng) {
  std::vector<int> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

Configuration line(std::initializer_list<double> xs) {
  Eigen::MatrixXd p(1, static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) p(0, i++) = x;
  return Configuration(BoxDomain(Eigen::VectorXd::Constant(1, -5.0), Eigen::VectorXd::Constant(1, 5.0)), p);
}

}  // namespace

TEST(Simulate, ZeroInteractionKeepsStateConstant) {
  Rng rng(1);
  DynamicsModel m;
  m.domain = BoxDomain::unit(2);
  m.phi.strength = 0.0;
  const auto x0 = uniform_configuration(m.domain, 9, rng);
  const auto tr = simulate(m, x0);
  ASSERT_EQ(tr.snapshots.size(), 101u);
  EXPECT_EQ(tr.snapshots.back().points(), x0.points());
}

TEST(Simulate, TwoBodyClosedForm) {
  // x1' = (x2 - x1)/2, x2' = (x1 - x2)/2: the gap obeys g' = -g, so an Euler
  // step multiplies it by (1 - dt) and the midpoint is fixed.
  DynamicsModel m;
  m.domain = BoxDomain(Eigen::VectorXd::Constant(1, -5.0), Eigen::VectorXd::Constant(1, 5.0));
  m.dt = 0.05;
  m.steps = 40;
  const auto tr = simulate(m, line({-1.0, 3.0}));
  const auto& last = tr.snapshots.back();
  EXPECT_NEAR(last.point(0)[0] + last.point(1)[0], 2.0, 1e-13);
  EXPECT_NEAR(last.point(1)[0] - last.point(0)[0], 4.0 * std::pow(1.0 - m.dt, m.steps), 1e-13);
  EXPECT_EQ(tr.clamp_events, 0);
}

TEST(Simulate, PermutationEquivariantExactly) {
  Rng rng(2);
  for (auto kind : {DynamicsKind::Alignment, DynamicsKind::BoundedConfidence}) {
    DynamicsModel m;
    m.kind = kind;
    m.phi.kind = InteractionProfile::Kind::CuckerSmale;
    m.domain = BoxDomain::unit(2);
    m.steps = 30;
    const auto x0 = uniform_configuration(m.domain, 13, rng);
    const auto base = simulate(m, x0).snapshots.back();
    for (int t = 0; t < 5; ++t) {
      const auto p = shuffled(13, rng);
      EXPECT_EQ(simulate(m, x0.permuted(p)).snapshots.back().points(), base.permuted(p).points());
    }
  }
}

TEST(Simulate, AlignmentConservesMean) {
  Rng rng(3);
  DynamicsModel m;
  m.phi.kind = InteractionProfile::Kind::CuckerSmale;
  m.domain = BoxDomain::unit(2);
  const auto x0 = uniform_configuration(m.domain, 20, rng);
  const auto tr = simulate(m, x0);
  EXPECT_EQ(tr.clamp_events, 0);
  for (std::size_t s = 1; s < tr.snapshots.size(); ++s) {
    const Eigen::VectorXd a = tr.snapshots[s - 1].points().rowwise().mean();
    const Eigen::VectorXd b = tr.snapshots[s].points().rowwise().mean();
    EXPECT_LE((a - b).norm(), 1e-10);
  }
}

TEST(Simulate, ClampsAndCountsWithNoise) {
  Rng rng(4), a(9), b(9);
  DynamicsModel m;
  m.domain = BoxDomain::unit(1);
  m.noise_sigma = 2.0;
  const auto x0 = uniform_configuration(m.domain, 10, rng);
  const auto t1 = simulate(m, x0, &a), t2 = simulate(m, x0, &b);
  EXPECT_GT(t1.clamp_events, 0);
  EXPECT_EQ(t1.snapshots.back().points(), t2.snapshots.back().points());
  for (const auto& s : t1.snapshots)
    for (int i = 0; i < s.size(); ++i) EXPECT_TRUE(m.domain.contains(s.point(i)));
  EXPECT_THROW(simulate(m, x0), std::invalid_argument);
}

TEST(Simulate, AbortsOnNonFiniteState) {
  DynamicsModel m;
  m.domain = BoxDomain(Eigen::VectorXd::Constant(1, -5.0), Eigen::VectorXd::Constant(1, 5.0));
  m.phi.strength = 1e308;
  m.dt = 1e10;
  EXPECT_THROW(simulate(m, line({-1.0, 3.0})), std::runtime_error);
}

TEST(Functional, ClosedFormValues) {
  const TargetFunctional spread{FunctionalKind::Spread};
  EXPECT_DOUBLE_EQ(functional_eval(spread, line({0.0, 2.0})), 1.0);
  EXPECT_DOUBLE_EQ(functional_eval(spread, line({0.7, 0.7, 0.7})), 0.0);
  const TargetFunctional spread_u{FunctionalKind::Spread, Estimator::UStatistic};
  EXPECT_DOUBLE_EQ(functional_eval(spread_u, line({0.0, 2.0})), 2.0);
  EXPECT_THROW(functional_eval(spread_u, line({0.0})), std::invalid_argument);
  EXPECT_DOUBLE_EQ(functional_eval(TargetFunctional{FunctionalKind::Mean1D}, line({0.0, 2.0, 4.0})), 2.0);

  const auto dom = BoxDomain(Eigen::VectorXd::Constant(1, -5.0), Eigen::VectorXd::Constant(1, 5.0));
  Eigen::MatrixXd a(1, 2);
  a << 0.0, 2.0;
  EXPECT_DOUBLE_EQ(functional_limit_eval(spread, DiscreteMeasure(dom, a, Eigen::Vector2d(0.5, 0.5))), 1.0);
  EXPECT_DOUBLE_EQ(functional_limit_eval(spread, DiscreteMeasure::dirac(dom, Eigen::VectorXd::Ones(1))), 0.0);
}

TEST(Functional, InteractionEnergyMatchesLoops) {
  Rng rng(5);
  const auto dom = BoxDomain::unit(2);
  TargetFunctional plug{FunctionalKind::InteractionEnergy}, ustat{FunctionalKind::InteractionEnergy, Estimator::UStatistic};
  const auto x = uniform_configuration(dom, 9, rng);
  double all = 0.0, off = 0.0;
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) {
      const double w = plug.interaction(x.point(i), x.point(j));
      all += w;
      if (i != j) off += w;
    }
  EXPECT_NEAR(functional_eval(plug, x), all / 81.0, 1e-14);
  EXPECT_NEAR(functional_eval(ustat, x), off / 72.0, 1e-14);
}

TEST(Functional, ExactlyPermutationInvariantAndPlugInIdentity) {
  Rng rng(6);
  const auto dom = BoxDomain::unit(2);
  for (auto kind : {FunctionalKind::Spread, FunctionalKind::Mean1D, FunctionalKind::InteractionEnergy}) {
    for (auto est : {Estimator::PlugIn, Estimator::UStatistic}) {
      const TargetFunctional F{kind, est};
      const auto x = uniform_configuration(dom, 17, rng);
      const double ref = functional_eval(F, x);
      for (int t = 0; t < 10; ++t) EXPECT_EQ(functional_eval(F, x.permuted(shuffled(17, rng))), ref);
      if (est == Estimator::PlugIn) EXPECT_EQ(ref, functional_limit_eval(F, empirical_measure(x)));
    }
  }
}

TEST(Functional, UStatisticGapIsOrderOneOverM) {
  const auto dom = BoxDomain::unit(1);
  const TargetFunctional F{FunctionalKind::InteractionEnergy, Estimator::UStatistic};
  auto median_gap = [&](int M) {
    std::vector<double> g;
    for (int s = 0; s < 21; ++s) {
      Rng r = derive_stream(8, {static_cast<std::uint64_t>(M), static_cast<std::uint64_t>(s)});
      const auto x = uniform_configuration(dom, M, r);
      g.push_back(std::abs(functional_eval(F, x) - functional_limit_eval(F, empirical_measure(x))));
    }
    std::nth_element(g.begin(), g.begin() + 10, g.end());
    return g[10];
  };
  for (int M : {20, 40, 80}) {
    const double ratio = median_gap(M) / median_gap(2 * M);
    EXPECT_GT(ratio, 2.0 / 1.5);
    EXPECT_LT(ratio, 2.0 * 1.5);
  }
}

TEST(MakeDataset, SharedNoiseAndPlugInTargets) {
  Rng rng(7);
  const auto dom = BoxDomain::unit(1);
  std::vector<DiscreteMeasure> mus;
  for (int i = 0; i < 6; ++i) mus.push_back(random_bump_measure(dom, 12, rng));
  const TargetFunctional F{FunctionalKind::Spread};
  const TargetRange Y{-1.0, 1.0};
  Rng a(3), b(3);
  const auto d20 = make_dataset(mus, F, 20, 0.1, Y, a);
  const auto d160 = make_dataset(mus, F, 160, 0.1, Y, b);
  EXPECT_EQ(d20.noise, d160.noise);
  EXPECT_EQ(d20.limit.targets, d160.limit.targets);

  Rng c(4);
  const auto clean = make_dataset(mus, F, 30, 0.0, Y, c);
  for (int n = 0; n < 6; ++n)
    EXPECT_EQ(clean.finite.targets[n], functional_limit_eval(F, empirical_measure(clean.finite.inputs[static_cast<std::size_t>(n)])));
  EXPECT_THROW(make_dataset(mus, F, 1, 0.0, Y, c), std::invalid_argument);
}

TEST(MakeDataset, InputsConvergeInW1) {
  Rng rng(8);
  const auto dom = BoxDomain::unit(1);
  std::vector<DiscreteMeasure> mus;
  for (int i = 0; i < 9; ++i) mus.push_back(random_bump_measure(dom, 16, rng));
  auto median_w1 = [&](int M) {
    Rng r(5);
    const auto d = make_dataset(mus, TargetFunctional{}, M, 0.0, TargetRange{}, r);
    std::vector<double> w;
    for (std::size_t n = 0; n < mus.size(); ++n)
      w.push_back(wasserstein1_1d_oracle(empirical_measure(d.finite.inputs[n]), mus[n]));
    std::nth_element(w.begin(), w.begin() + 4, w.end());
    return w[4];
  };
  EXPECT_LT(median_w1(160), median_w1(20));
}
