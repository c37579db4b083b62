#include <gtest/gtest.h>

#include <cmath>

#include "mflk/learning.hpp"

using namespace mflk;

namespace {

const TargetRange kY{-1.0, 1.0};

// Minimizer of a convex scalar function by ternary search.
template <class F>
double argmin_1d(F f, double lo, double hi) {
  for (int i = 0; i < 300; ++i) {
    const double a = lo + (hi - lo) / 3.0, b = hi - (hi - lo) / 3.0;
    (f(a) < f(b) ? hi : lo) = (f(a) < f(b) ? b : a);
  }
  return 0.5 * (lo + hi);
}

struct Problem {
  Eigen::MatrixXd gram;
  Eigen::VectorXd y;
};

Problem random_problem(int n, Rng& rng, bool binary = false) {
  const auto dom = BoxDomain::unit(1);
  std::vector<DiscreteMeasure> mus;
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    mus.push_back(random_bump_measure(dom, 8, rng));
    const double m = mus.back().mean()[0];
    y[i] = binary ? (m > 0.5 ? 1.0 : -1.0) : std::clamp(2.0 * m - 1.0 + 0.1 * standard_normal(rng), -1.0, 1.0);
  }
  const auto k = MeasureKernel::gaussian(BaseKernel(BaseFamily::Gaussian, 0.2), 0.5);
  return {gram_matrix(k, mus), y};
}

double worst_perturbation_gain(const Problem& p, const Loss& loss, double lambda, Regularizer reg,
                               const Eigen::VectorXd& alpha, Rng& rng) {
  const double base = erm_objective(p.gram, p.y, loss, lambda, reg, alpha);
  double worst = -1e300;
  for (int t = 0; t < 100; ++t) {
    Eigen::VectorXd dir(alpha.size());
    for (Eigen::Index i = 0; i < dir.size(); ++i) dir[i] = standard_normal(rng);
    const double scale = std::pow(10.0, -1.0 - 5.0 * uniform01(rng)) * (1.0 + alpha.norm()) / dir.norm();
    worst = std::max(worst, base - erm_objective(p.gram, p.y, loss, lambda, reg, alpha + scale * dir));
  }
  return worst;
}

}  // namespace

TEST(Loss, Values) {
  EXPECT_DOUBLE_EQ(Loss(LossKind::Squared, kY).base(0.5, -0.5), 1.0);
  EXPECT_DOUBLE_EQ(Loss(LossKind::Absolute, kY).base(0.5, -0.5), 1.0);
  EXPECT_DOUBLE_EQ(Loss(LossKind::Hinge, kY).base(1.0, 0.25), 0.75);
  EXPECT_DOUBLE_EQ(Loss(LossKind::Hinge, kY).base(-1.0, -2.0), 0.0);
  EXPECT_DOUBLE_EQ(Loss(LossKind::EpsInsensitive, kY, 0.25).base(0.5, -0.5), 0.75);
  EXPECT_THROW(Loss(LossKind::Squared, kY).base(1.5, 0.0), std::invalid_argument);
  EXPECT_THROW(Loss(LossKind::EpsInsensitive, kY, -0.1), std::invalid_argument);
}

TEST(Loss, WeightMultipliesBaseLoss) {
  const auto dom = BoxDomain::unit(1);
  const auto l = Loss(LossKind::Absolute, kY).with_weight([](const DiscreteMeasure& mu) { return 1.0 + mu.mean()[0]; }, 2.0);
  const auto mu = DiscreteMeasure::dirac(dom, Eigen::VectorXd::Constant(1, 0.5));
  EXPECT_DOUBLE_EQ(loss_eval(l, mu, 0.0, 1.0), 1.5);
  EXPECT_DOUBLE_EQ(l.lipschitz_t(1.0), 2.0);
}

TEST(Loss, ProxMatchesNumericalMinimizer) {
  Rng rng(1);
  for (auto kind : {LossKind::Squared, LossKind::Absolute, LossKind::Hinge, LossKind::EpsInsensitive}) {
    const Loss l(kind, kY, 0.2);
    for (int t = 0; t < 200; ++t) {
      const double y = kind == LossKind::Hinge ? (t % 2 ? 1.0 : -1.0) : 2.0 * uniform01(rng) - 1.0;
      const double v = 6.0 * uniform01(rng) - 3.0, c = 2.0 * uniform01(rng);
      auto obj = [&](double s) { return c * l.base(y, s) + 0.5 * (s - v) * (s - v); };
      const double p = l.prox(y, v, c), q = argmin_1d(obj, -10.0, 10.0);
      EXPECT_LE(obj(p), obj(q) + 1e-15) << to_string(kind);
      EXPECT_NEAR(p, q, 1e-6) << to_string(kind);
    }
  }
}

TEST(Loss, LipschitzAndBoundHoldOnWorkingRange) {
  Rng rng(2);
  for (auto kind : {LossKind::Squared, LossKind::Absolute, LossKind::Hinge, LossKind::EpsInsensitive}) {
    const Loss l(kind, kY, 0.1);
    const double tmax = 3.0;
    for (int t = 0; t < 500; ++t) {
      const double y = 2.0 * uniform01(rng) - 1.0;
      const double a = tmax * (2.0 * uniform01(rng) - 1.0), b = tmax * (2.0 * uniform01(rng) - 1.0);
      EXPECT_LE(std::abs(l.base(y, a) - l.base(y, b)), l.lipschitz_t(tmax) * std::abs(a - b) + 1e-12);
      EXPECT_LE(l.base(y, a), l.bound(tmax) + 1e-12);
    }
  }
}

TEST(Dataset, Validation) {
  const auto dom = BoxDomain::unit(1);
  std::vector<DiscreteMeasure> mus{DiscreteMeasure::dirac(dom, Eigen::VectorXd::Zero(1))};
  EXPECT_THROW(MeasureDataset(mus, Eigen::VectorXd::Constant(1, 2.0), kY), std::invalid_argument);
  EXPECT_THROW(MeasureDataset(mus, Eigen::VectorXd::Zero(2), kY), std::invalid_argument);
  mus.push_back(DiscreteMeasure::dirac(BoxDomain::unit(2), Eigen::VectorXd::Zero(2)));
  EXPECT_THROW(MeasureDataset(mus, Eigen::VectorXd::Zero(2), kY), std::invalid_argument);
}

TEST(SolveKrr, StationarityAndRejection) {
  Rng rng(3);
  for (int t = 0; t < 10; ++t) {
    const auto p = random_problem(12 + t, rng);
    const double lambda = std::pow(10.0, -1.0 - t % 5);
    const Eigen::VectorXd a = solve_krr(p.gram, p.y, lambda);
    const double n = static_cast<double>(p.y.size());
    EXPECT_LE(((p.gram + lambda * n * Eigen::MatrixXd::Identity(p.y.size(), p.y.size())) * a - p.y).norm(),
              1e-8 * p.y.norm());
    // Gradient of the regularized risk in alpha: (2/N) G (G a - y) + 2 lambda G a.
    const Eigen::VectorXd grad = (2.0 / n) * p.gram * (p.gram * a - p.y) + 2.0 * lambda * p.gram * a;
    EXPECT_LE(grad.norm(), 1e-8 * (1.0 + p.y.norm()));
  }
  EXPECT_THROW(solve_krr(Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Ones(2), 0.0), std::invalid_argument);
  EXPECT_THROW(solve_krr(Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Ones(3), 1.0), std::invalid_argument);
}

TEST(SolveRegularizedErm, SquaredLossMatchesKrr) {
  Rng rng(4);
  const Loss sq(LossKind::Squared, kY);
  for (int t = 0; t < 5; ++t) {
    const auto p = random_problem(15, rng);
    const double lambda = std::pow(10.0, -1.0 - t);
    const double krr = erm_objective(p.gram, p.y, sq, lambda, Regularizer::SquaredNorm, solve_krr(p.gram, p.y, lambda));
    const auto rep = solve_regularized_erm(p.gram, p.y, sq, lambda, Regularizer::SquaredNorm);
    EXPECT_LE(std::abs(rep.objective - krr), 1e-6 * krr);
  }
}

TEST(SolveRegularizedErm, NoPerturbationImproves) {
  Rng rng(5);
  for (auto kind : {LossKind::Squared, LossKind::Absolute, LossKind::Hinge, LossKind::EpsInsensitive}) {
    for (auto reg : {Regularizer::SquaredNorm, Regularizer::PlainNorm}) {
      const Loss l(kind, kY, 0.05);
      const auto p = random_problem(14, rng, kind == LossKind::Hinge);
      const auto rep = solve_regularized_erm(p.gram, p.y, l, 0.01, reg);
      EXPECT_LE(worst_perturbation_gain(p, l, 0.01, reg, rep.alpha, rng), 1e-9)
          << to_string(kind) << " " << to_string(reg) << " it=" << rep.iterations;
    }
  }
}

TEST(SolveRegularizedErm, HingeSeparatesWithSmallLambda) {
  Rng rng(6);
  const auto p = random_problem(16, rng, true);
  const Loss h(LossKind::Hinge, kY);
  const auto rep = solve_regularized_erm(p.gram, p.y, h, 1e-6, Regularizer::SquaredNorm);
  const Eigen::VectorXd margin = p.y.cwiseProduct(p.gram * rep.alpha);
  EXPECT_GE(margin.minCoeff(), 1.0 - 1e-3);
}

TEST(SolveRegularizedErm, HeavyRegularizationGivesZero) {
  Rng rng(7);
  const auto p = random_problem(10, rng);
  const auto rep = solve_regularized_erm(p.gram, p.y, Loss(LossKind::Absolute, kY), 1e3, Regularizer::PlainNorm);
  EXPECT_LE(std::sqrt(rep.alpha.dot(p.gram * rep.alpha)), 1e-9);
}

TEST(SolveRegularizedErm, RejectsIndefiniteGramUnlessClipped) {
  Eigen::Matrix2d g;
  g << 1.0, 2.0, 2.0, 1.0;
  const Loss l(LossKind::Absolute, kY);
  EXPECT_THROW(solve_regularized_erm(g, Eigen::Vector2d(0.5, -0.5), l, 0.1, Regularizer::SquaredNorm),
               std::invalid_argument);
  SolverOptions o;
  o.clip_indefinite = true;
  EXPECT_NO_THROW(solve_regularized_erm(g, Eigen::Vector2d(0.5, -0.5), l, 0.1, Regularizer::SquaredNorm, o));
}

TEST(SolveRegularizedErm, DataWeightsScaleTheLoss) {
  Rng rng(8);
  const auto p = random_problem(8, rng);
  const Loss l(LossKind::Absolute, kY);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(8);
  const auto a = solve_regularized_erm(p.gram, p.y, l, 0.08, Regularizer::SquaredNorm, {}, ones);
  const auto b = solve_regularized_erm(p.gram, p.y, l, 0.01, Regularizer::SquaredNorm);
  // sum-weighted objective at lambda is N times the mean-weighted one at lambda / N.
  EXPECT_NEAR(a.objective, 8.0 * b.objective, 1e-7);
}

TEST(Fit, ReportedObjectiveIsTheRegularizedRisk) {
  Rng rng(9);
  const auto dom = BoxDomain::unit(1);
  std::vector<DiscreteMeasure> mus;
  Eigen::VectorXd y(10);
  for (int i = 0; i < 10; ++i) {
    mus.push_back(random_bump_measure(dom, 6, rng));
    y[i] = mus.back().mean()[0];
  }
  const auto k = MeasureKernel::gaussian(BaseKernel(BaseFamily::Gaussian, 0.2), 0.5);
  const LearningProblem<MeasureKernel> sq{MeasureDataset(mus, y, kY), Loss(LossKind::Squared, kY), 0.01};
  const auto f1 = fit(k, sq);
  EXPECT_TRUE(f1.report.converged);
  EXPECT_NEAR(regularized_risk(f1.f, sq), f1.report.objective, 1e-12);
  const LearningProblem<MeasureKernel> ab{MeasureDataset(mus, y, kY), Loss(LossKind::Absolute, kY), 0.01};
  const auto f2 = fit(k, ab);
  EXPECT_NEAR(regularized_risk(f2.f, ab), f2.report.objective, 1e-12);
  EXPECT_LE(regularized_risk(f2.f, ab), regularized_risk(f1.f, ab) + 1e-12);
}

TEST(DistributionSampler, LevelsShareMeasureAndNoise) {
  const auto dom = BoxDomain::unit(1);
  DistributionSampler::Spec spec;
  spec.draw_measure = [dom](Rng& r) { return random_bump_measure(dom, 8, r); };
  spec.limit_target = [](const DiscreteMeasure& mu) { return mu.mean()[0]; };
  spec.finite_target = [](const Configuration& x) { return x.points().row(0).mean(); };
  spec.noise_sigma = 0.05;
  const DistributionSampler lim(spec, 0), fin(spec, 5000);
  Rng a(10), b(10);
  for (int t = 0; t < 20; ++t) {
    const auto [mu, y] = lim.draw_limit(a);
    const auto [x, yM] = fin.draw_finite(b);
    EXPECT_NEAR(y, yM, 0.03);
    b = a;
  }
  EXPECT_THROW(lim.draw_finite(a), std::logic_error);
  EXPECT_THROW(DistributionSampler(spec, -1), std::invalid_argument);
}

TEST(MonteCarlo, MeanAndStandardError) {
  const auto e = mc_mean({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(e.estimate, 2.5);
  EXPECT_NEAR(e.std_error, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
  EXPECT_THROW(mc_mean({1.0}), std::invalid_argument);
}

TEST(ApproximationError, NonnegativeMonotoneAndSmallAtZero) {
  Rng rng(11);
  const auto p = random_problem(20, rng);
  for (auto kind : {LossKind::Squared, LossKind::Absolute}) {
    const Loss l(kind, kY);
    const double ref = minimal_risk_reference(p.gram, p.y, l);
    double prev = -1.0;
    for (double lambda : {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1}) {
      const double a2 = approx_error_A2(p.gram, p.y, l, lambda, ref);
      EXPECT_GE(a2, 0.0);
      EXPECT_GE(a2, prev - 1e-8) << to_string(kind) << " lambda=" << lambda;
      if (lambda == 1e-6) EXPECT_LE(a2, 1e-3);
      prev = a2;
    }
  }
}
