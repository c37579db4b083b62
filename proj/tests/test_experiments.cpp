#include <gtest/gtest.h>

#include <sstream>

#include "mflk/experiments.hpp"

using namespace mflk;

namespace {

ExperimentConfig small() {
  ExperimentConfig c;
  c.m_schedule = {4, 8, 16};
  c.m0 = 8;
  c.replicates = 2;
  c.gap_samples = 5;
  c.n_test = 10;
  c.n_mc = 50;
  c.n_proxy = 8;
  c.n_minimal = 8;
  c.n_train = 4;
  c.n_reference = 2;
  c.centers = 3;
  c.atoms = 6;
  c.n_grid = {4, 8};
  return c;
}

std::string csv(const ConvergenceReport& r) {
  std::ostringstream os;
  write_csv(os, {r});
  return os.str();
}

}  // namespace

TEST(Experiments, RegistryNamesTheSubcommands) {
  std::vector<std::string> names;
  for (const auto& e : experiment_registry()) names.push_back(e.name);
  EXPECT_EQ(names, (std::vector<std::string>{"kernel-mfl", "rkhs-mfl", "gamma", "representer", "empirical-svm", "risk",
                                             "inf-sample", "minimal-risk", "approx"}));
}

TEST(Experiments, PlugInKernelHasNoMeanFieldGap) {
  auto c = small();
  c.estimator = Estimator::PlugIn;
  const auto rep = exp_kernel_mfl(c);
  for (const auto& [M, v] : rep.series("mfl_gap")) EXPECT_LE(v, 1e-12) << M;
  EXPECT_TRUE(rep.passed());
}

TEST(Experiments, DiracPlugInRepresenterIsExact) {
  auto c = small();
  c.atoms = 1;
  c.n_train = 1;
  c.estimator = Estimator::PlugIn;
  c.functional_estimator = Estimator::PlugIn;
  const auto rep = exp_representer_mfl(c);
  for (int M : c.m_schedule) {
    EXPECT_EQ(rep.row("objective_gap", M).value, 0.0) << M;
    EXPECT_EQ(rep.row("coeff_distance", M).value, 0.0) << M;
  }
}

TEST(Experiments, DiracPlugInSvmIsExact) {
  auto c = small();
  c.atoms = 1;
  c.noise = 0.0;
  c.estimator = Estimator::PlugIn;
  c.functional_estimator = Estimator::PlugIn;
  const auto rep = exp_empirical_svm(c);
  for (int M : c.m_schedule) EXPECT_LE(rep.row("risk_gap_squared", M).value, 1e-12) << M;
}

TEST(Experiments, HeavyRegularizationShrinksTheRepresenterGap) {
  auto c = small();
  c.lambda = 1e3;
  const auto rep = exp_representer_mfl(c);
  for (int M : c.m_schedule) EXPECT_LE(rep.row("coeff_distance", M).value, 1e-3);
}

TEST(Experiments, RowsCoverTheWholeSchedule) {
  const auto c = small();
  for (const auto& e : experiment_registry()) {
    const auto rep = e.run(c);
    EXPECT_FALSE(rep.rows().empty()) << e.name;
    EXPECT_FALSE(rep.verdicts().empty()) << e.name;
    if (e.name == "approx") continue;
    for (int M : c.m_schedule) {
      bool found = false;
      for (const auto& r : rep.rows()) found = found || r.M == M;
      EXPECT_TRUE(found) << e.name << " M=" << M;
    }
  }
}

TEST(Experiments, ThreadCountDoesNotChangeReports) {
  auto one = small();
  auto three = small();
  three.threads = 3;
  for (const auto& e : experiment_registry()) EXPECT_EQ(csv(e.run(one)), csv(e.run(three))) << e.name;
}

TEST(Experiments, SeedChangesTheReport) {
  auto a = small();
  auto b = small();
  b.seed = 8;
  EXPECT_NE(csv(exp_kernel_mfl(a)), csv(exp_kernel_mfl(b)));
}

TEST(ParallelFor, VisitsEveryIndexOnceAndRethrows) {
  std::vector<int> hits(50, 0);
  parallel_for(50, 4, [&](int i) { ++hits[static_cast<std::size_t>(i)]; });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, 3, [](int i) { if (i == 7) throw std::runtime_error("x"); }), std::runtime_error);
}
