#include <gtest/gtest.h>

#include <sstream>

#include "mflk/io.hpp"

using namespace mflk;

namespace {

const BoxDomain kDom = BoxDomain::unit(2);

}  // namespace

TEST(Io, MeasureRoundTripIsExact) {
  Rng rng(1);
  const auto mu = random_measure(kDom, 7, rng);
  const auto back = io::measure_from_json(io::json::parse(io::to_json(mu).dump()));
  EXPECT_EQ(back.atoms(), mu.atoms());
  EXPECT_EQ(back.weights(), mu.weights());
  EXPECT_TRUE(back.domain() == mu.domain());
}

TEST(Io, ConfigurationRoundTripIsExact) {
  Rng rng(2);
  const auto x = uniform_configuration(kDom, 9, rng);
  const auto back = io::configuration_from_json(io::json::parse(io::to_json(x).dump()));
  EXPECT_EQ(back.points(), x.points());
}

TEST(Io, MissingDomainDefaultsToUnitBox) {
  const io::json j = {{"dim", 1}, {"points", {{0.25}, {0.5}}}};
  const auto x = io::configuration_from_json(j);
  EXPECT_TRUE(x.domain() == BoxDomain::unit(1));
  EXPECT_EQ(x.size(), 2);
}

TEST(Io, KernelRoundTrip) {
  const FiniteKernel k(MeasureKernel::w1_exponential(BaseKernel(BaseFamily::Laplace, 0.3), 0.7), Estimator::UStatistic);
  EXPECT_EQ(io::finite_kernel_from_json(io::to_json(k)), k);
  EXPECT_EQ(io::measure_kernel_from_json(io::to_json(k.limit())), k.limit());
}

TEST(Io, EnumNamesMatchToString) {
  for (auto e : {Estimator::PlugIn, Estimator::UStatistic}) EXPECT_EQ(io::parse_estimator(to_string(e)), e);
  for (auto l : {LossKind::Squared, LossKind::Absolute, LossKind::Hinge, LossKind::EpsInsensitive})
    EXPECT_EQ(io::parse_loss_kind(to_string(l)), l);
  for (auto o : {OuterKind::LinearEmbedding, OuterKind::GaussianEmbedding, OuterKind::W1Exponential})
    EXPECT_EQ(io::parse_outer_kind(to_string(o)), o);
  for (auto f : {FunctionalKind::Spread, FunctionalKind::Mean1D, FunctionalKind::InteractionEnergy})
    EXPECT_EQ(io::parse_functional_kind(to_string(f)), f);
  EXPECT_THROW(io::parse_base_family("cauchy"), std::invalid_argument);
}

TEST(Io, FunctionRoundTripEvaluatesIdentically) {
  Rng rng(3);
  const MeasureKernel k = MeasureKernel::gaussian(BaseKernel(BaseFamily::Gaussian, 0.25), 0.5);
  std::vector<DiscreteMeasure> centers{random_measure(kDom, 4, rng), random_measure(kDom, 5, rng)};
  const RkhsFunction<MeasureKernel> f(k, centers, Eigen::Vector2d(0.3, -1.2));
  const auto g = io::measure_function_from_json(io::json::parse(io::to_json(f).dump()));
  const auto probe = random_measure(kDom, 6, rng);
  EXPECT_EQ(g(probe), f(probe));
}

TEST(Io, DatasetSurvivesJsonl) {
  Rng rng(4);
  std::vector<Configuration> xs{uniform_configuration(kDom, 3, rng), uniform_configuration(kDom, 3, rng)};
  const ConfigurationDataset d(xs, Eigen::Vector2d(0.5, -0.25), TargetRange{});
  std::stringstream ss;
  io::write_jsonl(ss, io::dataset_rows(d, 3, 11));
  const auto rows = io::read_jsonl(ss);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0]["M"], 3);
  EXPECT_EQ(rows[1]["seed"], 11);
  const auto back = io::configuration_dataset_from_rows(rows, TargetRange{});
  EXPECT_EQ(back.targets, d.targets);
  EXPECT_EQ(back.inputs[1].points(), xs[1].points());
}
