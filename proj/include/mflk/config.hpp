#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "mflk/kernels.hpp"
#include "mflk/learning.hpp"
#include "mflk/particles.hpp"

namespace mflk {

/// Flat key = value file in TOML syntax: numbers, booleans, quoted strings,
/// and one-line arrays. '#' starts a comment; [section] headers are ignored.
using ConfigValue = std::variant<bool, double, std::string, std::vector<double>, std::vector<std::string>>;
using ConfigTable = std::map<std::string, ConfigValue>;

ConfigTable parse_config_text(const std::string& text);
ConfigTable load_config_file(const std::string& path);

struct ExperimentConfig {
  std::string experiment = "all";
  std::uint64_t seed = 7;

  int dim = 1;
  int atoms = 16;  // atoms per reference measure

  BaseFamily base_family = BaseFamily::Gaussian;
  double lengthscale = 0.25;
  OuterKind outer = OuterKind::GaussianEmbedding;
  double sigma = 0.5;
  Estimator estimator = Estimator::UStatistic;

  LossKind loss = LossKind::Squared;
  std::vector<LossKind> svm_losses{LossKind::Squared, LossKind::Absolute};
  double loss_epsilon = 0.05;
  double lambda = 0.1;

  FunctionalKind functional = FunctionalKind::Spread;
  Estimator functional_estimator = Estimator::UStatistic;
  double target_scale = 20.0;
  double noise = 0.02;
  double y_lo = -1.0;
  double y_hi = 1.0;

  std::vector<int> m_schedule{20, 40, 80, 160};
  int n_train = 10;
  int replicates = 8;
  int gap_samples = 50;
  int n_test = 200;
  int n_mc = 2000;
  int n_proxy = 100;
  int n_minimal = 40;
  int centers = 6;
  int n_reference = 5;
  int m0 = 80;
  std::vector<double> lambda_grid{1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1};
  double a2_tolerance = 1e-3;
  double minimal_risk_tolerance = 1e-3;
  std::vector<int> n_grid{10, 40, 160};
  double approx_lambda = 1e-5;

  std::string out = "results";
  int threads = 1;
  bool timing = false;

  /// Throws std::invalid_argument on any violated constraint.
  void validate() const;

  BaseKernel base_kernel() const { return {base_family, lengthscale}; }
  MeasureKernel measure_kernel() const { return {base_kernel(), outer, sigma}; }
  FiniteKernel finite_kernel() const { return {measure_kernel(), estimator}; }
  BoxDomain domain() const { return BoxDomain::unit(dim); }
  TargetRange target_range() const { return {y_lo, y_hi}; }
  TargetFunctional target_functional() const;
  Loss make_loss(LossKind kind) const { return Loss(kind, target_range(), loss_epsilon); }

  /// Echo of every field as key = value lines, in a fixed order.
  std::vector<std::pair<std::string, std::string>> echo() const;
};

/// Applies a parsed table to the defaults. Unknown keys are an error.
ExperimentConfig config_from_table(const ConfigTable& table);

}  // namespace mflk
