#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "mflk/kernels.hpp"
#include "mflk/learning.hpp"
#include "mflk/measures.hpp"

namespace mflk {

// Interaction weight phi(a, b) for alignment dynamics.
struct InteractionProfile {
  enum class Kind { Constant, CuckerSmale };
  Kind kind = Kind::Constant;
  double strength = 1.0;
  double beta = 0.5;  // decay exponent, CuckerSmale only

  double operator()(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) const;
};

enum class DynamicsKind { Alignment, BoundedConfidence };

// dx_i/dt = (1/M) sum_j phi(x_i, x_j) (x_j - x_i) for Alignment. For
// BoundedConfidence phi is `strength` inside `radius` and 0 outside.
struct DynamicsModel {
  DynamicsKind kind = DynamicsKind::Alignment;
  InteractionProfile phi;
  double radius = 0.25;
  double strength = 1.0;
  BoxDomain domain = BoxDomain::unit(1);
  double dt = 0.01;
  int steps = 100;
  double noise_sigma = 0.0;  // additive sqrt(dt) * sigma * N(0, I) per step

  void validate() const;
};

struct Trajectory {
  std::vector<Configuration> snapshots;  // steps + 1 entries, the initial state first
  long clamp_events = 0;                 // coordinates pulled back into the box
};

// Explicit Euler. Each velocity sums over the other particles in sorted
// order, so relabelling the input relabels the output bit for bit (noise-free
// runs). Throws std::runtime_error on a non-finite state.
Trajectory simulate(const DynamicsModel& model, const Configuration& x0, Rng* rng = nullptr);

enum class FunctionalKind { Spread, Mean1D, InteractionEnergy };

struct TargetFunctional {
  FunctionalKind kind = FunctionalKind::Spread;
  Estimator estimator = Estimator::PlugIn;
  BaseKernel interaction{BaseFamily::Gaussian, 0.25};  // W, InteractionEnergy only
  double scale = 1.0;                                   // multiplies the value

  int min_size() const { return estimator == Estimator::UStatistic ? 2 : 1; }
};

// F_M(x). PlugIn is F applied to the empirical measure.
double functional_eval(const TargetFunctional& F, const Configuration& x);
// F(mu).
double functional_limit_eval(const TargetFunctional& F, const DiscreteMeasure& mu);

struct DatasetPair {
  ConfigurationDataset finite;  // x_n ~ mu_n^M, y = clip(F_M(x_n) + eps_n)
  MeasureDataset limit;         // mu_n,        y = clip(F(mu_n) + eps_n)
  Eigen::VectorXd noise;        // eps
};

// The noise vector is drawn first, so two calls from equal streams share eps
// whatever M is.
DatasetPair make_dataset(const std::vector<DiscreteMeasure>& reference, const TargetFunctional& F, int M,
                         double noise_sigma, const TargetRange& range, Rng& rng);

std::string to_string(FunctionalKind k);
std::string to_string(DynamicsKind k);

}  // namespace mflk
