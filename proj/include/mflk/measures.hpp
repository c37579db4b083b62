#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <utility>
#include <vector>

#include "mflk/random.hpp"

namespace mflk {

using Point = Eigen::VectorXd;

/// Axis-aligned box in R^d with the Euclidean metric. Stands in for the
/// compact state space of the particles.
class BoxDomain {
 public:
  BoxDomain(Eigen::VectorXd lower, Eigen::VectorXd upper);

  /// The unit cube [0,1]^dim.
  static BoxDomain unit(int dim);

  int dim() const { return static_cast<int>(lower_.size()); }
  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }
  double diameter() const { return (upper_ - lower_).norm(); }

  bool contains(const Eigen::Ref<const Eigen::VectorXd>& p, double tol = 1e-12) const;
  Point clamp(const Eigen::Ref<const Eigen::VectorXd>& p) const;
  Point uniform_point(Rng& rng) const;

  bool operator==(const BoxDomain& other) const;

 private:
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
};

/// M ordered points in a box, stored column-wise (dim x M).
class Configuration {
 public:
  Configuration(BoxDomain domain, Eigen::MatrixXd points);

  const BoxDomain& domain() const { return domain_; }
  int dim() const { return domain_.dim(); }
  int size() const { return static_cast<int>(points_.cols()); }
  const Eigen::MatrixXd& points() const { return points_; }
  auto point(int i) const { return points_.col(i); }

  /// Reordered copy: result.point(i) == point(perm[i]).
  Configuration permuted(const std::vector<int>& perm) const;

 private:
  BoxDomain domain_;
  Eigen::MatrixXd points_;
};

/// Finitely supported probability measure on a box. Duplicate atoms and
/// zero weights are allowed; canonicalize() removes both.
class DiscreteMeasure {
 public:
  DiscreteMeasure(BoxDomain domain, Eigen::MatrixXd atoms, Eigen::VectorXd weights);

  static DiscreteMeasure dirac(BoxDomain domain, const Point& at);

  const BoxDomain& domain() const { return domain_; }
  int dim() const { return domain_.dim(); }
  int size() const { return static_cast<int>(atoms_.cols()); }
  const Eigen::MatrixXd& atoms() const { return atoms_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  auto atom(int i) const { return atoms_.col(i); }

  /// First moment.
  Point mean() const;

 private:
  BoxDomain domain_;
  Eigen::MatrixXd atoms_;
  Eigen::VectorXd weights_;
};

/// Optimal coupling returned alongside a Wasserstein-1 value.
struct TransportPlan {
  Eigen::MatrixXd mass;  // rows: source atoms, cols: target atoms
  int rows() const { return static_cast<int>(mass.rows()); }
  int cols() const { return static_cast<int>(mass.cols()); }
};

struct TransportResult {
  double distance = 0.0;
  TransportPlan plan;
};

DiscreteMeasure empirical_measure(const Configuration& config);

/// Merge atoms closer than 1e-12, drop zero weights, sort lexicographically.
DiscreteMeasure canonicalize(const DiscreteMeasure& mu);

/// Index order that sorts columns lexicographically, ties broken by weight.
/// Every integration routine sums in this order, which makes results exactly
/// independent of how the atoms were listed.
std::vector<int> canonical_order(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& weights);

/// Exact W1 with Euclidean ground cost via successive shortest paths.
TransportResult wasserstein1(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// W1 for dim 1 from quantile functions. Independent of the flow solver.
double wasserstein1_1d_oracle(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

using MeasurePair = std::pair<DiscreteMeasure, DiscreteMeasure>;

/// Product metric W1(mu1, mu2) + W1(mu1', mu2').
double dkr2(const MeasurePair& pair1, const MeasurePair& pair2);

/// M i.i.d. draws from mu's atoms.
Configuration sample_configuration(const DiscreteMeasure& mu, int M, Rng& rng);

/// Configuration with M uniform points in the domain.
Configuration uniform_configuration(const BoxDomain& domain, int M, Rng& rng);

/// A random discrete measure with `atoms` atoms: a clamped Gaussian bump with
/// random center and width, random positive weights.
DiscreteMeasure random_bump_measure(const BoxDomain& domain, int atoms, Rng& rng);

/// Atoms uniform in the box, weights uniform then normalized.
DiscreteMeasure random_measure(const BoxDomain& domain, int atoms, Rng& rng);

}  // namespace mflk
