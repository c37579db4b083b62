#include "mflk/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mflk {

BoxDomain::BoxDomain(Eigen::VectorXd lower, Eigen::VectorXd upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() < 1) throw std::invalid_argument("BoxDomain: dim must be positive");
  if (lower_.size() != upper_.size()) throw std::invalid_argument("BoxDomain: bound length mismatch");
  for (Eigen::Index i = 0; i < lower_.size(); ++i) {
    if (!(lower_[i] < upper_[i]) || !std::isfinite(lower_[i]) || !std::isfinite(upper_[i]))
      throw std::invalid_argument("BoxDomain: need finite lower[i] < upper[i]");
  }
}

BoxDomain BoxDomain::unit(int dim) {
  return BoxDomain(Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim));
}

bool BoxDomain::contains(const Eigen::Ref<const Eigen::VectorXd>& p, double tol) const {
  if (p.size() != lower_.size()) return false;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p[i]) || p[i] < lower_[i] - tol || p[i] > upper_[i] + tol) return false;
  }
  return true;
}

Point BoxDomain::clamp(const Eigen::Ref<const Eigen::VectorXd>& p) const {
  return p.cwiseMax(lower_).cwiseMin(upper_);
}

Point BoxDomain::uniform_point(Rng& rng) const {
  Point p(dim());
  for (int i = 0; i < dim(); ++i) p[i] = lower_[i] + (upper_[i] - lower_[i]) * uniform01(rng);
  return p;
}

bool BoxDomain::operator==(const BoxDomain& other) const {
  return lower_.size() == other.lower_.size() && lower_ == other.lower_ && upper_ == other.upper_;
}

Configuration::Configuration(BoxDomain domain, Eigen::MatrixXd points)
    : domain_(std::move(domain)), points_(std::move(points)) {
  if (points_.cols() < 1) throw std::invalid_argument("Configuration: need M >= 1 points");
  if (points_.rows() != domain_.dim()) throw std::invalid_argument("Configuration: dimension mismatch");
  for (Eigen::Index i = 0; i < points_.cols(); ++i) {
    if (!domain_.contains(points_.col(i)))
      throw std::invalid_argument("Configuration: point " + std::to_string(i) + " outside domain");
  }
}

Configuration Configuration::permuted(const std::vector<int>& perm) const {
  if (static_cast<int>(perm.size()) != size()) throw std::invalid_argument("permuted: size mismatch");
  Eigen::MatrixXd p(points_.rows(), points_.cols());
  for (int i = 0; i < size(); ++i) p.col(i) = points_.col(perm[i]);
  return Configuration(domain_, std::move(p));
}

DiscreteMeasure::DiscreteMeasure(BoxDomain domain, Eigen::MatrixXd atoms, Eigen::VectorXd weights)
    : domain_(std::move(domain)), atoms_(std::move(atoms)), weights_(std::move(weights)) {
  if (atoms_.cols() < 1) throw std::invalid_argument("DiscreteMeasure: need at least one atom");
  if (atoms_.rows() != domain_.dim()) throw std::invalid_argument("DiscreteMeasure: dimension mismatch");
  if (weights_.size() != atoms_.cols()) throw std::invalid_argument("DiscreteMeasure: weight count mismatch");
  for (Eigen::Index i = 0; i < weights_.size(); ++i) {
    if (!(weights_[i] >= 0.0) || !std::isfinite(weights_[i]))
      throw std::invalid_argument("DiscreteMeasure: weights must be finite and nonnegative");
    if (!domain_.contains(atoms_.col(i)))
      throw std::invalid_argument("DiscreteMeasure: atom " + std::to_string(i) + " outside domain");
  }
  if (std::abs(weights_.sum() - 1.0) > 1e-12)
    throw std::invalid_argument("DiscreteMeasure: weights must sum to 1");
}

DiscreteMeasure DiscreteMeasure::dirac(BoxDomain domain, const Point& at) {
  Eigen::MatrixXd a = at;
  return DiscreteMeasure(std::move(domain), std::move(a), Eigen::VectorXd::Ones(1));
}

Point DiscreteMeasure::mean() const { return atoms_ * weights_; }

DiscreteMeasure empirical_measure(const Configuration& config) {
  const int m = config.size();
  return DiscreteMeasure(config.domain(), config.points(),
                         Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m)));
}

std::vector<int> canonical_order(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& weights) {
  std::vector<int> idx(static_cast<std::size_t>(atoms.cols()));
  std::iota(idx.begin(), idx.end(), 0);
  const Eigen::Index d = atoms.rows();
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    for (Eigen::Index k = 0; k < d; ++k) {
      if (atoms(k, a) != atoms(k, b)) return atoms(k, a) < atoms(k, b);
    }
    return weights[a] < weights[b];
  });
  return idx;
}

DiscreteMeasure canonicalize(const DiscreteMeasure& mu) {
  constexpr double kMergeTol = 1e-12;
  const auto order = canonical_order(mu.atoms(), mu.weights());
  std::vector<int> reps;
  std::vector<double> mass;
  for (int i : order) {
    const double w = mu.weights()[i];
    if (w <= 0.0) continue;
    bool merged = false;
    for (std::size_t r = 0; r < reps.size(); ++r) {
      if ((mu.atom(reps[r]) - mu.atom(i)).norm() <= kMergeTol) {
        mass[r] += w;
        merged = true;
        break;
      }
    }
    if (!merged) {
      reps.push_back(i);
      mass.push_back(w);
    }
  }
  Eigen::MatrixXd atoms(mu.dim(), static_cast<Eigen::Index>(reps.size()));
  Eigen::VectorXd weights(static_cast<Eigen::Index>(reps.size()));
  for (std::size_t r = 0; r < reps.size(); ++r) {
    atoms.col(static_cast<Eigen::Index>(r)) = mu.atom(reps[r]);
    weights[static_cast<Eigen::Index>(r)] = mass[r];
  }
  return DiscreteMeasure(mu.domain(), std::move(atoms), std::move(weights));
}

double wasserstein1_1d_oracle(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.dim() != 1 || nu.dim() != 1) throw std::invalid_argument("wasserstein1_1d_oracle: dim must be 1");
  const auto oa = canonical_order(mu.atoms(), mu.weights());
  const auto ob = canonical_order(nu.atoms(), nu.weights());
  // Walk both quantile functions over the merged cumulative-weight grid.
  std::size_t i = 0, j = 0;
  double ra = mu.weights()[oa[0]], rb = nu.weights()[ob[0]];
  double total = 0.0;
  while (i < oa.size() && j < ob.size()) {
    const double step = std::min(ra, rb);
    total += step * std::abs(mu.atoms()(0, oa[i]) - nu.atoms()(0, ob[j]));
    ra -= step;
    rb -= step;
    if (ra <= 0.0 && ++i < oa.size()) ra = mu.weights()[oa[i]];
    if (rb <= 0.0 && ++j < ob.size()) rb = nu.weights()[ob[j]];
  }
  return total;
}

double dkr2(const MeasurePair& pair1, const MeasurePair& pair2) {
  const auto& d = pair1.first.domain();
  if (!(pair1.second.domain() == d && pair2.first.domain() == d && pair2.second.domain() == d))
    throw std::invalid_argument("dkr2: domain mismatch");
  return wasserstein1(pair1.first, pair2.first).distance + wasserstein1(pair1.second, pair2.second).distance;
}

Configuration sample_configuration(const DiscreteMeasure& mu, int M, Rng& rng) {
  if (M < 1) throw std::invalid_argument("sample_configuration: M must be >= 1");
  std::discrete_distribution<int> pick(mu.weights().data(), mu.weights().data() + mu.weights().size());
  Eigen::MatrixXd pts(mu.dim(), M);
  for (int i = 0; i < M; ++i) pts.col(i) = mu.atom(pick(rng));
  return Configuration(mu.domain(), std::move(pts));
}

Configuration uniform_configuration(const BoxDomain& domain, int M, Rng& rng) {
  if (M < 1) throw std::invalid_argument("uniform_configuration: M must be >= 1");
  Eigen::MatrixXd pts(domain.dim(), M);
  for (int i = 0; i < M; ++i) pts.col(i) = domain.uniform_point(rng);
  return Configuration(domain, std::move(pts));
}

namespace {

Eigen::VectorXd random_simplex_weights(int n, Rng& rng) {
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) w[i] = 0.5 + uniform01(rng);
  w /= w.sum();
  // Push the rounding residue onto the largest weight so the sum is exact to ulp.
  Eigen::Index imax;
  w.maxCoeff(&imax);
  w[imax] += 1.0 - w.sum();
  return w;
}

}  // namespace

DiscreteMeasure random_bump_measure(const BoxDomain& domain, int atoms, Rng& rng) {
  if (atoms < 1) throw std::invalid_argument("random_bump_measure: need atoms >= 1");
  const Eigen::VectorXd width = domain.upper() - domain.lower();
  Point center(domain.dim());
  for (int k = 0; k < domain.dim(); ++k)
    center[k] = domain.lower()[k] + width[k] * (0.25 + 0.5 * uniform01(rng));
  const double spread = 0.05 + 0.15 * uniform01(rng);
  Eigen::MatrixXd a(domain.dim(), atoms);
  for (int i = 0; i < atoms; ++i) {
    Point p(domain.dim());
    for (int k = 0; k < domain.dim(); ++k) p[k] = center[k] + spread * width[k] * standard_normal(rng);
    a.col(i) = domain.clamp(p);
  }
  return DiscreteMeasure(domain, std::move(a), random_simplex_weights(atoms, rng));
}

DiscreteMeasure random_measure(const BoxDomain& domain, int atoms, Rng& rng) {
  if (atoms < 1) throw std::invalid_argument("random_measure: need atoms >= 1");
  Eigen::MatrixXd a(domain.dim(), atoms);
  for (int i = 0; i < atoms; ++i) a.col(i) = domain.uniform_point(rng);
  return DiscreteMeasure(domain, std::move(a), random_simplex_weights(atoms, rng));
}

}  // namespace mflk
