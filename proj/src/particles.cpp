#include "mflk/particles.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace mflk {

double InteractionProfile::operator()(const Eigen::Ref<const Eigen::VectorXd>& a,
                                      const Eigen::Ref<const Eigen::VectorXd>& b) const {
  if (kind == Kind::Constant) return strength;
  return strength / std::pow(1.0 + (a - b).squaredNorm(), beta);
}

void DynamicsModel::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("DynamicsModel: dt must be positive");
  if (steps < 1) throw std::invalid_argument("DynamicsModel: steps must be positive");
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("DynamicsModel: noise_sigma must be nonnegative");
  if (kind == DynamicsKind::BoundedConfidence && !(radius > 0.0))
    throw std::invalid_argument("DynamicsModel: radius must be positive");
}

namespace {

double pair_weight(const DynamicsModel& m, const Eigen::Ref<const Eigen::VectorXd>& a,
                   const Eigen::Ref<const Eigen::VectorXd>& b) {
  if (m.kind == DynamicsKind::Alignment) return m.phi(a, b);
  return (a - b).norm() <= m.radius ? m.strength : 0.0;
}

}  // namespace

Trajectory simulate(const DynamicsModel& model, const Configuration& x0, Rng* rng) {
  model.validate();
  if (!(x0.domain() == model.domain)) throw std::invalid_argument("simulate: configuration domain differs from model");
  if (model.noise_sigma > 0.0 && rng == nullptr) throw std::invalid_argument("simulate: noise requires an rng");

  const int M = x0.size();
  const int d = x0.dim();
  const double inv_m = 1.0 / static_cast<double>(M);
  const Eigen::VectorXd& lo = model.domain.lower();
  const Eigen::VectorXd& hi = model.domain.upper();

  Trajectory out;
  out.snapshots.reserve(static_cast<std::size_t>(model.steps) + 1);
  out.snapshots.push_back(x0);

  Eigen::MatrixXd x = x0.points();
  Eigen::MatrixXd v(d, M);
  Eigen::VectorXd acc(d);
  for (int step = 1; step <= model.steps; ++step) {
    const auto order = canonical_order(x, Eigen::VectorXd::Zero(M));
    for (int i = 0; i < M; ++i) {
      acc.setZero();
      for (int j : order) acc += pair_weight(model, x.col(i), x.col(j)) * (x.col(j) - x.col(i));
      v.col(i) = inv_m * acc;
    }
    x += model.dt * v;
    if (model.noise_sigma > 0.0) {
      const double s = model.noise_sigma * std::sqrt(model.dt);
      for (int i = 0; i < M; ++i)
        for (int k = 0; k < d; ++k) x(k, i) += s * standard_normal(*rng);
    }
    if (!x.allFinite()) {
      std::ostringstream msg;
      msg << "simulate: non-finite state at step " << step;
      throw std::runtime_error(msg.str());
    }
    for (int i = 0; i < M; ++i) {
      for (int k = 0; k < d; ++k) {
        if (x(k, i) < lo[k]) {
          x(k, i) = lo[k];
          ++out.clamp_events;
        } else if (x(k, i) > hi[k]) {
          x(k, i) = hi[k];
          ++out.clamp_events;
        }
      }
    }
    out.snapshots.emplace_back(model.domain, x);
  }
  return out;
}

namespace {

Eigen::VectorXd ordered_mean(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& w, const std::vector<int>& order) {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(atoms.rows());
  for (int i : order) m += w[i] * atoms.col(i);
  return m;
}

double spread(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& w, const std::vector<int>& order) {
  const Eigen::VectorXd m = ordered_mean(atoms, w, order);
  double s = 0.0;
  for (int i : order) s += w[i] * (atoms.col(i) - m).squaredNorm();
  return s;
}

double unscaled_limit(const TargetFunctional& F, const DiscreteMeasure& mu) {
  const auto order = canonical_order(mu.atoms(), mu.weights());
  const auto& a = mu.atoms();
  const auto& w = mu.weights();
  switch (F.kind) {
    case FunctionalKind::Spread:
      return spread(a, w, order);
    case FunctionalKind::Mean1D:
      return ordered_mean(a, w, order)[0];
    case FunctionalKind::InteractionEnergy: {
      double total = 0.0;
      for (int i : order) {
        double row = 0.0;
        for (int j : order) row += w[j] * F.interaction(a.col(i), a.col(j));
        total += w[i] * row;
      }
      return total;
    }
  }
  return 0.0;
}

}  // namespace

double functional_limit_eval(const TargetFunctional& F, const DiscreteMeasure& mu) {
  return F.scale * unscaled_limit(F, mu);
}

double functional_eval(const TargetFunctional& F, const Configuration& x) {
  const int M = x.size();
  if (M < F.min_size()) throw std::invalid_argument("functional_eval: UStatistic needs M >= 2");
  const DiscreteMeasure emp = empirical_measure(x);
  if (F.estimator == Estimator::PlugIn || F.kind == FunctionalKind::Mean1D) return functional_limit_eval(F, emp);

  const double m = static_cast<double>(M);
  if (F.kind == FunctionalKind::Spread) return F.scale * (unscaled_limit(F, emp) * (m / (m - 1.0)));

  const auto order = canonical_order(x.points(), emp.weights());
  double total = 0.0;
  for (std::size_t p = 0; p < order.size(); ++p) {
    double row = 0.0;
    for (std::size_t q = 0; q < order.size(); ++q) {
      if (p == q) continue;
      row += F.interaction(x.point(order[p]), x.point(order[q]));
    }
    total += row;
  }
  return F.scale * (total / (m * (m - 1.0)));
}

DatasetPair make_dataset(const std::vector<DiscreteMeasure>& reference, const TargetFunctional& F, int M,
                         double noise_sigma, const TargetRange& range, Rng& rng) {
  if (M < 2) throw std::invalid_argument("make_dataset: M must be >= 2");
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("make_dataset: noise must be nonnegative");
  const auto n = static_cast<Eigen::Index>(reference.size());
  Eigen::VectorXd eps(n);
  for (Eigen::Index i = 0; i < n; ++i) eps[i] = noise_sigma > 0.0 ? noise_sigma * standard_normal(rng) : 0.0;

  std::vector<Configuration> configs;
  configs.reserve(reference.size());
  Eigen::VectorXd y_fin(n), y_lim(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& mu = reference[static_cast<std::size_t>(i)];
    configs.push_back(sample_configuration(mu, M, rng));
    y_fin[i] = range.clip(functional_eval(F, configs.back()) + eps[i]);
    y_lim[i] = range.clip(functional_limit_eval(F, mu) + eps[i]);
  }
  return DatasetPair{ConfigurationDataset(std::move(configs), y_fin, range), MeasureDataset(reference, y_lim, range),
                     eps};
}

std::string to_string(FunctionalKind k) {
  switch (k) {
    case FunctionalKind::Spread: return "spread";
    case FunctionalKind::Mean1D: return "mean1d";
    case FunctionalKind::InteractionEnergy: return "interaction_energy";
  }
  return "?";
}

std::string to_string(DynamicsKind k) {
  return k == DynamicsKind::Alignment ? "alignment" : "bounded_confidence";
}

}  // namespace mflk
