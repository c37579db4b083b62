#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "mflk/kernels.hpp"
#include "mflk/measures.hpp"
#include "mflk/rkhs.hpp"

namespace mflk {

/// Compact target set Y = [lo, hi].
struct TargetRange {
  double lo = -1.0;
  double hi = 1.0;

  bool contains(double y) const { return y >= lo && y <= hi; }
  double clip(double y) const { return std::min(hi, std::max(lo, y)); }
  double max_abs() const { return std::max(std::abs(lo), std::abs(hi)); }
};

enum class LossKind { Squared, Absolute, Hinge, EpsInsensitive };

/// l(input, y, t) = weight(input) * base(y, t). The weight defaults to 1; a
/// custom weight must be a positive Lipschitz map on measures, and is applied
/// to configurations through their empirical measure.
class Loss {
 public:
  using WeightMap = std::function<double(const DiscreteMeasure&)>;

  Loss(LossKind kind, TargetRange range, double epsilon = 0.0);

  Loss with_weight(WeightMap weight, double weight_bound) const;

  LossKind kind() const { return kind_; }
  const TargetRange& range() const { return range_; }
  double epsilon() const { return epsilon_; }
  bool weighted() const { return static_cast<bool>(weight_); }
  double weight_bound() const { return weight_bound_; }

  /// Unweighted loss. Throws if y is outside the target range.
  double base(double y, double t) const;
  double weight(const DiscreteMeasure& mu) const { return weight_ ? weight_(mu) : 1.0; }
  double weight(const Configuration& x) const { return weight_ ? weight_(empirical_measure(x)) : 1.0; }

  /// argmin_t  c * base(y, t) + (t - v)^2 / 2.
  double prox(double y, double v, double c) const;

  /// Lipschitz constant in t valid on |t| <= t_max (L_l).
  double lipschitz_t(double t_max) const;
  /// sup of the loss over Y x [-t_max, t_max] (C_l on the working range).
  double bound(double t_max) const;

 private:
  LossKind kind_;
  TargetRange range_;
  double epsilon_;
  WeightMap weight_;
  double weight_bound_ = 1.0;
};

double loss_eval(const Loss& loss, const DiscreteMeasure& mu, double y, double t);
double loss_eval(const Loss& loss, const Configuration& x, double y, double t);

/// |t| <= T_max holds for minimizers of squared-norm problems:
/// bound(Y) + C_k sqrt(R(0) / lambda).
double working_range(const TargetRange& range, double kernel_bound, double zero_risk, double lambda);

template <class Input>
struct Dataset {
  std::vector<Input> inputs;
  Eigen::VectorXd targets;
  TargetRange range;

  Dataset(std::vector<Input> in, Eigen::VectorXd y, TargetRange r)
      : inputs(std::move(in)), targets(std::move(y)), range(r) {
    if (static_cast<Eigen::Index>(inputs.size()) != targets.size())
      throw std::invalid_argument("Dataset: inputs and targets differ in length");
    for (Eigen::Index i = 0; i < targets.size(); ++i)
      if (!range.contains(targets[i])) throw std::invalid_argument("Dataset: target outside Y");
    for (std::size_t i = 1; i < inputs.size(); ++i)
      if (!(inputs[i].domain() == inputs[0].domain())) throw std::invalid_argument("Dataset: mixed domains");
  }

  int size() const { return static_cast<int>(inputs.size()); }
};

using MeasureDataset = Dataset<DiscreteMeasure>;
using ConfigurationDataset = Dataset<Configuration>;

enum class Regularizer { SquaredNorm, PlainNorm };

template <class Kernel>
struct LearningProblem {
  Dataset<kernel_input_t<Kernel>> data;
  Loss loss;
  double lambda;
  Regularizer regularizer = Regularizer::SquaredNorm;
};

template <class Kernel>
double empirical_risk(const RkhsFunction<Kernel>& f, const Dataset<kernel_input_t<Kernel>>& data, const Loss& loss) {
  if (data.size() == 0) throw std::invalid_argument("empirical_risk: empty dataset");
  double total = 0.0;
  for (int n = 0; n < data.size(); ++n) {
    const auto& x = data.inputs[static_cast<std::size_t>(n)];
    total += loss_eval(loss, x, data.targets[n], f(x));
  }
  return total / data.size();
}

inline double regularization_term(double lambda, Regularizer reg, double norm_value) {
  return reg == Regularizer::SquaredNorm ? lambda * norm_value * norm_value : lambda * norm_value;
}

template <class Kernel>
double regularized_risk(const RkhsFunction<Kernel>& f, const LearningProblem<Kernel>& p) {
  if (!(p.lambda > 0.0)) throw std::invalid_argument("regularized_risk: lambda must be positive");
  return empirical_risk(f, p.data, p.loss) + regularization_term(p.lambda, p.regularizer, norm(f));
}

/// Kernel ridge regression: solves (G + lambda N I) alpha = y, the minimizer
/// of (1/N)|G alpha - y|^2 + lambda alpha^T G alpha.
Eigen::VectorXd solve_krr(const Eigen::MatrixXd& gram, const Eigen::VectorXd& y, double lambda);

struct SolverOptions {
  int max_iterations = 50000;
  double tolerance = 1e-11;   // on scaled primal and dual residuals
  double rho = 1.0;           // initial ADMM penalty, adapted by residual balancing
  bool clip_indefinite = false;
  int trace_every = 100;
};

struct SolverReport {
  Eigen::VectorXd alpha;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;   // false: iteration cap hit, alpha is the best iterate
  std::vector<double> objective_trace;
};

/// sum_n c_n w_n l(y_n, (G alpha)_n) + lambda R(sqrt(alpha^T G alpha)), where
/// c_n = data_weights[n] (default 1/N) and w_n = sample weight of the loss.
double erm_objective(const Eigen::MatrixXd& gram, const Eigen::VectorXd& y, const Loss& loss, double lambda,
                     Regularizer reg, const Eigen::VectorXd& alpha, const Eigen::VectorXd& data_weights = {});

/// Convex regularized ERM over span{k(., x_n)} by ADMM in the factored
/// geometry G = B B^T, where both the loss and regularizer proxes are closed
/// form. `data_weights` as in erm_objective.
SolverReport solve_regularized_erm(const Eigen::MatrixXd& gram, const Eigen::VectorXd& y, const Loss& loss,
                                   double lambda, Regularizer reg, const SolverOptions& opts = {},
                                   const Eigen::VectorXd& data_weights = {});

/// Per-sample loss weights w(input_n) for a dataset (ones when unweighted).
template <class Input>
Eigen::VectorXd loss_weights(const Loss& loss, const std::vector<Input>& inputs) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(inputs.size()));
  for (std::size_t n = 0; n < inputs.size(); ++n) w[static_cast<Eigen::Index>(n)] = loss.weight(inputs[n]);
  return w;
}

template <class Kernel>
struct FitResult {
  RkhsFunction<Kernel> f;
  SolverReport report;
};

/// Minimizer of the regularized empirical risk. Squared loss with squared
/// norm and no input weight goes through solve_krr, everything else through
/// the generic solver.
template <class Kernel>
FitResult<Kernel> fit(const Kernel& k, const LearningProblem<Kernel>& p, const SolverOptions& opts = {}) {
  const auto emb = embed_all(k, p.data.inputs);
  Eigen::MatrixXd g = gram_matrix(k, emb);
  if (opts.clip_indefinite) g = clip_gram(g);
  SolverReport rep;
  if (p.loss.kind() == LossKind::Squared && p.regularizer == Regularizer::SquaredNorm && !p.loss.weighted()) {
    rep.alpha = solve_krr(g, p.data.targets, p.lambda);
    rep.objective = erm_objective(g, p.data.targets, p.loss, p.lambda, p.regularizer, rep.alpha);
    rep.converged = true;
  } else {
    const Eigen::VectorXd w = loss_weights(p.loss, p.data.inputs);
    const Eigen::VectorXd c = w / static_cast<double>(p.data.size());
    rep = solve_regularized_erm(g, p.data.targets, p.loss.with_weight(nullptr, 1.0), p.lambda, p.regularizer, opts, c);
  }
  return {RkhsFunction<Kernel>(k, p.data.inputs, rep.alpha), rep};
}

/// Generator of labelled inputs: mu ~ draw_measure, eps ~ N(0, noise^2),
/// limit level y = clip(F(mu) + eps), finite level x ~ mu^M and
/// y = clip(F_M(x) + eps). Draw order is (mu, eps, x), so the two levels share
/// mu and eps for the same stream.
class DistributionSampler {
 public:
  struct Spec {
    std::function<DiscreteMeasure(Rng&)> draw_measure;
    std::function<double(const DiscreteMeasure&)> limit_target;
    std::function<double(const Configuration&)> finite_target;
    double noise_sigma = 0.0;
    TargetRange range;
  };

  /// level 0 means the limit level; level M >= 1 draws size-M configurations.
  DistributionSampler(Spec spec, int level);

  int level() const { return level_; }
  bool is_limit() const { return level_ == 0; }
  const TargetRange& range() const { return spec_.range; }

  std::pair<DiscreteMeasure, double> draw_limit(Rng& rng) const;
  std::pair<Configuration, double> draw_finite(Rng& rng) const;

  template <class Input>
  std::pair<Input, double> draw(Rng& rng) const {
    if constexpr (std::is_same_v<Input, DiscreteMeasure>) {
      return draw_limit(rng);
    } else {
      return draw_finite(rng);
    }
  }

  /// n draws as a dataset.
  template <class Input>
  Dataset<Input> draw_dataset(int n, Rng& rng) const {
    std::vector<Input> in;
    Eigen::VectorXd y(n);
    in.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      auto [x, t] = draw<Input>(rng);
      in.push_back(std::move(x));
      y[i] = t;
    }
    return Dataset<Input>(std::move(in), std::move(y), spec_.range);
  }

 private:
  Spec spec_;
  int level_;
};

struct MonteCarloEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

/// Mean of n i.i.d. values with its standard error.
MonteCarloEstimate mc_mean(const std::vector<double>& values);

/// Monte-Carlo risk of f under the sampler's distribution.
template <class Kernel>
MonteCarloEstimate mc_risk(const RkhsFunction<Kernel>& f, const DistributionSampler& sampler, const Loss& loss, int n,
                           Rng& rng) {
  using Input = kernel_input_t<Kernel>;
  if (n < 2) throw std::invalid_argument("mc_risk: need n >= 2");
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto [x, y] = sampler.draw<Input>(rng);
    values.push_back(loss_eval(loss, x, y, f(x)));
  }
  return mc_mean(values);
}

/// inf over the span of regularized empirical risk on (gram, y).
double minimal_regularized_risk(const Eigen::MatrixXd& gram, const Eigen::VectorXd& y, const Loss& loss,
                                double lambda, Regularizer reg = Regularizer::SquaredNorm,
                                const SolverOptions& opts = {});

/// Minimal unregularized empirical risk over the span. Exact for Squared loss
/// (residual of y projected onto range(G)); other losses use the empirical
/// risk of the squared-norm minimizer at lambda_ref.
double minimal_risk_reference(const Eigen::MatrixXd& gram, const Eigen::VectorXd& y, const Loss& loss,
                              double lambda_ref = 1e-6, const SolverOptions& opts = {});

/// A2(lambda) = minimal regularized risk - reference, floored at 0.
double approx_error_A2(const Eigen::MatrixXd& gram, const Eigen::VectorXd& y, const Loss& loss, double lambda,
                       double minimal_risk_ref, const SolverOptions& opts = {});

std::string to_string(LossKind k);
std::string to_string(Regularizer r);

}  // namespace mflk
