#include "mflk/learning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mflk/linalg.hpp"

namespace mflk {

Loss::Loss(LossKind kind, TargetRange range, double epsilon) : kind_(kind), range_(range), epsilon_(epsilon) {
  if (!(range.lo <= range.hi)) throw std::invalid_argument("Loss: empty target range");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("Loss: epsilon must be nonnegative");
}

Loss Loss::with_weight(WeightMap weight, double weight_bound) const {
  Loss out = *this;
  out.weight_ = std::move(weight);
  out.weight_bound_ = out.weight_ ? weight_bound : 1.0;
  return out;
}

double Loss::base(double y, double t) const {
  if (!range_.contains(y)) throw std::invalid_argument("loss: target outside Y");
  switch (kind_) {
    case LossKind::Squared: return (y - t) * (y - t);
    case LossKind::Absolute: return std::abs(y - t);
    case LossKind::Hinge: return std::max(0.0, 1.0 - y * t);
    case LossKind::EpsInsensitive: return std::max(0.0, std::abs(y - t) - epsilon_);
  }
  return 0.0;
}

double Loss::prox(double y, double v, double c) const {
  switch (kind_) {
    case LossKind::Squared:
      return (v + 2.0 * c * y) / (1.0 + 2.0 * c);
    case LossKind::Absolute: {
      const double r = v - y;
      return y + std::copysign(std::max(0.0, std::abs(r) - c), r);
    }
    case LossKind::EpsInsensitive: {
      const double r = v - y;
      if (std::abs(r) <= epsilon_) return v;
      if (r > 0.0) return r - c >= epsilon_ ? v - c : y + epsilon_;
      return r + c <= -epsilon_ ? v + c : y - epsilon_;
    }
    case LossKind::Hinge: {
      if (y == 0.0 || 1.0 - y * v <= 0.0) return v;
      const double moved = v + c * y;
      if (1.0 - y * moved >= 0.0) return moved;
      return 1.0 / y;
    }
  }
  return v;
}

double Loss::lipschitz_t(double t_max) const {
  double base_lip = 1.0;
  switch (kind_) {
    case LossKind::Squared: base_lip = 2.0 * (range_.max_abs() + t_max); break;
    case LossKind::Absolute: base_lip = 1.0; break;
    case LossKind::Hinge: base_lip = range_.max_abs(); break;
    case LossKind::EpsInsensitive: base_lip = 1.0; break;
  }
  return weight_bound_ * base_lip;
}

double Loss::bound(double t_max) const {
  const double a = range_.max_abs();
  double b = 0.0;
  switch (kind_) {
    case LossKind::Squared: b = (a + t_max) * (a + t_max); break;
    case LossKind::Absolute: b = a + t_max; break;
    case LossKind::Hinge: b = 1.0 + a * t_max; break;
    case LossKind::EpsInsensitive: b = std::max(0.0, a + t_max - epsilon_); break;
  }
  return weight_bound_ * b;
}

double loss_eval(const Loss& loss, const DiscreteMeasure& mu, double y, double t) {
  return loss.weight(mu) * loss.base(y, t);
}

double loss_eval(const Loss& loss, const Configuration& x, double y, double t) {
  return loss.weight(x) * loss.base(y, t);
}

double working_range(const TargetRange& range, double kernel_bound, double zero_risk, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("working_range: lambda must be positive");
  return range.max_abs() + kernel_bound * std::sqrt(zero_risk / lambda);
}

Eigen::VectorXd solve_krr(const Eigen::MatrixXd& gram, const Eigen::VectorXd& y, double lambda) {
  const Eigen::Index n = gram.rows();
  if (n < 1 || gram.cols() != n || y.size() != n) throw std::invalid_argument("solve_krr: shape mismatch");
  if (!(lambda > 0.0)) throw std::invalid_argument("solve_krr: lambda must be positive");
  const Eigen::MatrixXd a = gram + lambda * static_cast<double>(n) * Eigen::MatrixXd::Identity(n, n);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() != Eigen::Success) throw std::runtime_error("solve_krr: factorization failed");
  Eigen::VectorXd alpha = ldlt.solve(y);
  // One step of iterative refinement.
  alpha += ldlt.solve(y - a * alpha);
  if (!alpha.allFinite() || (a * alpha - y).norm() > 1e-8 * std::max(1.0, y.norm()))
    throw std::runtime_error("solve_krr: system is singular beyond numerical rank");
  return alpha;
}

namespace {

Eigen::VectorXd resolve_data_weights(const Eigen::VectorXd& data_weights, Eigen::Index n) {
  if (data_weights.size() == 0) return Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  if (data_weights.size() != n) throw std::invalid_argument("ERM: data weight count mismatch");
  return data_weights;
}

Eigen::MatrixXd checked_gram(const Eigen::MatrixXd& gram, bool clip) {
  const double lmin = min_eigenvalue(gram);
  const double scale = std::max(1.0, gram.cwiseAbs().maxCoeff());
  if (lmin < -1e-10 * scale) {
    if (!clip) throw std::invalid_argument("ERM: Gram matrix is indefinite; enable clip_indefinite");
    return clip_gram(gram);
  }
  return gram;
}

double objective_from(const Eigen::VectorXd& pred, double norm_sq, const Eigen::VectorXd& y, const Loss& loss,
                      double lambda, Regularizer reg, const Eigen::VectorXd& c) {
  double total = 0.0;
  for (Eigen::Index n = 0; n < y.size(); ++n) total += c[n] * loss.base(y[n], pred[n]);
  return total + regularization_term(lambda, reg, std::sqrt(std::max(0.0, norm_sq)));
}

}  // namespace

double erm_objective(const Eigen::MatrixXd& gram, const Eigen::VectorXd& y, const Loss& loss, double lambda,
                     Regularizer reg, const Eigen::VectorXd& alpha, const Eigen::VectorXd& data_weights) {
  const Eigen::VectorXd c = resolve_data_weights(data_weights, y.size());
  const Eigen::VectorXd pred = gram * alpha;
  return objective_from(pred, alpha.dot(pred), y, loss, lambda, reg, c);
}

SolverReport solve_regularized_erm(const Eigen::MatrixXd& gram, const Eigen::VectorXd& y, const Loss& loss,
                                   double lambda, Regularizer reg, const SolverOptions& opts,
                                   const Eigen::VectorXd& data_weights) {
  const Eigen::Index n = gram.rows();
  if (n < 1 || gram.cols() != n || y.size() != n) throw std::invalid_argument("solve_regularized_erm: shape mismatch");
  if (!(lambda > 0.0)) throw std::invalid_argument("solve_regularized_erm: lambda must be positive");
  for (Eigen::Index i = 0; i < n; ++i) loss.base(y[i], 0.0);  // validates targets

  const Eigen::VectorXd c = resolve_data_weights(data_weights, n);
  const Eigen::MatrixXd g = checked_gram(gram, opts.clip_indefinite);
  const PsdFactor<double> factor(g);

  SolverReport rep;
  const Eigen::Index r = factor.rank();
  if (r == 0) {
    rep.alpha = Eigen::VectorXd::Zero(n);
    rep.objective = erm_objective(g, y, loss, lambda, reg, rep.alpha, c);
    rep.converged = true;
    return rep;
  }
  const Eigen::MatrixXd b = factor.factor();
  const Eigen::ArrayXd denom = factor.spectrum.array() + 1.0;

  // Splitting: minimize sum_n c_n l(y_n, z_n) + lambda R(|w|)
  // subject to z = B beta and w = beta. The beta step is diagonal because
  // B^T B = diag(s).
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(r), w = beta, v = beta;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n), u = z;
  double rho = opts.rho;

  Eigen::VectorXd best_beta = beta;
  double best_obj = objective_from(b * beta, beta.squaredNorm(), y, loss, lambda, reg, c);

  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    beta = ((b.transpose() * (z - u) + (w - v)).array() / denom).matrix();
    const Eigen::VectorXd pred = b * beta;

    const Eigen::VectorXd z_old = z;
    for (Eigen::Index i = 0; i < n; ++i) z[i] = loss.prox(y[i], pred[i] + u[i], c[i] / rho);

    const Eigen::VectorXd w_old = w;
    const Eigen::VectorXd q = beta + v;
    if (reg == Regularizer::SquaredNorm) {
      w = q * (rho / (rho + 2.0 * lambda));
    } else {
      const double qn = q.norm();
      w = qn > lambda / rho ? Eigen::VectorXd(q * (1.0 - (lambda / rho) / qn)) : Eigen::VectorXd::Zero(r);
    }

    u += pred - z;
    v += beta - w;

    const double obj = objective_from(pred, beta.squaredNorm(), y, loss, lambda, reg, c);
    if (obj < best_obj) {
      best_obj = obj;
      best_beta = beta;
    }
    if (opts.trace_every > 0 && it % opts.trace_every == 0) rep.objective_trace.push_back(obj);

    const double primal = std::sqrt((pred - z).squaredNorm() + (beta - w).squaredNorm());
    const double dual = rho * (b.transpose() * (z - z_old) + (w - w_old)).norm();
    const double scale_p = 1.0 + std::max(std::sqrt(pred.squaredNorm() + beta.squaredNorm()),
                                          std::sqrt(z.squaredNorm() + w.squaredNorm()));
    const double scale_d = 1.0 + rho * (b.transpose() * u + v).norm();
    if (primal <= opts.tolerance * scale_p && dual <= opts.tolerance * scale_d) {
      rep.converged = true;
      ++it;
      break;
    }
    if (it % 10 == 9) {
      if (primal > 10.0 * dual) {
        rho *= 2.0;
        u /= 2.0;
        v /= 2.0;
      } else if (dual > 10.0 * primal) {
        rho /= 2.0;
        u *= 2.0;
        v *= 2.0;
      }
    }
  }

  rep.iterations = it;
  rep.alpha = factor.coefficients(best_beta);
  rep.objective = erm_objective(g, y, loss, lambda, reg, rep.alpha, c);
  return rep;
}

DistributionSampler::DistributionSampler(Spec spec, int level) : spec_(std::move(spec)), level_(level) {
  if (level < 0) throw std::invalid_argument("DistributionSampler: negative level");
  if (!spec_.draw_measure) throw std::invalid_argument("DistributionSampler: missing measure generator");
  if (level == 0 && !spec_.limit_target) throw std::invalid_argument("DistributionSampler: missing limit target");
  if (level > 0 && !spec_.finite_target) throw std::invalid_argument("DistributionSampler: missing finite target");
}

std::pair<DiscreteMeasure, double> DistributionSampler::draw_limit(Rng& rng) const {
  if (!is_limit()) throw std::logic_error("DistributionSampler: draw_limit on a finite-level sampler");
  DiscreteMeasure mu = spec_.draw_measure(rng);
  const double eps = spec_.noise_sigma > 0.0 ? spec_.noise_sigma * standard_normal(rng) : 0.0;
  const double y = spec_.range.clip(spec_.limit_target(mu) + eps);
  return {std::move(mu), y};
}

std::pair<Configuration, double> DistributionSampler::draw_finite(Rng& rng) const {
  if (is_limit()) throw std::logic_error("DistributionSampler: draw_finite on the limit sampler");
  const DiscreteMeasure mu = spec_.draw_measure(rng);
  const double eps = spec_.noise_sigma > 0.0 ? spec_.noise_sigma * standard_normal(rng) : 0.0;
  Configuration x = sample_configuration(mu, level_, rng);
  const double y = spec_.range.clip(spec_.finite_target(x) + eps);
  return {std::move(x), y};
}

MonteCarloEstimate mc_mean(const std::vector<double>& values) {
  if (values.size() < 2) throw std::invalid_argument("mc_mean: need at least two values");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

double minimal_regularized_risk(const Eigen::MatrixXd& gram, const Eigen::VectorXd& y, const Loss& loss,
                                double lambda, Regularizer reg, const SolverOptions& opts) {
  if (loss.kind() == LossKind::Squared && reg == Regularizer::SquaredNorm) {
    const Eigen::VectorXd alpha = solve_krr(gram, y, lambda);
    return erm_objective(gram, y, loss, lambda, reg, alpha);
  }
  return solve_regularized_erm(gram, y, loss, lambda, reg, opts).objective;
}

double minimal_risk_reference(const Eigen::MatrixXd& gram, const Eigen::VectorXd& y, const Loss& loss,
                              double lambda_ref, const SolverOptions& opts) {
  Eigen::VectorXd pred;
  if (loss.kind() == LossKind::Squared) {
    // Unregularized least squares over the span: project y onto range(G).
    pred = gram * (pseudo_inverse_sym(gram) * y);
  } else {
    pred = gram * solve_regularized_erm(gram, y, loss, lambda_ref, Regularizer::SquaredNorm, opts).alpha;
  }
  double total = 0.0;
  for (Eigen::Index n = 0; n < y.size(); ++n) total += loss.base(y[n], pred[n]);
  return total / static_cast<double>(y.size());
}

double approx_error_A2(const Eigen::MatrixXd& gram, const Eigen::VectorXd& y, const Loss& loss, double lambda,
                       double minimal_risk_ref, const SolverOptions& opts) {
  return std::max(0.0, minimal_regularized_risk(gram, y, loss, lambda, Regularizer::SquaredNorm, opts) -
                           minimal_risk_ref);
}

std::string to_string(LossKind k) {
  switch (k) {
    case LossKind::Squared: return "squared";
    case LossKind::Absolute: return "absolute";
    case LossKind::Hinge: return "hinge";
    case LossKind::EpsInsensitive: return "eps_insensitive";
  }
  return "unknown";
}

std::string to_string(Regularizer r) { return r == Regularizer::SquaredNorm ? "squared_norm" : "plain_norm"; }

}  // namespace mflk
