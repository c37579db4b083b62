#pragma once

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <vector>

#include "mflk/measures.hpp"

namespace mflk {

enum class BaseFamily { Gaussian, Laplace };

/// Translation-invariant point kernel on the box.
///   Gaussian: exp(-|a-b|^2 / (2 l^2))
///   Laplace:  exp(-|a-b| / l)
class BaseKernel {
 public:
  BaseKernel(BaseFamily family, double lengthscale);

  BaseFamily family() const { return family_; }
  double lengthscale() const { return lengthscale_; }

  double operator()(const Eigen::Ref<const Eigen::VectorXd>& a,
                    const Eigen::Ref<const Eigen::VectorXd>& b) const;

  /// Kernel matrix between the columns of `a` and `b`.
  Eigen::MatrixXd matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) const;

  /// sup |kappa|.
  double bound() const { return 1.0; }
  /// Global Lipschitz constant of kappa(., b) in the Euclidean metric.
  double lipschitz() const;
  /// Lipschitz constant shared by all unit-norm functions of the base RKHS,
  /// i.e. sup_{a != b} sqrt(2 - 2 kappa(a,b)) / |a-b|. Infinite for Laplace.
  double feature_lipschitz() const;

  bool operator==(const BaseKernel&) const = default;

 private:
  BaseFamily family_;
  double lengthscale_;
};

double base_eval(const BaseKernel& kappa, const Eigen::Ref<const Eigen::VectorXd>& a,
                 const Eigen::Ref<const Eigen::VectorXd>& b);

enum class OuterKind { LinearEmbedding, GaussianEmbedding, W1Exponential };

/// Kernel on probability measures built from a base kernel.
///   LinearEmbedding:   <m_mu, m_nu> = sum_ij w_i v_j kappa(a_i, b_j)
///   GaussianEmbedding: exp(-MMD^2(mu,nu) / (2 sigma^2))
///   W1Exponential:     exp(-W1(mu,nu) / sigma), not known to be PSD
class MeasureKernel {
 public:
  MeasureKernel(BaseKernel base, OuterKind outer, double sigma = 1.0);

  static MeasureKernel linear(BaseKernel base) { return {base, OuterKind::LinearEmbedding}; }
  static MeasureKernel gaussian(BaseKernel base, double sigma) {
    return {base, OuterKind::GaussianEmbedding, sigma};
  }
  static MeasureKernel w1_exponential(BaseKernel base, double sigma) {
    return {base, OuterKind::W1Exponential, sigma};
  }

  const BaseKernel& base() const { return base_; }
  OuterKind outer() const { return outer_; }
  double sigma() const { return sigma_; }

  bool psd_guaranteed() const { return outer_ != OuterKind::W1Exponential; }
  /// C_k: sup |k|.
  double bound() const;
  /// L_k: |k(m1,m1') - k(m2,m2')| <= L_k * dkr2((m1,m1'),(m2,m2')).
  double lipschitz() const;

  bool operator==(const MeasureKernel&) const = default;

 private:
  BaseKernel base_;
  OuterKind outer_;
  double sigma_;
};

enum class Estimator { PlugIn, UStatistic };

/// Kernel on M-point configurations. PlugIn evaluates the limit kernel on the
/// empirical measures. UStatistic replaces every self term <m_x, m_x> by the
/// off-diagonal mean (1/(M(M-1))) sum_{i != j} kappa(x_i, x_j); kernels with no
/// self terms (LinearEmbedding, W1Exponential) coincide with PlugIn.
class FiniteKernel {
 public:
  FiniteKernel(MeasureKernel limit, Estimator estimator) : limit_(limit), estimator_(estimator) {}

  const MeasureKernel& limit() const { return limit_; }
  Estimator estimator() const { return estimator_; }
  bool uses_ustatistic() const {
    return estimator_ == Estimator::UStatistic && limit_.outer() == OuterKind::GaussianEmbedding;
  }

  /// Smallest admissible configuration size.
  int min_size() const { return estimator_ == Estimator::UStatistic ? 2 : 1; }
  /// sup over M-point configurations of |k_M|, of the form C_k + c/M.
  double bound(int M) const;
  /// Lipschitz constant of k_M with respect to dkr2 of the empirical measures.
  double lipschitz(int M) const;

  bool operator==(const FiniteKernel&) const = default;

 private:
  MeasureKernel limit_;
  Estimator estimator_;
};

/// An input prepared for repeated kernel evaluation: atoms in canonical order
/// plus cached self inner products.
struct Embedding {
  Eigen::MatrixXd atoms;
  Eigen::VectorXd weights;
  double self_plugin = 0.0;  // <m, m>
  double self_ustat = 0.0;   // off-diagonal mean (configurations only)
  std::shared_ptr<const DiscreteMeasure> measure;  // kept for W1Exponential
};

Embedding embed(const MeasureKernel& k, const DiscreteMeasure& mu);
Embedding embed(const FiniteKernel& k, const Configuration& x);

double kernel_eval(const MeasureKernel& k, const Embedding& a, const Embedding& b);
double kernel_eval(const FiniteKernel& k, const Embedding& a, const Embedding& b);

/// sum_ij w_i v_j kappa(a_i, b_j)
double embedding_inner(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const BaseKernel& kappa);

/// Squared MMD, clipped at zero.
double mmd_sq(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const BaseKernel& kappa);

double measure_kernel_eval(const MeasureKernel& k, const DiscreteMeasure& mu, const DiscreteMeasure& nu);
double finite_kernel_eval(const FiniteKernel& k, const Configuration& x, const Configuration& x2);

inline double kernel_eval(const MeasureKernel& k, const DiscreteMeasure& a, const DiscreteMeasure& b) {
  return measure_kernel_eval(k, a, b);
}
inline double kernel_eval(const FiniteKernel& k, const Configuration& a, const Configuration& b) {
  return finite_kernel_eval(k, a, b);
}

template <class Kernel>
struct kernel_traits;
template <>
struct kernel_traits<MeasureKernel> {
  using input_type = DiscreteMeasure;
};
template <>
struct kernel_traits<FiniteKernel> {
  using input_type = Configuration;
};
template <class Kernel>
using kernel_input_t = typename kernel_traits<Kernel>::input_type;

template <class Kernel>
std::vector<Embedding> embed_all(const Kernel& k, const std::vector<kernel_input_t<Kernel>>& inputs) {
  std::vector<Embedding> out;
  out.reserve(inputs.size());
  for (const auto& in : inputs) out.push_back(embed(k, in));
  return out;
}

/// G(i,j) = k(e_i, e_j), evaluated once per unordered pair.
template <class Kernel>
Eigen::MatrixXd gram_matrix(const Kernel& k, const std::vector<Embedding>& emb) {
  const auto n = static_cast<Eigen::Index>(emb.size());
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      g(i, j) = kernel_eval(k, emb[static_cast<std::size_t>(i)], emb[static_cast<std::size_t>(j)]);
      g(j, i) = g(i, j);
    }
  }
  return g;
}

template <class Kernel>
Eigen::MatrixXd gram_matrix(const Kernel& k, const std::vector<kernel_input_t<Kernel>>& inputs) {
  return gram_matrix(k, embed_all(k, inputs));
}

/// C(i,j) = k(rows_i, cols_j).
template <class Kernel>
Eigen::MatrixXd cross_gram(const Kernel& k, const std::vector<Embedding>& rows, const std::vector<Embedding>& cols) {
  Eigen::MatrixXd c(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = kernel_eval(k, rows[i], cols[j]);
  return c;
}

/// Smallest eigenvalue of a symmetric matrix. Throws if G is not symmetric.
double min_eigenvalue(const Eigen::MatrixXd& g);

/// G + max(0, -lambda_min) I.
Eigen::MatrixXd clip_gram(const Eigen::MatrixXd& g);

/// Sampled lower bound on sup_{x,x'} |k_M(x,x') - k(mu[x], mu[x'])| over
/// n_samples random configuration pairs of size M.
double mfl_gap_estimate(const FiniteKernel& k, const BoxDomain& domain, int M, int n_samples, Rng& rng);

/// A configuration of M points uniform in a random sub-box of the domain.
Configuration random_subbox_configuration(const BoxDomain& domain, int M, Rng& rng);

std::string to_string(BaseFamily f);
std::string to_string(OuterKind k);
std::string to_string(Estimator e);

}  // namespace mflk
