#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "mflk/kernels.hpp"
#include "mflk/linalg.hpp"
#include "mflk/measures.hpp"

namespace mflk {

/// f = sum_n alpha_n k(., c_n), an element of the pre-RKHS of `Kernel`.
/// Works for both levels: MeasureKernel over DiscreteMeasure centers and
/// FiniteKernel over Configuration centers.
template <class Kernel>
class RkhsFunction {
 public:
  using Input = kernel_input_t<Kernel>;

  RkhsFunction(Kernel kernel, std::vector<Input> centers, Eigen::VectorXd coeffs)
      : kernel_(std::move(kernel)), centers_(std::move(centers)), coeffs_(std::move(coeffs)) {
    if (static_cast<Eigen::Index>(centers_.size()) != coeffs_.size())
      throw std::invalid_argument("RkhsFunction: centers and coefficients differ in length");
    for (std::size_t i = 1; i < centers_.size(); ++i) {
      if (!(centers_[i].domain() == centers_[0].domain()))
        throw std::invalid_argument("RkhsFunction: centers live on different domains");
    }
    embedded_ = embed_all(kernel_, centers_);
  }

  /// The zero function (no centers).
  explicit RkhsFunction(Kernel kernel) : RkhsFunction(std::move(kernel), {}, Eigen::VectorXd(0)) {}

  /// The kernel section k(., c).
  static RkhsFunction section(Kernel kernel, Input c) {
    return RkhsFunction(std::move(kernel), std::vector<Input>{std::move(c)}, Eigen::VectorXd::Ones(1));
  }

  const Kernel& kernel() const { return kernel_; }
  const std::vector<Input>& centers() const { return centers_; }
  const Eigen::VectorXd& coeffs() const { return coeffs_; }
  const std::vector<Embedding>& embedded_centers() const { return embedded_; }
  int size() const { return static_cast<int>(centers_.size()); }

  double operator()(const Embedding& e) const {
    double v = 0.0;
    for (std::size_t n = 0; n < embedded_.size(); ++n) {
      if (embedded_[n].atoms.rows() != e.atoms.rows()) throw std::invalid_argument("RkhsFunction: domain mismatch");
      v += coeffs_[static_cast<Eigen::Index>(n)] * kernel_eval(kernel_, e, embedded_[n]);
    }
    return v;
  }

  double operator()(const Input& x) const {
    if (!centers_.empty() && !(x.domain() == centers_.front().domain()))
      throw std::invalid_argument("RkhsFunction: input domain mismatch");
    if (centers_.empty()) return 0.0;
    return (*this)(embed(kernel_, x));
  }

  Eigen::MatrixXd gram() const { return gram_matrix(kernel_, embedded_); }

 private:
  Kernel kernel_;
  std::vector<Input> centers_;
  Eigen::VectorXd coeffs_;
  std::vector<Embedding> embedded_;
};

template <class Kernel>
double eval(const RkhsFunction<Kernel>& f, const kernel_input_t<Kernel>& x) {
  return f(x);
}

/// <f, g> = sum_n sum_m alpha_n beta_m k(d_m, c_n).
template <class Kernel>
double inner(const RkhsFunction<Kernel>& f, const RkhsFunction<Kernel>& g) {
  if (!(f.kernel() == g.kernel())) throw std::invalid_argument("inner: kernel mismatch");
  if (f.size() == 0 || g.size() == 0) return 0.0;
  return f.coeffs().dot(cross_gram(f.kernel(), f.embedded_centers(), g.embedded_centers()) * g.coeffs());
}

template <class Kernel>
double norm(const RkhsFunction<Kernel>& f) {
  if (f.size() == 0) return 0.0;
  return std::sqrt(std::max(0.0, f.coeffs().dot(f.gram() * f.coeffs())));
}

namespace detail {

inline bool same_embedding(const Embedding& a, const Embedding& b) {
  return a.atoms.rows() == b.atoms.rows() && a.atoms.cols() == b.atoms.cols() && a.atoms == b.atoms &&
         a.weights == b.weights;
}

}  // namespace detail

/// a f + b g, with identical centers merged so cancellations happen in the
/// coefficients rather than in the quadratic form.
template <class Kernel>
RkhsFunction<Kernel> linear_combination(double a, const RkhsFunction<Kernel>& f, double b,
                                        const RkhsFunction<Kernel>& g) {
  if (!(f.kernel() == g.kernel())) throw std::invalid_argument("linear_combination: kernel mismatch");
  std::vector<kernel_input_t<Kernel>> centers = f.centers();
  std::vector<Embedding> emb = f.embedded_centers();
  std::vector<double> coef(f.coeffs().data(), f.coeffs().data() + f.coeffs().size());
  for (auto& c : coef) c *= a;
  for (int m = 0; m < g.size(); ++m) {
    const Embedding& e = g.embedded_centers()[static_cast<std::size_t>(m)];
    bool merged = false;
    for (std::size_t n = 0; n < emb.size(); ++n) {
      if (detail::same_embedding(emb[n], e)) {
        coef[n] += b * g.coeffs()[m];
        merged = true;
        break;
      }
    }
    if (!merged) {
      centers.push_back(g.centers()[static_cast<std::size_t>(m)]);
      emb.push_back(e);
      coef.push_back(b * g.coeffs()[m]);
    }
  }
  return RkhsFunction<Kernel>(f.kernel(), std::move(centers),
                              Eigen::Map<const Eigen::VectorXd>(coef.data(), static_cast<Eigen::Index>(coef.size())));
}

/// ||f - g|| in the RKHS.
template <class Kernel>
double distance(const RkhsFunction<Kernel>& f, const RkhsFunction<Kernel>& g) {
  return norm(linear_combination(1.0, f, -1.0, g));
}

/// Orthogonal projection of f onto span{k(., c_i)}: solves G beta = v with
/// v_i = f(c_i), using a pseudo-inverse when G is singular.
template <class Kernel>
RkhsFunction<Kernel> project_onto_span(const RkhsFunction<Kernel>& f,
                                       const std::vector<kernel_input_t<Kernel>>& centers) {
  if (centers.empty()) throw std::invalid_argument("project_onto_span: need at least one center");
  const auto emb = embed_all(f.kernel(), centers);
  Eigen::VectorXd v(static_cast<Eigen::Index>(centers.size()));
  for (std::size_t i = 0; i < emb.size(); ++i) v[static_cast<Eigen::Index>(i)] = f(emb[i]);
  const Eigen::MatrixXd g = gram_matrix(f.kernel(), emb);
  return RkhsFunction<Kernel>(f.kernel(), centers, pseudo_inverse_sym(g) * v);
}

struct NormCharacterization {
  double lower_bound = 0.0;    // max over candidate sets of sup_alpha D
  int best_set = -1;
  Eigen::VectorXd best_alpha;  // maximizing direction on the best set
  bool outside_range = false;  // some set had v outside range(G): D is unbounded there
};

/// Variational lower bound on ||f||_k from point evaluations only. For each
/// candidate center set the supremum over alpha of
///   sum_n alpha_n f(c_n) / sqrt(alpha^T G alpha)
/// equals sqrt(v^T G^+ v) (generalized Rayleigh quotient); the result is the
/// maximum over sets.
template <class Kernel>
NormCharacterization norm_characterization(const std::function<double(const kernel_input_t<Kernel>&)>& f_eval,
                                           const Kernel& k,
                                           const std::vector<std::vector<kernel_input_t<Kernel>>>& candidate_sets) {
  if (candidate_sets.empty()) throw std::invalid_argument("norm_characterization: need candidate sets");
  NormCharacterization out;
  for (std::size_t s = 0; s < candidate_sets.size(); ++s) {
    const auto& set = candidate_sets[s];
    if (set.empty()) continue;
    Eigen::VectorXd v(static_cast<Eigen::Index>(set.size()));
    for (std::size_t n = 0; n < set.size(); ++n) v[static_cast<Eigen::Index>(n)] = f_eval(set[n]);
    const Eigen::MatrixXd g = gram_matrix(k, set);
    const Eigen::MatrixXd gp = pseudo_inverse_sym(g);
    const Eigen::VectorXd alpha = gp * v;
    const double value = std::sqrt(std::max(0.0, v.dot(alpha)));
    if ((g * alpha - v).norm() > 1e-8 * (1.0 + v.norm())) out.outside_range = true;
    if (out.best_set < 0 || value > out.lower_bound) {
      out.lower_bound = value;
      out.best_set = static_cast<int>(s);
      out.best_alpha = alpha;
    }
  }
  return out;
}

/// Symmetric function on configurations with declared Lipschitz constant
/// (w.r.t. W1 of empirical measures) and sup bound.
struct SymmetricFiniteFunction {
  std::function<double(const Configuration&)> evaluator;
  double lipschitz = 0.0;
  double bound = 0.0;

  double operator()(const Configuration& x) const { return evaluator(x); }
  /// Bound carried over to the Lipschitz extension on measures.
  double extension_bound(const BoxDomain& domain) const { return bound + lipschitz * domain.diameter(); }
};

/// min over candidates x of f_M(x) + L_f W1(mu[x], mu). Upper bound on the
/// McShane extension at mu.
double mcshane_extend(const SymmetricFiniteFunction& f, int M, const DiscreteMeasure& mu,
                      const std::vector<Configuration>& candidates);

enum class CenterQuantization {
  Sample,             // i.i.d. draws from each center
  ExactWhenIntegral,  // replicate atoms when every M w_i is an integer, sample otherwise
};

/// Configuration standing in for mu at size M.
Configuration quantize_center(const DiscreteMeasure& mu, int M, Rng& rng,
                              CenterQuantization mode = CenterQuantization::ExactWhenIntegral);

/// f_M = sum_n alpha_n k_M(., x_n) with x_n a size-M configuration for center mu_n.
RkhsFunction<FiniteKernel> build_recovery_sequence(const RkhsFunction<MeasureKernel>& f, Estimator estimator, int M,
                                                   Rng& rng,
                                                   CenterQuantization mode = CenterQuantization::ExactWhenIntegral);

}  // namespace mflk
