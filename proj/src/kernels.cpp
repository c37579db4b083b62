#include "mflk/kernels.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mflk {

BaseKernel::BaseKernel(BaseFamily family, double lengthscale) : family_(family), lengthscale_(lengthscale) {
  if (!(lengthscale > 0.0) || !std::isfinite(lengthscale))
    throw std::invalid_argument("BaseKernel: lengthscale must be positive");
}

double BaseKernel::operator()(const Eigen::Ref<const Eigen::VectorXd>& a,
                              const Eigen::Ref<const Eigen::VectorXd>& b) const {
  const double r2 = (a - b).squaredNorm();
  if (family_ == BaseFamily::Gaussian) return std::exp(-r2 / (2.0 * lengthscale_ * lengthscale_));
  return std::exp(-std::sqrt(r2) / lengthscale_);
}

Eigen::MatrixXd BaseKernel::matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) const {
  if (a.rows() != b.rows()) throw std::invalid_argument("BaseKernel::matrix: dimension mismatch");
  Eigen::ArrayXXd d2 = Eigen::ArrayXXd::Zero(a.cols(), b.cols());
  for (Eigen::Index k = 0; k < a.rows(); ++k) {
    const Eigen::ArrayXXd diff = a.row(k).transpose().replicate(1, b.cols()).array().rowwise() - b.row(k).array();
    d2 += diff.square();
  }
  if (family_ == BaseFamily::Gaussian) return (-d2 / (2.0 * lengthscale_ * lengthscale_)).exp().matrix();
  return (-d2.sqrt() / lengthscale_).exp().matrix();
}

double BaseKernel::lipschitz() const {
  // Gaussian: |d/dr exp(-r^2/2l^2)| peaks at r = l with value 1/(l sqrt(e)).
  if (family_ == BaseFamily::Gaussian) return 1.0 / (lengthscale_ * std::sqrt(std::exp(1.0)));
  return 1.0 / lengthscale_;
}

double BaseKernel::feature_lipschitz() const {
  // 2 - 2 exp(-r^2/2l^2) <= r^2/l^2. The Laplace feature map is only 1/2-Hoelder.
  if (family_ == BaseFamily::Gaussian) return 1.0 / lengthscale_;
  return std::numeric_limits<double>::infinity();
}

double base_eval(const BaseKernel& kappa, const Eigen::Ref<const Eigen::VectorXd>& a,
                 const Eigen::Ref<const Eigen::VectorXd>& b) {
  return kappa(a, b);
}

MeasureKernel::MeasureKernel(BaseKernel base, OuterKind outer, double sigma)
    : base_(base), outer_(outer), sigma_(sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("MeasureKernel: sigma must be positive");
}

double MeasureKernel::bound() const { return 1.0; }

double MeasureKernel::lipschitz() const {
  switch (outer_) {
    case OuterKind::LinearEmbedding:
      return base_.lipschitz();
    case OuterKind::GaussianEmbedding:
      // |MMD(m1,m1') - MMD(m2,m2')| <= feature_lip * dkr2 and
      // |d/dt exp(-t^2/2s^2)| <= 1/(s sqrt(e)).
      return base_.feature_lipschitz() / (sigma_ * std::sqrt(std::exp(1.0)));
    case OuterKind::W1Exponential:
      return 1.0 / sigma_;
  }
  return std::numeric_limits<double>::infinity();
}

double FiniteKernel::bound(int M) const {
  if (!uses_ustatistic()) return limit_.bound();
  if (M < 2) throw std::invalid_argument("FiniteKernel::bound: U-statistic needs M >= 2");
  // The U-statistic MMD^2 is >= -2/M, so k_M <= exp(1/(M s^2)) <= 1 + c/M.
  const double s2 = limit_.sigma() * limit_.sigma();
  const double c = std::exp(1.0 / (2.0 * s2)) / s2;
  return limit_.bound() + c / static_cast<double>(M);
}

double FiniteKernel::lipschitz(int M) const {
  if (!uses_ustatistic()) return limit_.lipschitz();
  if (M < 2) throw std::invalid_argument("FiniteKernel::lipschitz: U-statistic needs M >= 2");
  const double s2 = limit_.sigma() * limit_.sigma();
  const double md = static_cast<double>(M);
  const double slope = std::exp(1.0 / (md * s2)) / (2.0 * s2);
  const double arg_lip = (2.0 * std::sqrt(2.0) + 2.0 / (md - 1.0)) * limit_.base().feature_lipschitz();
  return slope * arg_lip;
}

namespace {

double weighted_inner(const BaseKernel& kappa, const Eigen::MatrixXd& a, const Eigen::VectorXd& wa,
                      const Eigen::MatrixXd& b, const Eigen::VectorXd& wb) {
  return wa.dot(kappa.matrix(a, b) * wb);
}

void sort_columns(const DiscreteMeasure& mu, Eigen::MatrixXd& atoms, Eigen::VectorXd& weights) {
  const auto order = canonical_order(mu.atoms(), mu.weights());
  atoms.resize(mu.dim(), mu.size());
  weights.resize(mu.size());
  for (int i = 0; i < mu.size(); ++i) {
    atoms.col(i) = mu.atom(order[static_cast<std::size_t>(i)]);
    weights[i] = mu.weights()[order[static_cast<std::size_t>(i)]];
  }
}

double gaussian_of(double sq, double sigma) { return std::exp(-sq / (2.0 * sigma * sigma)); }

}  // namespace

double embedding_inner(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const BaseKernel& kappa) {
  if (mu.dim() != nu.dim()) throw std::invalid_argument("embedding_inner: domain mismatch");
  Eigen::MatrixXd a, b;
  Eigen::VectorXd wa, wb;
  sort_columns(mu, a, wa);
  sort_columns(nu, b, wb);
  return weighted_inner(kappa, a, wa, b, wb);
}

double mmd_sq(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const BaseKernel& kappa) {
  const double v = embedding_inner(mu, mu, kappa) + embedding_inner(nu, nu, kappa) - 2.0 * embedding_inner(mu, nu, kappa);
  return std::max(0.0, v);
}

Embedding embed(const MeasureKernel& k, const DiscreteMeasure& mu) {
  Embedding e;
  sort_columns(mu, e.atoms, e.weights);
  if (k.outer() == OuterKind::GaussianEmbedding)
    e.self_plugin = weighted_inner(k.base(), e.atoms, e.weights, e.atoms, e.weights);
  if (k.outer() == OuterKind::W1Exponential) e.measure = std::make_shared<const DiscreteMeasure>(mu);
  return e;
}

Embedding embed(const FiniteKernel& k, const Configuration& x) {
  const int m = x.size();
  if (m < k.min_size()) throw std::invalid_argument("finite kernel: U-statistic estimator needs M >= 2");
  const DiscreteMeasure emp = empirical_measure(x);
  Embedding e;
  sort_columns(emp, e.atoms, e.weights);
  if (k.limit().outer() == OuterKind::GaussianEmbedding) {
    const Eigen::MatrixXd kk = k.limit().base().matrix(e.atoms, e.atoms);
    e.self_plugin = e.weights.dot(kk * e.weights);
    if (m >= 2) {
      const double md = static_cast<double>(m);
      e.self_ustat = (kk.sum() - kk.trace()) / (md * (md - 1.0));
    }
  }
  if (k.limit().outer() == OuterKind::W1Exponential) e.measure = std::make_shared<const DiscreteMeasure>(emp);
  return e;
}

double kernel_eval(const MeasureKernel& k, const Embedding& a, const Embedding& b) {
  if (a.atoms.rows() != b.atoms.rows()) throw std::invalid_argument("kernel_eval: domain mismatch");
  switch (k.outer()) {
    case OuterKind::LinearEmbedding:
      return weighted_inner(k.base(), a.atoms, a.weights, b.atoms, b.weights);
    case OuterKind::GaussianEmbedding: {
      const double cross = weighted_inner(k.base(), a.atoms, a.weights, b.atoms, b.weights);
      return gaussian_of(std::max(0.0, a.self_plugin + b.self_plugin - 2.0 * cross), k.sigma());
    }
    case OuterKind::W1Exponential:
      return std::exp(-wasserstein1(*a.measure, *b.measure).distance / k.sigma());
  }
  return 0.0;
}

double kernel_eval(const FiniteKernel& k, const Embedding& a, const Embedding& b) {
  if (!k.uses_ustatistic()) return kernel_eval(k.limit(), a, b);
  if (a.atoms.rows() != b.atoms.rows()) throw std::invalid_argument("kernel_eval: domain mismatch");
  const auto& lim = k.limit();
  const double cross = weighted_inner(lim.base(), a.atoms, a.weights, b.atoms, b.weights);
  // No clipping: the unbiased squared distance may dip below zero by O(1/M).
  return gaussian_of(a.self_ustat + b.self_ustat - 2.0 * cross, lim.sigma());
}

double measure_kernel_eval(const MeasureKernel& k, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (!(mu.domain() == nu.domain())) throw std::invalid_argument("measure_kernel_eval: domain mismatch");
  return kernel_eval(k, embed(k, mu), embed(k, nu));
}

double finite_kernel_eval(const FiniteKernel& k, const Configuration& x, const Configuration& x2) {
  if (!(x.domain() == x2.domain())) throw std::invalid_argument("finite_kernel_eval: domain mismatch");
  return kernel_eval(k, embed(k, x), embed(k, x2));
}

double min_eigenvalue(const Eigen::MatrixXd& g) {
  if (g.rows() != g.cols() || g.rows() == 0) throw std::invalid_argument("min_eigenvalue: need a nonempty square matrix");
  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("min_eigenvalue: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Eigen::MatrixXd clip_gram(const Eigen::MatrixXd& g) {
  const double lmin = min_eigenvalue(g);
  if (lmin >= 0.0) return g;
  return g + (-lmin) * Eigen::MatrixXd::Identity(g.rows(), g.cols());
}

Configuration random_subbox_configuration(const BoxDomain& domain, int M, Rng& rng) {
  Eigen::VectorXd lo(domain.dim()), hi(domain.dim());
  for (int k = 0; k < domain.dim(); ++k) {
    const double full = domain.upper()[k] - domain.lower()[k];
    const double w = full * (0.05 + 0.95 * uniform01(rng));
    lo[k] = domain.lower()[k] + (full - w) * uniform01(rng);
    hi[k] = std::min(lo[k] + w, domain.upper()[k]);
  }
  Eigen::MatrixXd pts(domain.dim(), M);
  for (int i = 0; i < M; ++i)
    for (int k = 0; k < domain.dim(); ++k) pts(k, i) = lo[k] + (hi[k] - lo[k]) * uniform01(rng);
  return Configuration(domain, std::move(pts));
}

double mfl_gap_estimate(const FiniteKernel& k, const BoxDomain& domain, int M, int n_samples, Rng& rng) {
  if (M < k.min_size()) throw std::invalid_argument("mfl_gap_estimate: M too small for estimator");
  double gap = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    const Configuration x = random_subbox_configuration(domain, M, rng);
    const Configuration x2 = random_subbox_configuration(domain, M, rng);
    const double finite = finite_kernel_eval(k, x, x2);
    const double limit = measure_kernel_eval(k.limit(), empirical_measure(x), empirical_measure(x2));
    gap = std::max(gap, std::abs(finite - limit));
  }
  return gap;
}

std::string to_string(BaseFamily f) { return f == BaseFamily::Gaussian ? "gaussian" : "laplace"; }

std::string to_string(OuterKind k) {
  switch (k) {
    case OuterKind::LinearEmbedding: return "linear_embedding";
    case OuterKind::GaussianEmbedding: return "gaussian_embedding";
    case OuterKind::W1Exponential: return "w1_exponential";
  }
  return "unknown";
}

std::string to_string(Estimator e) { return e == Estimator::PlugIn ? "plug_in" : "u_statistic"; }

}  // namespace mflk
