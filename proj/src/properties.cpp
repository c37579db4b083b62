#include "mflk/properties.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mflk/learning.hpp"
#include "mflk/particles.hpp"
#include "mflk/report.hpp"

namespace mflk {

namespace {

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

std::vector<int> random_permutation(int n, Rng& rng) {
  std::vector<int> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

PropertyResult bounded(std::string id, double worst, double tol, const std::string& what) {
  return {std::move(id), worst <= tol, worst, what + " = " + format_double(worst) + " (tol " + format_double(tol) + ")"};
}

std::vector<MeasureKernel> limit_kernels() {
  std::vector<MeasureKernel> out;
  for (auto fam : {BaseFamily::Gaussian, BaseFamily::Laplace})
    for (auto outer : {OuterKind::LinearEmbedding, OuterKind::GaussianEmbedding, OuterKind::W1Exponential})
      out.emplace_back(BaseKernel(fam, 0.25), outer, 0.5);
  return out;
}

}  // namespace

PropertyResult check_transport_oracle(std::uint64_t seed) {
  Rng rng = derive_stream(seed, {1});
  const auto dom = BoxDomain::unit(1);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const auto mu = random_measure(dom, uniform_int(rng, 1, 20), rng);
    const auto nu = random_measure(dom, uniform_int(rng, 1, 20), rng);
    worst = std::max(worst, std::abs(wasserstein1(mu, nu).distance - wasserstein1_1d_oracle(mu, nu)));
  }
  return bounded("transport_oracle", worst, 1e-9, "max |W1 - quantile oracle| over 200 instances");
}

PropertyResult check_gram_psd(std::uint64_t seed) {
  Rng rng = derive_stream(seed, {2});
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& k : limit_kernels()) {
    if (!k.psd_guaranteed()) continue;
    for (int s = 0; s < 50; ++s) {
      const auto dom = BoxDomain::unit(1 + s % 2);
      std::vector<DiscreteMeasure> mus;
      const int n = uniform_int(rng, 2, 15);
      for (int i = 0; i < n; ++i) mus.push_back(random_measure(dom, uniform_int(rng, 1, 16), rng));
      worst = std::min(worst, min_eigenvalue(gram_matrix(k, mus)));
    }
  }
  return {"gram_psd", worst >= -1e-8, worst,
          "min eigenvalue over 50 sets per PSD kernel = " + format_double(worst) + " (floor -1e-8)"};
}

PropertyResult check_permutation_invariance(std::uint64_t seed) {
  Rng rng = derive_stream(seed, {3});
  const auto dom = BoxDomain::unit(2);
  double worst = 0.0;
  for (int t = 0; t < 5; ++t) {
    const int M = uniform_int(rng, 2, 12);
    const Configuration x = uniform_configuration(dom, M, rng);
    const Configuration y = uniform_configuration(dom, uniform_int(rng, 2, 12), rng);
    for (int p = 0; p < 10; ++p) {
      const Configuration xp = x.permuted(random_permutation(M, rng));
      for (const auto& k : limit_kernels())
        for (auto est : {Estimator::PlugIn, Estimator::UStatistic}) {
          const FiniteKernel fk(k, est);
          worst = std::max(worst, std::abs(finite_kernel_eval(fk, x, y) - finite_kernel_eval(fk, xp, y)));
        }
      for (auto kind : {FunctionalKind::Spread, FunctionalKind::Mean1D, FunctionalKind::InteractionEnergy})
        for (auto est : {Estimator::PlugIn, Estimator::UStatistic}) {
          TargetFunctional F;
          F.kind = kind;
          F.estimator = est;
          worst = std::max(worst, std::abs(functional_eval(F, x) - functional_eval(F, xp)));
        }
    }
  }
  return bounded("permutation_invariance", worst, 0.0, "max change under relabelling");
}

PropertyResult check_plugin_exactness(std::uint64_t seed) {
  Rng rng = derive_stream(seed, {4});
  const auto dom = BoxDomain::unit(1);
  double worst = 0.0;
  const auto kernels = limit_kernels();
  for (int t = 0; t < 100; ++t) {
    const auto& k = kernels[static_cast<std::size_t>(t) % kernels.size()];
    const FiniteKernel fk(k, Estimator::PlugIn);
    const Configuration x = uniform_configuration(dom, uniform_int(rng, 1, 20), rng);
    const Configuration y = uniform_configuration(dom, uniform_int(rng, 1, 20), rng);
    worst = std::max(worst, std::abs(finite_kernel_eval(fk, x, y) -
                                     measure_kernel_eval(k, empirical_measure(x), empirical_measure(y))));
  }
  return bounded("plugin_exactness", worst, 1e-12, "max |k_M(x, y) - k(mu[x], mu[y])| over 100 pairs");
}

PropertyResult check_norm_characterization(std::uint64_t seed) {
  Rng rng = derive_stream(seed, {5});
  const auto dom = BoxDomain::unit(1);
  const MeasureKernel k(BaseKernel(BaseFamily::Gaussian, 0.25), OuterKind::GaussianEmbedding, 0.5);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    std::vector<DiscreteMeasure> centers;
    const int c = uniform_int(rng, 1, 6);
    Eigen::VectorXd coeffs(c);
    for (int i = 0; i < c; ++i) {
      centers.push_back(random_measure(dom, uniform_int(rng, 1, 8), rng));
      coeffs[i] = 2.0 * uniform01(rng) - 1.0;
    }
    const RkhsFunction<MeasureKernel> f(k, centers, coeffs);
    const std::function<double(const DiscreteMeasure&)> fe = [&f](const DiscreteMeasure& mu) { return f(mu); };
    std::vector<std::vector<DiscreteMeasure>> sets{centers};
    for (int s = 0; s < 50; ++s) {
      std::vector<DiscreteMeasure> set;
      for (int i = 0, n = uniform_int(rng, 1, 7); i < n; ++i) set.push_back(random_measure(dom, 8, rng));
      sets.push_back(std::move(set));
    }
    const double fn = norm(f);
    const double own = norm_characterization(fe, k, {centers}).lower_bound;
    const double all = norm_characterization(fe, k, sets).lower_bound;
    worst = std::max({worst, std::abs(own - fn), all - fn});
  }
  return bounded("norm_characterization", worst, 1e-9,
                 "max of |bound on own centers - |f|| and (bound over 50 sets - |f|)");
}

PropertyResult check_solver_optimality(std::uint64_t seed) {
  Rng rng = derive_stream(seed, {6});
  const auto dom = BoxDomain::unit(1);
  const MeasureKernel k(BaseKernel(BaseFamily::Gaussian, 0.2), OuterKind::GaussianEmbedding, 0.5);
  const TargetRange Y;
  double worst = -std::numeric_limits<double>::infinity();
  for (auto kind : {LossKind::Squared, LossKind::Absolute, LossKind::Hinge, LossKind::EpsInsensitive}) {
    for (auto reg : {Regularizer::SquaredNorm, Regularizer::PlainNorm}) {
      const int n = 12;
      std::vector<DiscreteMeasure> mus;
      Eigen::VectorXd y(n);
      for (int i = 0; i < n; ++i) {
        mus.push_back(random_bump_measure(dom, 8, rng));
        const double m = mus.back().mean()[0];
        y[i] = kind == LossKind::Hinge ? (m > 0.5 ? 1.0 : -1.0) : Y.clip(2.0 * m - 1.0 + 0.1 * standard_normal(rng));
      }
      const Eigen::MatrixXd g = gram_matrix(k, mus);
      const Loss loss(kind, Y, 0.05);
      const auto rep = solve_regularized_erm(g, y, loss, 0.01, reg);
      const double base = erm_objective(g, y, loss, 0.01, reg, rep.alpha);
      for (int t = 0; t < 100; ++t) {
        Eigen::VectorXd dir(n);
        for (int i = 0; i < n; ++i) dir[i] = standard_normal(rng);
        const double scale = std::pow(10.0, -1.0 - 5.0 * uniform01(rng)) * (1.0 + rep.alpha.norm()) / dir.norm();
        worst = std::max(worst, base - erm_objective(g, y, loss, 0.01, reg, rep.alpha + scale * dir));
      }
    }
  }
  return bounded("solver_optimality", worst, 1e-9, "largest objective decrease from 100 perturbations per problem");
}

std::vector<PropertyResult> run_property_suite(std::uint64_t seed) {
  return {check_transport_oracle(seed),       check_gram_psd(seed),
          check_permutation_invariance(seed), check_plugin_exactness(seed),
          check_norm_characterization(seed),  check_solver_optimality(seed)};
}

}  // namespace mflk
