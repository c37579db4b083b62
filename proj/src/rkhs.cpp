#include "mflk/rkhs.hpp"

#include <algorithm>
#include <cmath>

namespace mflk {

double mcshane_extend(const SymmetricFiniteFunction& f, int M, const DiscreteMeasure& mu,
                      const std::vector<Configuration>& candidates) {
  if (candidates.empty()) throw std::invalid_argument("mcshane_extend: empty candidate list");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& x : candidates) {
    if (x.size() != M) throw std::invalid_argument("mcshane_extend: candidate size differs from M");
    const double w1 = wasserstein1(empirical_measure(x), mu).distance;
    best = std::min(best, f(x) + f.lipschitz * w1);
  }
  return best;
}

Configuration quantize_center(const DiscreteMeasure& mu, int M, Rng& rng, CenterQuantization mode) {
  if (M < 1) throw std::invalid_argument("quantize_center: M must be >= 1");
  if (mode == CenterQuantization::ExactWhenIntegral) {
    const auto order = canonical_order(mu.atoms(), mu.weights());
    std::vector<int> counts;
    int total = 0;
    bool integral = true;
    for (int i : order) {
      const double c = mu.weights()[i] * M;
      const double r = std::round(c);
      if (std::abs(c - r) > 1e-9) {
        integral = false;
        break;
      }
      counts.push_back(static_cast<int>(r));
      total += static_cast<int>(r);
    }
    if (integral && total == M) {
      Eigen::MatrixXd pts(mu.dim(), M);
      int col = 0;
      for (std::size_t k = 0; k < order.size(); ++k)
        for (int r = 0; r < counts[k]; ++r) pts.col(col++) = mu.atom(order[k]);
      return Configuration(mu.domain(), std::move(pts));
    }
  }
  return sample_configuration(mu, M, rng);
}

RkhsFunction<FiniteKernel> build_recovery_sequence(const RkhsFunction<MeasureKernel>& f, Estimator estimator, int M,
                                                   Rng& rng, CenterQuantization mode) {
  FiniteKernel km(f.kernel(), estimator);
  if (M < km.min_size()) throw std::invalid_argument("build_recovery_sequence: M too small for estimator");
  std::vector<Configuration> centers;
  centers.reserve(f.centers().size());
  for (const auto& mu : f.centers()) centers.push_back(quantize_center(mu, M, rng, mode));
  return RkhsFunction<FiniteKernel>(km, std::move(centers), f.coeffs());
}

}  // namespace mflk
