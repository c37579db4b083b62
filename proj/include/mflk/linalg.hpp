#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <stdexcept>

namespace mflk {

/// Moore-Penrose inverse of a symmetric matrix. Eigenvalues with magnitude
/// below rel_tol * max|eigenvalue| are treated as zero.
template <class Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> pseudo_inverse_sym(
    const Eigen::MatrixBase<Derived>& g, typename Derived::Scalar rel_tol = 1e-10) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (g.rows() != g.cols()) throw std::invalid_argument("pseudo_inverse_sym: matrix must be square");
  if (g.rows() == 0) return Mat(0, 0);
  Eigen::SelfAdjointEigenSolver<Mat> es(g.eval());
  const auto& ev = es.eigenvalues();
  const Scalar cutoff = rel_tol * ev.cwiseAbs().maxCoeff();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> inv(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) inv[i] = std::abs(ev[i]) > cutoff ? Scalar(1) / ev[i] : Scalar(0);
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

/// Factor a PSD matrix as G = B B^T with B = U_r diag(sqrt(s_r)), keeping the
/// eigenpairs above rel_tol * s_max. `basis` holds U_r and `spectrum` s_r.
template <class Scalar = double>
struct PsdFactor {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Mat basis;
  Vec spectrum;

  explicit PsdFactor(const Mat& g, Scalar rel_tol = Scalar(1e-12)) {
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    const Vec& ev = es.eigenvalues();
    const Scalar smax = ev.size() ? ev.maxCoeff() : Scalar(0);
    Eigen::Index keep = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
      if (ev[i] > rel_tol * smax && ev[i] > Scalar(0)) ++keep;
    basis.resize(g.rows(), keep);
    spectrum.resize(keep);
    Eigen::Index c = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      if (ev[i] > rel_tol * smax && ev[i] > Scalar(0)) {
        basis.col(c) = es.eigenvectors().col(i);
        spectrum[c] = ev[i];
        ++c;
      }
    }
  }

  Eigen::Index rank() const { return spectrum.size(); }
  /// B = U_r diag(sqrt(s)).
  Mat factor() const { return basis * spectrum.cwiseSqrt().asDiagonal(); }
  /// Coefficients alpha with G alpha = B beta and alpha^T G alpha = |beta|^2.
  Vec coefficients(const Vec& beta) const { return basis * (beta.array() / spectrum.array().sqrt()).matrix(); }
};

}  // namespace mflk
