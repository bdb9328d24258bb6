#pragma once

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "bandfrac/band_fraction.hpp"
#include "bandfrac/banded.hpp"
#include "bandfrac/core.hpp"
#include "bandfrac/types.hpp"

namespace bandfrac {

/// Prescribed pole list for the single-input constructions. Each lambda must
/// satisfy |lambda| < 1 strictly; the derived quantities are
///   rho_k   = sqrt(1 - |lambda_k|^2)
///   mu_k    = rho_{k+1} / rho_k
///   gamma_k = conj(lambda_k) * mu_k.
template <typename Scalar>
class EigenSpec {
 public:
  using Real = real_t<Scalar>;

  explicit EigenSpec(std::vector<Scalar> lambdas) : lambdas_(std::move(lambdas)) {
    require(!lambdas_.empty(), ErrorKind::DimensionMismatch, "need at least one eigenvalue");
    rho_.resize(lambdas_.size());
    for (std::size_t k = 0; k < lambdas_.size(); ++k) {
      const Real mag2 = Eigen::numext::abs2(lambdas_[k]);
      if (!(mag2 < Real(1)))
        fail(ErrorKind::UnstableEigenvalue,
             "|lambda_" + std::to_string(k + 1) + "| >= 1");
      rho_[k] = std::sqrt(Real(1) - mag2);
    }
  }

  Index order() const { return static_cast<Index>(lambdas_.size()); }
  const std::vector<Scalar>& lambdas() const { return lambdas_; }

  Scalar lambda(Index k) const { return lambdas_[static_cast<std::size_t>(k)]; }
  Real rho(Index k) const { return rho_[static_cast<std::size_t>(k)]; }
  Real mu(Index k) const { return rho(k + 1) / rho(k); }
  Scalar gamma(Index k) const { return Eigen::numext::conj(lambda(k)) * mu(k); }

  Real spectral_radius() const {
    Real r = 0;
    for (const Scalar& l : lambdas_) r = std::max(r, Eigen::numext::abs(l));
    return r;
  }

  bool ascending_magnitude() const {
    for (Index k = 0; k + 1 < order(); ++k)
      if (Eigen::numext::abs(lambda(k + 1)) < Eigen::numext::abs(lambda(k))) return false;
    return true;
  }

 private:
  std::vector<Scalar> lambdas_;
  std::vector<Real> rho_;
};

/// Stable sort of the poles by ascending magnitude; ties keep input order.
template <typename Scalar>
EigenSpec<Scalar> sort_ascending(const EigenSpec<Scalar>& spec) {
  std::vector<Scalar> sorted = spec.lambdas();
  std::stable_sort(sorted.begin(), sorted.end(), [](const Scalar& a, const Scalar& b) {
    return Eigen::numext::abs(a) < Eigen::numext::abs(b);
  });
  return EigenSpec<Scalar>(std::move(sorted));
}

/// Bidiagonal fraction with the prescribed poles:
///   M = bidiag(1, ..., 1        ; gamma_1, ..., gamma_{n-1})
///   N = bidiag(lambda_1..lambda_n; mu_1, ..., mu_{n-1})
///   Bhat = rho_1 e_1.
/// The induced pair (M^{-1}N, M^{-1}Bhat) is TIN with eigenvalues lambda_k.
template <typename Scalar>
BandFraction<Scalar> bidiag_from_eigenvalues(const EigenSpec<Scalar>& spec) {
  const Index n = spec.order();
  const Index band = n > 1 ? 1 : 0;
  BandFraction<Scalar> rep;
  rep.M = LowerBanded<Scalar>(n, band);
  rep.N = LowerBanded<Scalar>(n, band);
  rep.M.diagonal(0).setOnes();
  for (Index k = 0; k < n; ++k) rep.N.diagonal(0)(k) = spec.lambda(k);
  if (band == 1) {
    for (Index k = 0; k + 1 < n; ++k) {
      rep.M.diagonal(1)(k) = spec.gamma(k);
      rep.N.diagonal(1)(k) = Scalar(spec.mu(k));
    }
  }
  rep.Bhat = MatrixX<Scalar>::Zero(n, 1);
  rep.Bhat(0, 0) = Scalar(spec.rho(0));
  return rep;
}

/// The same fraction rescaled row-wise by diag(1/rho_k):
///   M0 = bidiag(c_k; conj(s_k)),  N0 = bidiag(s_k; c_k)
/// with c_k = 1/rho_k and s_k = lambda_k/rho_k. M0^{-1} N0 = M^{-1} N.
template <typename Scalar>
std::pair<LowerBanded<Scalar>, LowerBanded<Scalar>> normalized_bidiag(
    const EigenSpec<Scalar>& spec) {
  using Real = real_t<Scalar>;
  const Index n = spec.order();
  const Index band = n > 1 ? 1 : 0;
  LowerBanded<Scalar> m0(n, band);
  LowerBanded<Scalar> n0(n, band);
  for (Index k = 0; k < n; ++k) {
    const Real c = Real(1) / spec.rho(k);
    m0.diagonal(0)(k) = Scalar(c);
    n0.diagonal(0)(k) = spec.lambda(k) / spec.rho(k);
  }
  if (band == 1) {
    for (Index k = 0; k + 1 < n; ++k) {
      m0.diagonal(1)(k) = Eigen::numext::conj(n0.diagonal(0)(k));
      n0.diagonal(1)(k) = m0.diagonal(0)(k);
    }
  }
  return {std::move(m0), std::move(n0)};
}

/// Closed-form inverse of the bidiagonal M: unit diagonal and, for i > j,
///   (M^{-1})_{i,j} = (-1)^{i-j} * (rho_i / rho_j) * prod_{j <= k < i} conj(lambda_k).
template <typename Scalar>
MatrixX<Scalar> m_inverse_closed_form(const EigenSpec<Scalar>& spec) {
  const Index n = spec.order();
  MatrixX<Scalar> inv = MatrixX<Scalar>::Identity(n, n);
  for (Index j = 0; j < n; ++j) {
    Scalar prod = Scalar(1);
    for (Index i = j + 1; i < n; ++i) {
      prod *= -Eigen::numext::conj(spec.lambda(i - 1)) * Scalar(spec.mu(i - 1));
      inv(i, j) = prod;
    }
  }
  return inv;
}

/// Eigenvector matrix V of A = M^{-1}N, normalized to V_kk = 1: for j > k,
///   V_{jk} = rho_j rho_k / (lambda_k - lambda_j)
///            * prod_{k < j' < j} (1 - lambda_k conj(lambda_{j'})) / (lambda_k - lambda_{j'}).
/// Requires pairwise distinct eigenvalues; satisfies N V = M V Lambda.
template <typename Scalar>
MatrixX<Scalar> eigenvector_matrix(const EigenSpec<Scalar>& spec) {
  const Index n = spec.order();
  for (Index a = 0; a < n; ++a)
    for (Index b = a + 1; b < n; ++b)
      if (spec.lambda(a) == spec.lambda(b))
        fail(ErrorKind::RepeatedEigenvalue,
             "lambda_" + std::to_string(a + 1) + " equals lambda_" + std::to_string(b + 1));

  MatrixX<Scalar> v = MatrixX<Scalar>::Identity(n, n);
  for (Index k = 0; k < n; ++k) {
    Scalar bracket = Scalar(1);
    for (Index j = k + 1; j < n; ++j) {
      v(j, k) = Scalar(spec.rho(j)) * Scalar(spec.rho(k)) * bracket /
                (spec.lambda(k) - spec.lambda(j));
      bracket *= (Scalar(1) - spec.lambda(k) * Eigen::numext::conj(spec.lambda(j))) /
                 (spec.lambda(k) - spec.lambda(j));
    }
  }
  return v;
}

/// Conditioning summary of the bidiagonal M. When the pole magnitudes are in
/// ascending order, every strict-lower entry of M^{-1} has magnitude < 1 and
/// kappa2 <= 2n.
struct ConditioningReport {
  double max_entry = 0;      // largest |M^{-1}| entry below the diagonal
  double kappa1 = 1;         // 1-norm condition number of M
  double kappa_inf = 1;      // infinity-norm condition number of M
  double kappa2 = 1;         // 2-norm condition number, by SVD
  double kappa2_bound = 1;   // sqrt(kappa1 * kappa_inf)
  bool ascending = false;    // pole magnitudes nondecreasing
};

template <typename Scalar>
ConditioningReport conditioning_report(const EigenSpec<Scalar>& spec) {
  const MatrixX<Scalar> minv = m_inverse_closed_form(spec);
  const MatrixX<Scalar> m = bidiag_from_eigenvalues(spec).M.dense();
  const Index n = spec.order();

  ConditioningReport report;
  report.ascending = spec.ascending_magnitude();
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i)
      report.max_entry = std::max<double>(report.max_entry, Eigen::numext::abs(minv(i, j)));

  const auto col_norm = [](const MatrixX<Scalar>& x) {
    return x.cwiseAbs().colwise().sum().maxCoeff();
  };
  const auto row_norm = [](const MatrixX<Scalar>& x) {
    return x.cwiseAbs().rowwise().sum().maxCoeff();
  };
  report.kappa1 = static_cast<double>(col_norm(m) * col_norm(minv));
  report.kappa_inf = static_cast<double>(row_norm(m) * row_norm(minv));
  report.kappa2_bound = std::sqrt(report.kappa1 * report.kappa_inf);

  Eigen::BDCSVD<MatrixX<Scalar>> svd(m);
  const auto& sv = svd.singularValues();
  report.kappa2 = static_cast<double>(sv(0) / sv(sv.size() - 1));
  return report;
}

/// Impulse responses of the orthonormal basis functions: row k holds the
/// first T leads of the k-th basis transfer function, generated by the banded
/// advance driven with a unit impulse. Column j corresponds to time j - alpha
/// (alpha is 0 or 1, the leading shift factor); the stored values coincide for
/// both conventions.
template <typename Scalar>
MatrixX<Scalar> basis_functions(const EigenSpec<Scalar>& spec, int alpha, Index T) {
  require(alpha == 0 || alpha == 1, ErrorKind::DimensionMismatch, "alpha must be 0 or 1");
  require(T >= 1, ErrorKind::DimensionMismatch, "T must be >= 1");
  const BandFraction<Scalar> rep = bidiag_from_eigenvalues(spec);
  const Index n = spec.order();

  MatrixX<Scalar> out(n, T);
  VectorX<Scalar> z = rep.Bhat.col(0);  // impulse enters through Bhat
  rep.M.solve_unit_in_place(z);
  out.col(0) = z;
  for (Index t = 1; t < T; ++t) {
    z = rep.N.apply(z);
    rep.M.solve_unit_in_place(z);
    out.col(t) = z;
  }
  return out;
}

}  // namespace bandfrac
