#pragma once

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "bandfrac/core.hpp"
#include "bandfrac/types.hpp"

namespace bandfrac {

/// Solution of P - A P A* = B B* with the achieved residual and the number
/// of squaring-doubling steps taken.
template <typename Scalar>
struct SteinSolution {
  MatrixX<Scalar> P;
  real_t<Scalar> residual = 0;
  int iterations = 0;
};

enum class SimilarityKind { general, unitary };

/// Invertible change of basis (A,B) -> (T A T^{-1}, T B).
template <typename Scalar>
struct Similarity {
  MatrixX<Scalar> T;
  MatrixX<Scalar> Tinv;
  SimilarityKind kind = SimilarityKind::general;

  real_t<Scalar> inverse_residual() const {
    return max_norm((T * Tinv - MatrixX<Scalar>::Identity(T.rows(), T.cols())).eval());
  }
};

/// Requested arrangement of the eigenvalues along the triangular diagonal.
/// Explicit permutations index the as-computed eigenvalue list.
struct EigenvalueOrder {
  enum class Kind { AsComputed, AscendingMagnitude, Explicit };
  Kind kind = Kind::AsComputed;
  std::vector<Index> permutation;

  static EigenvalueOrder as_computed() { return {}; }
  static EigenvalueOrder ascending() { return {Kind::AscendingMagnitude, {}}; }
  static EigenvalueOrder explicit_order(std::vector<Index> perm) {
    return {Kind::Explicit, std::move(perm)};
  }
};

/// Spectral radius estimate by normalized power iteration, returning the
/// geometric mean growth rate over `iters` steps.
template <typename Scalar>
real_t<Scalar> spectral_radius_estimate(const MatrixX<Scalar>& A, int iters = 200) {
  using Real = real_t<Scalar>;
  const Index n = A.rows();
  require(n == A.cols(), ErrorKind::DimensionMismatch, "square matrix required");
  VectorX<Scalar> v(n);
  for (Index i = 0; i < n; ++i) v(i) = Scalar(Real(1) + Real(i) / Real(8 * n + 1));
  v.normalize();
  Real log_growth = 0;
  for (int it = 0; it < iters; ++it) {
    v = A * v;
    const Real norm = v.norm();
    if (norm == Real(0)) return Real(0);  // nilpotent in exact arithmetic
    log_growth += std::log(norm);
    v /= norm;
  }
  return std::exp(log_growth / Real(iters));
}

namespace detail {

constexpr double kStabilityMargin = 1e-8;

template <typename Scalar>
void check_stable(const MatrixX<Scalar>& A) {
  const auto radius = spectral_radius_estimate(A);
  if (!(radius < real_t<Scalar>(1) - real_t<Scalar>(kStabilityMargin)))
    fail(ErrorKind::NotStable,
         "spectral radius estimate " + std::to_string(static_cast<double>(radius)));
}

}  // namespace detail

/// Sums P = sum_j A^j B B* A^{j*} by squaring-doubling:
///   P <- P + S P S*,  S <- S^2
/// until the update falls below 1e-14 * ||P|| in max norm.
template <typename Scalar>
SteinSolution<Scalar> solve_stein(const InputPair<Scalar>& pair) {
  using Real = real_t<Scalar>;
  detail::check_stable(pair.A);

  MatrixX<Scalar> P = pair.B * pair.B.adjoint();
  MatrixX<Scalar> S = pair.A;
  int iterations = 0;
  bool converged = false;
  for (int k = 0; k < 64; ++k) {
    const MatrixX<Scalar> update = S * P * S.adjoint();
    P += update;
    S = S * S;
    ++iterations;
    if (max_norm(update) < Real(1e-14) * max_norm(P)) {
      converged = true;
      break;
    }
  }
  if (!converged)
    fail(ErrorKind::NoConvergence, "Stein doubling did not converge within 64 steps");

  P = ((P + P.adjoint()) / Real(2)).eval();
  SteinSolution<Scalar> out;
  out.residual = max_norm((P - pair.A * P * pair.A.adjoint() - pair.B * pair.B.adjoint()).eval());
  out.iterations = iterations;
  out.P = std::move(P);
  return out;
}

/// Cholesky factor with positive diagonal, P = L L*. Reads the lower
/// triangle of P (Hermitian input assumed). A nonpositive pivot raises
/// NotPositiveDefinite with its index.
template <typename Scalar>
MatrixX<Scalar> cholesky_lower(const MatrixX<Scalar>& P) {
  using Real = real_t<Scalar>;
  const Index n = P.rows();
  require(n == P.cols(), ErrorKind::DimensionMismatch, "square matrix required");
  MatrixX<Scalar> L = MatrixX<Scalar>::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    Real pivot = Eigen::numext::real(P(j, j));
    for (Index k = 0; k < j; ++k) pivot -= Eigen::numext::abs2(L(j, k));
    if (!(pivot > Real(0)))
      fail(ErrorKind::NotPositiveDefinite, "pivot " + std::to_string(static_cast<double>(pivot)) +
                                               " at index " + std::to_string(j));
    const Real diag = std::sqrt(pivot);
    L(j, j) = Scalar(diag);
    for (Index i = j + 1; i < n; ++i) {
      Scalar acc = P(i, j);
      for (Index k = 0; k < j; ++k) acc -= L(i, k) * Eigen::numext::conj(L(j, k));
      L(i, j) = acc / Scalar(diag);
    }
  }
  return L;
}

namespace detail {

template <typename Scalar>
struct EigenPairs {
  VectorX<Scalar> values;
  MatrixX<Scalar> vectors;  // columns
};

inline bool magnitude_less(const std::complex<double>& a, const std::complex<double>& b) {
  // Magnitude ties resolved by real then imaginary part; a relative fuzz
  // keeps conjugate pairs ordered consistently across runs.
  const double fuzz = 1e-9;
  const double ma = std::abs(a), mb = std::abs(b);
  if (std::abs(ma - mb) > fuzz * (1.0 + mb)) return ma < mb;
  if (std::abs(a.real() - b.real()) > fuzz * (1.0 + std::abs(b.real())))
    return a.real() < b.real();
  return a.imag() < b.imag();
}

inline bool magnitude_less(double a, double b) {
  const double fuzz = 1e-9;
  if (std::abs(std::abs(a) - std::abs(b)) > fuzz * (1.0 + std::abs(b)))
    return std::abs(a) < std::abs(b);
  return a < b;
}

template <typename Scalar>
EigenPairs<Scalar> eigen_decompose(const MatrixX<Scalar>& A) {
  EigenPairs<Scalar> out;
  if constexpr (is_complex_v<Scalar>) {
    Eigen::ComplexEigenSolver<MatrixX<Scalar>> solver(A);
    require(solver.info() == Eigen::Success, ErrorKind::EigenFailure,
            "eigenvalue iteration did not converge");
    out.values = solver.eigenvalues();
    out.vectors = solver.eigenvectors();
  } else {
    Eigen::EigenSolver<MatrixX<Scalar>> solver(A);
    require(solver.info() == Eigen::Success, ErrorKind::EigenFailure,
            "eigenvalue iteration did not converge");
    const auto values = solver.eigenvalues();
    for (Index i = 0; i < values.size(); ++i)
      if (values(i).imag() != 0.0)
        fail(ErrorKind::EigenFailure,
             "complex eigenvalues in real mode; rerun with complex scalars");
    out.values = values.real();
    out.vectors = solver.eigenvectors().real();
  }
  return out;
}

template <typename Scalar>
bool exactly_lower_triangular(const MatrixX<Scalar>& A) {
  for (Index i = 0; i < A.rows(); ++i)
    for (Index j = i + 1; j < A.cols(); ++j)
      if (A(i, j) != Scalar(0)) return false;
  return true;
}

}  // namespace detail

/// Unitary similarity Q A Q* = Atri with Atri lower triangular and the
/// eigenvalues arranged along the diagonal per `order`. Route: eigenvector
/// QR re-orthonormalization in reversed order, then conjugation by the
/// index-reversal permutation. Strict upper entries are checked against
/// 1e-9 * ||A||_max and then zeroed.
template <typename Scalar>
std::pair<MatrixX<Scalar>, MatrixX<Scalar>> schur_lower(const MatrixX<Scalar>& A,
                                                        const EigenvalueOrder& order) {
  using Real = real_t<Scalar>;
  const Index n = A.rows();
  require(n == A.cols(), ErrorKind::DimensionMismatch, "square matrix required");

  if (order.kind == EigenvalueOrder::Kind::AsComputed && detail::exactly_lower_triangular(A))
    return {MatrixX<Scalar>::Identity(n, n), A};

  auto eig = detail::eigen_decompose(A);

  std::vector<Index> target(static_cast<std::size_t>(n));
  std::iota(target.begin(), target.end(), Index(0));
  switch (order.kind) {
    case EigenvalueOrder::Kind::AsComputed:
      break;
    case EigenvalueOrder::Kind::AscendingMagnitude:
      std::stable_sort(target.begin(), target.end(), [&](Index a, Index b) {
        return detail::magnitude_less(eig.values(a), eig.values(b));
      });
      break;
    case EigenvalueOrder::Kind::Explicit: {
      require(static_cast<Index>(order.permutation.size()) == n, ErrorKind::ReorderFailure,
              "permutation length must equal the order");
      std::vector<bool> seen(static_cast<std::size_t>(n), false);
      for (Index p : order.permutation) {
        require(p >= 0 && p < n && !seen[static_cast<std::size_t>(p)],
                ErrorKind::ReorderFailure, "invalid permutation");
        seen[static_cast<std::size_t>(p)] = true;
      }
      target = order.permutation;
      break;
    }
  }

  // Columns in reverse of the requested diagonal order, so the reversal
  // permutation lands the eigenvalues where they were asked for.
  MatrixX<Scalar> w(n, n);
  for (Index c = 0; c < n; ++c) w.col(c) = eig.vectors.col(target[static_cast<std::size_t>(n - 1 - c)]);

  Eigen::HouseholderQR<MatrixX<Scalar>> qr(w);
  const MatrixX<Scalar> r = qr.matrixQR().template triangularView<Eigen::Upper>();
  Real rmin = std::numeric_limits<Real>::max(), rmax = 0;
  for (Index i = 0; i < n; ++i) {
    const Real mag = Eigen::numext::abs(r(i, i));
    rmin = std::min(rmin, mag);
    rmax = std::max(rmax, mag);
  }
  if (!(rmin > Real(1e-12) * rmax))
    fail(ErrorKind::EigenFailure, "eigenvector matrix is numerically singular");
  const MatrixX<Scalar> q = qr.householderQ();

  MatrixX<Scalar> upper = q.adjoint() * A * q;

  // Conjugate by the reversal permutation: lower triangular, requested order.
  MatrixX<Scalar> tri(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) tri(i, j) = upper(n - 1 - i, n - 1 - j);
  MatrixX<Scalar> qtot(n, n);
  for (Index i = 0; i < n; ++i) qtot.row(i) = q.col(n - 1 - i).adjoint();

  Real strict_upper = 0;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      strict_upper = std::max(strict_upper, Eigen::numext::abs(tri(i, j)));
  if (strict_upper > Real(1e-9) * max_norm(A))
    fail(ErrorKind::EigenFailure, "triangularization residual " +
                                      std::to_string(static_cast<double>(strict_upper)));
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) tri(i, j) = Scalar(0);

  return {std::move(qtot), std::move(tri)};
}

/// Rank of the controllability block (B, AB, ..., A^{n-1}B) via singular
/// values, relative threshold 1e-10.
template <typename Scalar>
bool is_controllable(const InputPair<Scalar>& pair) {
  const Index n = pair.order();
  const Index d = pair.inputs();
  MatrixX<Scalar> krylov(n, n * d);
  MatrixX<Scalar> lead = pair.B;
  for (Index j = 0; j < n; ++j) {
    krylov.middleCols(j * d, d) = lead;
    if (j + 1 < n) lead = pair.A * lead;
  }
  Eigen::BDCSVD<MatrixX<Scalar>> svd(krylov);
  const auto& sv = svd.singularValues();
  return sv(n - 1) > real_t<Scalar>(1e-10) * sv(0);
}

/// Full reduction to triangular input-normal form: T = Q L^{-1} with L the
/// Cholesky factor of the controllability Grammian and Q from the ordered
/// lower Schur step. An ill-conditioned Grammian amplifies the Stein residual
/// through L^{-1}, so the normalization refines itself: the Stein equation is
/// re-solved in the transformed coordinates (where P is near the identity)
/// until the input-normal defect bottoms out. The result validates at
/// 1e-10 * n.
template <typename Scalar>
std::pair<TinPair<Scalar>, Similarity<Scalar>> to_tin(const InputPair<Scalar>& pair,
                                                      const EigenvalueOrder& order) {
  using Real = real_t<Scalar>;
  const Index n = pair.order();
  detail::check_stable(pair.A);
  if (!is_controllable(pair)) fail(ErrorKind::NotControllable, "Krylov block is rank deficient");

  MatrixX<Scalar> a_hat = pair.A;
  MatrixX<Scalar> b_hat = pair.B;
  MatrixX<Scalar> l_total = MatrixX<Scalar>::Identity(n, n);
  for (int pass = 0; pass < 3; ++pass) {
    const SteinSolution<Scalar> stein = solve_stein(InputPair<Scalar>(a_hat, b_hat));
    const MatrixX<Scalar> L = cholesky_lower(stein.P);
    const auto lower = L.template triangularView<Eigen::Lower>();
    a_hat = lower.solve((a_hat * L).eval());
    b_hat = lower.solve(b_hat);
    l_total = l_total * L;
    const Real defect = tin_residual(InputPair<Scalar>(a_hat, b_hat));
    if (defect <= Real(1e-13) * Real(n)) break;
  }

  auto [q, a_tri] = schur_lower(a_hat, order);

  InputPair<Scalar> reduced(a_tri, q * b_hat);
  TinPair<Scalar> tin = validate_tin(reduced, Real(1e-10) * Real(n));

  Similarity<Scalar> sim;
  sim.T = l_total.template triangularView<Eigen::Lower>().solve(
      MatrixX<Scalar>::Identity(n, n));
  sim.T = q * sim.T;
  sim.Tinv = l_total * q.adjoint();
  const Real unitary_defect =
      max_norm((sim.T * sim.T.adjoint() - MatrixX<Scalar>::Identity(n, n)).eval());
  sim.kind = unitary_defect <= Real(1e-10) * Real(n) ? SimilarityKind::unitary
                                                     : SimilarityKind::general;
  return {std::move(tin), std::move(sim)};
}

/// Builds A = Cholesky(I - B B*) diag(phases); (A, B) is then TIN. Phases
/// must be unit modulus (signs in the real case).
template <typename Scalar>
TinPair<Scalar> tin_from_b(const MatrixX<Scalar>& B, const VectorX<Scalar>& phases) {
  using Real = real_t<Scalar>;
  const Index n = B.rows();
  require(phases.size() == n, ErrorKind::DimensionMismatch, "need one phase per row");
  for (Index i = 0; i < n; ++i)
    require(std::abs(Eigen::numext::abs(phases(i)) - Real(1)) <= Real(1e-12),
            ErrorKind::DimensionMismatch, "phases must have unit modulus");
  const MatrixX<Scalar> gram =
      MatrixX<Scalar>::Identity(n, n) - B * B.adjoint();
  MatrixX<Scalar> A = cholesky_lower(gram);
  A = A * phases.asDiagonal();
  return validate_tin(InputPair<Scalar>(A, B));
}

/// Searches for a diagonal unitary E with E A1 E* = A2 and E B1 = B2 at
/// tolerance 1e-8. Entries of E are pinned row by row from the first usable
/// nonzero of B1 (falling back to subdiagonal entries of A1); rows touched
/// by nothing default to 1. Returns the diagonal of E, or nothing.
template <typename Scalar>
std::optional<VectorX<Scalar>> diagonal_phase_equivalence(const TinPair<Scalar>& first,
                                                          const TinPair<Scalar>& second) {
  using Real = real_t<Scalar>;
  const Real tol = Real(1e-8);
  const MatrixX<Scalar>&A1 = first.A(), &B1 = first.B();
  const MatrixX<Scalar>&A2 = second.A(), &B2 = second.B();
  if (A1.rows() != A2.rows() || B1.cols() != B2.cols()) return std::nullopt;
  const Index n = A1.rows();
  for (Index i = 0; i < n; ++i)
    if (Eigen::numext::abs(A1(i, i) - A2(i, i)) > tol) return std::nullopt;

  const Real scale = std::max({max_norm(A1), max_norm(B1), Real(1)});
  const Real pick = Real(1e-8) * scale;

  VectorX<Scalar> e = VectorX<Scalar>::Ones(n);
  for (Index j = 0; j < n; ++j) {
    std::optional<Scalar> ratio;
    for (Index k = 0; k < B1.cols() && !ratio; ++k)
      if (Eigen::numext::abs(B1(j, k)) > pick) ratio = B2(j, k) / B1(j, k);
    for (Index i = 0; i < j && !ratio; ++i)
      if (Eigen::numext::abs(A1(j, i)) > pick)
        ratio = A2(j, i) / (A1(j, i) * Eigen::numext::conj(e(i)));
    if (ratio) {
      const Real mag = Eigen::numext::abs(*ratio);
      if (std::abs(mag - Real(1)) > tol) return std::nullopt;
      e(j) = *ratio / Scalar(mag);
    }
  }

  const MatrixX<Scalar> ediag = e.asDiagonal();
  if (max_norm((ediag * A1 * ediag.adjoint() - A2).eval()) > tol) return std::nullopt;
  if (max_norm((ediag * B1 - B2).eval()) > tol) return std::nullopt;
  return e;
}

}  // namespace bandfrac
