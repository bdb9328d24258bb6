#pragma once

#include <string>
#include <vector>

#include "bandfrac/types.hpp"

namespace bandfrac {

/// State transition matrix A (n x n) with input matrix B (n x d), n >= d >= 1.
template <typename Scalar>
struct InputPair {
  MatrixX<Scalar> A;
  MatrixX<Scalar> B;

  InputPair() = default;
  InputPair(MatrixX<Scalar> a, MatrixX<Scalar> b) : A(std::move(a)), B(std::move(b)) {
    require(A.rows() == A.cols(), ErrorKind::DimensionMismatch, "A must be square");
    require(B.rows() == A.rows(), ErrorKind::DimensionMismatch, "B row count must match A");
    require(B.cols() >= 1, ErrorKind::DimensionMismatch, "B needs at least one column");
  }

  Index order() const { return A.rows(); }
  Index inputs() const { return B.cols(); }
};

/// Input pair that passed triangular input-normal validation: A is exactly
/// lower triangular and AA* + BB* = I within the recorded tolerance.
template <typename Scalar>
struct TinPair {
  InputPair<Scalar> pair;
  real_t<Scalar> tol = 0;
  real_t<Scalar> residual = 0;

  Index order() const { return pair.order(); }
  Index inputs() const { return pair.inputs(); }
  const MatrixX<Scalar>& A() const { return pair.A; }
  const MatrixX<Scalar>& B() const { return pair.B; }
};

/// First T leads of the impulse response: lead j holds A^(j-1) B.
template <typename Scalar>
struct ImpulseBlock {
  std::vector<MatrixX<Scalar>> leads;
  Index truncation() const { return static_cast<Index>(leads.size()); }
};

template <typename Scalar>
real_t<Scalar> default_tin_tolerance(Index n) {
  return real_t<Scalar>(1e-12) * static_cast<real_t<Scalar>>(n);
}

/// Largest absolute entry of AA* + BB* - I.
template <typename Scalar>
real_t<Scalar> tin_residual(const InputPair<Scalar>& pair) {
  MatrixX<Scalar> gram = pair.A * pair.A.adjoint() + pair.B * pair.B.adjoint();
  gram -= MatrixX<Scalar>::Identity(pair.order(), pair.order());
  return max_norm(gram);
}

/// Checks the triangular input-normal conditions and stamps the pair.
/// A must be lower triangular with exactly zero entries above the diagonal;
/// the Gram residual AA* + BB* - I must not exceed `tol` in max norm.
template <typename Scalar>
TinPair<Scalar> validate_tin(const InputPair<Scalar>& pair, real_t<Scalar> tol) {
  require(tol >= 0, ErrorKind::DimensionMismatch, "tolerance must be nonnegative");
  const Index n = pair.order();
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (pair.A(i, j) != Scalar(0))
        fail(ErrorKind::NotTriangular, "A(" + std::to_string(i) + "," + std::to_string(j) +
                                           ") = nonzero above the diagonal");

  MatrixX<Scalar> gram = pair.A * pair.A.adjoint() + pair.B * pair.B.adjoint();
  gram -= MatrixX<Scalar>::Identity(n, n);
  Index wi = 0, wj = 0;
  real_t<Scalar> residual = 0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (Eigen::numext::abs(gram(i, j)) > residual) {
        residual = Eigen::numext::abs(gram(i, j));
        wi = i;
        wj = j;
      }
  if (residual > tol)
    fail(ErrorKind::NotInputNormal,
         "Gram residual " + std::to_string(residual) + " at (" + std::to_string(wi) + "," +
             std::to_string(wj) + ") exceeds tolerance " + std::to_string(tol));
  return TinPair<Scalar>{pair, tol, residual};
}

template <typename Scalar>
TinPair<Scalar> validate_tin(const InputPair<Scalar>& pair) {
  return validate_tin(pair, default_tin_tolerance<Scalar>(pair.order()));
}

/// Leading principal minors of (B | A) for k = 1..n-1, with a relative
/// nonvanishing verdict per minor.
template <typename Scalar>
struct MinorReport {
  std::vector<Scalar> minors;            // k-th entry: det (B|A)_{1:k,1:k}
  std::vector<real_t<Scalar>> scales;    // product of the first k row norms
  bool all_nonvanishing = true;
};

/// Pivot-free elimination on the leading blocks of (B | A). The k-th minor is
/// the product of the first k pivots; "nonvanishing" means
/// |minor_k| > 1e-10 * (product of the first k row norms).
template <typename Scalar>
MinorReport<Scalar> principal_minor_check(const InputPair<Scalar>& pair) {
  using Real = real_t<Scalar>;
  const Index n = pair.order();
  const Index d = pair.inputs();
  MinorReport<Scalar> report;
  if (n <= 1) return report;  // no k < n, vacuously true

  MatrixX<Scalar> g(n, n + d);
  g << pair.B, pair.A;

  std::vector<Real> row_norms(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) row_norms[static_cast<std::size_t>(i)] = g.row(i).norm();

  const Real rel = Real(1e-10);
  Scalar minor = Scalar(1);
  Real scale = Real(1);
  bool dead = false;  // elimination stopped at an exactly zero pivot
  for (Index k = 0; k < n - 1; ++k) {
    Scalar pivot = dead ? Scalar(0) : g(k, k);
    minor *= pivot;
    scale *= row_norms[static_cast<std::size_t>(k)];
    report.minors.push_back(minor);
    report.scales.push_back(scale);
    if (Eigen::numext::abs(minor) <= rel * scale) report.all_nonvanishing = false;
    if (!dead) {
      if (pivot == Scalar(0)) {
        dead = true;
      } else {
        for (Index i = k + 1; i < n; ++i) {
          const Scalar factor = g(i, k) / pivot;
          g.row(i).tail(n + d - k) -= factor * g.row(k).tail(n + d - k);
        }
      }
    }
  }
  return report;
}

/// Leads (B, AB, A^2 B, ...) computed by repeated multiplication.
template <typename Scalar>
ImpulseBlock<Scalar> impulse_response(const InputPair<Scalar>& pair, Index T) {
  require(T >= 1, ErrorKind::DimensionMismatch, "truncation must be >= 1");
  ImpulseBlock<Scalar> block;
  block.leads.reserve(static_cast<std::size_t>(T));
  block.leads.push_back(pair.B);
  for (Index j = 1; j < T; ++j) block.leads.push_back(pair.A * block.leads.back());
  return block;
}

/// Row-orthonormality defect of a truncated impulse response:
/// max-norm of sum_j lead_j lead_j* - I. Tends to 0 for stable TIN pairs.
template <typename Scalar>
real_t<Scalar> gram_defect(const ImpulseBlock<Scalar>& block) {
  require(!block.leads.empty(), ErrorKind::DimensionMismatch, "empty impulse block");
  const Index n = block.leads.front().rows();
  MatrixX<Scalar> gram = MatrixX<Scalar>::Zero(n, n);
  for (const auto& lead : block.leads) gram += lead * lead.adjoint();
  gram -= MatrixX<Scalar>::Identity(n, n);
  return max_norm(gram);
}

}  // namespace bandfrac
