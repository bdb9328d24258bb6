#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "bandfrac/band_fraction.hpp"
#include "bandfrac/banded.hpp"
#include "bandfrac/core.hpp"
#include "bandfrac/types.hpp"

namespace bandfrac {

/// Upper-triangular n x (n+d) matrix with upper bandwidth d: entry (i,j) may
/// be nonzero only for i <= j <= i+d. Stored as one row of d+1 slots per row.
template <typename Scalar>
class YMatrix {
 public:
  YMatrix() : n_(0), d_(0) {}

  YMatrix(Index n, Index d) : n_(n), d_(d) {
    require(n >= 1 && d >= 1, ErrorKind::DimensionMismatch, "YMatrix needs n >= 1, d >= 1");
    band_ = MatrixX<Scalar>::Zero(n, d + 1);
  }

  Index order() const { return n_; }
  Index inputs() const { return d_; }
  Index cols() const { return n_ + d_; }

  /// Entry (i, j); structural zeros outside i <= j <= i+d read as 0.
  Scalar operator()(Index i, Index j) const {
    const Index k = j - i;
    if (k < 0 || k > d_) return Scalar(0);
    return band_(i, k);
  }

  Scalar& at(Index i, Index j) {
    const Index k = j - i;
    require(k >= 0 && k <= d_, ErrorKind::DimensionMismatch, "entry outside stored band");
    return band_(i, k);
  }

  const MatrixX<Scalar>& band() const { return band_; }
  MatrixX<Scalar>& band() { return band_; }

  MatrixX<Scalar> dense() const {
    MatrixX<Scalar> m = MatrixX<Scalar>::Zero(n_, n_ + d_);
    for (Index i = 0; i < n_; ++i)
      for (Index k = 0; k <= d_; ++k) m(i, i + k) = band_(i, k);
    return m;
  }

 private:
  Index n_, d_;
  MatrixX<Scalar> band_;
};

/// Y with the canonical normalization: Y_ii = 1 for i < n, unit last row
/// with positive-real first nonzero entry.
template <typename Scalar>
struct YCanonical {
  YMatrix<Scalar> Y;
};

namespace detail {

/// Unit-lower LU of the n x (n+d) concatenation without pivoting.
/// Returns (L, U); pivots below 1e-12 of the running row norm raise
/// ZeroPivot with a 1-based index.
template <typename Scalar>
std::pair<MatrixX<Scalar>, MatrixX<Scalar>> lr_eliminate(MatrixX<Scalar> g) {
  using Real = real_t<Scalar>;
  const Index n = g.rows();
  const Index width = g.cols();
  MatrixX<Scalar> l = MatrixX<Scalar>::Identity(n, n);
  for (Index k = 0; k + 1 < n; ++k) {
    const Scalar pivot = g(k, k);
    const Real row_norm = g.row(k).tail(width - k).norm();
    if (Eigen::numext::abs(pivot) <= Real(1e-12) * row_norm)
      fail(ErrorKind::ZeroPivot, "vanishing principal minor at k = " + std::to_string(k + 1));
    for (Index i = k + 1; i < n; ++i) {
      const Scalar factor = g(i, k) / pivot;
      l(i, k) = factor;
      g.row(i).tail(width - k - 1) -= factor * g.row(k).tail(width - k - 1);
      g(i, k) = Scalar(0);
    }
  }
  return {std::move(l), std::move(g)};
}

template <typename Scalar>
MatrixX<Scalar> invert_unit_lower(const MatrixX<Scalar>& l) {
  const Index n = l.rows();
  MatrixX<Scalar> inv = MatrixX<Scalar>::Identity(n, n);
  for (Index c = 0; c < n; ++c)
    for (Index i = c + 1; i < n; ++i) {
      Scalar acc = Scalar(0);
      for (Index k = c; k < i; ++k) acc += l(i, k) * inv(k, c);
      inv(i, c) = -acc;
    }
  return inv;
}

template <typename Scalar>
BandFraction<Scalar> band_fraction_from_lr(const MatrixX<Scalar>& a, const MatrixX<Scalar>& b) {
  using Real = real_t<Scalar>;
  const Index n = a.rows();
  const Index d = b.cols();
  const Index band = std::min(d, n - 1);

  MatrixX<Scalar> g(n, n + d);
  g << b, a;
  auto [l, u] = lr_eliminate(std::move(g));

  // The theory promises M = L^{-1} banded and N triangular of bandwidth d;
  // entries beyond the band flag a violated precondition.
  const Real drop = Real(1e-9);
  const MatrixX<Scalar> m_dense = invert_unit_lower(l);
  BandFraction<Scalar> rep;
  rep.M = LowerBanded<Scalar>::from_dense(m_dense, band, drop);
  rep.N = LowerBanded<Scalar>::from_dense(u.middleCols(d, n), band, drop);
  rep.Bhat = u.leftCols(d);
  return rep;
}

}  // namespace detail

/// Band fraction (Bhat | N) = M (B | A) of a TIN pair by pivot-free
/// elimination. M comes out unit lower triangular with bandwidth d, N lower
/// triangular with bandwidth d, Bhat upper triangular.
template <typename Scalar>
BandFraction<Scalar> lr_band_fraction(const TinPair<Scalar>& pair) {
  return detail::band_fraction_from_lr(pair.A(), pair.B());
}

/// Generalization to a positive diagonal weight: requires A lower triangular
/// and D - A D A* = B B* within 1e-10 * n.
template <typename Scalar>
BandFraction<Scalar> lr_band_fraction_weighted(const InputPair<Scalar>& pair,
                                               const VectorX<real_t<Scalar>>& weights) {
  using Real = real_t<Scalar>;
  const Index n = pair.order();
  require(weights.size() == n, ErrorKind::DimensionMismatch, "one weight per state");
  for (Index i = 0; i < n; ++i)
    require(weights(i) > Real(0), ErrorKind::NotPositiveDefinite, "weights must be positive");
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      require(pair.A(i, j) == Scalar(0), ErrorKind::NotTriangular, "A must be lower triangular");

  MatrixX<Scalar> dmat = MatrixX<Scalar>::Zero(n, n);
  for (Index i = 0; i < n; ++i) dmat(i, i) = Scalar(weights(i));
  const Real residual =
      max_norm((dmat - pair.A * dmat * pair.A.adjoint() - pair.B * pair.B.adjoint()).eval());
  require(residual <= Real(1e-10) * Real(n), ErrorKind::NotInputNormal,
          "weighted Grammian identity violated, residual " +
              std::to_string(static_cast<double>(residual)));
  return detail::band_fraction_from_lr(pair.A, pair.B);
}

/// LQ factorization Y = M Qhat by Givens rotations, annihilating the d
/// superband entries of each row right to left; only banded column segments
/// move, so the factorization costs O(n d^2). B and A are read off the
/// orthonormal rows of Qhat; M keeps a positive diagonal.
template <typename Scalar>
std::pair<TinPair<Scalar>, LowerBanded<Scalar>> tin_from_y(const YMatrix<Scalar>& y) {
  using Real = real_t<Scalar>;
  const Index n = y.order();
  const Index d = y.inputs();
  const Index width = n + d;

  MatrixX<Scalar> w = y.dense();
  for (Index i = 0; i < n; ++i) {
    // Rows above i are already reduced and hold zeros in every column >= i;
    // fill never reaches past row i+d.
    const Index row_hi = std::min(n - 1, i + d);
    for (Index j = std::min(i + d, width - 1); j > i; --j) {
      const Scalar a = w(i, i);
      const Scalar b = w(i, j);
      const Real r = std::sqrt(Eigen::numext::abs2(a) + Eigen::numext::abs2(b));
      if (r == Real(0)) continue;
      for (Index row = i; row <= row_hi; ++row) {
        const Scalar vi = w(row, i);
        const Scalar vj = w(row, j);
        w(row, i) = (vi * Eigen::numext::conj(a) + vj * Eigen::numext::conj(b)) / Scalar(r);
        w(row, j) = (-vi * b + vj * a) / Scalar(r);
      }
      w(i, i) = Scalar(r);
      w(i, j) = Scalar(0);
    }
    // Phase-normalize column i so the diagonal of M is real nonnegative.
    const Scalar diag = w(i, i);
    const Real mag = Eigen::numext::abs(diag);
    if (mag > Real(0) && diag != Scalar(mag)) {
      const Scalar phase = Eigen::numext::conj(diag) / Scalar(mag);
      for (Index row = i; row <= row_hi; ++row) w(row, i) *= phase;
      w(i, i) = Scalar(mag);
    }
  }

  Real dmin = std::numeric_limits<Real>::max(), dmax = 0;
  for (Index i = 0; i < n; ++i) {
    const Real mag = Eigen::numext::abs(w(i, i));
    dmin = std::min(dmin, mag);
    dmax = std::max(dmax, mag);
  }
  if (!(dmin > Real(1e-10) * dmax))
    fail(ErrorKind::RankDeficient, "Y is numerically rank deficient");

  const Index band = std::min(d, n - 1);
  LowerBanded<Scalar> m = LowerBanded<Scalar>::from_dense(
      w.leftCols(n), band, Real(1e-9) * std::max(Real(1), dmax));

  MatrixX<Scalar> qhat = y.dense();
  for (Index c = 0; c < width; ++c) {
    VectorX<Scalar> col = qhat.col(c);
    m.solve_in_place(col);
    qhat.col(c) = col;
  }

  InputPair<Scalar> pair(qhat.middleCols(d, n), qhat.leftCols(d));
  TinPair<Scalar> tin = validate_tin(pair, Real(1e-11) * Real(n));
  return {std::move(tin), std::move(m)};
}

/// Canonical Y for a TIN pair: rescales the raw band fraction row by row to
/// Y_ii = 1 (i < n) and a unit last row whose first nonzero entry is real
/// positive. Returns the diagonal unitary E with tin_from_y(Y) = (EAE*, EB).
template <typename Scalar>
std::pair<YCanonical<Scalar>, VectorX<Scalar>> canonicalize_y(const TinPair<Scalar>& pair) {
  using Real = real_t<Scalar>;
  const BandFraction<Scalar> frac = lr_band_fraction(pair);
  const Index n = pair.order();
  const Index d = pair.inputs();

  // Raw Y = (Bhat | N) in band coordinates.
  const auto raw = [&](Index i, Index col) -> Scalar {
    if (col < d) return i <= col ? frac.Bhat(i, col) : Scalar(0);
    const Index j = col - d;
    const Index k = i - j;
    if (k < 0 || k > frac.band()) return Scalar(0);
    return frac.N(i, j);
  };

  VectorX<Scalar> e = VectorX<Scalar>::Ones(n);
  VectorX<Scalar> c = VectorX<Scalar>::Ones(n);  // c_i = D_i E_i, row scalings
  for (Index i = 0; i + 1 < n; ++i) {
    // Diagonal entry of Y in row i: Bhat(i,i) when i < d, else a pivot of N.
    Scalar pivot = raw(i, i);
    if (i >= d) pivot *= Eigen::numext::conj(e(i - d));
    if (pivot == Scalar(0))
      fail(ErrorKind::ZeroPivot, "vanishing pivot at k = " + std::to_string(i + 1));
    c(i) = Scalar(1) / pivot;
    e(i) = c(i) / Scalar(Eigen::numext::abs(c(i)));
  }

  // Last row: unit norm, first nonzero entry real positive.
  const Index last = n - 1;
  Real norm2 = 0;
  for (Index col = last; col <= last + d; ++col) norm2 += Eigen::numext::abs2(raw(last, col));
  if (!(norm2 > Real(0))) fail(ErrorKind::ZeroPivot, "last row of Y vanishes");
  const Real dlast = Real(1) / std::sqrt(norm2);
  const Real first_tol = Real(1e-14) * std::sqrt(norm2);

  Scalar phase = Scalar(1);
  bool pinned = false;
  for (Index col = last; col <= last + d && !pinned; ++col) {
    const Scalar value = raw(last, col);
    if (Eigen::numext::abs(value) <= first_tol) continue;
    if (col >= d && col - d == last) {
      // The e(last) factors cancel here; the entry is canonical only if it
      // already sits on the positive real axis.
      const Scalar unit = value / Scalar(Eigen::numext::abs(value));
      if (Eigen::numext::abs(unit - Scalar(1)) > Real(1e-10))
        fail(ErrorKind::ZeroPivot, "last row admits no canonical phase");
    } else {
      Scalar adjusted = value;
      if (col >= d) adjusted *= Eigen::numext::conj(e(col - d));
      phase = Eigen::numext::conj(adjusted) / Scalar(Eigen::numext::abs(adjusted));
    }
    pinned = true;
  }
  e(last) = phase;
  c(last) = Scalar(dlast) * phase;

  YCanonical<Scalar> canonical{YMatrix<Scalar>(n, d)};
  for (Index i = 0; i < n; ++i)
    for (Index col = i; col <= std::min(i + d, n + d - 1); ++col) {
      Scalar value = raw(i, col) * c(i);
      if (col >= d) value *= Eigen::numext::conj(e(col - d));
      canonical.Y.at(i, col) = value;
    }
  return {std::move(canonical), std::move(e)};
}

}  // namespace bandfrac
