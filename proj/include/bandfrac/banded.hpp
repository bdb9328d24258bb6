#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "bandfrac/types.hpp"

namespace bandfrac {

/// Lower-banded square matrix in diagonal-major storage: the main diagonal
/// plus d subdiagonals, each stored contiguously. Entries with j > i or
/// j < i - d are structural zeros and never stored, so banded kernels touch
/// stored entries only.
template <typename Scalar>
class LowerBanded {
 public:
  using Real = real_t<Scalar>;

  LowerBanded() : n_(0), d_(0) {}

  LowerBanded(Index n, Index d) : n_(n), d_(d) {
    require(n >= 1, ErrorKind::DimensionMismatch, "LowerBanded needs n >= 1");
    require(d >= 0 && d <= n - 1, ErrorKind::DimensionMismatch,
            "LowerBanded needs 0 <= d <= n-1");
    diags_.reserve(static_cast<std::size_t>(d + 1));
    for (Index k = 0; k <= d; ++k) diags_.push_back(VectorX<Scalar>::Zero(n - k));
  }

  Index order() const { return n_; }
  Index bandwidth() const { return d_; }

  /// Stored diagonal k (0 = main, k = k-th subdiagonal), length n-k.
  const VectorX<Scalar>& diagonal(Index k) const { return diags_[static_cast<std::size_t>(k)]; }
  VectorX<Scalar>& diagonal(Index k) { return diags_[static_cast<std::size_t>(k)]; }

  /// Entry accessor; structural zeros read as 0.
  Scalar operator()(Index i, Index j) const {
    const Index k = i - j;
    if (k < 0 || k > d_) return Scalar(0);
    return diags_[static_cast<std::size_t>(k)](j);
  }

  /// Mutable access to a stored entry (i,j) with i - d <= j <= i.
  Scalar& at(Index i, Index j) {
    const Index k = i - j;
    require(k >= 0 && k <= d_, ErrorKind::DimensionMismatch,
            "entry outside stored band");
    return diags_[static_cast<std::size_t>(k)](j);
  }

  Index stored_entries() const {
    Index count = 0;
    for (Index k = 0; k <= d_; ++k) count += n_ - k;
    return count;
  }

  MatrixX<Scalar> dense() const {
    MatrixX<Scalar> m = MatrixX<Scalar>::Zero(n_, n_);
    for (Index k = 0; k <= d_; ++k)
      for (Index j = 0; j < n_ - k; ++j) m(j + k, j) = diags_[static_cast<std::size_t>(k)](j);
    return m;
  }

  /// y = L*x streaming along stored diagonals. Each stored entry contributes
  /// exactly one scalar multiply to the counter.
  VectorX<Scalar> apply(const VectorX<Scalar>& x, std::uint64_t* mul_count = nullptr) const {
    require(x.size() == n_, ErrorKind::DimensionMismatch, "apply: size mismatch");
    VectorX<Scalar> y = VectorX<Scalar>::Zero(n_);
    std::uint64_t muls = 0;
    for (Index k = 0; k <= d_; ++k) {
      const VectorX<Scalar>& diag = diags_[static_cast<std::size_t>(k)];
      const Index len = n_ - k;
      for (Index j = 0; j < len; ++j) {
        y(j + k) += diag(j) * x(j);
        ++muls;
      }
    }
    if (mul_count) *mul_count += muls;
    return y;
  }

  /// In-place forward substitution for L*z = r assuming a unit main diagonal;
  /// only the d stored subdiagonals multiply, no divisions occur.
  void solve_unit_in_place(VectorX<Scalar>& r, std::uint64_t* mul_count = nullptr) const {
    require(r.size() == n_, ErrorKind::DimensionMismatch, "solve: size mismatch");
    std::uint64_t muls = 0;
    for (Index i = 0; i < n_; ++i) {
      Scalar acc = r(i);
      const Index kmax = i < d_ ? i : d_;
      for (Index k = 1; k <= kmax; ++k) {
        acc -= diags_[static_cast<std::size_t>(k)](i - k) * r(i - k);
        ++muls;
      }
      r(i) = acc;
    }
    if (mul_count) *mul_count += muls;
  }

  /// General in-place forward substitution (divides by the main diagonal).
  void solve_in_place(VectorX<Scalar>& r) const {
    require(r.size() == n_, ErrorKind::DimensionMismatch, "solve: size mismatch");
    for (Index i = 0; i < n_; ++i) {
      Scalar acc = r(i);
      const Index kmax = i < d_ ? i : d_;
      for (Index k = 1; k <= kmax; ++k) acc -= diags_[static_cast<std::size_t>(k)](i - k) * r(i - k);
      r(i) = acc / diags_[0](i);
    }
  }

  /// Dense triangular solve L*X = R column by column (used to expose the
  /// dense (A, B) hiding behind a fraction; not part of the fast path).
  MatrixX<Scalar> solve_dense(const MatrixX<Scalar>& rhs) const {
    require(rhs.rows() == n_, ErrorKind::DimensionMismatch, "solve: size mismatch");
    MatrixX<Scalar> x = rhs;
    for (Index c = 0; c < x.cols(); ++c) {
      VectorX<Scalar> col = x.col(c);
      solve_in_place(col);
      x.col(c) = col;
    }
    return x;
  }

  bool has_unit_diagonal() const {
    for (Index j = 0; j < n_; ++j)
      if (diags_[0](j) != Scalar(1)) return false;
    return true;
  }

  /// Banded view of a dense lower-banded matrix. Entries outside the band
  /// larger than `drop_tol` in magnitude raise BandwidthViolation.
  static LowerBanded from_dense(const MatrixX<Scalar>& m, Index d, Real drop_tol = Real(0)) {
    require(m.rows() == m.cols(), ErrorKind::DimensionMismatch, "from_dense: square required");
    const Index n = m.rows();
    LowerBanded out(n, d);
    for (Index j = 0; j < n; ++j) {
      for (Index i = 0; i < n; ++i) {
        const Index k = i - j;
        if (k >= 0 && k <= d) {
          out.at(i, j) = m(i, j);
        } else if (Eigen::numext::abs(m(i, j)) > drop_tol) {
          fail(ErrorKind::BandwidthViolation,
               "entry (" + std::to_string(i) + "," + std::to_string(j) +
                   ") outside bandwidth " + std::to_string(d));
        }
      }
    }
    return out;
  }

 private:
  Index n_;
  Index d_;
  std::vector<VectorX<Scalar>> diags_;
};

}  // namespace bandfrac
