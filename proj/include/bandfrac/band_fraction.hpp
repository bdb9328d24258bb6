#pragma once

#include "bandfrac/banded.hpp"
#include "bandfrac/core.hpp"
#include "bandfrac/types.hpp"

namespace bandfrac {

/// Matrix fraction A = M^{-1} N, B = M^{-1} Bhat with M unit-diagonal lower
/// banded, N lower banded, and Bhat upper triangular n x d. The nominal
/// bandwidth equals the input count d; the stored band is min(d, n-1).
template <typename Scalar>
struct BandFraction {
  LowerBanded<Scalar> M;
  LowerBanded<Scalar> N;
  MatrixX<Scalar> Bhat;

  Index order() const { return M.order(); }
  Index inputs() const { return Bhat.cols(); }

  /// Stored subdiagonal count; min(inputs(), order()-1).
  Index band() const { return M.bandwidth(); }

  /// Max-norm residual of the Grammian identity MM* - NN* - Bhat Bhat*.
  real_t<Scalar> grammian_residual() const {
    const MatrixX<Scalar> md = M.dense();
    const MatrixX<Scalar> nd = N.dense();
    return max_norm((md * md.adjoint() - nd * nd.adjoint() - Bhat * Bhat.adjoint()).eval());
  }

  /// The dense pair (M^{-1} N, M^{-1} Bhat) the fraction represents.
  InputPair<Scalar> dense_pair() const {
    return InputPair<Scalar>(M.solve_dense(N.dense()), M.solve_dense(Bhat));
  }
};

template <typename Scalar>
void check_fraction_shapes(const BandFraction<Scalar>& rep) {
  require(rep.N.order() == rep.M.order() && rep.N.bandwidth() == rep.M.bandwidth(),
          ErrorKind::DimensionMismatch, "M and N must share order and bandwidth");
  require(rep.Bhat.rows() == rep.M.order(), ErrorKind::DimensionMismatch,
          "Bhat row count must match the order");
  require(rep.M.has_unit_diagonal(), ErrorKind::DimensionMismatch,
          "M must have a unit main diagonal");
}

}  // namespace bandfrac
