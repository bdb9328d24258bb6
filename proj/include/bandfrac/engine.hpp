#pragma once

#include <cstdint>

#include "bandfrac/band_fraction.hpp"
#include "bandfrac/types.hpp"

namespace bandfrac {

/// Running state of the fraction advance M z_{t+1} = N z_t + Bhat eps_t,
/// with a cumulative count of scalar multiplies by stored factor entries.
/// Additions and the unit-diagonal substitution steps are free.
template <typename Scalar>
struct FilterState {
  BandFraction<Scalar> rep;
  VectorX<Scalar> z;
  Index t = 0;
  std::uint64_t mul_count = 0;

  explicit FilterState(BandFraction<Scalar> fraction)
      : rep(std::move(fraction)), z(VectorX<Scalar>::Zero(rep.order())) {
    check_fraction_shapes(rep);
  }

  FilterState(BandFraction<Scalar> fraction, VectorX<Scalar> initial)
      : rep(std::move(fraction)), z(std::move(initial)) {
    check_fraction_shapes(rep);
    require(z.size() == rep.order(), ErrorKind::DimensionMismatch,
            "initial state length must match the order");
  }
};

/// One step: r = N z + Bhat eps, then forward substitution on banded M.
/// Bhat contributes only its upper-triangular stored entries.
template <typename Scalar>
void advance(FilterState<Scalar>& state, const VectorX<Scalar>& eps) {
  const Index d = state.rep.inputs();
  require(eps.size() == d, ErrorKind::DimensionMismatch, "input length must equal d");

  VectorX<Scalar> r = state.rep.N.apply(state.z, &state.mul_count);
  const MatrixX<Scalar>& bhat = state.rep.Bhat;
  for (Index k = 0; k < d; ++k) {
    const Index rows = k + 1 < bhat.rows() ? k + 1 : bhat.rows();
    for (Index j = 0; j < rows; ++j) {
      r(j) += bhat(j, k) * eps(k);
      ++state.mul_count;
    }
  }
  state.rep.M.solve_unit_in_place(r, &state.mul_count);
  state.z = std::move(r);
  ++state.t;
}

/// Batch advance: row t of the result is the state after consuming input
/// row t. Starts from z0 (zero when omitted).
template <typename Scalar>
MatrixX<Scalar> run(const BandFraction<Scalar>& rep, const MatrixX<Scalar>& inputs,
                    const VectorX<Scalar>* z0 = nullptr) {
  require(inputs.cols() == rep.inputs(), ErrorKind::DimensionMismatch,
          "input columns must equal d");
  FilterState<Scalar> state =
      z0 ? FilterState<Scalar>(rep, *z0) : FilterState<Scalar>(rep);
  const Index T = inputs.rows();
  MatrixX<Scalar> states(T, rep.order());
  for (Index t = 0; t < T; ++t) {
    advance(state, VectorX<Scalar>(inputs.row(t).transpose()));
    states.row(t) = state.z.transpose();
  }
  return states;
}

/// Output map y = C z.
template <typename Scalar>
VectorX<Scalar> output(const MatrixX<Scalar>& C, const VectorX<Scalar>& z) {
  require(C.cols() == z.size(), ErrorKind::DimensionMismatch, "output: size mismatch");
  return C * z;
}

/// Multiplication budget per advance: 3n for real single-input fractions,
/// (2d+1)n otherwise. Measured counts stay at or below this; edge rows of the
/// band carry fewer stored entries.
inline std::uint64_t predicted_counts(Index n, Index d, bool real) {
  require(n >= 1 && d >= 1 && d <= n, ErrorKind::DimensionMismatch,
          "need n >= 1 and 1 <= d <= n");
  if (d == 1 && real) return static_cast<std::uint64_t>(3 * n);
  return static_cast<std::uint64_t>((2 * d + 1) * n);
}

}  // namespace bandfrac
