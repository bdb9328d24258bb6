#pragma once

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "bandfrac/band_fraction.hpp"
#include "bandfrac/core.hpp"
#include "bandfrac/engine.hpp"
#include "bandfrac/types.hpp"

namespace bandfrac {

/// Square-root accumulator of the exponentially weighted normal equations:
/// R is upper triangular with R* R = sum_i delta^{t-i} z_i z_i*, and dvec
/// stacks sum_i delta^{t-i} z_i y_i*.
template <typename Scalar>
class RlsAccumulator {
 public:
  using Real = real_t<Scalar>;

  RlsAccumulator(Index n, Index p, Real delta)
      : R_(MatrixX<Scalar>::Zero(n, n)),
        dvec_(MatrixX<Scalar>::Zero(n, p)),
        delta_(delta) {
    require(n >= 1 && p >= 1, ErrorKind::DimensionMismatch, "need n >= 1 and p >= 1");
    require(delta > Real(0) && delta <= Real(1), ErrorKind::DimensionMismatch,
            "forgetting factor must lie in (0, 1]");
  }

  Index order() const { return R_.rows(); }
  Index outputs() const { return dvec_.cols(); }
  Real delta() const { return delta_; }
  Index samples() const { return t_; }
  const MatrixX<Scalar>& R() const { return R_; }
  const MatrixX<Scalar>& dvec() const { return dvec_; }

  /// Second-moment matrix R* R (for diagnostics; the solve never forms it).
  MatrixX<Scalar> moment() const { return R_.adjoint() * R_; }

  /// 2-norm condition number of the accumulated moment matrix.
  Real moment_condition() const {
    Eigen::BDCSVD<MatrixX<Scalar>> svd(R_);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) == Real(0)) return std::numeric_limits<Real>::infinity();
    const Real ratio = sv(0) / sv(sv.size() - 1);
    return ratio * ratio;
  }

  friend void rls_update(RlsAccumulator& acc, const VectorX<Scalar>& z,
                         const VectorX<Scalar>& y) {
    const Index n = acc.order();
    require(z.size() == n, ErrorKind::DimensionMismatch, "state length mismatch");
    require(y.size() == acc.outputs(), ErrorKind::DimensionMismatch, "output length mismatch");

    const Real root = std::sqrt(acc.delta_);
    acc.R_ *= Scalar(root);
    acc.dvec_ *= Scalar(acc.delta_);
    acc.dvec_ += z * y.adjoint();

    // Fold the new row z* into R by Givens rotations, keeping the diagonal
    // real and nonnegative.
    VectorX<Scalar> row = z.conjugate();
    for (Index k = 0; k < n; ++k) {
      const Scalar a = acc.R_(k, k);
      const Scalar b = row(k);
      if (b == Scalar(0)) continue;
      const Real r = std::sqrt(Eigen::numext::abs2(a) + Eigen::numext::abs2(b));
      const Scalar ca = Eigen::numext::conj(a) / Scalar(r);
      const Scalar cb = Eigen::numext::conj(b) / Scalar(r);
      for (Index c = k; c < n; ++c) {
        const Scalar rk = acc.R_(k, c);
        const Scalar rw = row(c);
        acc.R_(k, c) = ca * rk + cb * rw;
        row(c) = -b / Scalar(r) * rk + a / Scalar(r) * rw;
      }
      acc.R_(k, k) = Scalar(r);
      row(k) = Scalar(0);
    }
    ++acc.t_;
  }

 private:
  MatrixX<Scalar> R_;
  MatrixX<Scalar> dvec_;
  Real delta_;
  Index t_ = 0;
};

/// Solves R* R Chat* = dvec by two triangular substitutions. An optional
/// ridge epsilon*I falls back to a dense factorization of the regularized
/// moment matrix.
template <typename Scalar>
MatrixX<Scalar> rls_solve(const RlsAccumulator<Scalar>& acc, real_t<Scalar> ridge = 0) {
  using Real = real_t<Scalar>;
  const Index n = acc.order();
  const MatrixX<Scalar>& R = acc.R();

  if (ridge > Real(0)) {
    MatrixX<Scalar> moment = acc.moment();
    moment += ridge * MatrixX<Scalar>::Identity(n, n);
    Eigen::LLT<MatrixX<Scalar>> llt(moment);
    require(llt.info() == Eigen::Success, ErrorKind::SingularMoment,
            "regularized moment is not positive definite");
    return llt.solve(acc.dvec()).adjoint();
  }

  Real dmin = std::numeric_limits<Real>::max(), dmax = 0;
  for (Index i = 0; i < n; ++i) {
    const Real mag = Eigen::numext::abs(R(i, i));
    dmin = std::min(dmin, mag);
    dmax = std::max(dmax, mag);
  }
  if (!(dmin > Real(1e-10) * dmax))
    fail(ErrorKind::SingularMoment,
         "insufficient excitation, smallest pivot " + std::to_string(static_cast<double>(dmin)));

  const MatrixX<Scalar> w = R.adjoint().template triangularView<Eigen::Lower>().solve(acc.dvec());
  const MatrixX<Scalar> x = R.template triangularView<Eigen::Upper>().solve(w);
  return x.adjoint();
}

/// One gradient step C <- C + step (y - C z) z*.
template <typename Scalar>
MatrixX<Scalar> lms_update(const MatrixX<Scalar>& C, const VectorX<Scalar>& z,
                           const VectorX<Scalar>& y, real_t<Scalar> step) {
  require(step > 0, ErrorKind::DimensionMismatch, "step must be positive");
  require(C.cols() == z.size() && C.rows() == y.size(), ErrorKind::DimensionMismatch,
          "lms_update: size mismatch");
  return C + step * (y - C * z) * z.adjoint();
}

template <typename Scalar>
struct IdentifyResult {
  MatrixX<Scalar> Chat;                  // p x n coefficient estimate
  std::vector<MatrixX<Scalar>> impulse;  // leads Chat A^{j-1} B
  real_t<Scalar> delta = 1;
  double conditioning = 1;               // kappa_2 of the final moment matrix
};

/// Runs the banded filter over the input record, accumulates the weighted
/// normal equations sample by sample, solves once at the end, and reports
/// the estimated output map with its first `leads` impulse-response leads.
template <typename Scalar>
IdentifyResult<Scalar> identify(const BandFraction<Scalar>& rep, const MatrixX<Scalar>& u,
                                const MatrixX<Scalar>& y, real_t<Scalar> delta,
                                Index leads = 50) {
  const Index T = u.rows();
  require(T >= 1 && y.rows() == T, ErrorKind::DimensionMismatch,
          "inputs and outputs must share a time axis");

  const MatrixX<Scalar> states = run(rep, u);
  RlsAccumulator<Scalar> acc(rep.order(), y.cols(), delta);
  for (Index t = 0; t < T; ++t)
    rls_update(acc, VectorX<Scalar>(states.row(t).adjoint()),
               VectorX<Scalar>(y.row(t).adjoint()));

  IdentifyResult<Scalar> result;
  result.Chat = rls_solve(acc);
  result.delta = delta;
  result.conditioning = static_cast<double>(acc.moment_condition());

  const InputPair<Scalar> dense = rep.dense_pair();
  const ImpulseBlock<Scalar> block = impulse_response(dense, leads);
  result.impulse.reserve(block.leads.size());
  for (const auto& lead : block.leads) result.impulse.push_back(result.Chat * lead);
  return result;
}

/// Leading k x k / k x d subpair (all input columns kept); leading subpairs
/// of a TIN pair are TIN.
template <typename Scalar>
TinPair<Scalar> nested_truncate(const TinPair<Scalar>& pair, Index k) {
  require(k >= 1 && k <= pair.order(), ErrorKind::DimensionMismatch,
          "truncation order out of range");
  InputPair<Scalar> sub(pair.A().topLeftCorner(k, k), pair.B().topRows(k));
  return validate_tin(sub, pair.tol);
}

}  // namespace bandfrac
