#pragma once

#include <Eigen/Core>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace bandfrac {

using Index = Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Real type underlying a scalar (double for both double and complex<double>).
template <typename Scalar>
using real_t = typename Eigen::NumTraits<Scalar>::Real;

template <typename Scalar>
inline constexpr bool is_complex_v = Eigen::NumTraits<Scalar>::IsComplex != 0;

/// Failure modes surfaced by the library. The CLI maps these onto exit codes.
enum class ErrorKind {
  NotTriangular,
  NotInputNormal,
  UnstableEigenvalue,
  RepeatedEigenvalue,
  NotStable,
  NoConvergence,
  NotPositiveDefinite,
  EigenFailure,
  ReorderFailure,
  NotControllable,
  ZeroPivot,
  BandwidthViolation,
  RankDeficient,
  DimensionMismatch,
  SingularMoment,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotTriangular: return "NotTriangular";
    case ErrorKind::NotInputNormal: return "NotInputNormal";
    case ErrorKind::UnstableEigenvalue: return "UnstableEigenvalue";
    case ErrorKind::RepeatedEigenvalue: return "RepeatedEigenvalue";
    case ErrorKind::NotStable: return "NotStable";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::EigenFailure: return "EigenFailure";
    case ErrorKind::ReorderFailure: return "ReorderFailure";
    case ErrorKind::NotControllable: return "NotControllable";
    case ErrorKind::ZeroPivot: return "ZeroPivot";
    case ErrorKind::BandwidthViolation: return "BandwidthViolation";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::SingularMoment: return "SingularMoment";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

/// Max-norm (largest absolute entry); zero for empty matrices.
template <typename Derived>
real_t<typename Derived::Scalar> max_norm(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return 0;
  return m.cwiseAbs().maxCoeff();
}

}  // namespace bandfrac
