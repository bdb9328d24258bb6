#pragma once

#include <Eigen/Eigenvalues>

#include <complex>
#include <vector>

#include "bandfrac/bandfrac.hpp"

namespace testutil {

using bandfrac::Index;
using bandfrac::MatrixX;
using bandfrac::Rng;
using bandfrac::VectorX;
using Complex = std::complex<double>;

/// Random pair with the spectral radius of A scaled to exactly `radius`.
inline bandfrac::InputPair<double> random_stable_pair(Rng& rng, Index n, Index d,
                                                      double radius) {
  MatrixX<double> a = rng.normal_matrix(n, n);
  const double rho = a.eigenvalues().cwiseAbs().maxCoeff();
  if (rho > 0) a *= radius / rho;
  return bandfrac::InputPair<double>(a, rng.normal_matrix(n, d));
}

inline bandfrac::EigenSpec<double> random_real_spec(Rng& rng, Index n, double max_mag) {
  std::vector<double> lambdas;
  for (Index k = 0; k < n; ++k) lambdas.push_back(rng.uniform(-max_mag, max_mag));
  return bandfrac::EigenSpec<double>(std::move(lambdas));
}

inline bandfrac::EigenSpec<Complex> random_complex_spec(Rng& rng, Index n, double max_mag) {
  std::vector<Complex> lambdas;
  for (Index k = 0; k < n; ++k) {
    const double r = rng.uniform(0.0, max_mag);
    const double theta = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    lambdas.push_back(std::polar(r, theta));
  }
  return bandfrac::EigenSpec<Complex>(std::move(lambdas));
}

/// Random stable pair whose A has real, well-separated eigenvalues (built
/// from a triangular seed under a mild similarity).
inline bandfrac::InputPair<double> random_real_eig_pair(Rng& rng, Index n, Index d,
                                                        double radius) {
  MatrixX<double> tri = MatrixX<double>::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    const double mag = radius * (static_cast<double>(i) + 0.5 + 0.3 * rng.uniform()) /
                       static_cast<double>(n);
    tri(i, i) = (rng.next() % 2 ? 1.0 : -1.0) * mag;
    for (Index j = 0; j < i; ++j) tri(i, j) = 0.3 * rng.normal();
  }
  const MatrixX<double> s =
      MatrixX<double>::Identity(n, n) + 0.2 * rng.normal_matrix(n, n);
  const MatrixX<double> a = s * tri * s.inverse();
  return bandfrac::InputPair<double>(a, rng.normal_matrix(n, d));
}

/// Dense-iteration oracle z_{t+1} = A z_t + B eps_t.
template <typename Scalar>
MatrixX<Scalar> dense_trajectory(const bandfrac::InputPair<Scalar>& pair,
                                 const MatrixX<Scalar>& inputs) {
  const Index T = inputs.rows();
  MatrixX<Scalar> states(T, pair.order());
  VectorX<Scalar> z = VectorX<Scalar>::Zero(pair.order());
  for (Index t = 0; t < T; ++t) {
    z = pair.A * z + pair.B * inputs.row(t).transpose();
    states.row(t) = z.transpose();
  }
  return states;
}

}  // namespace testutil
