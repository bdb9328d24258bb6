#include <doctest.h>

#include <Eigen/SVD>

#include <cmath>
#include <string>
#include <vector>

#include "support.hpp"

using namespace bandfrac;
using testutil::Complex;

TEST_SUITE_BEGIN("reduction");

TEST_CASE("Stein solution, scalar closed forms") {
  auto scalar_pair = [](double a, double b) {
    MatrixX<double> am(1, 1), bm(1, 1);
    am << a;
    bm << b;
    return InputPair<double>(am, bm);
  };
  CHECK(solve_stein(scalar_pair(0.5, 1.0)).P(0, 0) == doctest::Approx(4.0 / 3.0));
  CHECK(solve_stein(scalar_pair(0.0, 1.0)).P(0, 0) == doctest::Approx(1.0));
  CHECK(solve_stein(scalar_pair(0.9, 2.0)).P(0, 0) == doctest::Approx(4.0 / 0.19));
}

TEST_CASE("Stein doubling count stays within the logarithmic budget") {
  for (double rho : {0.5, 0.9, 0.99}) {
    MatrixX<double> am(1, 1), bm(1, 1);
    am << rho;
    bm << 1.0;
    const auto sol = solve_stein(InputPair<double>(am, bm));
    const int budget =
        static_cast<int>(std::ceil(std::log2(std::log(1e-14) / std::log(rho)))) + 1;
    CHECK(sol.iterations <= budget);
  }
}

TEST_CASE("Stein residual bound for a random stable pair") {
  Rng rng(21);
  const auto pair = testutil::random_stable_pair(rng, 12, 2, 0.85);
  const auto sol = solve_stein(pair);
  CHECK(sol.residual <= 1e-11 * 12 * max_norm(sol.P));
  CHECK(max_norm((sol.P - sol.P.adjoint()).eval()) == 0.0);
}

TEST_CASE("unstable input is rejected before iteration") {
  MatrixX<double> am(1, 1), bm(1, 1);
  am << 1.0;
  bm << 1.0;
  try {
    solve_stein(InputPair<double>(am, bm));
    FAIL("expected NotStable");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotStable);
  }
}

TEST_CASE("Cholesky factors") {
  SUBCASE("identity") {
    const MatrixX<double> eye = MatrixX<double>::Identity(3, 3);
    const MatrixX<double> l = cholesky_lower(eye);
    CHECK(max_norm((l - eye).eval()) == 0.0);
  }
  SUBCASE("scalar 4/3") {
    MatrixX<double> p(1, 1);
    p << 4.0 / 3.0;
    CHECK(cholesky_lower(p)(0, 0) == doctest::Approx(2.0 / std::sqrt(3.0)));
  }
  SUBCASE("2x2 hand elimination") {
    MatrixX<double> p(2, 2);
    p << 2.0, 1.0, 1.0, 2.0;
    const MatrixX<double> l = cholesky_lower(p);
    CHECK(l(0, 0) == doctest::Approx(std::sqrt(2.0)));
    CHECK(l(1, 0) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(l(1, 1) == doctest::Approx(std::sqrt(1.5)));
    CHECK(l(0, 1) == 0.0);
  }
  SUBCASE("zero pivot reports its index") {
    MatrixX<double> p = MatrixX<double>::Zero(2, 2);
    p(0, 0) = 1.0;
    try {
      cholesky_lower(p);
      FAIL("expected NotPositiveDefinite");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NotPositiveDefinite);
      CHECK(std::string(e.what()).find("index 1") != std::string::npos);
    }
  }
  SUBCASE("hermitian complex factorization") {
    Rng rng(22);
    const MatrixX<double> re = rng.normal_matrix(4, 4), im = rng.normal_matrix(4, 4);
    MatrixX<Complex> g(4, 4);
    for (Index i = 0; i < 4; ++i)
      for (Index j = 0; j < 4; ++j) g(i, j) = Complex(re(i, j), im(i, j));
    const MatrixX<Complex> p = g * g.adjoint() + MatrixX<Complex>::Identity(4, 4);
    const MatrixX<Complex> l = cholesky_lower(p);
    CHECK(max_norm((l * l.adjoint() - p).eval()) <= 1e-13 * 4 * max_norm(p));
  }
}

TEST_CASE("lower Schur: already-triangular input is a fixed point") {
  MatrixX<double> a(3, 3);
  a << 0.5, 0.0, 0.0, 0.2, -0.1, 0.0, 0.3, 0.4, 0.7;
  const auto [q, tri] = schur_lower(a, EigenvalueOrder::as_computed());
  CHECK(max_norm((q - MatrixX<double>::Identity(3, 3)).eval()) == 0.0);
  CHECK(max_norm((tri - a).eval()) == 0.0);
}

TEST_CASE("lower Schur of an upper-triangular 2x2") {
  MatrixX<double> a(2, 2);
  a << 0.0, 1.0, 0.0, 0.5;
  const auto [q, tri] = schur_lower(a, EigenvalueOrder::ascending());
  CHECK(tri(0, 1) == 0.0);
  CHECK(std::abs(tri(0, 0)) <= 1e-12);
  CHECK(tri(1, 1) == doctest::Approx(0.5));
  CHECK(max_norm((q * q.adjoint() - MatrixX<double>::Identity(2, 2)).eval()) <= 1e-14);
  CHECK(max_norm((q * a * q.adjoint() - tri).eval()) <= 1e-12);
}

TEST_CASE("lower Schur honors the requested eigenvalue order") {
  Rng rng(23);
  const auto pair = testutil::random_real_eig_pair(rng, 6, 1, 0.9);
  SUBCASE("ascending magnitudes") {
    const auto [q, tri] = schur_lower(pair.A, EigenvalueOrder::ascending());
    for (Index k = 0; k + 1 < 6; ++k)
      CHECK(std::abs(tri(k, k)) <= std::abs(tri(k + 1, k + 1)) + 1e-9);
    CHECK(max_norm((q * pair.A * q.adjoint() - tri).eval()) <= 1e-9 * max_norm(pair.A));
  }
  SUBCASE("explicit permutation of the as-computed list") {
    const auto base = schur_lower(pair.A, EigenvalueOrder::as_computed());
    std::vector<Index> perm = {5, 3, 1, 0, 2, 4};
    const auto [q, tri] = schur_lower(pair.A, EigenvalueOrder::explicit_order(perm));
    for (Index i = 0; i < 6; ++i)
      CHECK(tri(i, i) ==
            doctest::Approx(
                base.second(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(i)]))
                .epsilon(1e-9));
  }
  SUBCASE("invalid permutation raises ReorderFailure") {
    try {
      schur_lower(pair.A, EigenvalueOrder::explicit_order({0, 0, 1, 2, 3, 4}));
      FAIL("expected ReorderFailure");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ReorderFailure);
    }
  }
}

TEST_CASE("complex lower Schur agrees with the requested ascending order") {
  Rng rng(24);
  MatrixX<Complex> a(5, 5);
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 5; ++j) a(i, j) = 0.3 * Complex(rng.normal(), rng.normal());
  const auto [q, tri] = schur_lower(a, EigenvalueOrder::ascending());
  CHECK(max_norm((q * q.adjoint() - MatrixX<Complex>::Identity(5, 5)).eval()) <= 1e-12);
  CHECK(max_norm((q * a * q.adjoint() - tri).eval()) <= 1e-9 * max_norm(a));
  for (Index k = 0; k + 1 < 5; ++k)
    CHECK(std::abs(tri(k, k)) <= std::abs(tri(k + 1, k + 1)) + 1e-9);
}

TEST_CASE("to_tin, scalar reduction") {
  MatrixX<double> am(1, 1), bm(1, 1);
  am << 0.9;
  bm << 2.0;
  const auto [tin, sim] = to_tin(InputPair<double>(am, bm), EigenvalueOrder::as_computed());
  CHECK(tin.A()(0, 0) == doctest::Approx(0.9));
  CHECK(std::abs(tin.B()(0, 0)) == doctest::Approx(std::sqrt(0.19)));
  CHECK(sim.inverse_residual() <= 1e-12);
}

TEST_CASE("to_tin of an already-TIN pair yields a unitary similarity") {
  const auto rep = bidiag_from_eigenvalues(EigenSpec<double>({0.2, 0.5, 0.8}));
  const auto pair = rep.dense_pair();
  const auto [tin, sim] = to_tin(pair, EigenvalueOrder::as_computed());
  CHECK(sim.kind == SimilarityKind::unitary);
  CHECK(tin.residual <= 1e-10 * 3);
}

TEST_CASE("to_tin rejects an uncontrollable pair") {
  MatrixX<double> a(2, 2), b(2, 1);
  a << 0.5, 0.0, 0.0, 0.5;
  b << 1.0, 1.0;
  try {
    to_tin(InputPair<double>(a, b), EigenvalueOrder::as_computed());
    FAIL("expected NotControllable");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotControllable);
  }
}

TEST_CASE("to_tin preserves the impulse response and keeps ||B|| <= 1") {
  Rng rng(25);
  for (int trial = 0; trial < 6; ++trial) {
    const Index n = 2 + static_cast<Index>(rng.next() % 8);
    const Index d = 1 + static_cast<Index>(rng.next() % 2);
    const auto pair = testutil::random_real_eig_pair(rng, n, d, 0.85);
    const auto [tin, sim] = to_tin(pair, EigenvalueOrder::ascending());

    const MatrixX<double> c = rng.normal_matrix(2, n);
    const MatrixX<double> c_t = c * sim.Tinv;
    const auto block = impulse_response(pair, 50);
    const auto block_t = impulse_response(tin.pair, 50);
    double scale = 0, diff = 0;
    for (std::size_t j = 0; j < 50; ++j) {
      scale = std::max(scale, max_norm((c * block.leads[j]).eval()));
      diff = std::max(diff, max_norm((c * block.leads[j] - c_t * block_t.leads[j]).eval()));
    }
    CHECK(diff <= 1e-8 * scale);

    Eigen::BDCSVD<MatrixX<double>> svd(tin.B());
    const double bnorm = svd.singularValues()(0);
    CHECK(bnorm * bnorm <= 1.0 + 1e-10);
  }
}

TEST_CASE("two realizations of one system reduce to phase-equivalent TIN pairs") {
  Rng rng(26);
  for (int trial = 0; trial < 4; ++trial) {
    const Index n = 3 + static_cast<Index>(rng.next() % 5);
    const auto pair = testutil::random_real_eig_pair(rng, n, 1, 0.8);
    const MatrixX<double> s =
        MatrixX<double>::Identity(n, n) + 0.3 * rng.normal_matrix(n, n);
    const InputPair<double> other(s * pair.A * s.inverse(), s * pair.B);

    const auto [tin1, sim1] = to_tin(pair, EigenvalueOrder::ascending());
    const auto [tin2, sim2] = to_tin(other, EigenvalueOrder::ascending());
    const auto phases = diagonal_phase_equivalence(tin1, tin2);
    REQUIRE(phases.has_value());
    for (Index i = 0; i < n; ++i)
      CHECK(std::abs(std::abs((*phases)(i)) - 1.0) <= 1e-8);
  }
}

TEST_CASE("complex pipeline reduces pairs with complex spectra") {
  Rng rng(27);
  const Index n = 6;
  MatrixX<Complex> a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = Complex(rng.normal(), rng.normal());
  a *= 0.5 / std::sqrt(static_cast<double>(n));  // spectrum inside the unit disk
  MatrixX<Complex> b(n, 2);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < 2; ++j) b(i, j) = Complex(rng.normal(), rng.normal());
  const InputPair<Complex> pair(a, b);
  const auto [tin, sim] = to_tin(pair, EigenvalueOrder::ascending());
  CHECK(tin.residual <= 1e-10 * n);
}

TEST_CASE("real pipeline rejects complex spectra with guidance") {
  MatrixX<double> a(2, 2), b(2, 1);
  a << 0.0, -0.5, 0.5, 0.0;  // eigenvalues +-0.5i
  b << 1.0, 0.0;
  try {
    to_tin(InputPair<double>(a, b), EigenvalueOrder::as_computed());
    FAIL("expected EigenFailure");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EigenFailure);
  }
}

TEST_CASE("tin_from_b") {
  SUBCASE("boundary ||B|| = 1 is rejected") {
    MatrixX<double> b(1, 1);
    b << 1.0;
    VectorX<double> phases(1);
    phases << 1.0;
    try {
      tin_from_b(b, phases);
      FAIL("expected NotPositiveDefinite");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NotPositiveDefinite);
    }
  }
  SUBCASE("scalar 0.6 / 0.8 pair") {
    MatrixX<double> b(1, 1);
    b << 0.6;
    VectorX<double> phases(1);
    phases << 1.0;
    const auto tin = tin_from_b(b, phases);
    CHECK(tin.A()(0, 0) == doctest::Approx(0.8));
  }
  SUBCASE("reproduces the worked bidiag pair from its B column") {
    const auto rep = bidiag_from_eigenvalues(EigenSpec<double>({0.5, 0.5}));
    const auto pair = rep.dense_pair();
    VectorX<double> phases(2);
    phases << 1.0, 1.0;
    const auto tin = tin_from_b(pair.B, phases);
    CHECK(max_norm((tin.A() - pair.A).eval()) <= 1e-14);
  }
}

TEST_CASE("diagonal phase equivalence") {
  const auto rep = bidiag_from_eigenvalues(EigenSpec<double>({0.5, 0.5}));
  const auto tin = validate_tin(rep.dense_pair());

  SUBCASE("identical pairs give the identity") {
    const auto phases = diagonal_phase_equivalence(tin, tin);
    REQUIRE(phases.has_value());
    CHECK(max_norm((*phases - VectorX<double>::Ones(2)).eval()) <= 1e-12);
  }
  SUBCASE("a sign flip is recovered") {
    VectorX<double> e(2);
    e << 1.0, -1.0;
    const MatrixX<double> ed = e.asDiagonal();
    const InputPair<double> flipped(ed * tin.A() * ed, ed * tin.B());
    const auto tin2 = validate_tin(flipped);
    const auto phases = diagonal_phase_equivalence(tin, tin2);
    REQUIRE(phases.has_value());
    CHECK((*phases)(0) == doctest::Approx(1.0));
    CHECK((*phases)(1) == doctest::Approx(-1.0));
  }
  SUBCASE("different eigenvalue orders give nothing") {
    const auto repA = bidiag_from_eigenvalues(EigenSpec<double>({0.2, 0.7}));
    const auto repB = bidiag_from_eigenvalues(EigenSpec<double>({0.7, 0.2}));
    const auto result = diagonal_phase_equivalence(validate_tin(repA.dense_pair()),
                                                   validate_tin(repB.dense_pair()));
    CHECK_FALSE(result.has_value());
  }
}

TEST_SUITE_END();
