#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <string>

#include "bandfrac/io.hpp"
#include "support.hpp"

using namespace bandfrac;
using testutil::Complex;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "bandfrac_io_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_SUITE_BEGIN("io");

TEST_CASE("real matrices round-trip bit exactly through JSON text") {
  Rng rng(71);
  MatrixX<double> m = rng.normal_matrix(5, 3);
  m(0, 0) = 0.1;                 // not exactly representable
  m(1, 1) = 1e-300;              // subnormal-adjacent magnitude
  m(2, 2) = 12345678901234567.0; // 17 significant digits

  const io::json j = io::to_json(m);
  const std::string text = j.dump();
  const auto parsed = io::matrix_from_json(io::json::parse(text));
  const MatrixX<double> back = io::as_scalar<double>(parsed);
  REQUIRE(back.rows() == 5);
  for (Index i = 0; i < 5; ++i)
    for (Index k = 0; k < 3; ++k) CHECK(back(i, k) == m(i, k));
}

TEST_CASE("complex matrices round-trip through JSON text") {
  Rng rng(72);
  MatrixX<Complex> m(3, 2);
  for (Index i = 0; i < 3; ++i)
    for (Index k = 0; k < 2; ++k) m(i, k) = Complex(rng.normal(), rng.normal());
  const std::string text = io::to_json(m).dump();
  const MatrixX<Complex> back =
      io::as_scalar<Complex>(io::matrix_from_json(io::json::parse(text)));
  for (Index i = 0; i < 3; ++i)
    for (Index k = 0; k < 2; ++k) CHECK(back(i, k) == m(i, k));
}

TEST_CASE("real data can widen to complex, never the reverse") {
  MatrixX<double> m = MatrixX<double>::Identity(2, 2);
  const io::AnyMatrix any = io::matrix_from_json(io::to_json(m));
  const MatrixX<Complex> widened = io::as_scalar<Complex>(any);
  CHECK(widened(0, 0) == Complex(1.0, 0.0));

  MatrixX<Complex> c(1, 1);
  c(0, 0) = Complex(0.0, 1.0);
  const io::AnyMatrix anyc = io::matrix_from_json(io::to_json(c));
  CHECK_THROWS_AS(io::as_scalar<double>(anyc), std::runtime_error);
}

TEST_CASE("pair JSON carries validation metadata") {
  const auto rep = bidiag_from_eigenvalues(EigenSpec<double>({0.5, 0.5}));
  const auto tin = validate_tin(rep.dense_pair());
  const io::json j = io::to_json(tin);
  CHECK(j.at("residual").get<double>() == tin.residual);
  const auto pair = io::pair_from_json<double>(j);
  CHECK(max_norm((pair.A - tin.A()).eval()) == 0.0);
  CHECK(io::pair_json_is_real(j));
}

TEST_CASE("banded matrices round-trip diagonal-major") {
  const auto rep = bidiag_from_eigenvalues(EigenSpec<double>({0.3, -0.6, 0.9}));
  const io::json j = io::to_json(rep.M);
  const auto back = io::banded_from_json<double>(j);
  CHECK(max_norm((back.dense() - rep.M.dense()).eval()) == 0.0);
}

TEST_CASE("band fractions round-trip with shapes checked") {
  const auto rep = bidiag_from_eigenvalues(EigenSpec<double>({0.25, -0.5, 0.75}));
  const std::string text = io::to_json(rep).dump();
  const auto back = io::fraction_from_json<double>(io::json::parse(text));
  CHECK(max_norm((back.M.dense() - rep.M.dense()).eval()) == 0.0);
  CHECK(max_norm((back.N.dense() - rep.N.dense()).eval()) == 0.0);
  CHECK(max_norm((back.Bhat - rep.Bhat).eval()) == 0.0);
}

TEST_CASE("complex band fractions round-trip") {
  Rng rng(73);
  const auto spec = testutil::random_complex_spec(rng, 4, 0.8);
  const auto rep = bidiag_from_eigenvalues(spec);
  const auto back = io::fraction_from_json<Complex>(io::json::parse(io::to_json(rep).dump()));
  CHECK(max_norm((back.N.dense() - rep.N.dense()).eval()) == 0.0);
}

TEST_CASE("eigenvalue spec files") {
  SUBCASE("plain real list") {
    const auto file = io::eigenspec_from_json(io::json::parse(R"({"lambdas":[0.5,-0.25]})"));
    CHECK(file.real());
    const auto spec = io::make_spec<double>(file);
    CHECK(spec.lambda(0) == 0.5);
    CHECK(spec.lambda(1) == -0.25);
  }
  SUBCASE("pairs and ascending order") {
    const auto file = io::eigenspec_from_json(
        io::json::parse(R"({"lambdas":[[0.0,0.8],[0.1,0.0]],"order":"ascending"})"));
    CHECK_FALSE(file.real());
    const auto spec = io::make_spec<Complex>(file);
    CHECK(spec.lambda(0) == Complex(0.1, 0.0));
    CHECK(spec.lambda(1) == Complex(0.0, 0.8));
  }
  SUBCASE("unknown order strings are rejected") {
    CHECK_THROWS_AS(
        io::eigenspec_from_json(io::json::parse(R"({"lambdas":[0.5],"order":"down"})")),
        std::runtime_error);
  }
}

TEST_CASE("Y matrices round-trip row-banded") {
  YMatrix<double> y(3, 2);
  Rng rng(74);
  for (Index i = 0; i < 3; ++i)
    for (Index k = 0; k <= 2; ++k) y.band()(i, k) = rng.normal();
  const auto back = io::ymatrix_from_json<double>(io::json::parse(io::to_json(y).dump()));
  CHECK(max_norm((back.band() - y.band()).eval()) == 0.0);
}

TEST_CASE("CSV round trip preserves doubles at 17 significant digits") {
  Rng rng(75);
  MatrixX<double> values = rng.normal_matrix(20, 3);
  values(0, 0) = 1.0 / 3.0;
  const fs::path path = temp_file("series.csv");
  io::save_csv(path.string(), {"eps_1", "eps_2", "eps_3"}, values);
  const io::CsvTable table = io::load_csv(path.string());
  REQUIRE(table.values.rows() == 20);
  REQUIRE(table.header.size() == 4);
  CHECK(table.header[0] == "t");
  for (Index i = 0; i < 20; ++i)
    for (Index k = 0; k < 3; ++k) CHECK(table.values(i, k) == values(i, k));
}

TEST_CASE("CSV loader rejects malformed tables") {
  const fs::path path = temp_file("bad.csv");
  {
    std::ofstream out(path);
    out << "x,y\n1,2\n";
  }
  CHECK_THROWS_AS(io::load_csv(path.string()), std::runtime_error);
}

TEST_CASE("column naming for complex series splits re/im") {
  const auto cols = io::value_columns("z", 2, false);
  REQUIRE(cols.size() == 4);
  CHECK(cols[0] == "z_1_re");
  CHECK(cols[3] == "z_2_im");
}

TEST_SUITE_END();
