#pragma once

#include <json.hpp>

#include <complex>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "bandfrac/band_fraction.hpp"
#include "bandfrac/banded.hpp"
#include "bandfrac/bidiag.hpp"
#include "bandfrac/core.hpp"
#include "bandfrac/types.hpp"
#include "bandfrac/ymatrix.hpp"

namespace bandfrac::io {

using json = nlohmann::json;
using Complex = std::complex<double>;

inline json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

inline void save_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Matrix exchange: {"n": rows, "d": cols, "real": bool, "data": row-major}.
// Real entries are plain numbers (shortest round-trip decimal form); complex
// entries are [re, im] pairs.

inline json to_json(const MatrixX<double>& m) {
  json data = json::array();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  return json{{"n", m.rows()}, {"d", m.cols()}, {"real", true}, {"data", std::move(data)}};
}

inline json to_json(const MatrixX<Complex>& m) {
  json data = json::array();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      data.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
  return json{{"n", m.rows()}, {"d", m.cols()}, {"real", false}, {"data", std::move(data)}};
}

using AnyMatrix = std::variant<MatrixX<double>, MatrixX<Complex>>;

inline AnyMatrix matrix_from_json(const json& j) {
  const Index rows = j.at("n").get<Index>();
  const Index cols = j.at("d").get<Index>();
  const bool real = j.at("real").get<bool>();
  const json& data = j.at("data");
  if (static_cast<Index>(data.size()) != rows * cols)
    throw std::runtime_error("matrix data length mismatch");
  if (real) {
    MatrixX<double> m(rows, cols);
    Index k = 0;
    for (Index i = 0; i < rows; ++i)
      for (Index jj = 0; jj < cols; ++jj) m(i, jj) = data[k++].get<double>();
    return m;
  }
  MatrixX<Complex> m(rows, cols);
  Index k = 0;
  for (Index i = 0; i < rows; ++i)
    for (Index jj = 0; jj < cols; ++jj) {
      const json& entry = data[k++];
      m(i, jj) = Complex(entry.at(0).get<double>(), entry.at(1).get<double>());
    }
  return m;
}

inline MatrixX<Complex> widen(const MatrixX<double>& m) { return m.cast<Complex>(); }
inline const MatrixX<Complex>& widen(const MatrixX<Complex>& m) { return m; }

template <typename Scalar>
MatrixX<Scalar> as_scalar(const AnyMatrix& any) {
  if constexpr (is_complex_v<Scalar>) {
    if (std::holds_alternative<MatrixX<double>>(any))
      return std::get<MatrixX<double>>(any).cast<Complex>();
    return std::get<MatrixX<Complex>>(any);
  } else {
    if (!std::holds_alternative<MatrixX<double>>(any))
      throw std::runtime_error("complex data where real was expected");
    return std::get<MatrixX<double>>(any);
  }
}

// ---------------------------------------------------------------------------
// Input pairs: {"A": matrix, "B": matrix}; TIN pairs add "tol"/"residual".

template <typename Scalar>
json to_json(const InputPair<Scalar>& pair) {
  return json{{"A", to_json(pair.A)}, {"B", to_json(pair.B)}};
}

template <typename Scalar>
json to_json(const TinPair<Scalar>& pair) {
  json j = to_json(pair.pair);
  j["tol"] = pair.tol;
  j["residual"] = pair.residual;
  return j;
}

template <typename Scalar>
InputPair<Scalar> pair_from_json(const json& j) {
  return InputPair<Scalar>(as_scalar<Scalar>(matrix_from_json(j.at("A"))),
                           as_scalar<Scalar>(matrix_from_json(j.at("B"))));
}

inline bool pair_json_is_real(const json& j) {
  return j.at("A").at("real").get<bool>() && j.at("B").at("real").get<bool>();
}

// ---------------------------------------------------------------------------
// Lower-banded matrices are stored diagonal-major, matching the in-memory
// layout: {"n", "d", "real", "diagonals": [main, sub1, ...]}.

inline json to_json(const LowerBanded<double>& m) {
  json diags = json::array();
  for (Index k = 0; k <= m.bandwidth(); ++k) {
    json diag = json::array();
    for (Index j = 0; j < m.order() - k; ++j) diag.push_back(m.diagonal(k)(j));
    diags.push_back(std::move(diag));
  }
  return json{{"n", m.order()}, {"d", m.bandwidth()}, {"real", true}, {"diagonals", std::move(diags)}};
}

inline json to_json(const LowerBanded<Complex>& m) {
  json diags = json::array();
  for (Index k = 0; k <= m.bandwidth(); ++k) {
    json diag = json::array();
    for (Index j = 0; j < m.order() - k; ++j)
      diag.push_back(json::array({m.diagonal(k)(j).real(), m.diagonal(k)(j).imag()}));
    diags.push_back(std::move(diag));
  }
  return json{{"n", m.order()}, {"d", m.bandwidth()}, {"real", false}, {"diagonals", std::move(diags)}};
}

template <typename Scalar>
LowerBanded<Scalar> banded_from_json(const json& j) {
  const Index n = j.at("n").get<Index>();
  const Index d = j.at("d").get<Index>();
  const bool real = j.at("real").get<bool>();
  if (!real && !is_complex_v<Scalar>)
    throw std::runtime_error("complex data where real was expected");
  LowerBanded<Scalar> m(n, d);
  const json& diags = j.at("diagonals");
  if (static_cast<Index>(diags.size()) != d + 1)
    throw std::runtime_error("diagonal count mismatch");
  for (Index k = 0; k <= d; ++k) {
    const json& diag = diags[static_cast<std::size_t>(k)];
    if (static_cast<Index>(diag.size()) != n - k)
      throw std::runtime_error("diagonal length mismatch");
    for (Index jj = 0; jj < n - k; ++jj) {
      const json& entry = diag[static_cast<std::size_t>(jj)];
      if (real)
        m.diagonal(k)(jj) = Scalar(entry.get<double>());
      else if constexpr (is_complex_v<Scalar>)
        m.diagonal(k)(jj) = Scalar(entry.at(0).get<double>(), entry.at(1).get<double>());
    }
  }
  return m;
}

template <typename Scalar>
json to_json(const BandFraction<Scalar>& rep) {
  return json{{"n", rep.order()},
              {"d", rep.inputs()},
              {"real", !is_complex_v<Scalar>},
              {"M", to_json(rep.M)},
              {"N", to_json(rep.N)},
              {"Bhat", to_json(rep.Bhat)}};
}

template <typename Scalar>
BandFraction<Scalar> fraction_from_json(const json& j) {
  BandFraction<Scalar> rep;
  rep.M = banded_from_json<Scalar>(j.at("M"));
  rep.N = banded_from_json<Scalar>(j.at("N"));
  rep.Bhat = as_scalar<Scalar>(matrix_from_json(j.at("Bhat")));
  check_fraction_shapes(rep);
  return rep;
}

// ---------------------------------------------------------------------------
// Eigenvalue specs: {"lambdas": [x, ...] or [[re, im], ...],
//                    "order": "as-given" | "ascending"}.

struct EigenSpecFile {
  std::vector<Complex> lambdas;
  bool ascending = false;

  bool real() const {
    for (const Complex& l : lambdas)
      if (l.imag() != 0.0) return false;
    return true;
  }
};

inline EigenSpecFile eigenspec_from_json(const json& j) {
  EigenSpecFile spec;
  for (const json& entry : j.at("lambdas")) {
    if (entry.is_array())
      spec.lambdas.emplace_back(entry.at(0).get<double>(), entry.at(1).get<double>());
    else
      spec.lambdas.emplace_back(entry.get<double>(), 0.0);
  }
  if (j.contains("order")) {
    const std::string order = j.at("order").get<std::string>();
    if (order == "ascending")
      spec.ascending = true;
    else if (order != "as-given")
      throw std::runtime_error("order must be \"as-given\" or \"ascending\"");
  }
  return spec;
}

template <typename Scalar>
EigenSpec<Scalar> make_spec(const EigenSpecFile& file) {
  std::vector<Scalar> lambdas;
  lambdas.reserve(file.lambdas.size());
  for (const Complex& l : file.lambdas) {
    if constexpr (is_complex_v<Scalar>)
      lambdas.push_back(l);
    else
      lambdas.push_back(l.real());
  }
  EigenSpec<Scalar> spec(std::move(lambdas));
  return file.ascending ? sort_ascending(spec) : spec;
}

// ---------------------------------------------------------------------------
// Y matrices: {"n", "d", "real", "band": rows of d+1 entries}, row i holding
// Y(i, i..i+d).

template <typename Scalar>
json to_json(const YMatrix<Scalar>& y) {
  json rows = json::array();
  for (Index i = 0; i < y.order(); ++i) {
    json row = json::array();
    for (Index k = 0; k <= y.inputs(); ++k) {
      const Scalar value = y.band()(i, k);
      if constexpr (is_complex_v<Scalar>)
        row.push_back(json::array({value.real(), value.imag()}));
      else
        row.push_back(value);
    }
    rows.push_back(std::move(row));
  }
  return json{{"n", y.order()}, {"d", y.inputs()}, {"real", !is_complex_v<Scalar>},
              {"band", std::move(rows)}};
}

template <typename Scalar>
YMatrix<Scalar> ymatrix_from_json(const json& j) {
  const Index n = j.at("n").get<Index>();
  const Index d = j.at("d").get<Index>();
  const bool real = j.at("real").get<bool>();
  if (!real && !is_complex_v<Scalar>)
    throw std::runtime_error("complex data where real was expected");
  YMatrix<Scalar> y(n, d);
  const json& rows = j.at("band");
  if (static_cast<Index>(rows.size()) != n) throw std::runtime_error("band row count mismatch");
  for (Index i = 0; i < n; ++i) {
    const json& row = rows[static_cast<std::size_t>(i)];
    if (static_cast<Index>(row.size()) != d + 1)
      throw std::runtime_error("band row length mismatch");
    for (Index k = 0; k <= d; ++k) {
      const json& entry = row[static_cast<std::size_t>(k)];
      if (real)
        y.band()(i, k) = Scalar(entry.get<double>());
      else if constexpr (is_complex_v<Scalar>)
        y.band()(i, k) = Scalar(entry.at(0).get<double>(), entry.at(1).get<double>());
    }
  }
  return y;
}

// ---------------------------------------------------------------------------
// CSV time series. Inputs: header "t,eps_1..eps_d" (or "t,u_1..u_d" plus
// "y_1..y_p" for identification datasets). Values print with 17 significant
// digits.

inline std::string format_value(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

struct CsvTable {
  std::vector<std::string> header;
  MatrixX<double> values;  // one row per record, t column excluded
};

inline CsvTable load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV " + path);
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) table.header.push_back(cell);
  }
  if (table.header.empty() || table.header.front() != "t")
    throw std::runtime_error("CSV must start with a t column");

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != table.header.size())
      throw std::runtime_error("CSV row width mismatch");
    row.erase(row.begin());  // drop t
    rows.push_back(std::move(row));
  }
  table.values.resize(static_cast<Index>(rows.size()),
                      static_cast<Index>(table.header.size()) - 1);
  for (Index i = 0; i < table.values.rows(); ++i)
    for (Index j = 0; j < table.values.cols(); ++j)
      table.values(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return table;
}

inline void save_csv(const std::string& path, const std::vector<std::string>& columns,
                     const MatrixX<double>& values) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "t";
  for (const std::string& c : columns) out << ',' << c;
  out << '\n';
  for (Index i = 0; i < values.rows(); ++i) {
    out << (i + 1);
    for (Index j = 0; j < values.cols(); ++j) out << ',' << format_value(values(i, j));
    out << '\n';
  }
}

/// Columns named `stem_k` for real data, `stem_k_re` / `stem_k_im` otherwise.
inline std::vector<std::string> value_columns(const std::string& stem, Index count, bool real) {
  std::vector<std::string> names;
  for (Index k = 1; k <= count; ++k) {
    if (real) {
      names.push_back(stem + "_" + std::to_string(k));
    } else {
      names.push_back(stem + "_" + std::to_string(k) + "_re");
      names.push_back(stem + "_" + std::to_string(k) + "_im");
    }
  }
  return names;
}

inline MatrixX<double> interleave(const MatrixX<Complex>& m) {
  MatrixX<double> out(m.rows(), 2 * m.cols());
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) {
      out(i, 2 * j) = m(i, j).real();
      out(i, 2 * j + 1) = m(i, j).imag();
    }
  return out;
}

}  // namespace bandfrac::io
