// Command-line front end: synthesis from prescribed poles, reduction of
// arbitrary stable pairs, banded filtering, impulse responses, recursive
// least-squares identification, and the operation-count benchmark.
//
// Exit codes: 0 success, 1 I/O or parse failure, 2 invalid model,
// 3 stability/controllability failure, 4 identification rank failure.

#include <CLI11.hpp>

#include <chrono>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "bandfrac/bandfrac.hpp"
#include "bandfrac/io.hpp"

namespace {

using namespace bandfrac;
using Complex = std::complex<double>;
using io::json;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotStable:
    case ErrorKind::NotControllable:
    case ErrorKind::NoConvergence:
      return 3;
    case ErrorKind::SingularMoment:
      return 4;
    default:
      return 2;
  }
}

double validation_tolerance(Index n) {
  if (const char* env = std::getenv("BANDFRAC_TOL")) return std::atof(env);
  return default_tin_tolerance<double>(n);
}

EigenvalueOrder parse_order(const std::string& name) {
  if (name == "as-computed") return EigenvalueOrder::as_computed();
  if (name == "ascending") return EigenvalueOrder::ascending();
  throw CLI::ValidationError("--order", "must be as-computed or ascending");
}

json conditioning_to_json(const ConditioningReport& report) {
  return json{{"max_entry", report.max_entry}, {"kappa1", report.kappa1},
              {"kappa_inf", report.kappa_inf}, {"kappa2", report.kappa2},
              {"kappa2_bound", report.kappa2_bound}, {"ascending", report.ascending}};
}

// ---------------------------------------------------------------------------
// synth: EigenSpec JSON -> band fraction JSON with a validation report.

template <typename Scalar>
json synth_payload(const EigenSpec<Scalar>& spec) {
  const BandFraction<Scalar> rep = bidiag_from_eigenvalues(spec);
  const auto pair = rep.dense_pair();
  const auto tin = validate_tin(pair, real_t<Scalar>(validation_tolerance(spec.order())));
  json out = io::to_json(rep);
  out["report"] = json{{"tin_residual", tin.residual},
                       {"grammian_residual", rep.grammian_residual()},
                       {"conditioning", conditioning_to_json(conditioning_report(spec))}};
  return out;
}

int cmd_synth(const std::string& spec_path, const std::string& out_path) {
  const auto file = io::eigenspec_from_json(io::load_json(spec_path));
  const json out = file.real() ? synth_payload(io::make_spec<double>(file))
                               : synth_payload(io::make_spec<Complex>(file));
  io::save_json(out, out_path);
  std::printf("synth: n=%zu real=%d -> %s\n", file.lambdas.size(), file.real() ? 1 : 0,
              out_path.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// reduce: stable controllable pair -> TIN pair + similarity + impulse match.

template <typename Scalar>
json reduce_payload(const InputPair<Scalar>& pair, const EigenvalueOrder& order) {
  const auto [tin, sim] = to_tin(pair, order);

  const Index leads = 50;
  const MatrixX<Scalar> c = MatrixX<Scalar>::Identity(pair.order(), pair.order());
  const MatrixX<Scalar> c_t = c * sim.Tinv;
  const auto block = impulse_response(pair, leads);
  const auto block_t = impulse_response(tin.pair, leads);
  double scale = 0, diff = 0;
  for (std::size_t j = 0; j < static_cast<std::size_t>(leads); ++j) {
    scale = std::max<double>(scale, max_norm((c * block.leads[j]).eval()));
    diff = std::max<double>(diff, max_norm((c * block.leads[j] - c_t * block_t.leads[j]).eval()));
  }

  json out = io::to_json(tin);
  out["T"] = io::to_json(sim.T);
  out["Tinv"] = io::to_json(sim.Tinv);
  out["unitary"] = sim.kind == SimilarityKind::unitary;
  out["impulse_match"] = json{{"leads", leads},
                              {"relative_error", scale > 0 ? diff / scale : 0.0}};
  return out;
}

bool real_pair_has_real_spectrum(const InputPair<double>& pair) {
  const auto values = pair.A.eigenvalues();
  for (Index i = 0; i < values.size(); ++i)
    if (values(i).imag() != 0.0) return false;
  return true;
}

int cmd_reduce(const std::string& pair_path, const std::string& order_name,
               const std::string& out_path) {
  const json j = io::load_json(pair_path);
  const EigenvalueOrder order = parse_order(order_name);
  json out;
  if (io::pair_json_is_real(j)) {
    const auto pair = io::pair_from_json<double>(j);
    if (real_pair_has_real_spectrum(pair))
      out = reduce_payload(pair, order);
    else
      out = reduce_payload(io::pair_from_json<Complex>(j), order);  // complex spectrum
  } else {
    out = reduce_payload(io::pair_from_json<Complex>(j), order);
  }
  io::save_json(out, out_path);
  std::printf("reduce: %s -> %s (unitary=%s, impulse rel err %.3e)\n", pair_path.c_str(),
              out_path.c_str(), out["unitary"].get<bool>() ? "yes" : "no",
              out["impulse_match"]["relative_error"].get<double>());
  return 0;
}

// ---------------------------------------------------------------------------
// validate: TIN check with residual report.

template <typename Scalar>
json validate_payload(const InputPair<Scalar>& pair, double tol) {
  const auto tin = validate_tin(pair, real_t<Scalar>(tol));
  return json{{"valid", true}, {"tol", tin.tol}, {"residual", tin.residual}};
}

int cmd_validate(const std::string& pair_path, std::optional<double> tol_opt) {
  const json j = io::load_json(pair_path);
  const Index n = j.at("A").at("n").get<Index>();
  const double tol = tol_opt ? *tol_opt : validation_tolerance(n);
  const json out = io::pair_json_is_real(j)
                       ? validate_payload(io::pair_from_json<double>(j), tol)
                       : validate_payload(io::pair_from_json<Complex>(j), tol);
  std::cout << out.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// filter: run a band fraction over a CSV input record.

template <typename Scalar>
int filter_with(const BandFraction<Scalar>& rep, const io::CsvTable& table,
                const std::string& c_path, const std::string& out_path) {
  require(table.values.cols() == rep.inputs(), ErrorKind::DimensionMismatch,
          "input column count must equal d");
  const MatrixX<Scalar> inputs = table.values.cast<Scalar>();
  const MatrixX<Scalar> states = run(rep, inputs);

  MatrixX<Scalar> outputs;
  Index p = 0;
  if (!c_path.empty()) {
    const MatrixX<Scalar> c = io::as_scalar<Scalar>(io::matrix_from_json(io::load_json(c_path)));
    require(c.cols() == rep.order(), ErrorKind::DimensionMismatch,
            "C column count must equal the order");
    outputs = states * c.transpose();  // row t holds (C z_t)^T
    p = c.rows();
  }

  std::vector<std::string> columns = io::value_columns("z", rep.order(), !is_complex_v<Scalar>);
  MatrixX<double> flat;
  if constexpr (is_complex_v<Scalar>) {
    flat = io::interleave(states);
    if (p > 0) {
      const MatrixX<double> yflat = io::interleave(outputs);
      MatrixX<double> joined(flat.rows(), flat.cols() + yflat.cols());
      joined << flat, yflat;
      flat = joined;
      for (const auto& name : io::value_columns("y", p, false)) columns.push_back(name);
    }
  } else {
    flat = states;
    if (p > 0) {
      MatrixX<double> joined(flat.rows(), flat.cols() + outputs.cols());
      joined << flat, outputs;
      flat = joined;
      for (const auto& name : io::value_columns("y", p, true)) columns.push_back(name);
    }
  }
  io::save_csv(out_path, columns, flat);
  std::printf("filter: %lld steps, n=%lld -> %s\n", static_cast<long long>(flat.rows()),
              static_cast<long long>(rep.order()), out_path.c_str());
  return 0;
}

int cmd_filter(const std::string& model_path, const std::string& input_path,
               const std::string& c_path, const std::string& out_path) {
  const json j = io::load_json(model_path);
  const io::CsvTable table = io::load_csv(input_path);
  if (j.at("real").get<bool>())
    return filter_with(io::fraction_from_json<double>(j), table, c_path, out_path);
  return filter_with(io::fraction_from_json<Complex>(j), table, c_path, out_path);
}

// ---------------------------------------------------------------------------
// impulse: leads of a model, or basis functions of an eigenvalue spec.

template <typename Scalar>
json impulse_payload(const InputPair<Scalar>& pair, Index T) {
  const auto block = impulse_response(pair, T);
  json leads = json::array();
  for (const auto& lead : block.leads) leads.push_back(io::to_json(lead));
  return json{{"T", T}, {"leads", std::move(leads)}};
}

int cmd_impulse(const std::string& model_path, const std::string& pair_path,
                const std::string& spec_path, int alpha, Index T,
                const std::string& out_path) {
  const int sources = (!model_path.empty() ? 1 : 0) + (!pair_path.empty() ? 1 : 0) +
                      (!spec_path.empty() ? 1 : 0);
  if (sources != 1)
    throw CLI::ValidationError("impulse", "provide exactly one of --model/--pair/--spec");

  if (!spec_path.empty()) {
    // Basis-function rows as a time series CSV.
    const auto file = io::eigenspec_from_json(io::load_json(spec_path));
    if (file.real()) {
      const auto spec = io::make_spec<double>(file);
      const MatrixX<double> rows = basis_functions(spec, alpha, T);
      const MatrixX<double> series = rows.transpose();
      io::save_csv(out_path, io::value_columns("basis", spec.order(), true), series);
    } else {
      const auto spec = io::make_spec<Complex>(file);
      const MatrixX<Complex> rows = basis_functions(spec, alpha, T);
      io::save_csv(out_path, io::value_columns("basis", spec.order(), false),
                   io::interleave(rows.transpose()));
    }
    std::printf("impulse: basis functions, T=%lld -> %s\n", static_cast<long long>(T),
                out_path.c_str());
    return 0;
  }

  json out;
  if (!model_path.empty()) {
    const json j = io::load_json(model_path);
    if (j.at("real").get<bool>())
      out = impulse_payload(io::fraction_from_json<double>(j).dense_pair(), T);
    else
      out = impulse_payload(io::fraction_from_json<Complex>(j).dense_pair(), T);
  } else {
    const json j = io::load_json(pair_path);
    if (io::pair_json_is_real(j))
      out = impulse_payload(io::pair_from_json<double>(j), T);
    else
      out = impulse_payload(io::pair_from_json<Complex>(j), T);
  }
  io::save_json(out, out_path);
  std::printf("impulse: %lld leads -> %s\n", static_cast<long long>(T), out_path.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// identify: dataset CSV + eigenvalue spec -> Chat, impulse leads, conditioning.

template <typename Scalar>
json identify_payload(const EigenSpec<Scalar>& spec, const io::CsvTable& table, double delta,
                      Index leads) {
  const Index d = 1;  // single-input basis
  const Index width = table.values.cols();
  require(width > d, ErrorKind::DimensionMismatch, "dataset needs u and y columns");
  const Index p = width - d;

  const MatrixX<Scalar> u = table.values.leftCols(d).template cast<Scalar>();
  const MatrixX<Scalar> y = table.values.rightCols(p).template cast<Scalar>();
  const auto rep = bidiag_from_eigenvalues(spec);
  const auto result = identify(rep, u, y, real_t<Scalar>(delta), leads);

  json impulse = json::array();
  for (const auto& lead : result.impulse) impulse.push_back(io::to_json(lead));
  return json{{"Chat", io::to_json(result.Chat)},
              {"impulse", std::move(impulse)},
              {"delta", delta},
              {"conditioning", result.conditioning},
              {"n", spec.order()},
              {"samples", table.values.rows()}};
}

int cmd_identify(const std::string& data_path, const std::string& spec_path, double delta,
                 Index leads, const std::string& out_path) {
  const auto file = io::eigenspec_from_json(io::load_json(spec_path));
  const io::CsvTable table = io::load_csv(data_path);
  const json out = file.real()
                       ? identify_payload(io::make_spec<double>(file), table, delta, leads)
                       : identify_payload(io::make_spec<Complex>(file), table, delta, leads);
  io::save_json(out, out_path);
  std::printf("identify: %lld samples, conditioning %.3e -> %s\n",
              out["samples"].get<long long>(), out["conditioning"].get<double>(),
              out_path.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// bench: measured multiply counts and wall clock, banded vs dense baseline.

int cmd_bench(Index n, Index d, Index T, std::uint64_t seed, const std::string& out_path) {
  require(n >= 1 && d >= 1 && d <= n, ErrorKind::DimensionMismatch, "need 1 <= d <= n");
  Rng rng(seed);

  // A TIN representation with the requested bandwidth: bidiagonal for d = 1,
  // fraction of a reduced random pair otherwise.
  BandFraction<double> rep;
  if (d == 1) {
    std::vector<double> lambdas;
    for (Index k = 0; k < n; ++k) lambdas.push_back(rng.uniform(-0.9, 0.9));
    rep = bidiag_from_eigenvalues(sort_ascending(EigenSpec<double>(lambdas)));
  } else {
    MatrixX<double> tri = MatrixX<double>::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
      tri(i, i) = 0.85 * (static_cast<double>(i) + 0.5) / static_cast<double>(n) *
                  (rng.next() % 2 ? 1.0 : -1.0);
      for (Index j = 0; j < i; ++j) tri(i, j) = 0.3 * rng.normal();
    }
    const MatrixX<double> s = MatrixX<double>::Identity(n, n) + 0.2 * rng.normal_matrix(n, n);
    const InputPair<double> pair(s * tri * s.inverse(), rng.normal_matrix(n, d));
    rep = lr_band_fraction(to_tin(pair, EigenvalueOrder::ascending()).first);
  }

  const MatrixX<double> inputs = rng.normal_matrix(T, d);

  FilterState<double> state(rep);
  const auto banded_start = std::chrono::steady_clock::now();
  for (Index t = 0; t < T; ++t) advance(state, VectorX<double>(inputs.row(t).transpose()));
  const auto banded_stop = std::chrono::steady_clock::now();
  const double banded_seconds =
      std::chrono::duration<double>(banded_stop - banded_start).count() / static_cast<double>(T);
  const std::uint64_t measured = state.mul_count / static_cast<std::uint64_t>(T);

  const auto pair = rep.dense_pair();
  VectorX<double> z = VectorX<double>::Zero(n);
  const auto dense_start = std::chrono::steady_clock::now();
  for (Index t = 0; t < T; ++t) z = pair.A * z + pair.B * inputs.row(t).transpose();
  const auto dense_stop = std::chrono::steady_clock::now();
  const double dense_seconds =
      std::chrono::duration<double>(dense_stop - dense_start).count() / static_cast<double>(T);
  if (!z.allFinite()) return 2;  // keep the dense loop observable

  const std::uint64_t predicted = predicted_counts(n, d, true);
  const std::uint64_t dense_mults =
      static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n + d);

  json out{{"n", n},
           {"d", d},
           {"T", T},
           {"seed", seed},
           {"measured_per_advance", measured},
           {"predicted_per_advance", predicted},
           {"dense_mults_per_advance", dense_mults},
           {"banded_seconds_per_advance", banded_seconds},
           {"dense_seconds_per_advance", dense_seconds},
           {"speedup", banded_seconds > 0 ? dense_seconds / banded_seconds : 0.0}};
  if (!out_path.empty()) io::save_json(out, out_path);
  std::cout << out.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Banded matrix-fraction state-space toolkit"};
  app.require_subcommand(1);

  std::string spec_path, pair_path, model_path, data_path, input_path, c_path, out_path;
  std::string order_name = "ascending";
  double delta = 1.0;
  std::optional<double> tol;
  int alpha = 0;
  Index T = 50, leads = 50, n = 100, d = 1;
  std::uint64_t seed = 1;

  auto* synth = app.add_subcommand("synth", "Band fraction from prescribed poles");
  synth->add_option("--spec", spec_path, "EigenSpec JSON")->required();
  synth->add_option("--out", out_path, "output JSON")->required();

  auto* reduce = app.add_subcommand("reduce", "Reduce a stable pair to TIN form");
  reduce->add_option("--pair", pair_path, "input pair JSON")->required();
  reduce->add_option("--order", order_name, "as-computed | ascending");
  reduce->add_option("--out", out_path, "output JSON")->required();

  auto* validate = app.add_subcommand("validate", "Check the TIN conditions");
  validate->add_option("--pair", pair_path, "input pair JSON")->required();
  validate->add_option("--tol", tol, "residual tolerance");

  auto* filter = app.add_subcommand("filter", "Run a band fraction over a CSV record");
  filter->add_option("--model", model_path, "band fraction JSON")->required();
  filter->add_option("--input", input_path, "input CSV (t,eps_1..eps_d)")->required();
  filter->add_option("--C", c_path, "output map JSON");
  filter->add_option("--out", out_path, "states CSV")->required();

  auto* impulse = app.add_subcommand("impulse", "Impulse response or basis functions");
  impulse->add_option("--model", model_path, "band fraction JSON");
  impulse->add_option("--pair", pair_path, "pair JSON");
  impulse->add_option("--spec", spec_path, "EigenSpec JSON (basis functions)");
  impulse->add_option("--alpha", alpha, "time origin, 0 or 1")->check(CLI::Range(0, 1));
  impulse->add_option("--T", T, "lead count")->check(CLI::PositiveNumber);
  impulse->add_option("--out", out_path, "output path")->required();

  auto* identify_cmd = app.add_subcommand("identify", "RLS identification over the basis");
  identify_cmd->add_option("--data", data_path, "dataset CSV (t,u_1..,y_1..)")->required();
  identify_cmd->add_option("--spec", spec_path, "EigenSpec JSON")->required();
  identify_cmd->add_option("--delta", delta, "forgetting factor in (0,1]");
  identify_cmd->add_option("--leads", leads, "impulse leads to report");
  identify_cmd->add_option("--out", out_path, "result JSON")->required();

  auto* bench = app.add_subcommand("bench", "Operation counts, banded vs dense");
  bench->add_option("--n", n, "order")->check(CLI::PositiveNumber);
  bench->add_option("--d", d, "bandwidth / input count")->check(CLI::PositiveNumber);
  bench->add_option("--T", T, "advances to time");
  bench->add_option("--seed", seed, "generator seed");
  bench->add_option("--out", out_path, "report JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return cmd_synth(spec_path, out_path);
    if (reduce->parsed()) return cmd_reduce(pair_path, order_name, out_path);
    if (validate->parsed()) return cmd_validate(pair_path, tol);
    if (filter->parsed()) return cmd_filter(model_path, input_path, c_path, out_path);
    if (impulse->parsed()) return cmd_impulse(model_path, pair_path, spec_path, alpha, T, out_path);
    if (identify_cmd->parsed()) return cmd_identify(data_path, spec_path, delta, leads, out_path);
    if (bench->parsed()) return cmd_bench(n, d, T == 50 ? 1000 : T, seed, out_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
