#include "cli.hpp"

#include "revmarkov/error.hpp"
#include "revmarkov/generators.hpp"
#include "revmarkov/matrix_io.hpp"
#include "revmarkov/metrics_bench.hpp"
#include "revmarkov/oracle_qp.hpp"
#include "revmarkov/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

namespace revmarkov::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

int exit_code_for(const Error& e) { return is_input_error(e.code()) ? kExitInput : kExitSolver; }

json index_list(const IndexSet& s) { return json(std::vector<Index>(s.begin(), s.end())); }

json metrics_json(const MetricSet& m) {
  return {{"rel_frobenius", m.rel_frobenius},
          {"detailed_balance_inf", m.detailed_balance_inf},
          {"stationarity_inf", m.stationarity_inf},
          {"stochasticity_inf", m.stochasticity_inf},
          {"wall_time_s", m.wall_time_s}};
}

json error_json(const Error& e) { return {{"code", std::string(to_string(e.code()))}, {"message", e.what()}}; }

void write_json(const std::string& path, const json& j, std::ostream& out) {
  if (path.empty()) {
    out << j.dump(2) << '\n';
    return;
  }
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
  f << j.dump(2) << '\n';
}

MatrixFormat output_format(const std::string& flag, MatrixFormat fallback) {
  return flag.empty() ? fallback : parse_matrix_format(flag);
}

/// Format from the file extension: .csv is CSV, anything else Matrix Market.
MatrixFormat format_from_path(const std::string& path) {
  return fs::path(path).extension() == ".csv" ? MatrixFormat::Csv : MatrixFormat::MatrixMarket;
}

/// Writes to a sibling temporary file, then renames it over `path`.
void write_atomically(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp);
    if (!f) throw Error(ErrorCode::Io, "cannot open " + tmp.string());
    f << content;
    if (!f) throw Error(ErrorCode::Io, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

json trace_json(const ClassReport& c) {
  return {{"size", c.states.size()},
          {"states", index_list(c.states)},
          {"termination", std::string(to_string(c.trace.termination))},
          {"outer_iterations", c.trace.outer_iterations},
          {"inner_iterations", c.trace.total_inner_iterations},
          {"final_cost", c.trace.final_cost},
          {"final_grad_norm", c.trace.final_grad_norm},
          {"wall_time_s", c.wall_time_s},
          {"failed", c.failed},
          {"error", c.error}};
}

// ---------------------------------------------------------------- solve

struct SolveArgs {
  std::string input, pi, output, report, format;
  bool recurse = true;
  double grad_tol = 1e-6;
  std::optional<double> transient_tol;
  bool random_init = false;
  std::uint64_t seed = 0;
  long max_iter = 1000;
  unsigned threads = 0;
};

int cmd_solve(const SolveArgs& args, std::ostream& out, std::ostream& err) {
  json rep = {{"schema", 1}, {"command", "solve"}};
  rep["config"] = {{"input", args.input},
                   {"pi", args.pi},
                   {"recurse_ergodic", args.recurse},
                   {"grad_tol", args.grad_tol},
                   {"max_iter", args.max_iter},
                   {"random_init", args.random_init},
                   {"seed", args.seed}};
  if (args.transient_tol) rep["config"]["transient_tol"] = *args.transient_tol;

  auto fail = [&](const Error& e) {
    rep["status"] = "error";
    rep["error"] = error_json(e);
    try {
      write_json(args.report, rep, out);
    } catch (const Error&) {
    }
    err << e.what() << '\n';
    return exit_code_for(e);
  };

  MatrixFormat fmt = MatrixFormat::Csv;
  SolveRequest req;
  try {
    req.a = validate_stochastic(read_matrix(fs::path(args.input), &fmt));
    if (!args.pi.empty()) req.pi = read_vector(args.pi);
    req.recurse_ergodic = args.recurse;
    req.solver.grad_tol = args.grad_tol;
    req.solver.max_outer = args.max_iter;
    req.transient_tol = args.transient_tol;
    req.random_init = args.random_init;
    req.seed = args.seed;
    req.threads = args.threads;
  } catch (const Error& e) {
    return fail(e);
  }
  rep["config"]["format"] = std::string(to_string(fmt));
  rep["config"]["n"] = req.a.size();

  SolveReport result;
  int code = kExitOk;
  try {
    result = nearest_reversible(req);
    rep["status"] = "ok";
  } catch (const PartialFailureError& e) {
    result = e.report();
    rep["status"] = "partial";
    rep["error"] = error_json(e);
    rep["failed_classes"] = e.failed_classes();
    err << e.what() << '\n';
    code = kExitSolver;
  } catch (const Error& e) {
    return fail(e);
  }

  rep["config"]["transient_tol"] = result.transient_tol;
  rep["config"]["delta_bar"] = result.config.delta_bar;
  rep["config"]["delta0"] = result.config.delta0;
  rep["config"]["rho_prime"] = result.config.rho_prime;
  rep["config"]["threads"] = worker_cap(args.threads);
  rep["pi"] = {{"supplied", result.pi_supplied},
               {"inconsistent", result.pi_inconsistent},
               {"stationarity_residual", result.pi_residual}};

  json classes = json::array();
  for (const auto& c : result.class_states) classes.push_back({{"size", c.size()}, {"states", index_list(c)}});
  rep["decomposition"] = {{"transient", index_list(result.transient)}, {"classes", classes}};
  json traces = json::array();
  for (const auto& c : result.classes) traces.push_back(trace_json(c));
  rep["solves"] = traces;
  rep["warnings"] = result.warnings;
  rep["wall_time_s"] = result.wall_time_s;

  try {
    Matrix p_serialized;
    const MatrixFormat out_fmt = output_format(args.format, fmt);
    if (!args.output.empty()) {
      write_matrix(fs::path(args.output), result.p.matrix(), out_fmt);
      p_serialized = read_matrix(fs::path(args.output));
    } else {
      std::stringstream buf;
      write_matrix(buf, result.p.matrix(), out_fmt);
      p_serialized = read_matrix(buf);
    }
    rep["metrics"] = metrics_json(compute_metrics(req.a.matrix(), p_serialized, result.pi, result.wall_time_s));
    rep["metrics_source"] = "serialized";
    write_json(args.report, rep, out);
  } catch (const Error& e) {
    return fail(e);
  }
  return code;
}

// ---------------------------------------------------------------- generate

int cmd_generate(const std::string& kind, Index n, std::uint64_t seed, const std::string& output,
                 const std::string& format, std::ostream& out) {
  const GeneratedChain g = generate(parse_generator_kind(kind), n, seed);
  write_matrix(fs::path(output), g.a.matrix(), output_format(format, format_from_path(output)));
  json blocks = json::array();
  for (const auto& b : g.blocks) blocks.push_back(index_list(b));
  out << json{{"schema", 1}, {"kind", kind}, {"n", n}, {"seed", seed}, {"blocks", blocks}, {"clamped", g.clamped}}
             .dump()
      << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const SdeConfig& cfg, const std::string& counts_path, const std::string& matrix_path,
                 const std::string& format, std::ostream& out) {
  const CountMatrix c = simulate_sde(cfg);
  if (!counts_path.empty())
    write_matrix(fs::path(counts_path), c.counts.cast<double>(), output_format(format, format_from_path(counts_path)));
  json summary = {{"schema", 1},    {"steps", cfg.steps}, {"bins", cfg.bins},   {"dt", cfg.dt},
                  {"sigma", cfg.sigma}, {"seed", cfg.seed},   {"coeffs", {cfg.a, cfg.b, cfg.c, cfg.d}},
                  {"total", c.total}};
  if (!matrix_path.empty()) {
    const NormalizedCounts nc = normalize_counts(c);
    write_matrix(fs::path(matrix_path), nc.a.matrix(), output_format(format, format_from_path(matrix_path)));
    summary["visited"] = index_list(nc.visited);
    summary["dropped"] = index_list(nc.dropped);
  }
  out << summary.dump() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- oracle

int cmd_oracle(const std::string& input, const std::string& pi_path, double tol, const std::string& output,
               const std::string& format, std::ostream& out) {
  MatrixFormat fmt = MatrixFormat::Csv;
  const StochasticMatrix a = validate_stochastic(read_matrix(fs::path(input), &fmt));
  std::optional<Vector> pi;
  if (!pi_path.empty()) pi = read_vector(pi_path);
  DykstraOptions opts;
  opts.tol = tol;
  const auto t0 = Clock::now();
  const Matrix p = oracle_nearest(a, pi, opts);
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (!output.empty()) write_matrix(fs::path(output), p, output_format(format, fmt));
  out << json{{"schema", 1},
              {"command", "oracle"},
              {"objective", 0.5 * (p - a.matrix()).squaredNorm()},
              {"rel_frobenius", (p - a.matrix()).norm() / a.matrix().norm()},
              {"wall_time_s", secs}}
             .dump()
      << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- bench

struct SuiteEntry {
  GeneratorKind kind;
  Index n;
  std::uint64_t seed;
};

std::vector<SuiteEntry> read_suite(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open suite " + path);
  std::vector<SuiteEntry> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#' || line.rfind("kind", 0) == 0) continue;
    std::istringstream ls(line);
    std::string kind, n, seed;
    if (!std::getline(ls, kind, ',') || !std::getline(ls, n, ',') || !std::getline(ls, seed, ','))
      throw Error(ErrorCode::Io, "suite line " + std::to_string(lineno) + ": expected kind,n,seed");
    try {
      entries.push_back({parse_generator_kind(kind), std::stol(n), std::stoull(seed)});
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::Io, "suite line " + std::to_string(lineno) + ": bad number");
    }
  }
  return entries;
}

struct RunResult {
  MetricSet m;
  bool ok = true;
  std::string error;
};

RunResult run_solver(const std::string& solver, const StochasticMatrix& a) {
  RunResult r;
  const auto t0 = Clock::now();
  try {
    if (solver == "riemann") {
      SolveRequest req;
      req.a = a;
      req.threads = 1;
      const SolveReport rep = nearest_reversible(req);
      r.m = rep.metrics;
    } else {
      const StationaryDistribution pi = stationary_vector_retrying(a);
      const Matrix p = oracle_nearest(a, pi.pi());
      Vector rpi = pi.pi();
      for (Index t : detect_transient(pi, default_transient_tol(a.size()))) rpi[t] = 0.0;
      rpi /= rpi.sum();
      r.m = compute_metrics(a.matrix(), p, rpi);
    }
  } catch (const std::exception& e) {
    r.ok = false;
    r.error = e.what();
  }
  r.m.wall_time_s = std::chrono::duration<double>(Clock::now() - t0).count();
  return r;
}

std::string csv_field(std::string s) {
  for (char& ch : s)
    if (ch == ',' || ch == '\n' || ch == '"') ch = ' ';
  return s;
}

int cmd_bench(const std::string& suite_path, const std::vector<std::string>& solvers, const std::string& out_dir,
              int repeats, unsigned threads, std::ostream& out) {
  for (const auto& s : solvers)
    if (s != "riemann" && s != "dykstra") throw Error(ErrorCode::InvalidArgument, "unknown solver '" + s + "'");
  if (repeats < 1) throw Error(ErrorCode::InvalidArgument, "repeats must be positive");
  const std::vector<SuiteEntry> suite = read_suite(suite_path);
  const fs::path dir(out_dir);
  fs::create_directories(dir / "runs");

  // One job per (entry, solver); each writes its own file.
  const std::size_t jobs = suite.size() * solvers.size();
  std::vector<RunResult> results(jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs; k = next++) {
      const SuiteEntry& e = suite[k / solvers.size()];
      const std::string& solver = solvers[k % solvers.size()];
      const GeneratedChain g = generate(e.kind, e.n, e.seed);
      RunResult best;
      for (int r = 0; r < repeats; ++r) {
        RunResult cur = run_solver(solver, g.a);
        if (r == 0 || (cur.ok && cur.m.wall_time_s < best.m.wall_time_s)) best = cur;
      }
      std::ostringstream row;
      row.precision(17);
      row << solver << ',' << to_string(e.kind) << ',' << e.n << ',' << e.seed << ',' << (best.ok ? "ok" : "error")
          << ',' << best.m.rel_frobenius << ',' << best.m.detailed_balance_inf << ',' << best.m.stationarity_inf << ','
          << best.m.stochasticity_inf << ',' << best.m.wall_time_s << ',' << csv_field(best.error) << '\n';
      write_atomically(dir / "runs" / (std::to_string(k / solvers.size()) + "_" + solver + ".csv"), row.str());
      results[k] = std::move(best);
    }
  };
  const unsigned nworkers = static_cast<unsigned>(std::min<std::size_t>(worker_cap(threads), std::max<std::size_t>(jobs, 1)));
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < nworkers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  const std::string header =
      "solver,kind,n,seed,status,rel_frobenius,detailed_balance_inf,stationarity_inf,stochasticity_inf,wall_time_s,"
      "error\n";
  std::string all = header;
  for (std::size_t k = 0; k < jobs; ++k) {
    std::ifstream f(dir / "runs" / (std::to_string(k / solvers.size()) + "_" + solvers[k % solvers.size()] + ".csv"));
    all += std::string(std::istreambuf_iterator<char>(f), {});
  }
  write_atomically(dir / "runs.csv", all);

  const std::vector<std::pair<std::string, double MetricSet::*>> metrics = {
      {"rel_frobenius", &MetricSet::rel_frobenius},
      {"detailed_balance_inf", &MetricSet::detailed_balance_inf},
      {"stationarity_inf", &MetricSet::stationarity_inf},
      {"stochasticity_inf", &MetricSet::stochasticity_inf},
      {"wall_time_s", &MetricSet::wall_time_s}};
  std::vector<ProfileCurve> curves;
  for (const auto& [name, field] : metrics) {
    ProfileTable t{name, solvers, std::vector<std::vector<double>>(solvers.size())};
    for (std::size_t s = 0; s < solvers.size(); ++s)
      for (std::size_t e = 0; e < suite.size(); ++e) {
        const RunResult& r = results[e * solvers.size() + s];
        t.value[s].push_back(r.ok ? r.m.*field : std::numeric_limits<double>::infinity());
      }
    auto c = performance_profile(t);
    curves.insert(curves.end(), c.begin(), c.end());
  }
  std::ostringstream prof;
  write_profile_csv(prof, curves);
  write_atomically(dir / "profile.csv", prof.str());

  std::size_t failures = 0;
  for (const auto& r : results) failures += r.ok ? 0 : 1;
  out << json{{"schema", 1}, {"command", "bench"}, {"entries", suite.size()}, {"runs", jobs}, {"failures", failures}}
             .dump()
      << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- decompose

int cmd_decompose(const std::string& input, std::optional<double> transient_tol, std::ostream& out) {
  const StochasticMatrix a = validate_stochastic(read_matrix(fs::path(input)));
  const StationaryDistribution pi = stationary_vector_retrying(a);
  const double tol = transient_tol.value_or(default_transient_tol(a.size()));
  const IndexSet transient = detect_transient(pi, tol);
  const ErgodicDecomposition dec = ergodic_classes(a, complement(transient, a.size()), &pi);
  json classes = json::array();
  json sizes = json::array();
  for (const auto& c : dec.classes) {
    classes.push_back(index_list(c));
    sizes.push_back(c.size());
  }
  out << json{{"schema", 1},           {"command", "decompose"}, {"n", a.size()},      {"transient_tol", tol},
              {"transient", index_list(transient)}, {"class_sizes", sizes},     {"classes", classes}}
             .dump(2)
      << '\n';
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nearest reversible Markov chains by Riemannian trust-region optimization", "revmarkov"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker cap (REVMARKOV_THREADS also applies)");

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "Nearest reversible chain of a stochastic matrix");
  solve->add_option("--input", sa.input, "Stochastic matrix (Matrix Market or CSV)")->required();
  solve->add_option("--pi", sa.pi, "Stationary distribution to use instead of the computed one");
  solve->add_option("--recurse-ergodic", sa.recurse, "Solve each ergodic class separately");
  solve->add_option("--grad-tol", sa.grad_tol, "Riemannian gradient norm tolerance");
  solve->add_option("--transient-tol", sa.transient_tol, "States with pi below this are transient");
  solve->add_option("--random-init", sa.random_init, "Start from a random manifold point");
  solve->add_option("--seed", sa.seed, "Seed for the random start");
  solve->add_option("--max-iter", sa.max_iter, "Outer trust-region iterations");
  solve->add_option("--output", sa.output, "Where to write P");
  solve->add_option("--report", sa.report, "JSON report path (stdout if absent)");
  solve->add_option("--format", sa.format, "Output format: mm or csv (default mirrors input)");

  std::string g_kind, g_out, g_fmt;
  Index g_n = 0;
  std::uint64_t g_seed = 0;
  auto* gen = app.add_subcommand("generate", "Random test chain");
  gen->add_option("--kind", g_kind, "uniform, normal, sbm or multi-ergodic")->required();
  gen->add_option("--n", g_n, "Number of states")->required();
  gen->add_option("--seed", g_seed, "Random seed");
  gen->add_option("--output", g_out, "Output file")->required();
  gen->add_option("--format", g_fmt, "mm or csv (default from extension)");

  SdeConfig sde;
  std::string potential, coeffs, s_counts, s_matrix, s_fmt;
  auto* sim = app.add_subcommand("simulate", "Transition counts of overdamped Langevin dynamics on the circle");
  auto* pot_opt = sim->add_option("--potential", potential, "Named potential: butane");
  sim->add_option("--coeffs", coeffs, "a,b,c,d of U(x) = a + b cos x + c cos^2 x + d cos^3 x")->excludes(pot_opt);
  sim->add_option("--dt", sde.dt, "Time step");
  sim->add_option("--sigma", sde.sigma, "Noise intensity");
  sim->add_option("--steps", sde.steps, "Number of steps")->required();
  sim->add_option("--bins", sde.bins, "Number of angle bins");
  sim->add_option("--seed", sde.seed, "Random seed");
  sim->add_option("--output-counts", s_counts, "Count matrix file");
  sim->add_option("--output-matrix", s_matrix, "Row-normalized transition matrix file");
  sim->add_option("--format", s_fmt, "mm or csv (default from extension)");

  std::string o_in, o_pi, o_out, o_fmt;
  double o_tol = 1e-10;
  auto* orc = app.add_subcommand("oracle", "Nearest reversible chain by Dykstra projections");
  orc->add_option("--input", o_in, "Stochastic matrix")->required();
  orc->add_option("--pi", o_pi, "Stationary distribution");
  orc->add_option("--tol", o_tol, "Stopping tolerance on successive iterates");
  orc->add_option("--output", o_out, "Where to write P");
  orc->add_option("--format", o_fmt, "mm or csv (default mirrors input)");

  std::string b_suite, b_dir = ".";
  std::vector<std::string> b_solvers{"riemann", "dykstra"};
  int b_repeats = 1;
  auto* bench = app.add_subcommand("bench", "Run a suite of generated problems and build performance profiles");
  bench->add_option("--suite", b_suite, "CSV of kind,n,seed lines")->required();
  bench->add_option("--solvers", b_solvers, "Comma separated: riemann,dykstra")->delimiter(',');
  bench->add_option("--out-dir", b_dir, "Directory for runs.csv and profile.csv");
  bench->add_option("--repeats", b_repeats, "Timing repeats per run (fastest kept)");

  std::string d_in;
  std::optional<double> d_tol;
  auto* dec = app.add_subcommand("decompose", "Ergodic classes and transient states");
  dec->add_option("--input", d_in, "Stochastic matrix")->required();
  dec->add_option("--transient-tol", d_tol, "States with pi below this are transient");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kExitInput;
  }

  try {
    if (*solve) {
      sa.threads = threads;
      return cmd_solve(sa, out, err);
    }
    if (*gen) return cmd_generate(g_kind, g_n, g_seed, g_out, g_fmt, out);
    if (*sim) {
      if (!coeffs.empty()) {
        std::vector<double> c;
        std::stringstream ss(coeffs);
        std::string tok;
        while (std::getline(ss, tok, ',')) c.push_back(std::stod(tok));
        if (c.size() != 4) throw Error(ErrorCode::InvalidArgument, "--coeffs needs four values");
        sde.a = c[0];
        sde.b = c[1];
        sde.c = c[2];
        sde.d = c[3];
      } else if (!potential.empty() && potential != "butane") {
        throw Error(ErrorCode::InvalidArgument, "unknown potential '" + potential + "'");
      }
      return cmd_simulate(sde, s_counts, s_matrix, s_fmt, out);
    }
    if (*orc) return cmd_oracle(o_in, o_pi, o_tol, o_out, o_fmt, out);
    if (*bench) return cmd_bench(b_suite, b_solvers, b_dir, b_repeats, threads, out);
    if (*dec) return cmd_decompose(d_in, d_tol, out);
  } catch (const Error& e) {
    err << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::invalid_argument& e) {
    err << "InvalidArgument: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << e.what() << '\n';
    return kExitSolver;
  }
  return kExitInput;
}

}  // namespace revmarkov::cli
