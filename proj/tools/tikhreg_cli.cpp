// tikhreg command-line front end. Every subcommand writes its CSV/JSON outputs
// plus manifest.json into the output directory and prints a one-line summary.
// Exit codes: 0 success, 1 runtime error, 2 usage error.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tikhreg/tikhreg.hpp"

namespace fs = std::filesystem;
using namespace tikhreg;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  std::string problem = "fredholm";
  std::string prob_path;
  long long n = 400;
  long long side = 40;
  double psf_width = 1.5;
  double delta = 0.01;
  double alpha = 4.0;
  double constant_c = 1.0;
  std::uint64_t seed = 1;
  std::string out_dir;
  unsigned threads = 1;
  // command specific
  std::optional<double> lambda;
  std::string solver = "spectral";
  double lo = 1e-10;
  double hi = 1e-4;
  std::size_t count = 10;
  std::string rule = "rho0";
  double tol = 1e-10;
  std::string stop = "absolute";
  std::size_t max_iters = 100;
  std::vector<long long> ns;
  std::vector<double> deltas;
  std::size_t reps = 200;
  std::size_t bins = kDefaultHistogramBins;
};

nlohmann::json manifest_parameters(const RunConfig& c) {
  nlohmann::json j = {{"problem", c.problem},   {"prob", c.prob_path},     {"n", c.n},
                      {"side", c.side},         {"psf_width", c.psf_width}, {"delta", c.delta},
                      {"alpha", c.alpha},       {"C", c.constant_c},        {"seed", c.seed},
                      {"threads", c.threads},   {"solver", c.solver},       {"lo", c.lo},
                      {"hi", c.hi},             {"count", c.count},         {"rule", c.rule},
                      {"tol", c.tol},           {"stop", c.stop},           {"max_iters", c.max_iters},
                      {"ns", c.ns},             {"deltas", c.deltas},       {"reps", c.reps},
                      {"bins", c.bins}};
  j["lambda"] = c.lambda ? nlohmann::json(*c.lambda) : nlohmann::json(nullptr);
  return j;
}

std::string out_path(const RunConfig& c, const std::string& file) {
  return (fs::path(c.out_dir) / file).string();
}

void write_manifest(const RunConfig& c, const std::vector<std::string>& argv,
                    const std::vector<std::string>& outputs) {
  nlohmann::json m;
  m["tool"] = "tikhreg";
  m["version"] = kVersion;
  m["command"] = c.command;
  m["argv"] = argv;
  m["parameters"] = manifest_parameters(c);
  m["rng"] = "xoshiro256** seeded by splitmix64; Box-Muller normals";
  m["outputs"] = outputs;
  write_json(out_path(c, "manifest.json"), m);
}

ProblemInstance load_problem(const RunConfig& c) {
  if (!c.prob_path.empty()) return load_prob(c.prob_path);
  if (c.problem == "blur") return build_blur(c.side, c.psf_width);
  return build_fredholm(c.n);
}

ProblemFactory factory(const RunConfig& c) {
  if (c.problem == "blur") {
    const double w = c.psf_width;
    return [w](Index side) { return build_blur(side, w); };
  }
  return [](Index n) { return build_fredholm(n); };
}

PriorRule parse_rule(const std::string& r) { return r == "w" ? PriorRule::weighted_norm : PriorRule::rho0; }

AdaptiveConfig adaptive_config(const RunConfig& c) {
  AdaptiveConfig cfg;
  cfg.alpha = c.alpha;
  cfg.constant_c = c.constant_c;
  cfg.tol = c.tol;
  cfg.stop_mode = c.stop == "relative" ? StopMode::relative : StopMode::absolute;
  cfg.max_iters = c.max_iters;
  return cfg;
}

/// Cross-flag preconditions that CLI11 validators cannot express.
void validate(const RunConfig& c) {
  if (!c.prob_path.empty() && !fs::exists(c.prob_path)) {
    throw UsageError("--prob: file '" + c.prob_path + "' does not exist");
  }
  if (c.problem == "blur" && c.side * c.side > kBlurMaxPixels && c.command != "montecarlo" &&
      c.command != "table") {
    throw UsageError("--side: must satisfy side^2 <= 40000 (got " + std::to_string(c.side) + ")");
  }
  if (c.command == "sweep" && !(c.lo < c.hi)) throw UsageError("--lo/--hi: need 0 < lo < hi");
  if (c.command == "solve" && !c.lambda) throw UsageError("--lambda: required for solve (> 0)");
  if (c.command == "montecarlo" || c.command == "table") {
    if (c.ns.empty()) throw UsageError("--ns: need at least one size");
    if (c.deltas.empty()) throw UsageError("--deltas: need at least one noise level");
    for (long long n : c.ns) {
      const long long min_n = c.problem == "blur" ? 4 : 2;
      if (n < min_n) throw UsageError("--ns: sizes must be >= " + std::to_string(min_n));
      if (c.problem == "blur" && n * n > kBlurMaxPixels) throw UsageError("--ns: blur side^2 must be <= 40000");
    }
    for (double d : c.deltas) {
      if (!(d > 0.0)) throw UsageError("--deltas: noise levels must be > 0");
    }
  }
  if (c.command == "montecarlo" && c.reps < 2) throw UsageError("--reps: must be >= 2");
  if (c.command == "study" && c.reps < 100) throw UsageError("--reps: must be >= 100 for study");
}

std::vector<std::string> run(const RunConfig& c) {
  std::vector<std::string> outputs;
  const auto solver_kind = c.solver == "direct" ? SolverKind::direct : SolverKind::spectral;

  if (c.command == "generate") {
    const ProblemInstance p = load_problem(c);
    save_prob(out_path(c, "problem.prob"), p);
    outputs = {"problem.prob"};
    std::printf("generate: %s n=%lld ||y||/sqrt(n)=%s -> %s\n", p.label.c_str(), static_cast<long long>(p.n),
                format_real(p.y.norm() / std::sqrt(static_cast<double>(p.n))).c_str(),
                out_path(c, "problem.prob").c_str());
  } else if (c.command == "spectrum") {
    const ProblemInstance p = load_problem(c);
    const SpectralDecomposition d = decompose(p);
    std::optional<AlphaFit> fit;
    try {
      fit = fit_alpha(d);
    } catch (const Error& e) {
      if (e.code() != Errc::insufficient_spectrum) throw;
    }
    write_spectrum_csv(out_path(c, "spectrum.csv"), d, fit ? &*fit : nullptr);
    nlohmann::json j = fit ? to_json(*fit) : nlohmann::json::object();
    j["m"] = d.m;
    j["n"] = d.n;
    write_json(out_path(c, "spectrum.json"), j);
    outputs = {"spectrum.csv", "spectrum.json"};
    std::printf("spectrum: %s m=%lld alpha_hat=%s c_upper=%s\n", p.label.c_str(), static_cast<long long>(d.m),
                fit ? format_real(fit->alpha_hat).c_str() : "n/a", fit ? format_real(fit->c_upper).c_str() : "n/a");
  } else if (c.command == "solve") {
    const ProblemInstance p = load_problem(c);
    const NoisyData data = add_noise(p, NoiseSpec{c.delta, c.seed});
    std::optional<SpectralDecomposition> d;
    RegularizedSolution sol;
    if (solver_kind == SolverKind::spectral) {
      d = decompose(p);
      sol = solve_spectral(*d, p, data.b, *c.lambda);
    } else {
      sol = solve_direct(p, data.b, *c.lambda);
    }
    const ErrorReport rep = error_report(p, d ? &*d : nullptr, sol, data.b);
    {
      CsvWriter csv(out_path(c, "solution.csv"), {"i", "x", "x_star", "b"});
      for (Index i = 0; i < p.n; ++i) csv.row(static_cast<long long>(i), sol.x[i], p.x_star[i], data.b[i]);
    }
    nlohmann::json j = {{"lambda", sol.lambda}, {"sigma", data.sigma},   {"rel_x", rep.rel_x},
                        {"rel_Ax", rep.rel_Ax}, {"rel_res", rep.rel_res}, {"scaled_output", rep.scaled_output}};
    j["scaled_b"] = rep.scaled_b ? nlohmann::json(*rep.scaled_b) : nlohmann::json(nullptr);
    write_json(out_path(c, "solve.json"), j);
    outputs = {"solution.csv", "solve.json"};
    std::printf("solve: lambda=%s rel_x=%s rel_Ax=%s rel_res=%s\n", format_real(sol.lambda).c_str(),
                format_real(rep.rel_x).c_str(), format_real(rep.rel_Ax).c_str(), format_real(rep.rel_res).c_str());
  } else if (c.command == "sweep") {
    const ProblemInstance p = load_problem(c);
    const SweepResult s = run_sweep(p, NoiseSpec{c.delta, c.seed}, LambdaGrid{c.lo, c.hi, c.count},
                                    RuleSettings{parse_rule(c.rule), c.alpha, c.constant_c});
    write_sweep_csv(out_path(c, "sweep.csv"), s);
    write_json(out_path(c, "sweep.json"), to_json(s));
    outputs = {"sweep.csv", "sweep.json"};
    std::printf("sweep: lambda_pred=%s err_at_pred=%s err_min=%s argmin_lambda=%s\n",
                format_real(s.lambda_pred).c_str(), format_real(s.err_at_pred).c_str(),
                format_real(s.err_min).c_str(), format_real(s.argmin_lambda).c_str());
  } else if (c.command == "adaptive") {
    const ProblemInstance p = load_problem(c);
    const NoisyData data = add_noise(p, NoiseSpec{c.delta, c.seed});
    const AdaptiveConfig cfg = adaptive_config(c);
    AdaptiveTrace t;
    if (solver_kind == SolverKind::spectral) {
      t = adaptive_select(p, decompose(p), data.b, cfg);
    } else {
      t = adaptive_select(p, data.b, cfg);
    }
    const ErrorReport rep = error_report(p, nullptr, t.final, data.b);
    write_trace_csv(out_path(c, "trace.csv"), t);
    write_json(out_path(c, "adaptive.json"),
               {{"lambda_final", t.final.lambda}, {"iters", t.iterations()},
                {"terminated", std::string(to_string(t.terminated))}, {"sigma", data.sigma},
                {"rel_x", rep.rel_x}, {"rel_Ax", rep.rel_Ax}, {"rel_res", rep.rel_res}});
    outputs = {"trace.csv", "adaptive.json"};
    std::printf("adaptive: lambda_final=%s iters=%zu terminated=%s rel_x=%s rel_res=%s\n",
                format_real(t.final.lambda).c_str(), t.iterations(), std::string(to_string(t.terminated)).c_str(),
                format_real(rep.rel_x).c_str(), format_real(rep.rel_res).c_str());
  } else if (c.command == "montecarlo") {
    std::vector<Index> ns(c.ns.begin(), c.ns.end());
    const MonteCarloSummary s = run_montecarlo(factory(c), ns, c.deltas, c.reps,
                                               RuleSettings{parse_rule(c.rule), c.alpha, c.constant_c}, c.seed,
                                               c.threads);
    write_mc_cells_csv(out_path(c, "mc_cells.csv"), s);
    write_json(out_path(c, "mc_fit.json"), mc_fit_json(s));
    outputs = {"mc_cells.csv", "mc_fit.json"};
    std::printf("montecarlo: cells=%zu slope_output=%s slope_b=%s\n", s.cells.size(),
                format_real(s.slope_output).c_str(), format_real(s.slope_b).c_str());
  } else if (c.command == "study") {
    const ProblemInstance p = load_problem(c);
    const SpectralDecomposition d = decompose(p);
    double lambda = 0.0;
    if (c.lambda) {
      lambda = *c.lambda;
    } else {
      const double sigma = noise_strength(p.y, c.delta);
      lambda = prior_rule(parse_rule(c.rule), prior_input(p, sigma, c.alpha, c.constant_c));
    }
    const SampleStudy s = run_sample_study(p, d, c.delta, lambda, c.reps, c.seed, c.bins, c.threads);
    write_study_csvs(out_path(c, "study_hist.csv"), out_path(c, "study_qq.csv"), s);
    write_json(out_path(c, "study.json"), {{"lambda", lambda},
                                           {"reps", c.reps},
                                           {"mean", s.sample_mean},
                                           {"std", s.sample_std},
                                           {"qq_correlation", s.qq_correlation}});
    outputs = {"study_hist.csv", "study_qq.csv", "study.json"};
    std::printf("study: lambda=%s mean=%s std=%s qq_correlation=%s\n", format_real(lambda).c_str(),
                format_real(s.sample_mean).c_str(), format_real(s.sample_std).c_str(),
                format_real(s.qq_correlation).c_str());
  } else if (c.command == "table") {
    std::vector<Index> ns(c.ns.begin(), c.ns.end());
    const auto rows = run_table(factory(c), c.deltas, ns, adaptive_config(c), c.seed, solver_kind);
    write_table_csv(out_path(c, "table.csv"), rows);
    outputs = {"table.csv"};
    std::printf("table: rows=%zu\n", rows.size());
  }
  return outputs;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw UsageError("--config: cannot open '" + path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError("--config: line " + std::to_string(lineno) + " is not key=value");
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    if (kv.count(key)) throw UsageError("--config: key '" + key + "' given twice");
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

/// Splices key=value pairs from --config into the argument list; a key that is
/// also given as a flag is a usage error.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::optional<std::string> path;
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config: missing path");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      kept.push_back(args[i]);
    }
  }
  if (!path) return args;
  for (const auto& [key, value] : read_config_file(*path)) {
    if (key == "config") throw UsageError("--config: nested config files are not allowed");
    const std::string flag = "--" + key;
    for (const auto& a : kept) {
      if (a == flag || a.rfind(flag + "=", 0) == 0) {
        throw UsageError("--config: key '" + key + "' conflicts with command-line flag " + flag);
      }
    }
    kept.push_back(flag);
    kept.push_back(value);
  }
  return kept;
}

void add_common(CLI::App* sub, RunConfig& c, bool multi_size) {
  sub->add_option("--problem", c.problem, "Model problem")->check(CLI::IsMember({"fredholm", "blur"}));
  if (!multi_size) {
    sub->add_option("--prob", c.prob_path, "Load the problem from a .prob file");
    sub->add_option("--n", c.n, "Fredholm size n (>= 2)")->check(CLI::Range(2LL, 20000LL));
    sub->add_option("--side", c.side, "Blur image side (>= 4, side^2 <= 40000)")->check(CLI::Range(4LL, 200LL));
  }
  sub->add_option("--psf-width", c.psf_width, "Blur Gaussian width in pixels (> 0)")->check(CLI::PositiveNumber);
  sub->add_option("--seed", c.seed, "Master seed (unsigned 64-bit)");
  sub->add_option("--out", c.out_dir, "Output directory (default $TIKHREG_OUT or ./out)");
  sub->add_option("--alpha", c.alpha, "Spectral decay exponent (> 1)")->check(CLI::Range(1.0 + 1e-12, 1e6));
  sub->add_option("--C", c.constant_c, "Rule constant C (> 0)")->check(CLI::PositiveNumber);
}

void add_delta(CLI::App* sub, RunConfig& c) {
  sub->add_option("--delta", c.delta, "Relative noise level (>= 0)")->check(CLI::NonNegativeNumber);
}

void add_solver(CLI::App* sub, RunConfig& c) {
  sub->add_option("--solver", c.solver, "spectral | direct")->check(CLI::IsMember({"spectral", "direct"}));
}

void add_adaptive(CLI::App* sub, RunConfig& c) {
  sub->add_option("--tol", c.tol, "Stopping tolerance (> 0)")->check(CLI::PositiveNumber);
  sub->add_option("--stop", c.stop, "absolute | relative")->check(CLI::IsMember({"absolute", "relative"}));
  sub->add_option("--max-iters", c.max_iters, "Iteration cap (>= 1)")->check(CLI::Range(std::size_t{1}, std::size_t{100000}));
}

void add_rule(CLI::App* sub, RunConfig& c) {
  sub->add_option("--rule", c.rule, "A-priori rule: rho0 | w")->check(CLI::IsMember({"rho0", "w"}));
}

void add_threads(CLI::App* sub, RunConfig& c) {
  sub->add_option("--threads", c.threads, "Worker threads (>= 1)")->check(CLI::Range(1u, 1024u));
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig c;
  CLI::App app{"Weighted Tikhonov regularization experiments"};
  app.require_subcommand(1, 1);

  auto* gen = app.add_subcommand("generate", "Build a problem and write problem.prob");
  add_common(gen, c, false);

  auto* spec = app.add_subcommand("spectrum", "Generalized eigenvalues and decay fit");
  add_common(spec, c, false);

  auto* solve = app.add_subcommand("solve", "One regularized solve at a fixed lambda");
  add_common(solve, c, false);
  add_delta(solve, c);
  add_solver(solve, c);
  solve->add_option("--lambda", c.lambda, "Regularization parameter (> 0)")->check(CLI::PositiveNumber);

  auto* sweep = app.add_subcommand("sweep", "Output error over a log-spaced lambda grid");
  add_common(sweep, c, false);
  add_delta(sweep, c);
  add_rule(sweep, c);
  sweep->add_option("--lo", c.lo, "Grid lower end (> 0)")->check(CLI::PositiveNumber);
  sweep->add_option("--hi", c.hi, "Grid upper end (> lo)")->check(CLI::PositiveNumber);
  sweep->add_option("--count", c.count, "Grid points (>= 2)")->check(CLI::Range(std::size_t{2}, std::size_t{100000}));

  auto* adaptive = app.add_subcommand("adaptive", "Adaptive fixed-point parameter choice");
  add_common(adaptive, c, false);
  add_delta(adaptive, c);
  add_solver(adaptive, c);
  add_adaptive(adaptive, c);

  auto* mc = app.add_subcommand("montecarlo", "Expected-error Monte Carlo with slope fits");
  add_common(mc, c, true);
  add_rule(mc, c);
  add_threads(mc, c);
  mc->add_option("--ns", c.ns, "Sizes (comma separated)")->delimiter(',');
  mc->add_option("--deltas", c.deltas, "Noise levels (comma separated, > 0)")->delimiter(',');
  mc->add_option("--reps", c.reps, "Realizations per cell (>= 2)");

  auto* study = app.add_subcommand("study", "Histogram / QQ study of the output error");
  add_common(study, c, false);
  add_delta(study, c);
  add_rule(study, c);
  add_threads(study, c);
  study->add_option("--lambda", c.lambda, "Fixed lambda (default: a-priori rule)")->check(CLI::PositiveNumber);
  study->add_option("--reps", c.reps, "Realizations (>= 100)");
  study->add_option("--bins", c.bins, "Histogram bins (>= 1)")->check(CLI::Range(std::size_t{1}, std::size_t{100000}));

  auto* table = app.add_subcommand("table", "Adaptive-rule results table over (delta, n)");
  add_common(table, c, true);
  add_solver(table, c);
  add_adaptive(table, c);
  table->add_option("--ns", c.ns, "Sizes (comma separated)")->delimiter(',');
  table->add_option("--deltas", c.deltas, "Noise levels (comma separated, > 0)")->delimiter(',');

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = expand_config(args);
    std::vector<std::string> full = {argv[0]};
    full.insert(full.end(), args.begin(), args.end());
    std::vector<char*> ptrs;
    for (auto& s : full) ptrs.push_back(s.data());
    app.parse(static_cast<int>(ptrs.size()), ptrs.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  }

  for (auto* sub : app.get_subcommands()) c.command = sub->get_name();
  if (c.command == "study" && c.reps == 200 && !study->count("--reps")) c.reps = 2000;
  if (c.command == "montecarlo" && c.ns.empty() && !mc->count("--ns")) c.ns = {500, 1000, 2000};
  if (c.command == "montecarlo" && c.deltas.empty()) c.deltas = {1e-1, 1e-2, 1e-3, 1e-4};
  if (c.command == "table" && c.ns.empty()) c.ns = {2000};
  if (c.command == "table" && c.deltas.empty()) c.deltas = {0.1, 0.01, 0.001};
  if (c.out_dir.empty()) {
    const char* env = std::getenv("TIKHREG_OUT");
    c.out_dir = env && *env ? env : "out";
  }

  try {
    validate(c);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  }

  try {
    fs::create_directories(c.out_dir);
    const auto outputs = run(c);
    std::vector<std::string> recorded(argv, argv + argc);
    write_manifest(c, recorded, outputs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
