// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: solve, path, certify, deflate, oracle, experiment.

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>

#include "spca/spca.hpp"

namespace {

using namespace spca;
using nlohmann::json;

constexpr int kUsage = 2;
constexpr int kFailure = 1;

// Thrown for argument combinations CLI11 cannot express.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InputOptions {
  std::string path;
  std::string kind = "cov";
  bool returns = false;
};

struct Loaded {
  SymmetricMatrix sigma;
  std::vector<std::string> names;
};

Loaded load(const InputOptions& in) {
  if (in.kind == "cov") {
    if (in.returns) throw UsageError("--log-returns requires --input-kind data");
    auto c = load_covariance(in.path);
    return {std::move(c.sigma), std::move(c.names)};
  }
  auto d = load_data(in.path);
  if (in.returns) d = log_returns(d);
  return {sample_covariance(d), std::move(d.names)};
}

void add_input(CLI::App& cmd, InputOptions& in) {
  cmd.add_option("--input", in.path, "CSV matrix")->required()->check(CLI::ExistingFile);
  cmd.add_option("--input-kind", in.kind, "cov: covariance matrix, data: observations by variables")
      ->check(CLI::IsMember({"cov", "data"}));
  cmd.add_flag("--log-returns", in.returns, "convert a price table to log returns first (data only)");
}

std::optional<std::uint64_t> resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return flag;
  if (const char* env = std::getenv("SPARSE_PCA_SEED"); env && *env) {
    try {
      size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::strlen(env)) return v;
    } catch (const std::exception&) {
    }
    throw UsageError("SPARSE_PCA_SEED is not an unsigned integer");
  }
  return std::nullopt;
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
  } else {
    atomic_write(out, text);
  }
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

std::string join_support(const SparsityPattern& p) {
  std::string s;
  for (long i : p.one_based()) s += (s.empty() ? "" : " ") + std::to_string(i);
  return s;
}

std::vector<long> parse_pattern(const std::string& text) {
  std::vector<long> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      const long v = std::stol(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw UsageError("--pattern expects comma-separated integers, got '" + text + "'");
    }
  }
  if (out.empty()) throw UsageError("--pattern is empty");
  return out;
}

json dspca_bounds(const DspcaResult& r) {
  return {{"gap", r.gap},
          {"upper", r.dual_value},
          {"lower", r.primal_value},
          {"iterations", r.iterations},
          {"mu", r.mu},
          {"converged", r.converged}};
}

// ---------------------------------------------------------------------------

struct SolveOptions {
  InputOptions in;
  std::string method = "greedy";
  std::optional<double> rho;
  std::optional<long> k;
  double epsilon = 1e-3;
  long max_iter = 0;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_solve_options(CLI::App& cmd, SolveOptions& o) {
  add_input(cmd, o.in);
  cmd.add_option("--method", o.method)->check(CLI::IsMember({"dspca", "greedy", "greedy-approx", "threshold"}));
  auto* rho = cmd.add_option("--rho", o.rho, "sparsity penalty")->check(CLI::NonNegativeNumber);
  auto* k = cmd.add_option("--k", o.k, "target cardinality")->check(CLI::PositiveNumber);
  rho->excludes(k);
  cmd.add_option("--epsilon", o.epsilon, "duality gap target for dspca")->check(CLI::PositiveNumber);
  cmd.add_option("--max-iter", o.max_iter, "dspca iteration cap (0: automatic)")->check(CLI::NonNegativeNumber);
  cmd.add_option("--seed", o.seed);
  cmd.add_option("--out", o.out, "write JSON here instead of stdout");
}

struct Solved {
  SparseComponent component;
  json bounds = json::object();
};

Solved solve_one(const SymmetricMatrix& sigma, const SolveOptions& o) {
  if (o.method == "dspca") {
    if (!o.rho) throw UsageError("--method dspca needs --rho");
    DspcaConfig cfg{.rho = *o.rho, .epsilon = o.epsilon, .max_iter = o.max_iter};
    auto r = dspca_solve(sigma, cfg);
    return {r.component, dspca_bounds(r)};
  }
  if (!o.rho && !o.k) throw UsageError("one of --rho or --k is required");
  if (o.rho) {
    auto r = penalized_path(sigma, *o.rho, parse_path_method(o.method));
    return {r.component};
  }
  const auto k = static_cast<Index>(*o.k);
  if (k > sigma.size()) throw UsageError("--k exceeds the number of variables");
  if (o.method == "threshold") return {threshold_leading(sigma, k)};
  const auto path = o.method == "greedy" ? greedy_full(sigma, k) : greedy_approx(sigma, k);
  return {path.components.back()};
}

json solve_params(const SolveOptions& o) {
  json p = {{"input", o.in.path}, {"input_kind", o.in.kind}};
  if (o.in.returns) p["log_returns"] = true;
  if (o.rho) p["rho"] = *o.rho;
  if (o.k) p["k"] = *o.k;
  if (o.method == "dspca") {
    p["epsilon"] = o.epsilon;
    p["max_iter"] = o.max_iter;
  }
  return p;
}

int run_solve(const SolveOptions& o) {
  const auto start = std::chrono::steady_clock::now();
  const auto data = load(o.in);
  auto solved = solve_one(data.sigma, o);
  RunReport r;
  r.method = o.method;
  r.params = solve_params(o);
  r.seed = resolve_seed(o.seed);
  r.components.push_back(make_component_report(solved.component, data.names));
  r.bounds = std::move(solved.bounds);
  r.timing_ms = elapsed_ms(start);
  emit(o.out, serialize(r));
  return 0;
}

// ---------------------------------------------------------------------------

struct PathOptions {
  InputOptions in;
  std::string method = "greedy";
  std::optional<long> k;
  std::string out;
};

int run_path(const PathOptions& o) {
  const auto data = load(o.in);
  const Index n = data.sigma.size();
  const Index k = o.k ? static_cast<Index>(*o.k) : n;
  if (k > n) throw UsageError("--k exceeds the number of variables");
  GreedyPath path;
  switch (parse_path_method(o.method)) {
    case PathMethod::greedy_full: path = greedy_full(data.sigma, k); break;
    case PathMethod::greedy_approx: path = greedy_approx(data.sigma, k); break;
    case PathMethod::threshold: path = threshold_path(data.sigma, k); break;
  }
  std::vector<std::vector<std::string>> rows;
  for (size_t j = 0; j < path.size(); ++j) {
    std::string names;
    for (long i : path.patterns[j].one_based()) {
      const auto idx = static_cast<size_t>(i - 1);
      names += (names.empty() ? "" : " ") + (idx < data.names.size() ? data.names[idx] : "x" + std::to_string(i));
    }
    rows.push_back({std::to_string(j + 1), format_double(path.variances[j]), join_support(path.patterns[j]), names});
  }
  emit(o.out, format_csv({"cardinality", "variance", "support", "names"}, rows));
  return 0;
}

// ---------------------------------------------------------------------------

struct CertifyOptions {
  InputOptions in;
  std::string pattern;
  std::optional<double> rho_star;
  int scan = 0;
  std::string out;
};

int run_certify(const CertifyOptions& o) {
  const auto start = std::chrono::steady_clock::now();
  const auto data = load(o.in);
  const auto pat = SparsityPattern::from_one_based(parse_pattern(o.pattern), data.sigma.size());
  const auto a = square_root_factor(data.sigma);
  CertificateReport rep;
  if (o.rho_star) {
    rep = certify_pattern(a, pat, *o.rho_star);
  } else if (o.scan > 0) {
    rep = certify_pattern_scan(a, pat, o.scan);
  } else {
    rep = certify_pattern(a, pat);
  }
  RunReport r;
  r.method = "certify";
  r.params = {{"input", o.in.path}, {"input_kind", o.in.kind}, {"pattern", pat.one_based()}};
  if (o.rho_star) r.params["rho_star"] = *o.rho_star;
  if (o.scan > 0) r.params["scan"] = o.scan;
  const double rho = std::isfinite(rep.rho_star) ? rep.rho_star : 0.0;
  r.components.push_back(make_component_report(pattern_solution(data.sigma, pat, rho), data.names));
  r.bounds = {{"certified", rep.certified},
              {"rho_star", rep.rho_star},
              {"interval", {rep.interval_low, rep.interval_high}},
              {"interval_ok", rep.interval_ok},
              {"dual_feasible", rep.dual_feasible},
              {"eig_gap_lhs", rep.eig_gap_lhs},
              {"eig_gap_rhs", rep.eig_gap_rhs}};
  if (auto ub = rep.phi_upper_bound()) r.bounds["upper"] = *ub;
  r.timing_ms = elapsed_ms(start);
  emit(o.out, serialize(r));
  return 0;
}

// ---------------------------------------------------------------------------

struct DeflateOptions {
  SolveOptions solve;
  int components = 1;
};

int run_deflate(const DeflateOptions& o) {
  const auto start = std::chrono::steady_clock::now();
  const auto data = load(o.solve.in);
  json per = json::array();
  auto run = extract_sequential(data.sigma, o.components, [&](const SymmetricMatrix& s) {
    auto solved = solve_one(s, o.solve);
    per.push_back(std::move(solved.bounds));
    return solved.component;
  });
  RunReport r;
  r.method = o.solve.method;
  r.params = solve_params(o.solve);
  r.params["components"] = o.components;
  r.seed = resolve_seed(o.solve.seed);
  for (const auto& c : run.components) r.components.push_back(make_component_report(c, data.names));
  r.bounds = {{"per_component", per}, {"extracted", run.components.size()}};
  r.timing_ms = elapsed_ms(start);
  emit(o.solve.out, serialize(r));
  return 0;
}

// ---------------------------------------------------------------------------

struct OracleOptions {
  InputOptions in;
  long k = 1;
  double cap = 2e6;
  std::string out;
};

int run_oracle(const OracleOptions& o) {
  const auto start = std::chrono::steady_clock::now();
  const auto data = load(o.in);
  if (o.k > data.sigma.size()) throw UsageError("--k exceeds the number of variables");
  const auto best = exhaustive_sparse_eig(data.sigma, static_cast<Index>(o.k), o.cap);
  RunReport r;
  r.method = "exhaustive";
  r.params = {{"input", o.in.path}, {"input_kind", o.in.kind}, {"k", o.k}};
  r.components.push_back(make_component_report(pattern_solution(data.sigma, best.pattern), data.names));
  r.bounds = {{"value", best.value}};
  r.timing_ms = elapsed_ms(start);
  emit(o.out, serialize(r));
  return 0;
}

// ---------------------------------------------------------------------------

struct SpikedOptions {
  long n = 100;
  long k = 10;
  std::vector<long> m{25, 50, 100, 200, 400};
  int trials = 20;
  std::optional<std::uint64_t> seed;
  std::string scaling = "per-m";
  unsigned threads = 0;
  std::string out;
  std::string summary;
};

int run_spiked(const SpikedOptions& o) {
  if (o.k > o.n) throw UsageError("--k exceeds --n");
  const auto start = std::chrono::steady_clock::now();
  SpikedStudyConfig cfg;
  cfg.n = o.n;
  cfg.k = o.k;
  cfg.m_values.assign(o.m.begin(), o.m.end());
  cfg.trials = o.trials;
  cfg.seed = resolve_seed(o.seed).value_or(0);
  cfg.scaling = o.scaling == "per-m" ? NoiseScaling::per_m : NoiseScaling::per_sqrt_m;
  cfg.threads = o.threads;
  const auto res = spiked_study(cfg);

  std::vector<std::vector<std::string>> rows;
  for (const auto& row : res.rows) {
    rows.push_back({std::to_string(row.m), std::string(to_string(row.method)), std::to_string(row.trial),
                    format_double(row.auroc)});
  }
  json means = json::array();
  for (const auto& [key, v] : res.mean_auroc) {
    rows.push_back({std::to_string(key.first), std::string(to_string(key.second)), "mean", format_double(v)});
    means.push_back({{"m", key.first}, {"method", to_string(key.second)}, {"mean_auroc", v}});
  }
  emit(o.out, format_csv({"m", "method", "trial", "auroc"}, rows));
  if (!o.summary.empty()) {
    json s = {{"experiment", "spiked"},
              {"params", {{"n", o.n}, {"k", o.k}, {"m", o.m}, {"trials", o.trials}, {"scaling", o.scaling}}},
              {"seed", cfg.seed},
              {"mean_auroc", means},
              {"timing_ms", elapsed_ms(start)}};
    atomic_write(o.summary, s.dump(2) + "\n");
  }
  return 0;
}

struct BoundsOptions {
  long n = 10;
  long q = 0;
  long k_max = 0;
  std::string family = "gaussian";
  int trials = 1;
  int grid_points = 10;
  double epsilon = 1e-3;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int run_bounds(const BoundsOptions& o) {
  const Index k_max = o.k_max ? o.k_max : o.n;
  if (k_max > o.n) throw UsageError("--k-max exceeds --n");
  const auto base = resolve_seed(o.seed).value_or(0);
  BoundSweepOptions opt;
  opt.grid_points = o.grid_points;
  opt.dspca.epsilon = o.epsilon;

  std::vector<std::vector<std::string>> rows;
  for (int t = 0; t < o.trials; ++t) {
    const auto seed = base + static_cast<std::uint64_t>(t);
    const auto sigma = o.family == "gaussian" ? make_gaussian_gram(o.n, o.q ? o.q : o.n, seed)
                                              : make_rank_one_noise(o.n, seed);
    const auto sweep = bound_sweep(sigma, k_max, opt);
    for (size_t j = 0; j < sweep.cardinalities.size(); ++j) {
      const auto k = std::to_string(sweep.cardinalities[j]);
      const std::string cert = sweep.certified[j] ? "1" : "0";
      for (const auto& [name, v] : sweep.lower_bounds) {
        rows.push_back({std::to_string(t), k, "lower", name, format_double(v[j]), cert});
      }
      for (const auto& [name, v] : sweep.upper_bounds) {
        rows.push_back({std::to_string(t), k, "upper", name, format_double(v[j]), cert});
      }
    }
  }
  emit(o.out, format_csv({"trial", "k", "bound", "method", "value", "certified"}, rows));
  return 0;
}

void print_failure(const Error& e) {
  std::cerr << json{{"error", to_string(e.code())}, {"message", e.what()}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse principal component analysis"};
  app.require_subcommand(1);

  SolveOptions solve;
  add_solve_options(*app.add_subcommand("solve", "compute one sparse component"), solve);

  PathOptions path;
  auto* path_cmd = app.add_subcommand("path", "variance against cardinality as CSV");
  add_input(*path_cmd, path.in);
  path_cmd->add_option("--method", path.method)->check(CLI::IsMember({"greedy", "greedy-approx", "threshold"}));
  path_cmd->add_option("--k", path.k, "longest pattern (default: n)")->check(CLI::PositiveNumber);
  path_cmd->add_option("--out", path.out);

  CertifyOptions cert;
  auto* cert_cmd = app.add_subcommand("certify", "test a pattern for global optimality");
  add_input(*cert_cmd, cert.in);
  cert_cmd->add_option("--pattern", cert.pattern, "1-based indices, e.g. 1,4,7")->required();
  auto* rho_star = cert_cmd->add_option("--rho-star", cert.rho_star)->check(CLI::NonNegativeNumber);
  cert_cmd->add_option("--scan", cert.scan, "search this many penalties in the admissible interval")
      ->check(CLI::PositiveNumber)
      ->excludes(rho_star);
  cert_cmd->add_option("--out", cert.out);

  DeflateOptions defl;
  auto* defl_cmd = app.add_subcommand("deflate", "extract components one after another");
  add_solve_options(*defl_cmd, defl.solve);
  defl_cmd->add_option("--components", defl.components)->required()->check(CLI::PositiveNumber);

  OracleOptions orc;
  auto* orc_cmd = app.add_subcommand("oracle", "exhaustive search over patterns of size k");
  add_input(*orc_cmd, orc.in);
  orc_cmd->add_option("--k", orc.k)->required()->check(CLI::PositiveNumber);
  orc_cmd->add_option("--max-subsets", orc.cap)->check(CLI::PositiveNumber);
  orc_cmd->add_option("--out", orc.out);

  auto* exp_cmd = app.add_subcommand("experiment", "synthetic studies");
  exp_cmd->require_subcommand(1);

  SpikedOptions sp;
  auto* sp_cmd = exp_cmd->add_subcommand("spiked", "support recovery AUROC on a spiked model");
  sp_cmd->add_option("--n", sp.n)->check(CLI::PositiveNumber);
  sp_cmd->add_option("--k", sp.k)->check(CLI::PositiveNumber);
  sp_cmd->add_option("--m", sp.m, "sample sizes")->delimiter(',')->check(CLI::PositiveNumber);
  sp_cmd->add_option("--trials", sp.trials)->check(CLI::PositiveNumber);
  sp_cmd->add_option("--seed", sp.seed);
  sp_cmd->add_option("--noise-scaling", sp.scaling)->check(CLI::IsMember({"per-m", "per-sqrt-m"}));
  sp_cmd->add_option("--threads", sp.threads);
  sp_cmd->add_option("--out", sp.out, "CSV table");
  sp_cmd->add_option("--summary", sp.summary, "JSON summary");

  BoundsOptions bd;
  auto* bd_cmd = exp_cmd->add_subcommand("bounds", "sparse eigenvalue bounds on random matrices");
  bd_cmd->add_option("--n", bd.n)->check(CLI::PositiveNumber);
  bd_cmd->add_option("--q", bd.q, "rows of the Gaussian factor (default: n)")->check(CLI::PositiveNumber);
  bd_cmd->add_option("--k-max", bd.k_max)->check(CLI::PositiveNumber);
  bd_cmd->add_option("--family", bd.family)->check(CLI::IsMember({"gaussian", "rank-one"}));
  bd_cmd->add_option("--trials", bd.trials)->check(CLI::PositiveNumber);
  bd_cmd->add_option("--grid-points", bd.grid_points)->check(CLI::PositiveNumber);
  bd_cmd->add_option("--epsilon", bd.epsilon)->check(CLI::PositiveNumber);
  bd_cmd->add_option("--seed", bd.seed);
  bd_cmd->add_option("--out", bd.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  try {
    if (app.got_subcommand("solve")) return run_solve(solve);
    if (app.got_subcommand("path")) return run_path(path);
    if (app.got_subcommand("certify")) return run_certify(cert);
    if (app.got_subcommand("deflate")) return run_deflate(defl);
    if (app.got_subcommand("oracle")) return run_oracle(orc);
    if (sp_cmd->parsed()) return run_spiked(sp);
    if (bd_cmd->parsed()) return run_bounds(bd);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    print_failure(e);
    return kFailure;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "Internal"}, {"message", e.what()}}.dump() << "\n";
    return kFailure;
  }
  return kUsage;
}
