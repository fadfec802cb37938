#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dcopt/dc_suite.hpp"
#include "dcopt/diagnostics.hpp"
#include "dcopt/matcomp.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace dcopt;

namespace {

struct Shared {
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out_dir = "out";
  std::string config;
  std::string solver = "ilpa";
  std::string mode = "paper";
  bool record_time = false;
};

struct SynthArgs {
  Index n1 = 1000;
  Index n2 = 1000;
  Index rank_true = 10;
  Index rank = 0;
  double sr = 0.25;
  std::string scheme = "S1";
  std::string noise = "V";
  double outlier_fraction = 0.3;
  double c_lambda = 0.06;
  int seeds = 1;
};

struct CompleteArgs {
  std::string data;
  std::string scheme = "S1";
  double sr = 0.25;
  double r_min = 1;
  double r_max = 5;
  double shift = 0;
  double c_lambda = 0.06;
  Index rank = 0;
};

struct BenchArgs {
  std::string examples = "1,2,3,4,5,6";
  int runs = 100;
  std::string variant = "reconstructed";
  bool flip_g = false;
  bool penalty_demo = false;
  double beta = 10;
  double kink_tol = 0;
};

struct CheckArgs {
  bool corrupt_theta2_grad = false;
  int subsolver_instances = 20;
};

// Flat "key = value" file; [section] headers restrict keys to one subcommand.
// Entries become "--key=value" arguments placed before the user's own, so
// the command line wins under the take-last policy.
std::vector<std::string> config_arguments(const std::string& path, const std::string& command) {
  std::vector<std::string> out;
  const auto items = CLI::ConfigINI().from_file(path);
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    if (!item.parents.empty() && item.parents.front() != command) continue;
    if (item.name == "config") continue;
    std::string value;
    for (std::size_t i = 0; i < item.inputs.size(); ++i) {
      if (i) value += ',';
      value += item.inputs[i];
    }
    out.push_back("--" + item.name + "=" + value);
  }
  return out;
}

std::optional<std::string> find_config(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) return std::string(argv[i + 1]);
    if (a.rfind("--config=", 0) == 0) return a.substr(9);
  }
  return std::nullopt;
}

fs::path prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  return fs::path(dir);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write '" + path.string() + "'");
  os << content;
  if (!os) throw IoError("write failed for '" + path.string() + "'");
}

std::string trace_text(const RunResult& run, int threads) {
  std::ostringstream os;
  write_trace_csv(os, run.trace, threads);
  return os.str();
}

json time_value(double seconds, bool record) {
  return record ? json(seconds * 1e3) : json(nullptr);
}

json run_metrics(const MatcompRun& r, std::uint64_t seed, const Shared& sh) {
  json j;
  j["seed"] = seed;
  j["solver"] = sh.solver;
  j["re"] = r.re ? json(*r.re) : json(nullptr);
  j["nmae"] = r.nmae ? json(*r.nmae) : json(nullptr);
  j["rank"] = r.rank;
  j["time_ms"] = time_value(r.seconds, sh.record_time);
  j["iters"] = r.run.iters();
  j["status"] = to_string(r.run.status);
  j["final_phi"] = r.run.final_phi();
  j["lambda"] = r.lambda;
  j["fallback_exits"] = r.run.fallback_exits;
  j["monotonicity_violations"] = r.run.monotonicity_violations;
  j["metric_violations"] = r.run.metric_violations;
  return j;
}

void mean_std(const std::vector<double>& v, json& agg, const std::string& key) {
  if (v.empty()) {
    agg[key + "_mean"] = nullptr;
    agg[key + "_std"] = nullptr;
    return;
  }
  double m = 0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  s = v.size() > 1 ? std::sqrt(s / static_cast<double>(v.size() - 1)) : 0.0;
  agg[key + "_mean"] = m;
  agg[key + "_std"] = s;
}

void report_warnings(const RunResult& run, std::uint64_t seed) {
  for (const auto& w : run.warnings) std::cerr << "warning (seed " << seed << "): " << w << '\n';
}

MatcompRunOptions run_options(const Shared& sh, double c_lambda, Index rank) {
  MatcompRunOptions opt;
  opt.solver = parse_solver(sh.solver);
  opt.mode = parse_inexact_mode(sh.mode);
  opt.scad.c_lambda = c_lambda;
  opt.rank = rank;
  return opt;
}

int cmd_synth(const Shared& sh, const SynthArgs& a) {
  SyntheticSpec spec;
  spec.n1 = a.n1;
  spec.n2 = a.n2;
  spec.rank = a.rank_true;
  spec.sr = a.sr;
  spec.scheme = parse_scheme(a.scheme);
  spec.noise = parse_noise_kind(a.noise);
  spec.outlier_fraction = a.outlier_fraction;
  if (a.seeds < 1) throw InvalidInput("--seeds must be positive");
  const MatcompRunOptions opt = run_options(sh, a.c_lambda, a.rank);
  const fs::path out = prepare_out_dir(sh.out_dir);

  std::vector<MatcompRun> runs(static_cast<std::size_t>(a.seeds));
  // Seeds fan out; per-seed solves stay single threaded.
  parallel_for(a.seeds, sh.threads, [&](int i) {
    runs[static_cast<std::size_t>(i)] = run_synthetic(spec, opt, sh.seed + static_cast<std::uint64_t>(i));
  });

  std::vector<json> per;
  std::vector<double> re, rank, iters, time_ms;
  for (int i = 0; i < a.seeds; ++i) {
    const auto& r = runs[static_cast<std::size_t>(i)];
    const std::uint64_t seed = sh.seed + static_cast<std::uint64_t>(i);
    report_warnings(r.run, seed);
    per.push_back(run_metrics(r, seed, sh));
    if (r.re) re.push_back(*r.re);
    rank.push_back(r.rank);
    iters.push_back(r.run.iters());
    time_ms.push_back(r.seconds * 1e3);
    const std::string name = a.seeds == 1 ? "trace.csv" : "trace_seed" + std::to_string(seed) + ".csv";
    write_file(out / name, trace_text(r.run, sh.threads));
    std::cout << "seed " << seed << ": RE " << (r.re ? *r.re : NAN) << ", rank " << r.rank
              << ", iters " << r.run.iters() << ", " << to_string(r.run.status) << ", "
              << r.seconds << " s\n";
  }
  json metrics;
  if (a.seeds == 1) {
    metrics = per.front();
  } else {
    metrics["runs"] = per;
    json agg;
    agg["seeds"] = a.seeds;
    mean_std(re, agg, "re");
    mean_std(rank, agg, "rank");
    mean_std(iters, agg, "iters");
    if (sh.record_time) {
      mean_std(time_ms, agg, "time_ms");
    } else {
      agg["time_ms_mean"] = nullptr;
      agg["time_ms_std"] = nullptr;
    }
    metrics["aggregate"] = agg;
    std::cout << "mean RE " << agg["re_mean"] << ", mean rank " << agg["rank_mean"] << '\n';
  }
  write_file(out / "metrics.json", metrics.dump(2) + "\n");
  return 0;
}

int cmd_complete(const Shared& sh, const CompleteArgs& a) {
  // Read and validate everything before touching the output directory.
  const auto known = read_triplets_file(a.data);
  CompletionOptions copt;
  copt.scheme = parse_scheme(a.scheme);
  copt.sr = a.sr;
  copt.r_min = a.r_min;
  copt.r_max = a.r_max;
  copt.shift = a.shift;
  const MatcompRunOptions opt = run_options(sh, a.c_lambda, a.rank);
  const MatcompRun r = run_completion(known, copt, opt, sh.seed);
  report_warnings(r.run, sh.seed);
  const fs::path out = prepare_out_dir(sh.out_dir);
  write_file(out / "trace.csv", trace_text(r.run, sh.threads));
  write_file(out / "metrics.json", run_metrics(r, sh.seed, sh).dump(2) + "\n");
  std::cout << "NMAE " << *r.nmae << ", rank " << r.rank << ", iters " << r.run.iters() << ", "
            << to_string(r.run.status) << '\n';
  return 0;
}

std::vector<int> parse_examples(const std::string& s) {
  std::vector<int> ids;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    try {
      std::size_t used = 0;
      const int id = std::stoi(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      ids.push_back(id);
    } catch (const std::exception&) {
      throw InvalidInput("--examples: '" + tok + "' is not an example id");
    }
  }
  return ids;
}

int cmd_dc_bench(const Shared& sh, const BenchArgs& a) {
  if (parse_solver(sh.solver) != SolverKind::Ilpa) {
    throw InvalidInput("dc-bench supports --solver ilpa only");
  }
  const InexactMode mode = parse_inexact_mode(sh.mode);
  const ExampleVariant variant = parse_variant(a.variant);
  if (a.kink_tol < 0 || a.kink_tol >= 1) throw InvalidInput("--kink-tol must lie in [0, 1)");

  std::vector<NoptTarget> targets;
  if (a.penalty_demo) {
    targets.push_back(penalty_target(demo_penalty_instance(a.beta)));
  } else {
    for (int id : parse_examples(a.examples)) targets.push_back(example_target(build_example(id, variant, a.flip_g)));
  }
  const fs::path out = prepare_out_dir(sh.out_dir);

  NoptOptions opt;
  opt.runs = a.runs;
  opt.seed = sh.seed;
  opt.threads = sh.threads;
  opt.mode = mode;
  const double kt = a.kink_tol;
  opt.tweak = [kt](IlpaConfig& c) { c.kink_tol = kt; };

  std::vector<NoptReport> reports;
  json list = json::array();
  for (const auto& t : targets) {
    NoptReport rep = nopt_benchmark(t, opt);
    int max_j = 0, j_limit = 0, gamma_cap = 0;
    for (const auto& run : rep.runs) {
      max_j = std::max(max_j, run.max_j);
      j_limit = std::max(j_limit, run.j_limit);
      gamma_cap += run.gamma_cap ? 1 : 0;
    }
    json j;
    j["example"] = rep.name;
    j["runs"] = a.runs;
    j["min"] = rep.min_theta;
    j["max"] = rep.max_theta;
    j["mean"] = rep.mean_theta;
    j["nopt"] = rep.nopt;
    j["reference"] = rep.reference;
    j["failed_runs"] = rep.failed_runs;
    j["monotonicity_violations"] = rep.monotonicity_violations;
    j["mean_infeasibility"] = rep.mean_infeasibility;
    j["max_j"] = max_j;
    j["j_limit"] = j_limit;
    j["gamma_cap_runs"] = gamma_cap;
    j["time_ms"] = time_value(rep.mean_seconds, sh.record_time);
    list.push_back(j);
    std::cout << "example " << rep.name << ": min " << rep.min_theta << ", mean " << rep.mean_theta
              << ", Nopt " << rep.nopt << "/" << a.runs << ", failed " << rep.failed_runs << '\n';
    if (rep.failed_runs > 0) {
      for (const auto& run : rep.runs) {
        if (!run.error.empty()) {
          std::cerr << "example " << rep.name << ": " << run.error << '\n';
          break;
        }
      }
    }
    reports.push_back(std::move(rep));
  }
  std::ostringstream csv;
  write_bench_csv(csv, reports, sh.record_time);
  write_file(out / "bench.csv", csv.str());
  json metrics;
  metrics["solver"] = "ilpa";
  metrics["inexact_mode"] = sh.mode;
  metrics["variant"] = a.variant;
  metrics["kink_tol"] = a.kink_tol;
  metrics["seed"] = sh.seed;
  metrics["examples"] = list;
  write_file(out / "metrics.json", metrics.dump(2) + "\n");
  return 0;
}

int cmd_check(const Shared& sh, const CheckArgs& a) {
  DiagnosticOptions opt;
  opt.seed = sh.seed;
  opt.corrupt_theta2_grad = a.corrupt_theta2_grad;
  opt.subsolver_instances = a.subsolver_instances;
  const auto results = run_diagnostics(opt);
  std::vector<std::string> failed;
  json list = json::array();
  for (const auto& r : results) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << " (tol " << r.tol << "): " << r.detail
              << '\n';
    if (!r.passed) failed.push_back(r.name);
    list.push_back({{"name", r.name}, {"passed", r.passed}, {"worst", r.worst}, {"tol", r.tol}});
  }
  const fs::path out = prepare_out_dir(sh.out_dir);
  write_file(out / "metrics.json", json{{"seed", sh.seed}, {"checks", list}}.dump(2) + "\n");
  if (!failed.empty()) {
    std::cerr << "failed oracles:";
    for (const auto& f : failed) std::cerr << ' ' << f;
    std::cerr << '\n';
    return 1;
  }
  std::cout << "all " << results.size() << " checks passed\n";
  return 0;
}

void add_shared(CLI::App* cmd, Shared& sh) {
  cmd->add_option("--seed", sh.seed, "Base random seed");
  cmd->add_option("--threads", sh.threads, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out-dir", sh.out_dir, "Output directory");
  cmd->add_option("--config", sh.config, "Flat key=value file; command-line flags override it");
  cmd->add_option("--solver", sh.solver, "Solver")->check(CLI::IsMember({"ilpa", "subgm"}));
  cmd->add_option("--inexact-mode", sh.mode, "Subproblem stopping rule")
      ->check(CLI::IsMember({"theory", "paper"}));
  cmd->add_flag("--record-time", sh.record_time,
                "Write wall-clock times to metrics.json and bench.csv (breaks byte-for-byte reproducibility)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inexact linearized proximal DC solver: matrix completion and DC benchmarks"};
  app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  Shared sh;
  SynthArgs sa;
  CompleteArgs ca;
  BenchArgs ba;
  CheckArgs ka;

  auto* synth = app.add_subcommand("synth", "Synthetic robust matrix completion");
  add_shared(synth, sh);
  synth->add_option("--n1", sa.n1, "Rows")->check(CLI::PositiveNumber);
  synth->add_option("--n2", sa.n2, "Columns")->check(CLI::PositiveNumber);
  synth->add_option("--rank-true", sa.rank_true, "Rank of the ground truth")->check(CLI::PositiveNumber);
  synth->add_option("--rank", sa.rank, "Factor rank; 0 selects min(100, min(n1, n2)/2)")
      ->check(CLI::NonNegativeNumber);
  synth->add_option("--sr", sa.sr, "Sampling ratio")->check(CLI::Range(0.0, 1.0));
  synth->add_option("--scheme", sa.scheme, "Sampling scheme")->check(CLI::IsMember({"S1", "S2"}));
  synth->add_option("--noise", sa.noise, "Outlier noise kind")
      ->check(CLI::IsMember({"I", "II", "III", "IV", "V"}));
  synth->add_option("--outlier-fraction", sa.outlier_fraction, "Fraction of corrupted observations")
      ->check(CLI::Range(0.0, 1.0));
  synth->add_option("--c-lambda", sa.c_lambda, "Regularization constant c in lambda = c ||b||")
      ->check(CLI::PositiveNumber);
  synth->add_option("--seeds", sa.seeds, "Number of instances (seeds seed .. seed+seeds-1)")
      ->check(CLI::PositiveNumber);

  auto* complete = app.add_subcommand("complete", "Completion of a rating file, scored by NMAE");
  add_shared(complete, sh);
  complete->add_option("--data", ca.data, "Triplet file: 'user item rating' per line, 1-based")->required();
  complete->add_option("--scheme", ca.scheme, "Sampling scheme")->check(CLI::IsMember({"S1", "S2"}));
  complete->add_option("--sr", ca.sr, "Sampling ratio over the known ratings")->check(CLI::Range(0.0, 1.0));
  complete->add_option("--r-min", ca.r_min, "Smallest possible rating");
  complete->add_option("--r-max", ca.r_max, "Largest possible rating");
  complete->add_option("--shift", ca.shift, "Subtracted from every rating before fitting");
  complete->add_option("--c-lambda", ca.c_lambda, "Regularization constant c in lambda = c ||b||")
      ->check(CLI::PositiveNumber);
  complete->add_option("--rank", ca.rank, "Factor rank; 0 selects min(100, min(n1, n2)/2)")
      ->check(CLI::NonNegativeNumber);

  auto* bench = app.add_subcommand("dc-bench", "Multi-start benchmark on the DC examples");
  add_shared(bench, sh);
  bench->add_option("--examples", ba.examples, "Comma-separated example ids (1-6)");
  bench->add_option("--runs", ba.runs, "Starts per example")->check(CLI::PositiveNumber);
  bench->add_option("--variant", ba.variant, "Example formulas")
      ->check(CLI::IsMember({"reconstructed", "printed"}));
  bench->add_flag("--flip-g", ba.flip_g, "Negate G in example 6");
  bench->add_flag("--penalty-demo", ba.penalty_demo,
                  "Run the l1 exact penalty demo (min x s.t. x^2 <= 1 on [-10, 10]) instead");
  bench->add_option("--beta", ba.beta, "Penalty weight for --penalty-demo")->check(CLI::PositiveNumber);
  bench->add_option("--kink-tol", ba.kink_tol,
                    "Treat G(x) entries within this relative band of a theta2 kink as on it; 0 is exact");

  auto* check = app.add_subcommand("check", "Run the diagnostic battery; nonzero exit on any failure");
  add_shared(check, sh);
  check->add_option("--subsolver-instances", ka.subsolver_instances, "Random subproblems for the subsolver check")
      ->check(CLI::PositiveNumber);
  check->add_flag("--corrupt-theta2-grad", ka.corrupt_theta2_grad, "Negative control")->group("");

  // Config entries go right after the subcommand name.
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    if (const auto cfg = find_config(argc, argv)) {
      std::size_t pos = 0;
      while (pos < args.size() && args[pos].rfind("-", 0) == 0) ++pos;
      if (pos < args.size()) {
        const auto extra = config_arguments(*cfg, args[pos]);
        args.insert(args.begin() + static_cast<std::ptrdiff_t>(pos) + 1, extra.begin(), extra.end());
      }
    }
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*synth) return cmd_synth(sh, sa);
    if (*complete) return cmd_complete(sh, ca);
    if (*bench) return cmd_dc_bench(sh, ba);
    if (*check) return cmd_check(sh, ka);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
