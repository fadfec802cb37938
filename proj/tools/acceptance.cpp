// Acceptance battery A1-A8. One line per criterion:
//   A<n> PASS|FAIL <summary>
// The default run uses the smoke variants of A5 and A7; --full runs the
// 1000 x 1000, 10-seed versions.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "dcopt/dc_suite.hpp"
#include "dcopt/diagnostics.hpp"
#include "dcopt/matcomp.hpp"

using namespace dcopt;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Line {
  std::string id;
  bool passed = false;
  std::string text;
};

std::vector<Line> g_lines;

void emit(const std::string& id, bool passed, const std::string& text) {
  g_lines.push_back({id, passed, text});
  std::cout << id << ' ' << (passed ? "PASS" : "FAIL") << ' ' << text << std::endl;
}

std::string fmt(double v, int prec = 3) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

std::string describe(const CheckResult& r) {
  return r.name + " worst " + fmt(r.worst) + " (tol " + fmt(r.tol) + ")";
}

// Tolerances.
constexpr double kA1Seconds = 5;
constexpr double kA2Seconds = 30;
constexpr double kA3Seconds = 10;
constexpr double kA5FullRe = 5e-3;
constexpr int kA5FullRankSeeds = 8;
constexpr double kA5FullSeconds = 300;
constexpr double kA5SmokeRe = 1e-2;
constexpr double kA5SmokeSeconds = 15;
constexpr double kA6Seconds = 60;
constexpr double kA7Re = 5e-2;
constexpr double kA8Seconds = 30;

void a1(std::uint64_t seed) {
  const auto t0 = Clock::now();
  const CheckResult r = check_grad_psi(20, seed, 1e-6);
  const double s = since(t0);
  emit("A1", r.passed && s < kA1Seconds,
       "grad Psi vs central differences, 20 instances: " + describe(r) + ", " + fmt(s) + " s (< " +
           fmt(kA1Seconds) + ")");
}

void a2(std::uint64_t seed) {
  const auto t0 = Clock::now();
  const CheckResult r = check_subsolver(20, seed, 100000, 1e-6, 1e-8);
  const double s = since(t0);
  emit("A2", r.passed && s < kA2Seconds,
       "dPPASN vs reference solve, 20 instances: " + r.detail + ", " + fmt(s) + " s (< " +
           fmt(kA2Seconds) + ")");
}

void a3(std::uint64_t seed) {
  const PotentialCheck pc = check_potential(seed);
  const bool ok = pc.monotone.passed && pc.sandwich.passed && pc.descent.passed &&
                  pc.seconds < kA3Seconds;
  emit("A3", ok,
       "60x40 rank-3, theory mode, gap <= 1e-12, " + std::to_string(pc.iters) +
           " iterations: monotone " + fmt(pc.monotone.worst) + ", sandwich " +
           fmt(pc.sandwich.worst) + ", descent " + fmt(pc.descent.worst) +
           " (worst violations, 1e-8 slack where allowed), " + fmt(pc.seconds) + " s (< " +
           fmt(kA3Seconds) + ")");
}

struct BenchOutcome {
  NoptReport report;
  double seconds = 0;
};

BenchOutcome bench(const NoptTarget& target, std::uint64_t seed, int runs, double kink_tol = 0) {
  NoptOptions opt;
  opt.runs = runs;
  opt.seed = seed;
  opt.threads = 1;
  opt.mode = InexactMode::Paper;
  if (kink_tol > 0) opt.tweak = [kink_tol](IlpaConfig& c) { c.kink_tol = kink_tol; };
  const auto t0 = Clock::now();
  BenchOutcome out{nopt_benchmark(target, opt), 0};
  out.seconds = since(t0);
  return out;
}

void a4_a6(std::uint64_t seed, bool full) {
  struct Row {
    int id;
    double target_min;
    double min_tol;  // |min - target| tolerance, or bound when target is 0
    int nopt_needed;
  };
  const std::vector<Row> rows = {{1, 2.0, 1e-4, 95}, {3, 0.0, 1e-4, 80}, {4, 0.5, 1e-4, 80}};

  std::vector<BenchOutcome> all;
  double a6_seconds = 0;
  bool a6_ok = true;
  std::string a6_text;
  for (const Row& row : rows) {
    BenchOutcome b = bench(example_target(build_example(row.id)), seed, 100);
    a6_seconds += b.seconds;
    const double mn = b.report.min_theta;
    const bool min_ok = row.target_min == 0 ? mn <= row.min_tol : std::abs(mn - row.target_min) <= row.min_tol;
    const bool ok = min_ok && b.report.nopt >= row.nopt_needed;
    a6_ok = a6_ok && ok;
    a6_text += "ex" + std::to_string(row.id) + " min " + fmt(mn, 6) + " Nopt " +
               std::to_string(b.report.nopt) + "/100 (need >= " + std::to_string(row.nopt_needed) +
               (ok ? ")" : ", FAIL)") + "; ";
    all.push_back(std::move(b));
  }
  a6_ok = a6_ok && a6_seconds < kA6Seconds;
  a6_text += fmt(a6_seconds) + " s (< " + fmt(kA6Seconds) + ")";
  if (full) {
    a6_text += "; with kink_tol 1e-8:";
    for (const Row& row : rows) {
      const BenchOutcome b = bench(example_target(build_example(row.id)), seed, 100, 1e-8);
      a6_text += " ex" + std::to_string(row.id) + " Nopt " + std::to_string(b.report.nopt);
    }
  }

  // A4 also covers the remaining shipped benchmarks.
  all.push_back(bench(example_target(build_example(2)), seed, 100));
  all.push_back(bench(example_target(build_example(5)), seed, 100));
  all.push_back(bench(penalty_target(demo_penalty_instance()), seed, 100));
  int max_j = 0, j_limit = 0, over = 0, caps = 0, runs = 0;
  for (const auto& b : all) {
    for (const auto& r : b.report.runs) {
      ++runs;
      max_j = std::max(max_j, r.max_j);
      j_limit = std::max(j_limit, r.j_limit);
      if (r.max_j > r.j_limit) ++over;
      if (r.gamma_cap) ++caps;
    }
  }
  emit("A4", over == 0 && caps == 0,
       std::to_string(runs) + " runs over examples 1-5 and the penalty demo: max j_k " +
           std::to_string(max_j) + " (limit " + std::to_string(j_limit) + "), runs over limit " +
           std::to_string(over) + ", gamma-cap errors " + std::to_string(caps));
  emit("A6", a6_ok, a6_text);
}

struct MatcompStats {
  std::vector<double> re;
  std::vector<int> rank;
  double seconds = 0;
  double mean_re() const {
    double s = 0;
    for (double v : re) s += v;
    return re.empty() ? NAN : s / static_cast<double>(re.size());
  }
};

MatcompStats matcomp_runs(const SyntheticSpec& spec, SolverKind solver, double c_lambda,
                          std::uint64_t seed, int seeds) {
  MatcompRunOptions opt;
  opt.solver = solver;
  opt.scad.c_lambda = c_lambda;
  MatcompStats st;
  const auto t0 = Clock::now();
  for (int i = 0; i < seeds; ++i) {
    const MatcompRun r = run_synthetic(spec, opt, seed + static_cast<std::uint64_t>(i));
    st.re.push_back(*r.re);
    st.rank.push_back(r.rank);
  }
  st.seconds = since(t0);
  return st;
}

void a5_a7(std::uint64_t seed, bool full) {
  SyntheticSpec spec;
  spec.noise = NoiseKind::V;
  spec.outlier_fraction = 0.3;
  spec.scheme = SamplingScheme::S1;
  if (full) {
    spec.n1 = spec.n2 = 1000;
    spec.rank = 10;
    spec.sr = 0.25;
  } else {
    spec.n1 = spec.n2 = 300;
    spec.rank = 5;
    spec.sr = 0.3;
  }
  const int seeds = full ? 10 : 1;
  const std::string setting = std::to_string(spec.n1) + "x" + std::to_string(spec.n2) + " r*=" +
                              std::to_string(spec.rank) + " SR=" + fmt(spec.sr) + ", " +
                              std::to_string(seeds) + (seeds == 1 ? " seed" : " seeds");

  const MatcompStats ilpa = matcomp_runs(spec, SolverKind::Ilpa, 0.06, seed, seeds);
  if (full) {
    int rank_hits = 0;
    for (int r : ilpa.rank) rank_hits += r == spec.rank ? 1 : 0;
    const bool ok = ilpa.mean_re() <= kA5FullRe && rank_hits >= kA5FullRankSeeds &&
                    ilpa.seconds <= kA5FullSeconds;
    emit("A5", ok,
         "[full] " + setting + ": mean RE " + fmt(ilpa.mean_re()) + " (<= " + fmt(kA5FullRe) +
             "), rank 10 in " + std::to_string(rank_hits) + "/10 (need " +
             std::to_string(kA5FullRankSeeds) + "), " + fmt(ilpa.seconds) + " s (<= " +
             fmt(kA5FullSeconds) + ")");
  } else {
    const bool ok = ilpa.re[0] <= kA5SmokeRe && ilpa.seconds <= kA5SmokeSeconds;
    emit("A5", ok,
         "[smoke] " + setting + ": RE " + fmt(ilpa.re[0]) + " (<= " + fmt(kA5SmokeRe) + "), rank " +
             std::to_string(ilpa.rank[0]) + ", " + fmt(ilpa.seconds) + " s (<= " +
             fmt(kA5SmokeSeconds) + ")");
  }

  const MatcompStats sub = matcomp_runs(spec, SolverKind::Subgm, 0.15, seed, seeds);
  int beaten = 0;
  for (int i = 0; i < seeds; ++i) beaten += sub.re[static_cast<std::size_t>(i)] < ilpa.re[static_cast<std::size_t>(i)] ? 1 : 0;
  const bool ok = sub.mean_re() <= kA7Re && sub.mean_re() >= ilpa.mean_re();
  emit("A7", ok,
       std::string(full ? "[full] " : "[smoke] ") + setting + ", c_lambda 0.15: subGM mean RE " +
           fmt(sub.mean_re()) + " (<= " + fmt(kA7Re) + "), iLPA mean RE " + fmt(ilpa.mean_re()) +
           ", seeds where subGM is better " + std::to_string(beaten) + ", " + fmt(sub.seconds) + " s");
}

void a8(std::uint64_t seed) {
  const auto t0 = Clock::now();
  const auto results = check_atoms(seed, 1000);
  const double s = since(t0);
  bool ok = s < kA8Seconds;
  std::string failed;
  double worst_ratio = 0;
  for (const auto& r : results) {
    ok = ok && r.passed;
    if (!r.passed) failed += " " + describe(r);
    if (r.tol > 0) worst_ratio = std::max(worst_ratio, r.worst / r.tol);
  }
  emit("A8", ok,
       std::to_string(results.size()) + " atom properties, 1000 pairs per atom" +
           (failed.empty() ? ", all within tolerance (largest worst/tol " + fmt(worst_ratio) + ")"
                           : ", failed:" + failed) +
           ", " + fmt(s) + " s (< " + fmt(kA8Seconds) + ")");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria A1-A8"};
  std::uint64_t seed = 1;
  bool full = false;
  bool strict = false;
  std::string only;
  app.add_option("--seed", seed, "Base seed")->capture_default_str();
  app.add_flag("--full", full, "Run the 1000 x 1000, 10-seed variants of A5 and A7 and the kink_tol sweep in A6");
  app.add_flag("--strict", strict, "Exit with status 1 when any criterion fails");
  app.add_option("--only", only, "Comma-separated subset, e.g. A1,A8");
  CLI11_PARSE(app, argc, argv);

  auto want = [&](const std::string& id) {
    return only.empty() || ("," + only + ",").find("," + id + ",") != std::string::npos;
  };
  const auto t0 = Clock::now();
  try {
    if (want("A1")) a1(seed);
    if (want("A2")) a2(seed);
    if (want("A3")) a3(seed);
    if (want("A4") || want("A6")) a4_a6(seed, full);
    if (want("A5") || want("A7")) a5_a7(seed, full);
    if (want("A8")) a8(seed);
  } catch (const std::exception& e) {
    std::cout << "ERROR " << e.what() << std::endl;
    return 2;
  }
  int failed = 0;
  for (const auto& l : g_lines) failed += l.passed ? 0 : 1;
  std::cout << "summary: " << g_lines.size() - static_cast<std::size_t>(failed) << " passed, " << failed
            << " failed, " << fmt(since(t0)) << " s" << (full ? "" : " (smoke variants for A5, A7)")
            << std::endl;
  return strict && failed > 0 ? 1 : 0;
}
