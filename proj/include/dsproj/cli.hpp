#pragma once

// Command-line front end.  Subcommands: solve, gen, bench, compare, verify.
// Exit codes: 0 success, 1 usage error, 2 I/O or parse error,
// 3 non-convergence, 4 verification failure.  When --seed is absent the
// DSPROJ_SEED environment variable supplies it.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "dsproj/baselines.hpp"
#include "dsproj/core_model.hpp"
#include "dsproj/harness.hpp"
#include "dsproj/solver.hpp"

namespace dsproj {
namespace cli {

using nlohmann::json;

inline std::optional<std::uint64_t> env_seed() {
  const char* s = std::getenv("DSPROJ_SEED");
  if (!s || !*s) return std::nullopt;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s, &end, 10);
  if (!end || *end != '\0') {
    throw Error(std::string("DSPROJ_SEED is not an integer: '") + s + "'");
  }
  return static_cast<std::uint64_t>(v);
}

inline json report_to_json(const ProblemInstance& inst, const std::string& algorithm,
                           const SolveReport& rep, std::uint64_t seed) {
  json j;
  j["n"] = inst.n;
  j["algorithm"] = algorithm;
  j["converged"] = rep.converged;
  j["iterations"] = rep.iterations;
  j["opt_cond"] = {{"primal", rep.kkt.primal},
                   {"dual", rep.kkt.dual},
                   {"complementarity", rep.kkt.complementarity},
                   {"total", rep.kkt.total}};
  j["residual_history"] = rep.residual_history;
  j["shifts_per_iter"] = rep.shifts_per_iter;
  j["time_ms"] = rep.wall_time_ms;
  j["seed"] = seed;
  return j;
}

inline void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
  if (!out.flush()) throw Error("failed writing '" + path + "'");
}

inline SolveReport run_algorithm(const std::string& name,
                                 const ProblemInstance& inst,
                                 const SolveConfig& cfg) {
  if (name == "newton") return modified_newton(inst, cfg);
  if (name == "plain-newton") return plain_newton(inst, cfg);
  if (name == "admm") return admm_solve(inst, cfg);
  if (name == "dykstra") return dykstra_solve(inst, cfg);
  throw Error("unknown algorithm '" + name + "'");
}

// Iterative baselines need far more iterations than the Newton methods, so
// an unset --max-iter picks a per-algorithm default.
inline Index default_max_iter(const std::string& algorithm) {
  return (algorithm == "admm" || algorithm == "dykstra") ? 500000 : 100;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return (v.size() % 2) ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

struct CommonState {
  int exit_code = 0;
};

inline int run_cli(std::vector<std::string> args) {
  CLI::App app{"Projection onto the doubly stochastic polytope"};
  app.require_subcommand(1);
  CommonState state;

  // ---- solve ----
  auto* solve_cmd = app.add_subcommand("solve", "Project one matrix from a file");
  std::string solve_input, solve_format = "auto", solve_algorithm = "newton";
  std::string solve_output, solve_report_path;
  double solve_tol = -1.0;
  long long solve_max_iter = -1;
  long long solve_seed = -1;
  bool solve_damping = false;
  solve_cmd->add_option("--input", solve_input, "Input matrix file")->required();
  solve_cmd->add_option("--format", solve_format, "Input format")
      ->check(CLI::IsMember({"csv", "mm", "auto"}));
  solve_cmd->add_option("--algorithm", solve_algorithm, "Solver to run")
      ->check(CLI::IsMember({"newton", "plain-newton", "admm", "dykstra"}));
  solve_cmd->add_option("--tol", solve_tol, "Residual tolerance");
  solve_cmd->add_option("--max-iter", solve_max_iter, "Iteration cap");
  solve_cmd->add_option("--seed", solve_seed, "Seed for the vertex search");
  solve_cmd->add_flag("--damping", solve_damping, "Halve growing steps");
  solve_cmd->add_option("--output", solve_output, "Write the projection here");
  solve_cmd->add_option("--report", solve_report_path, "Write a JSON report here");

  solve_cmd->callback([&]() {
    Matrix X;
    try {
      X = (solve_format == "auto")
              ? read_matrix(solve_input)
              : read_matrix(solve_input, solve_format == "mm"
                                             ? MatrixFormat::matrixmarket
                                             : MatrixFormat::csv);
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      state.exit_code = 2;
      return;
    }
    const ProblemInstance inst{std::move(X)};
    SolveConfig cfg;
    cfg.algorithm = solve_algorithm;
    cfg.tol = solve_tol;
    cfg.max_iter = solve_max_iter > 0 ? solve_max_iter
                                      : default_max_iter(solve_algorithm);
    cfg.damping = solve_damping;
    const std::uint64_t seed =
        solve_seed >= 0 ? static_cast<std::uint64_t>(solve_seed)
                        : env_seed().value_or(0);
    cfg.seed = seed;

    SolveReport rep;
    try {
      rep = run_algorithm(solve_algorithm, inst, cfg);
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      state.exit_code = 3;
      return;
    }
    std::printf(
        "algorithm=%s n=%lld converged=%s iterations=%lld opt_cond=%.3e "
        "time_ms=%.2f\n",
        solve_algorithm.c_str(), static_cast<long long>(inst.n),
        rep.converged ? "yes" : "no", static_cast<long long>(rep.iterations),
        rep.kkt.total, rep.wall_time_ms);
    if (!solve_output.empty()) write_matrix(solve_output, rep.X_star);
    if (!solve_report_path.empty()) {
      write_json(solve_report_path,
                 report_to_json(inst, solve_algorithm, rep, seed));
    }
    state.exit_code = rep.converged ? 0 : 3;
  });

  // ---- gen ----
  auto* gen_cmd = app.add_subcommand("gen", "Generate a test instance");
  long long gen_n = 0, gen_blocks = 0, gen_seed = -1;
  double gen_noise = 0.1;
  std::string gen_output;
  gen_cmd->add_option("--n", gen_n, "Matrix size")->required();
  gen_cmd->add_option("--blocks", gen_blocks, "Use the blocky generator with K blocks");
  gen_cmd->add_option("--noise", gen_noise, "Noise level for the blocky generator");
  gen_cmd->add_option("--seed", gen_seed, "Generator seed");
  gen_cmd->add_option("--output", gen_output, "Output matrix file")->required();

  gen_cmd->callback([&]() {
    std::uint64_t seed = 0;
    if (gen_seed >= 0) {
      seed = static_cast<std::uint64_t>(gen_seed);
    } else if (auto env = env_seed()) {
      seed = *env;
    } else {
      std::cerr << "error: gen needs --seed (or DSPROJ_SEED)\n";
      state.exit_code = 1;
      return;
    }
    GenSpec spec;
    spec.n = gen_n;
    spec.seed = seed;
    if (gen_blocks > 0) {
      spec.kind = GenSpec::Kind::blocky;
      spec.K = gen_blocks;
      spec.noise = gen_noise;
    }
    ProblemInstance inst;
    try {
      inst = generate(spec);
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      state.exit_code = 1;  // bad generator parameters
      return;
    }
    try {
      write_matrix(gen_output, inst.Xhat);
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      state.exit_code = 2;
      return;
    }
  });

  // ---- bench ----
  auto* bench_cmd = app.add_subcommand("bench", "Benchmark over random instances");
  std::vector<long long> bench_sizes;
  long long bench_trials = 0, bench_seed = -1;
  std::string bench_report_path;
  bench_cmd->add_option("--sizes", bench_sizes, "Comma-separated sizes")
      ->required()
      ->delimiter(',');
  bench_cmd->add_option("--trials", bench_trials, "Trials per size")->required();
  bench_cmd->add_option("--seed", bench_seed, "Master seed");
  bench_cmd->add_option("--report", bench_report_path, "Write a JSON report here");

  bench_cmd->callback([&]() {
    std::uint64_t master = 0;
    if (bench_seed >= 0) {
      master = static_cast<std::uint64_t>(bench_seed);
    } else if (auto env = env_seed()) {
      master = *env;
    } else {
      std::cerr << "error: bench needs --seed (or DSPROJ_SEED)\n";
      state.exit_code = 1;
      return;
    }
    if (bench_trials < 1) {
      std::cerr << "error: --trials must be positive\n";
      state.exit_code = 1;
      return;
    }

    for (long long n : bench_sizes) {
      if (n < 1) {
        std::cerr << "error: sizes must be positive, got " << n << '\n';
        state.exit_code = 1;
        return;
      }
    }

    json results = json::array();
    bool all_converged = true;
    std::printf("%8s %8s %12s %14s %14s\n", "n", "trials", "med_iters",
                "med_opt_cond", "med_time_ms");
    try {
    for (long long n : bench_sizes) {
      // Warm-up solve per size, excluded from the statistics.
      {
        const ProblemInstance warm = gen_normal(n, derive_seed(master, n, 0));
        (void)modified_newton(warm);
      }
      std::vector<double> iters, totals, times;
      json per_trial = json::array();
      for (long long t = 1; t <= bench_trials; ++t) {
        const std::uint64_t ts = derive_seed(master, n, t);
        const ProblemInstance inst = gen_normal(n, ts);
        SolveConfig cfg;
        cfg.seed = ts;
        const SolveReport rep = modified_newton(inst, cfg);
        all_converged = all_converged && rep.converged;
        iters.push_back(static_cast<double>(rep.iterations));
        totals.push_back(rep.kkt.total);
        times.push_back(rep.wall_time_ms);
        per_trial.push_back({{"seed", ts},
                             {"converged", rep.converged},
                             {"iterations", rep.iterations},
                             {"opt_cond_total", rep.kkt.total},
                             {"time_ms", rep.wall_time_ms}});
      }
      const double med_it = median(iters), med_oc = median(totals),
                   med_ms = median(times);
      std::printf("%8lld %8lld %12.1f %14.3e %14.3f\n", n, bench_trials,
                  med_it, med_oc, med_ms);
      results.push_back({{"n", n},
                         {"median_iterations", med_it},
                         {"median_opt_cond", med_oc},
                         {"median_time_ms", med_ms},
                         {"per_trial", per_trial}});
    }
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      state.exit_code = 3;
      return;
    }
    if (!bench_report_path.empty()) {
      write_json(bench_report_path, json{{"seed", master},
                                         {"trials", bench_trials},
                                         {"results", results}});
    }
    state.exit_code = all_converged ? 0 : 3;
  });

  // ---- compare ----
  auto* compare_cmd =
      app.add_subcommand("compare", "Run several algorithms on one instance");
  std::string compare_input, compare_report_path;
  std::vector<std::string> compare_algorithms;
  double compare_tol = -1.0;
  long long compare_seed = -1;
  compare_cmd->add_option("--input", compare_input, "Input matrix file")->required();
  compare_cmd
      ->add_option("--algorithms", compare_algorithms, "Comma-separated algorithms")
      ->required()
      ->delimiter(',');
  compare_cmd->add_option("--tol", compare_tol, "Residual tolerance");
  compare_cmd->add_option("--seed", compare_seed, "Seed for the vertex search");
  compare_cmd->add_option("--report", compare_report_path, "Write a JSON report here");

  compare_cmd->callback([&]() {
    Matrix X;
    try {
      X = read_matrix(compare_input);
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      state.exit_code = 2;
      return;
    }
    const ProblemInstance inst{std::move(X)};
    const std::uint64_t seed =
        compare_seed >= 0 ? static_cast<std::uint64_t>(compare_seed)
                          : env_seed().value_or(0);

    json reports = json::array();
    bool all_converged = true;
    std::printf("%14s %10s %12s %14s %12s\n", "algorithm", "converged",
                "iterations", "opt_cond", "time_ms");
    for (const std::string& name : compare_algorithms) {
      SolveConfig cfg;
      cfg.tol = compare_tol;
      cfg.seed = seed;
      cfg.algorithm = name;
      cfg.max_iter = default_max_iter(name);
      SolveReport rep;
      try {
        rep = run_algorithm(name, inst, cfg);
      } catch (const Error& e) {
        std::cerr << "error: " << name << ": " << e.what() << '\n';
        state.exit_code = 3;
        return;
      }
      all_converged = all_converged && rep.converged;
      std::printf("%14s %10s %12lld %14.3e %12.3f\n", name.c_str(),
                  rep.converged ? "yes" : "no",
                  static_cast<long long>(rep.iterations), rep.kkt.total,
                  rep.wall_time_ms);
      reports.push_back(report_to_json(inst, name, rep, seed));
    }
    if (!compare_report_path.empty()) {
      write_json(compare_report_path, json{{"input", compare_input},
                                           {"results", reports}});
    }
    state.exit_code = all_converged ? 0 : 3;
  });

  // ---- verify ----
  auto* verify_cmd =
      app.add_subcommand("verify", "Check the solver against an oracle");
  std::string verify_input, verify_against;
  double verify_tol = 1e-6;
  verify_cmd->add_option("--input", verify_input, "Input matrix file")->required();
  verify_cmd->add_option("--against", verify_against, "Oracle to compare with")
      ->required()
      ->check(CLI::IsMember({"active-set", "dykstra"}));
  verify_cmd->add_option("--tol", verify_tol, "Max allowed entry discrepancy");

  verify_cmd->callback([&]() {
    Matrix X;
    try {
      X = read_matrix(verify_input);
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      state.exit_code = 2;
      return;
    }
    const ProblemInstance inst{std::move(X)};

    SolveConfig cfg;
    cfg.seed = env_seed().value_or(0);
    SolveReport rep;
    try {
      rep = modified_newton(inst, cfg);
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      state.exit_code = 3;
      return;
    }
    if (!rep.converged) {
      std::cerr << "error: solver did not converge\n";
      state.exit_code = 3;
      return;
    }

    Matrix oracle;
    try {
      if (verify_against == "active-set") {
        oracle = active_set_enumerate(inst);
      } else {
        oracle = dykstra_project(inst, 1e-10, 2000000);
      }
    } catch (const InstanceTooLarge& e) {
      std::cerr << "error: " << e.what() << '\n';
      state.exit_code = 1;
      return;
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      state.exit_code = 3;
      return;
    }

    const double diff = (rep.X_star - oracle).cwiseAbs().maxCoeff();
    std::printf("max_discrepancy=%.3e tol=%.3e opt_cond=%.3e\n", diff,
                verify_tol, rep.kkt.total);
    state.exit_code = diff <= verify_tol ? 0 : 4;
  });

  // CLI11 wants mutable argc/argv-style input; keep the program name first.
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  static const char* kProg = "dsproj";
  argv.push_back(kProg);
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;  // help/version exit cleanly
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return state.exit_code;
}

}  // namespace cli
}  // namespace dsproj
