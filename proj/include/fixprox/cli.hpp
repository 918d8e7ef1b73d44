#ifndef FIXPROX_CLI_HPP
#define FIXPROX_CLI_HPP

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fixprox/bench.hpp"
#include "fixprox/errors.hpp"
#include "fixprox/io.hpp"
#include "fixprox/schedules.hpp"
#include "fixprox/solvers.hpp"

namespace fixprox::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumeric = 2;

/// Reads a flat `key=value` file. Blank lines and lines starting with '#'
/// are skipped.
inline std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError("config line " + std::to_string(lineno) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    if (key.rfind("--", 0) == 0) key = key.substr(2);
    out.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return out;
}

namespace detail {

struct ScheduleFlags {
  double gamma_scale = kStepScale;
  double gamma_exp = 0.25;
  double alpha_scale = kStepScale;
  std::optional<double> alpha_exp;
  std::optional<double> alpha_const;
};

inline void add_schedule_flags(CLI::App* cmd, ScheduleFlags& f) {
  cmd->add_option("--gamma-scale", f.gamma_scale, "gamma_n scale c in c/(n+1)^a")
      ->capture_default_str();
  cmd->add_option("--gamma-exp", f.gamma_exp, "gamma_n exponent a")->capture_default_str();
  cmd->add_option("--alpha-scale", f.alpha_scale, "alpha_n scale (power-law alpha)")
      ->capture_default_str();
  cmd->add_option("--alpha-exp", f.alpha_exp, "alpha_n exponent b (power-law alpha)");
  cmd->add_option("--alpha-const", f.alpha_const, "constant alpha_n = t");
}

inline StepSequence alpha_from_flags(const ScheduleFlags& f, bool halpern) {
  if (f.alpha_exp && f.alpha_const) {
    throw UsageError("give either --alpha-exp or --alpha-const, not both");
  }
  if (halpern) {
    if (f.alpha_const) throw UsageError("halpern mode needs --alpha-exp, not --alpha-const");
    return PowerLaw{f.alpha_scale, f.alpha_exp.value_or(0.5)};
  }
  if (f.alpha_exp) throw UsageError("km-type methods need --alpha-const, not --alpha-exp");
  return Constant{f.alpha_const.value_or(kKmRelaxation)};
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty() || out_path == "-") {
    out << text;
  } else {
    write_text_file(out_path, text);
  }
}

inline std::uint64_t default_seed() {
  if (const char* env = std::getenv("FIXPROX_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw UsageError("FIXPROX_SEED is not an unsigned integer");
    }
  }
  return 0;
}

}  // namespace detail

/// Entry point shared by the executable and the tests. Returns the process
/// exit status: 0 success, 1 usage error, 2 numeric failure.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Incremental proximal point methods under fixed point constraints", "fixprox"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  // bench
  auto* bench = app.add_subcommand("bench", "Run the multi-sample benchmark and report F_n, D_n");
  std::string preset;
  std::string config_path;
  std::optional<std::size_t> n_dim, n_users, n_sets, n_samples, n_iters;
  std::optional<std::string> regime;
  std::string algorithms = "halpern,km,ism,psm";
  std::string variants = "i,ii";
  std::optional<std::uint64_t> seed;
  double stop_f_tol = 1e-3;
  double stop_d_tol = 1e-6;
  unsigned jobs = 1;
  std::string bench_out;
  std::string format = "csv";
  std::string dump_dir;
  bool no_timing = false;
  bench->add_option("--config", config_path, "flat key=value file; keys are flag names");
  bench->add_option("--preset", preset, "table1 (feasible) or table2 (infeasible)")
      ->check(CLI::IsMember({"table1", "table2"}));
  bench->add_option("--N", n_dim, "dimension [100]");
  bench->add_option("--I", n_users, "number of users [10]");
  bench->add_option("--K", n_sets, "half-spaces per user [3]");
  bench->add_option("--samples", n_samples, "number of samples [100]");
  bench->add_option("--max-iters", n_iters, "iteration cap [2000]");
  bench->add_option("--regime", regime, "feasible or infeasible [feasible]")
      ->check(CLI::IsMember({"feasible", "infeasible"}));
  bench->add_option("--algorithms", algorithms, "comma list of halpern,km,ism,psm")
      ->capture_default_str();
  bench->add_option("--variants", variants, "comma list of step-size variants i,ii")
      ->capture_default_str();
  bench->add_option("--seed", seed, "root seed (default: $FIXPROX_SEED, else 0)");
  bench->add_option("--stop-f-tol", stop_f_tol, "threshold for |F_{n-1} - F_n|")
      ->capture_default_str();
  bench->add_option("--stop-d-tol", stop_d_tol, "threshold for |D_{n-1} - D_n|")
      ->capture_default_str();
  bench->add_option("--jobs", jobs, "worker threads over samples")->capture_default_str();
  bench->add_option("--out", bench_out, "output path (default: stdout)");
  bench->add_option("--format", format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  bench->add_option("--dump-instances", dump_dir,
                    "write one instance file per sample (with x0 and series) into this directory");
  bench->add_flag("--no-timing", no_timing, "print NA instead of wall times");

  // run
  auto* run_cmd = app.add_subcommand("run", "Run one algorithm on an instance file");
  std::string instance_path;
  std::string algorithm = "km";
  detail::ScheduleFlags run_sched;
  std::optional<std::uint64_t> x0_seed;
  std::size_t run_iters = 2000;
  std::optional<std::uint64_t> shuffle_seed;
  bool record_iterates = false;
  bool monitor = false;
  bool run_no_timing = false;
  bool unchecked = false;
  std::string run_out;
  run_cmd->add_option("--instance", instance_path, "instance JSON file")->required();
  run_cmd->add_option("--algorithm", algorithm, "halpern, km, ism or psm")
      ->check(CLI::IsMember({"halpern", "km", "ism", "psm"}))
      ->capture_default_str();
  detail::add_schedule_flags(run_cmd, run_sched);
  run_cmd->add_option("--x0-seed", x0_seed,
                      "draw x0 uniform in [-1,1]^N from this seed (default: x0 stored in the file)");
  run_cmd->add_option("--max-iters", run_iters, "iteration count")->capture_default_str();
  run_cmd->add_option("--shuffle-seed", shuffle_seed,
                      "visit users in a fresh random order each iteration");
  run_cmd->add_flag("--record-iterates", record_iterates, "store every outer iterate");
  run_cmd->add_flag("--monitor", monitor,
                    "record inequality gaps against the origin as reference point");
  run_cmd->add_flag("--no-timing", run_no_timing, "omit wall times from the trace");
  run_cmd->add_flag("--unchecked-schedules", unchecked,
                    "skip schedule validation (degenerate-sequence experiments)");
  run_cmd->add_option("--out", run_out, "output path (default: stdout)");

  // validate-schedule
  auto* validate = app.add_subcommand("validate-schedule", "Check step sizes against the "
                                                           "sufficient convergence conditions");
  std::string mode = "km";
  detail::ScheduleFlags val_sched;
  validate->add_option("--mode", mode, "halpern or km")
      ->check(CLI::IsMember({"halpern", "km"}))
      ->capture_default_str();
  detail::add_schedule_flags(validate, val_sched);

  // oracle
  auto* oracle = app.add_subcommand("oracle", "Brute-force grid solve of a small instance");
  std::string oracle_instance;
  double grid_lo = -1.0;
  double grid_hi = 1.0;
  double grid_step = 1e-3;
  std::string oracle_out;
  oracle->add_option("--instance", oracle_instance, "instance JSON file (N <= 3)")->required();
  oracle->add_option("--lo", grid_lo, "lower grid bound for every coordinate")
      ->capture_default_str();
  oracle->add_option("--hi", grid_hi, "upper grid bound for every coordinate")
      ->capture_default_str();
  oracle->add_option("--step", grid_step, "grid step")->capture_default_str();
  oracle->add_option("--out", oracle_out, "output path (default: stdout)");

  try {
    // Expand `bench --config FILE` into leading arguments so explicit flags win.
    std::vector<std::string> expanded;
    for (std::size_t k = 0; k < args.size(); ++k) {
      const std::string& a = args[k];
      std::string path;
      if (a == "--config" && k + 1 < args.size()) {
        path = args[++k];
      } else if (a.rfind("--config=", 0) == 0) {
        path = a.substr(9);
      } else {
        expanded.push_back(a);
        continue;
      }
      std::vector<std::string> from_file;
      for (const auto& [key, value] : read_config_file(path)) {
        CLI::Option* opt = nullptr;
        try {
          opt = bench->get_option("--" + key);
        } catch (const CLI::OptionNotFound&) {
          throw UsageError("config file: unknown key '" + key + "'");
        }
        if (opt->get_expected_min() == 0) {
          if (value == "true" || value == "1") from_file.push_back("--" + key);
        } else {
          from_file.push_back("--" + key);
          from_file.push_back(value);
        }
      }
      auto pos = std::find(expanded.begin(), expanded.end(), "bench");
      if (pos == expanded.end()) throw UsageError("--config is only valid for bench");
      expanded.insert(pos + 1, from_file.begin(), from_file.end());
    }
    std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*bench) {
      BenchConfig cfg = preset == "table2" ? preset_table2(0) : preset_table1(0);
      cfg.seed = seed ? *seed : detail::default_seed();
      if (n_dim) cfg.dim = *n_dim;
      if (n_users) cfg.users = *n_users;
      if (n_sets) cfg.sets = *n_sets;
      if (n_samples) cfg.samples = *n_samples;
      if (n_iters) cfg.max_iters = *n_iters;
      if (regime) cfg.regime = parse_regime(*regime);
      cfg.stop_f_tol = stop_f_tol;
      cfg.stop_d_tol = stop_d_tol;
      cfg.jobs = jobs;
      cfg.algorithms.clear();
      for (const auto& a : detail::split_list(algorithms)) {
        for (const auto& v : detail::split_list(variants)) {
          cfg.algorithms.push_back(standard_variant(parse_algorithm(a), v));
        }
      }
      const BenchReport report = run_benchmark(cfg);
      if (!dump_dir.empty()) {
        std::filesystem::create_directories(dump_dir);
        for (std::size_t s = 0; s < cfg.samples; ++s) {
          InstanceFile f{generate_instance(cfg, s), initial_point(cfg, s), cfg.regime, cfg.seed,
                         s, json::array()};
          for (std::size_t a = 0; a < cfg.algorithms.size(); ++a) {
            json r = to_json(cfg.algorithms[a]);
            r["max_iters"] = cfg.max_iters;
            r["objective"] = report.samples[s][a].objective;
            r["residual"] = report.samples[s][a].residual;
            f.runs.push_back(std::move(r));
          }
          std::ostringstream name;
          name << "sample_" << std::setw(4) << std::setfill('0') << s << ".json";
          write_text_file((std::filesystem::path(dump_dir) / name.str()).string(),
                          to_json(f).dump() + "\n");
        }
      }
      const std::string text = format == "json" ? report_json(report, !no_timing).dump(2) + "\n"
                                                : report_csv(report, !no_timing);
      detail::emit(text, bench_out, out);
      return kExitOk;
    }

    if (*run_cmd) {
      const InstanceFile f = instance_from_json(read_json_file(instance_path));
      const Algorithm algo = parse_algorithm(algorithm);
      const PowerLaw gamma{run_sched.gamma_scale, run_sched.gamma_exp};
      const StepSequence alpha = detail::alpha_from_flags(run_sched, algo == Algorithm::halpern);
      Vector x0;
      if (x0_seed) {
        RandomSource rng(*x0_seed);
        x0 = sample_uniform(rng, f.problem.dim(), -1.0, 1.0);
      } else if (f.x0) {
        x0 = *f.x0;
      } else {
        throw UsageError("instance has no x0; pass --x0-seed");
      }
      SolverOptions opts;
      opts.max_iters = run_iters;
      opts.record_trace = record_iterates;
      opts.monitor_inequalities = monitor;
      if (monitor) opts.reference_point = Vector(f.problem.dim());
      if (shuffle_seed) opts.user_order = ShuffledPerIteration{*shuffle_seed};
      opts.unchecked_schedules = unchecked;
      const RunTrace trace = run_algorithm(algo, f.problem, gamma, alpha, x0, opts);
      json j = to_json(trace, !run_no_timing);
      j["config"] = {{"algorithm", algorithm},
                     {"gamma", to_json(StepSequence{gamma})},
                     {"alpha", to_json(alpha)},
                     {"max_iters", run_iters},
                     {"x0", to_json(x0)},
                     {"instance", instance_path}};
      detail::emit(j.dump() + "\n", run_out, out);
      return kExitOk;
    }

    if (*validate) {
      const bool halpern = mode == "halpern";
      const PowerLaw gamma{val_sched.gamma_scale, val_sched.gamma_exp};
      const SchedulePair pair{gamma, detail::alpha_from_flags(val_sched, halpern),
                              halpern ? ScheduleMode::halpern : ScheduleMode::km};
      const ValidationResult r = pair.validate();
      if (r) {
        out << "valid\n";
        return kExitOk;
      }
      out << "invalid\n";
      for (const auto& v : r.violations) out << "  " << v << '\n';
      return kExitUsage;
    }

    if (*oracle) {
      const InstanceFile f = instance_from_json(read_json_file(oracle_instance));
      const std::size_t d = f.problem.dim();
      const OracleResult r =
          oracle_solve(f.problem, Vector(d, grid_lo), Vector(d, grid_hi), grid_step);
      const json j = {{"point", to_json(r.point)}, {"value", r.value}, {"step", grid_step}};
      detail::emit(j.dump() + "\n", oracle_out, out);
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const json::exception& e) {
    err << "error: malformed input: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericFailure& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitUsage;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int k = 1; k < argc; ++k) args.emplace_back(argv[k]);
  return run(args, out, err);
}

}  // namespace fixprox::cli

#endif  // FIXPROX_CLI_HPP
