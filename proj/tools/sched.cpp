// tools/sched.cpp
//
// Command-line front end for the finite-horizon scheduling library.
//
//   sched thresholds --config model.json --n 2,2.67,5 --horizon 20 \
//                    --kind xi --out tables.csv [--table-dir DIR]
//   sched simulate   --config experiment.json --out OUTDIR \
//                    [--episodes N] [--seed S] [--traces] [--threads K]
//   sched verify     [--suite thresholds|policy|dp|all] [--n LIST]
//                    [--grid N] [--draws N] [--tol name=value ...]
//                    [--out report.json]
//   sched figure     --which eta|xi|policy-vs-t --out fig.csv
//                    [--config model.json] [--n LIST] [--horizon T]
//                    [--episodes N] [--seed S]
//
// Experiment config document:
//   {
//     "model":  {"kind": "truncated_exponential", "threshold": 0.001, "rate": 1.0},
//     "cost":   {"n": 2.0},
//     "horizon": 2,
//     "budget":  1.0,
//     "policies": [{"kind": "causal_primal"}, {"kind": "equal_bit"}],
//     "mc":     {"episodes": 100000, "master_seed": 7},
//     "quadrature": {"rel_tol": 1e-10, "abs_tol": 1e-14, "max_subdivisions": 65536}
//   }
// Causal policies may name a "table" file (JSON or CSV); without one the
// table is built from (model, cost, horizon). SCHED_SEED supplies the
// default master seed.
//
// Exit codes: 0 success, 1 verification failure, 2 configuration error,
// 3 numerical non-convergence, 4 incompatible policy/table.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sched/channel.hpp"
#include "sched/montecarlo.hpp"
#include "sched/oracle.hpp"
#include "sched/policies.hpp"
#include "sched/thresholds.hpp"
#include "sched/verify.hpp"
#include "sched/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNotConverged = 3;
constexpr int kExitMismatch = 4;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json load_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

sched::QuadratureConfig quadrature_from_json(const json& doc) {
  sched::QuadratureConfig cfg;
  if (doc.contains("rel_tol")) cfg.rel_tol = doc.at("rel_tol").get<double>();
  if (doc.contains("abs_tol")) cfg.abs_tol = doc.at("abs_tol").get<double>();
  if (doc.contains("max_subdivisions")) {
    cfg.max_subdivisions = doc.at("max_subdivisions").get<int>();
  }
  return cfg;
}

// Model configs are either the model document itself or wrapped in
// {"model": ..., "quadrature": ...}.
std::pair<sched::FadingModel, sched::QuadratureConfig> load_model_config(const fs::path& path) {
  const json doc = load_json(path);
  const json& model_doc = doc.contains("model") ? doc.at("model") : doc;
  sched::QuadratureConfig quad;
  if (doc.contains("quadrature")) quad = quadrature_from_json(doc.at("quadrature"));
  return {sched::validate(sched::FadingModel::from_json(model_doc), quad), quad};
}

struct Manifest {
  std::string command;
  json resolved_config;
  std::uint64_t master_seed = 0;
  std::vector<std::string> outputs;
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

  void write(const fs::path& path) const {
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    json doc;
    doc["command"] = command;
    doc["version"] = sched::kVersion;
    doc["master_seed"] = master_seed;
    doc["resolved_config"] = resolved_config;
    doc["outputs"] = outputs;
    doc["duration_seconds"] = seconds;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest " + path.string());
    out << doc.dump(2) << '\n';
  }
};

std::uint64_t default_seed() {
  if (const char* env = std::getenv("SCHED_SEED")) {
    return std::strtoull(env, nullptr, 10);
  }
  return 1;
}

// ---------------------------------------------------------------- thresholds

struct ThresholdsArgs {
  std::string config;
  std::vector<double> orders{2.0};
  int horizon = 20;
  std::string kind = "xi";
  std::string out;
  std::string table_dir;
};

int run_thresholds(const ThresholdsArgs& args) {
  Manifest manifest;
  manifest.command = "thresholds";
  auto [model, quad] = load_model_config(args.config);
  if (args.horizon < 1) throw ConfigError("--horizon must be >= 1");
  if (args.orders.empty()) throw ConfigError("--n needs at least one order");
  if (args.kind != "xi" && args.kind != "zeta") throw ConfigError("--kind must be xi or zeta");

  std::ofstream out(args.out);
  if (!out) throw ConfigError("cannot open " + args.out + " for writing");
  out << "n,t,value,eta\n";
  for (double n : args.orders) {
    const sched::MonomialCost cost(n);
    const sched::ThresholdTable table =
        args.kind == "xi" ? sched::xi_table(model, cost, args.horizon, quad)
                          : sched::zeta_table(model, cost, args.horizon, quad);
    for (int t = 1; t <= args.horizon; ++t) {
      out << g17(n) << ',' << t << ',' << g17(table.value(t)) << ',';
      if (t >= 2) out << g17(table.eta(t));
      out << '\n';
    }
    if (!args.table_dir.empty()) {
      fs::create_directories(args.table_dir);
      char short_n[32];
      std::snprintf(short_n, sizeof short_n, "%g", n);
      const fs::path path = fs::path(args.table_dir) /
                            ("table_" + args.kind + "_n" + short_n + ".json");
      std::ofstream table_out(path);
      table_out << table.to_json().dump(2) << '\n';
      manifest.outputs.push_back(path.string());
    }
  }
  manifest.outputs.insert(manifest.outputs.begin(), args.out);
  manifest.resolved_config = {{"config", args.config}, {"n", args.orders},
                              {"horizon", args.horizon}, {"kind", args.kind}};
  manifest.write(args.out + ".manifest.json");
  return kExitOk;
}

// ------------------------------------------------------------------ simulate

struct SimulateArgs {
  std::string config;
  std::string out_dir;
  long long episodes_override = -1;
  std::optional<std::uint64_t> seed_override;
  bool traces = false;
  int threads = 1;
};

sched::ExperimentConfig experiment_from_json(const json& doc, const fs::path& base_dir,
                                             sched::QuadratureConfig* quad_out) {
  sched::QuadratureConfig quad;
  if (doc.contains("quadrature")) quad = quadrature_from_json(doc.at("quadrature"));
  if (quad_out) *quad_out = quad;

  sched::FadingModel model =
      sched::validate(sched::FadingModel::from_json(doc.at("model")), quad);
  const sched::MonomialCost cost(doc.at("cost").at("n").get<double>());
  const int horizon = doc.at("horizon").get<int>();
  const double budget = doc.at("budget").get<double>();

  std::vector<sched::PolicySpec> policies;
  std::vector<std::string> labels;
  for (const json& pdoc : doc.at("policies")) {
    const sched::PolicyKind kind =
        sched::policy_kind_from_string(pdoc.at("kind").get<std::string>());
    std::optional<sched::ThresholdTable> table;
    if (pdoc.contains("table")) {
      // Reuse the file-loading path of the library.
      policies.push_back(sched::PolicySpec::from_json(pdoc, base_dir));
      labels.push_back(pdoc.value("label", std::string(sched::to_string(kind))));
      continue;
    }
    if (const auto need = sched::required_table(kind)) {
      table = *need == sched::TableKind::PrimalXi
                  ? sched::xi_table(model, cost, horizon, quad)
                  : sched::zeta_table(model, cost, horizon, quad);
    }
    policies.emplace_back(kind, cost, std::move(table));
    labels.push_back(pdoc.value("label", std::string(sched::to_string(kind))));
  }

  sched::ExperimentConfig cfg{std::move(model), cost,  horizon, budget,
                              std::move(policies),     std::move(labels),
                              1,                       default_seed()};
  if (doc.contains("mc")) {
    const json& mc = doc.at("mc");
    if (mc.contains("episodes")) cfg.episodes = mc.at("episodes").get<long long>();
    if (mc.contains("master_seed")) cfg.master_seed = mc.at("master_seed").get<std::uint64_t>();
  }
  return cfg;
}

int run_simulate(const SimulateArgs& args) {
  Manifest manifest;
  manifest.command = "simulate";
  const json doc = load_json(args.config);
  sched::QuadratureConfig quad;
  sched::ExperimentConfig cfg =
      experiment_from_json(doc, fs::path(args.config).parent_path(), &quad);
  if (args.episodes_override >= 0) cfg.episodes = args.episodes_override;
  if (args.seed_override) cfg.master_seed = *args.seed_override;
  if (cfg.episodes < 1) throw ConfigError("episodes must be >= 1");
  manifest.master_seed = cfg.master_seed;

  fs::create_directories(args.out_dir);

  std::vector<std::vector<double>> totals;
  sched::McSummary summary =
      sched::run_experiment(cfg, args.threads, args.traces ? &totals : nullptr);
  const sched::CompareReport report = sched::compare_report(summary);

  json summary_doc = summary.to_json();
  summary_doc["ranking"] = report.to_json(summary);
  const fs::path summary_path = fs::path(args.out_dir) / "summary.json";
  {
    std::ofstream out(summary_path);
    if (!out) throw std::runtime_error("cannot write " + summary_path.string());
    out << summary_doc.dump(2) << '\n';
  }
  manifest.outputs.push_back(summary_path.string());

  if (args.traces) {
    const fs::path trace_path = fs::path(args.out_dir) / "episodes.csv";
    std::ofstream out(trace_path);
    out << "episode,policy,total\n";
    for (std::size_t e = 0; e < totals.front().size(); ++e) {
      for (std::size_t p = 0; p < totals.size(); ++p) {
        out << e << ',' << summary.policies[p].label << ',' << g17(totals[p][e]) << '\n';
      }
    }
    manifest.outputs.push_back(trace_path.string());
  }

  std::cout << report.to_text(summary);

  manifest.resolved_config = doc;
  manifest.resolved_config["mc"]["episodes"] = cfg.episodes;
  manifest.resolved_config["mc"]["master_seed"] = cfg.master_seed;
  manifest.write(fs::path(args.out_dir) / "manifest.json");
  return kExitOk;
}

// -------------------------------------------------------------------- verify

struct VerifyArgs {
  std::string suite = "all";
  std::vector<double> orders;
  std::vector<std::string> tolerances;  // name=value
  int grid = 512;
  int draws = 1000;
  std::uint64_t seed = 0;
  std::string out = "verify_report.json";
};

int run_verify(const VerifyArgs& args) {
  Manifest manifest;
  manifest.command = "verify";
  manifest.master_seed = args.seed;

  sched::verify::ThresholdSuiteOptions threshold_opts;
  sched::verify::PolicySuiteOptions policy_opts;
  sched::verify::DpSuiteOptions dp_opts;
  if (!args.orders.empty()) threshold_opts.orders = args.orders;
  if (args.seed != 0) {
    policy_opts.seed = args.seed;
    dp_opts.seed = args.seed + 1;
  }
  policy_opts.draws = args.draws;
  dp_opts.draws = args.draws;
  dp_opts.grid = args.grid;

  for (const std::string& spec : args.tolerances) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw ConfigError("--tol expects name=value: " + spec);
    const std::string name = spec.substr(0, eq);
    const double value = std::stod(spec.substr(eq + 1));
    if (name == "monotonicity") {
      threshold_opts.monotonicity_margin = value;
    } else if (name == "closed-form") {
      threshold_opts.closed_form_tol = value;
    } else if (name == "limit-gap") {
      threshold_opts.limit_gap_bound = value;
    } else if (name == "stationarity") {
      policy_opts.stationarity_tol = value;
    } else if (name == "identity") {
      policy_opts.identity_tol = value;
    } else if (name == "argmin") {
      dp_opts.argmin_tol = value;
    } else if (name == "value") {
      dp_opts.value_tol = value;
    } else {
      throw ConfigError("unknown tolerance name: " + name);
    }
  }

  std::vector<sched::verify::CheckResult> results;
  auto append = [&](std::vector<sched::verify::CheckResult> batch) {
    results.insert(results.end(), batch.begin(), batch.end());
  };
  if (args.suite == "thresholds" || args.suite == "all") {
    append(sched::verify::run_threshold_suite(threshold_opts));
  }
  if (args.suite == "policy" || args.suite == "all") {
    append(sched::verify::run_policy_suite(policy_opts));
  }
  if (args.suite == "dp" || args.suite == "all") {
    append(sched::verify::run_dp_suite(dp_opts));
  }
  if (results.empty()) throw ConfigError("unknown suite: " + args.suite);

  json report = json::array();
  bool all_pass = true;
  for (const auto& r : results) {
    std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail << '\n';
    report.push_back({{"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
    all_pass = all_pass && r.pass;
  }
  std::cout << (all_pass ? "all checks passed" : "some checks FAILED") << '\n';

  {
    std::ofstream out(args.out);
    if (!out) throw std::runtime_error("cannot write " + args.out);
    out << report.dump(2) << '\n';
  }
  manifest.outputs.push_back(args.out);
  manifest.resolved_config = {{"suite", args.suite}, {"grid", args.grid},
                              {"draws", args.draws}};
  manifest.write(args.out + ".manifest.json");
  return all_pass ? kExitOk : kExitVerifyFailed;
}

// -------------------------------------------------------------------- figure

struct FigureArgs {
  std::string which;
  std::string out;
  std::string config;  // optional model override
  std::vector<double> orders;
  int horizon = 20;
  long long episodes = 10000;
  std::uint64_t seed = 0;
};

int run_figure(const FigureArgs& args) {
  Manifest manifest;
  manifest.command = "figure";
  manifest.master_seed = args.seed;

  sched::QuadratureConfig quad;
  sched::FadingModel model = sched::verify::truncated_exponential_model();
  if (!args.config.empty()) {
    auto [loaded, loaded_quad] = load_model_config(args.config);
    model = std::move(loaded);
    quad = loaded_quad;
  }

  std::ofstream out(args.out);
  if (!out) throw ConfigError("cannot open " + args.out + " for writing");

  if (args.which == "eta" || args.which == "xi") {
    const std::vector<double> orders =
        args.orders.empty() ? std::vector<double>{2.0, 2.67, 5.0, 100.0} : args.orders;
    out << "n,t,value,eta\n";
    for (double n : orders) {
      const sched::ThresholdTable table =
          sched::xi_table(model, sched::MonomialCost(n), args.horizon, quad);
      for (int t = 1; t <= args.horizon; ++t) {
        out << g17(n) << ',' << t << ',' << g17(table.value(t)) << ',';
        if (t >= 2) out << g17(table.eta(t));
        out << '\n';
      }
    }
  } else if (args.which == "policy-vs-t") {
    // Mean share of the remaining bits the causal policy sends per slot.
    const std::vector<double> orders =
        args.orders.empty() ? std::vector<double>{2.67} : args.orders;
    if (args.episodes < 1) throw ConfigError("--episodes must be >= 1");
    out << "n,t,mean_fraction\n";
    for (double n : orders) {
      const sched::MonomialCost cost(n);
      const sched::ThresholdTable table = sched::xi_table(model, cost, args.horizon, quad);
      const sched::PolicySpec spec(sched::PolicyKind::CausalPrimal, cost, table);
      std::vector<double> fraction_sum(static_cast<std::size_t>(args.horizon), 0.0);
      for (long long e = 0; e < args.episodes; ++e) {
        const std::vector<double> gains = sched::sample(
            model, sched::SeededStream{args.seed, static_cast<std::uint64_t>(e)},
            static_cast<std::size_t>(args.horizon));
        double remaining = 1.0;
        for (int k = 0; k < args.horizon; ++k) {
          const int t = args.horizon - k;
          const double b = sched::causal_primal_bits(sched::QueueState{remaining, t},
                                                     gains[static_cast<std::size_t>(k)], spec);
          fraction_sum[static_cast<std::size_t>(k)] += remaining > 0.0 ? b / remaining : 0.0;
          remaining -= b;
        }
      }
      for (int k = 0; k < args.horizon; ++k) {
        const int t = args.horizon - k;
        out << g17(n) << ',' << t << ','
            << g17(fraction_sum[static_cast<std::size_t>(k)] /
                   static_cast<double>(args.episodes))
            << '\n';
      }
    }
  } else {
    throw ConfigError("unknown figure name: " + args.which);
  }

  manifest.outputs.push_back(args.out);
  manifest.resolved_config = {{"which", args.which}, {"n", args.orders},
                              {"horizon", args.horizon}, {"episodes", args.episodes}};
  manifest.write(args.out + ".manifest.json");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-horizon bit/energy scheduling over fading channels"};
  app.require_subcommand(1);
  app.set_version_flag("--version", sched::kVersion);

  ThresholdsArgs thresholds_args;
  CLI::App* thresholds = app.add_subcommand("thresholds", "build threshold tables");
  thresholds->add_option("--config", thresholds_args.config, "model JSON")->required();
  thresholds->add_option("--n", thresholds_args.orders, "monomial orders")->delimiter(',');
  thresholds->add_option("--horizon", thresholds_args.horizon, "deadline T");
  thresholds->add_option("--kind", thresholds_args.kind, "xi or zeta");
  thresholds->add_option("--out", thresholds_args.out, "CSV output")->required();
  thresholds->add_option("--table-dir", thresholds_args.table_dir,
                         "also write per-order table JSON files here");

  SimulateArgs simulate_args;
  CLI::App* simulate = app.add_subcommand("simulate", "run a Monte Carlo experiment");
  simulate->add_option("--config", simulate_args.config, "experiment JSON")->required();
  simulate->add_option("--out", simulate_args.out_dir, "output directory")->required();
  simulate->add_option("--episodes", simulate_args.episodes_override, "episode count override");
  std::uint64_t simulate_seed = 0;
  CLI::Option* simulate_seed_opt =
      simulate->add_option("--seed", simulate_seed, "master seed override");
  simulate->add_flag("--traces", simulate_args.traces, "write per-episode totals CSV");
  simulate->add_option("--threads", simulate_args.threads, "worker threads");

  VerifyArgs verify_args;
  CLI::App* verify = app.add_subcommand("verify", "run the invariant suites");
  verify->add_option("--suite", verify_args.suite, "thresholds|policy|dp|all");
  verify->add_option("--n", verify_args.orders, "threshold suite orders")->delimiter(',');
  verify->add_option("--tol", verify_args.tolerances, "tolerance override name=value");
  verify->add_option("--grid", verify_args.grid, "DP grid resolution");
  verify->add_option("--draws", verify_args.draws, "randomized draw count");
  verify->add_option("--seed", verify_args.seed, "seed for randomized checks");
  verify->add_option("--out", verify_args.out, "report JSON path");

  FigureArgs figure_args;
  CLI::App* figure = app.add_subcommand("figure", "emit plot-ready CSV data");
  figure->add_option("--which", figure_args.which, "eta|xi|policy-vs-t")->required();
  figure->add_option("--out", figure_args.out, "CSV output")->required();
  figure->add_option("--config", figure_args.config, "model JSON (default: truncated exp)");
  figure->add_option("--n", figure_args.orders, "monomial orders")->delimiter(',');
  figure->add_option("--horizon", figure_args.horizon, "deadline T");
  figure->add_option("--episodes", figure_args.episodes, "episodes for policy-vs-t");
  CLI::Option* figure_seed_opt =
      figure->add_option("--seed", figure_args.seed, "seed for policy-vs-t");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*thresholds) return run_thresholds(thresholds_args);
    if (*simulate) {
      if (*simulate_seed_opt) simulate_args.seed_override = simulate_seed;
      return run_simulate(simulate_args);
    }
    if (*verify) return run_verify(verify_args);
    if (*figure) {
      if (!*figure_seed_opt) figure_args.seed = default_seed();
      return run_figure(figure_args);
    }
  } catch (const sched::QuadratureNotConverged& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNotConverged;
  } catch (const sched::TableMismatch& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitMismatch;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const sched::InvalidModel& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}
