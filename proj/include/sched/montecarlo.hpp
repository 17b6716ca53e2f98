#pragma once

// Seeded episode simulator and statistics engine. Every policy in an
// experiment consumes the same gain sequences (common random numbers), and
// episode i always draws from stream (master_seed, i), so results are
// reproducible and independent of worker count or scheduling.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sched/channel.hpp"
#include "sched/policies.hpp"

namespace sched {

struct ExperimentConfig {
  FadingModel model;               // validated
  MonomialCost cost;
  int horizon = 1;
  double budget = 0.0;             // bits (primal policies) or energy (dual)
  std::vector<PolicySpec> policies;
  std::vector<std::string> labels;  // optional; defaults to the kind names
  long long episodes = 1;
  std::uint64_t master_seed = 0;
};

struct PolicyStats {
  std::string label;
  PolicyKind kind = PolicyKind::EqualBit;
  double mean = 0.0;
  double std_error = 0.0;
  double min = 0.0;
  double max = 0.0;
  long long episodes = 0;
  // beta^n * xi_{n,T} for the causal primal policy, (zeta_{n,T} * E)^{1/n}
  // for the causal dual one; absent for the rest.
  std::optional<double> closed_form_prediction;
};

struct McSummary {
  bool primal = true;   // direction shared by all policies in the experiment
  double order = 0.0;
  int horizon = 0;
  double budget = 0.0;
  long long episodes = 0;
  std::uint64_t master_seed = 0;
  std::vector<PolicyStats> policies;

  nlohmann::json to_json() const;
};

struct CompareReport {
  struct Pair {
    std::size_t first = 0;   // indices into McSummary::policies
    std::size_t second = 0;
    double diff = 0.0;
    double combined_se = 0.0;
    bool indistinguishable = false;
  };

  std::vector<std::size_t> ranking;  // best first
  std::vector<Pair> pairs;           // every unordered pair

  nlohmann::json to_json(const McSummary& summary) const;
  std::string to_text(const McSummary& summary) const;
};

// Runs one policy over one gain sequence g_T..g_1, stepping t = T..1 and
// shrinking the remaining budget by each allocation.
EpisodeTrace run_episode(const PolicySpec& spec, const std::vector<double>& gains,
                         double budget, const MonomialCost& cost);

// Runs every policy on every episode. If episode_totals is non-null it
// receives one row per policy with the per-episode totals (in episode
// order). threads > 1 parallelizes over fixed-size episode chunks; the
// merge happens in chunk order, so the summary is bit-identical for any
// thread count.
McSummary run_experiment(const ExperimentConfig& cfg, int threads = 1,
                         std::vector<std::vector<double>>* episode_totals = nullptr);

// Orders policies best-first (lowest mean energy for primal experiments,
// highest mean bits for dual ones) and flags pairs closer than two combined
// standard errors as statistically indistinguishable.
CompareReport compare_report(const McSummary& summary);

}  // namespace sched
