#include "sched/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <utility>

#include <nlohmann/json.hpp>

namespace sched {

namespace {

struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

double policy_allocation(const PolicySpec& spec, double remaining, int t, double gain) {
  switch (spec.kind) {
    case PolicyKind::CausalPrimal:
      return causal_primal_bits(QueueState{remaining, t}, gain, spec);
    case PolicyKind::CausalDual:
      return causal_dual_energy(EnergyState{remaining, t}, gain, spec);
    case PolicyKind::EqualBit:
      return equal_bit(QueueState{remaining, t});
    case PolicyKind::DeadlineFlush:
      return t == 1 ? remaining : 0.0;
    default:
      throw std::logic_error("policy_allocation: non-causal kind");
  }
}

}  // namespace

EpisodeTrace run_episode(const PolicySpec& spec, const std::vector<double>& gains,
                         double budget, const MonomialCost& cost) {
  if (gains.empty()) throw EmptyHorizon("run_episode: no slots");
  if (!std::isfinite(budget) || budget < 0.0) {
    throw std::invalid_argument("run_episode: budget must be finite and >= 0");
  }
  const int horizon = static_cast<int>(gains.size());
  const bool primal = is_primal(spec.kind);

  EpisodeTrace trace;
  trace.gains = gains;
  trace.allocations.resize(gains.size());
  trace.per_slot_cost.resize(gains.size());

  if (spec.kind == PolicyKind::NonCausalPrimal || spec.kind == PolicyKind::NonCausalDual) {
    trace.allocations = primal ? noncausal_primal(budget, gains, cost)
                               : noncausal_dual(budget, gains, cost);
  } else {
    double remaining = budget;
    for (int k = 0; k < horizon; ++k) {
      const int t = horizon - k;  // slots left, counting down to the deadline
      const double a = policy_allocation(spec, remaining, t, gains[static_cast<std::size_t>(k)]);
      trace.allocations[static_cast<std::size_t>(k)] = a;
      remaining -= a;
    }
  }

  double total = 0.0;
  for (std::size_t k = 0; k < gains.size(); ++k) {
    const double c = primal ? slot_energy(trace.allocations[k], gains[k], cost)
                            : slot_bits(trace.allocations[k], gains[k], cost);
    trace.per_slot_cost[k] = c;
    total += c;
  }
  trace.total = total;
  return trace;
}

namespace {

void check_config(const ExperimentConfig& cfg) {
  if (!cfg.model.validated()) throw std::invalid_argument("experiment model must be validated");
  if (cfg.horizon < 1 || cfg.horizon > kMaxHorizon) {
    throw std::invalid_argument("experiment horizon must be in 1..10000");
  }
  if (cfg.episodes < 1) throw std::invalid_argument("experiment needs episodes >= 1");
  if (!std::isfinite(cfg.budget) || cfg.budget < 0.0) {
    throw std::invalid_argument("experiment budget must be finite and >= 0");
  }
  if (cfg.policies.empty()) throw std::invalid_argument("experiment needs at least one policy");
  if (!cfg.labels.empty() && cfg.labels.size() != cfg.policies.size()) {
    throw std::invalid_argument("labels must match policies one-to-one");
  }
  const bool primal = is_primal(cfg.policies.front().kind);
  for (const PolicySpec& spec : cfg.policies) {
    if (is_primal(spec.kind) != primal) {
      throw TableMismatch(
          "an experiment cannot mix bit-budget and energy-budget policies: the "
          "realized totals are not comparable");
    }
    if (spec.cost.order() != cfg.cost.order()) {
      std::ostringstream msg;
      msg << "policy order n=" << spec.cost.order() << " does not match experiment n="
          << cfg.cost.order();
      throw TableMismatch(msg.str());
    }
    if (spec.table && spec.table->horizon() < cfg.horizon) {
      std::ostringstream msg;
      msg << "table horizon " << spec.table->horizon() << " shorter than experiment horizon "
          << cfg.horizon;
      throw TableMismatch(msg.str());
    }
  }
}

struct ChunkPartial {
  std::vector<KahanSum> shifted_sum;     // per policy: sum of (x - ref)
  std::vector<KahanSum> shifted_sq_sum;  // per policy: sum of (x - ref)^2
  std::vector<double> min_total;
  std::vector<double> max_total;
};

}  // namespace

McSummary run_experiment(const ExperimentConfig& cfg, int threads,
                         std::vector<std::vector<double>>* episode_totals) {
  check_config(cfg);
  const std::size_t policy_count = cfg.policies.size();
  const long long episodes = cfg.episodes;

  // Shift reference from episode 0 so the squared accumulator does not lose
  // the variance to cancellation on long runs.
  std::vector<double> ref(policy_count);
  {
    const std::vector<double> gains =
        sample(cfg.model, SeededStream{cfg.master_seed, 0}, static_cast<std::size_t>(cfg.horizon));
    for (std::size_t p = 0; p < policy_count; ++p) {
      ref[p] = run_episode(cfg.policies[p], gains, cfg.budget, cfg.cost).total;
    }
  }

  if (episode_totals) {
    episode_totals->assign(policy_count, std::vector<double>(static_cast<std::size_t>(episodes)));
  }

  constexpr long long kChunk = 4096;  // fixed, so results do not depend on threads
  const long long chunk_count = (episodes + kChunk - 1) / kChunk;
  std::vector<ChunkPartial> partials(static_cast<std::size_t>(chunk_count));

  std::atomic<long long> next_chunk{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&]() {
    try {
      for (;;) {
        const long long chunk = next_chunk.fetch_add(1);
        if (chunk >= chunk_count) return;
        ChunkPartial partial;
        partial.shifted_sum.resize(policy_count);
        partial.shifted_sq_sum.resize(policy_count);
        partial.min_total.assign(policy_count, std::numeric_limits<double>::infinity());
        partial.max_total.assign(policy_count, -std::numeric_limits<double>::infinity());
        const long long begin = chunk * kChunk;
        const long long end = std::min(begin + kChunk, episodes);
        for (long long e = begin; e < end; ++e) {
          const std::vector<double> gains =
              sample(cfg.model, SeededStream{cfg.master_seed, static_cast<std::uint64_t>(e)},
                     static_cast<std::size_t>(cfg.horizon));
          for (std::size_t p = 0; p < policy_count; ++p) {
            const double total = run_episode(cfg.policies[p], gains, cfg.budget, cfg.cost).total;
            const double d = total - ref[p];
            partial.shifted_sum[p].add(d);
            partial.shifted_sq_sum[p].add(d * d);
            partial.min_total[p] = std::min(partial.min_total[p], total);
            partial.max_total[p] = std::max(partial.max_total[p], total);
            if (episode_totals) (*episode_totals)[p][static_cast<std::size_t>(e)] = total;
          }
        }
        partials[static_cast<std::size_t>(chunk)] = std::move(partial);
      }
    } catch (...) {
      std::scoped_lock lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };

  const int worker_count =
      std::max(1, static_cast<int>(std::min<long long>(threads, chunk_count)));
  if (worker_count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(worker_count));
    for (int i = 0; i < worker_count; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  McSummary summary;
  summary.primal = is_primal(cfg.policies.front().kind);
  summary.order = cfg.cost.order();
  summary.horizon = cfg.horizon;
  summary.budget = cfg.budget;
  summary.episodes = episodes;
  summary.master_seed = cfg.master_seed;
  summary.policies.resize(policy_count);

  for (std::size_t p = 0; p < policy_count; ++p) {
    KahanSum sum;
    KahanSum sq_sum;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const ChunkPartial& partial : partials) {  // merge in episode-index order
      sum.add(partial.shifted_sum[p].sum);
      sq_sum.add(partial.shifted_sq_sum[p].sum);
      lo = std::min(lo, partial.min_total[p]);
      hi = std::max(hi, partial.max_total[p]);
    }
    const double count = static_cast<double>(episodes);
    const double mean = ref[p] + sum.sum / count;
    double variance = 0.0;
    if (episodes > 1) {
      variance = std::max(0.0, (sq_sum.sum - sum.sum * sum.sum / count) / (count - 1.0));
    }

    PolicyStats& stats = summary.policies[p];
    stats.label = cfg.labels.empty() ? to_string(cfg.policies[p].kind) : cfg.labels[p];
    stats.kind = cfg.policies[p].kind;
    stats.mean = mean;
    stats.std_error = std::sqrt(variance / count);
    stats.min = lo;
    stats.max = hi;
    stats.episodes = episodes;

    const PolicySpec& spec = cfg.policies[p];
    if (spec.kind == PolicyKind::CausalPrimal && spec.table) {
      stats.closed_form_prediction =
          expected_primal_cost(cfg.budget, cfg.cost, *spec.table, cfg.horizon);
    } else if (spec.kind == PolicyKind::CausalDual && spec.table && cfg.budget > 0.0) {
      // (zeta_{n,T} * E)^{1/n}, assembled in log space from the table's
      // stable representation.
      const double n = cfg.cost.order();
      const double log_zeta = (n - 1.0) * std::log(spec.table->eta_state(cfg.horizon));
      stats.closed_form_prediction = std::exp((log_zeta + std::log(cfg.budget)) / n);
    }
  }
  return summary;
}

CompareReport compare_report(const McSummary& summary) {
  if (summary.policies.empty()) {
    throw std::invalid_argument("compare_report: empty summary");
  }
  CompareReport report;
  report.ranking.resize(summary.policies.size());
  for (std::size_t i = 0; i < report.ranking.size(); ++i) report.ranking[i] = i;
  std::stable_sort(report.ranking.begin(), report.ranking.end(),
                   [&](std::size_t a, std::size_t b) {
                     return summary.primal
                                ? summary.policies[a].mean < summary.policies[b].mean
                                : summary.policies[a].mean > summary.policies[b].mean;
                   });
  for (std::size_t i = 0; i < summary.policies.size(); ++i) {
    for (std::size_t j = i + 1; j < summary.policies.size(); ++j) {
      CompareReport::Pair pair;
      pair.first = i;
      pair.second = j;
      pair.diff = std::abs(summary.policies[i].mean - summary.policies[j].mean);
      pair.combined_se = std::hypot(summary.policies[i].std_error,
                                    summary.policies[j].std_error);
      pair.indistinguishable = pair.diff <= 2.0 * pair.combined_se;
      report.pairs.push_back(pair);
    }
  }
  return report;
}

nlohmann::json McSummary::to_json() const {
  nlohmann::json doc;
  doc["direction"] = primal ? "primal" : "dual";
  doc["n"] = order;
  doc["horizon"] = horizon;
  doc["budget"] = budget;
  doc["episodes"] = episodes;
  doc["master_seed"] = master_seed;
  nlohmann::json list = nlohmann::json::array();
  for (const PolicyStats& p : policies) {
    nlohmann::json entry;
    entry["label"] = p.label;
    entry["kind"] = to_string(p.kind);
    entry["mean"] = p.mean;
    entry["std_error"] = p.std_error;
    entry["min"] = p.min;
    entry["max"] = p.max;
    entry["episodes"] = p.episodes;
    if (p.closed_form_prediction) entry["closed_form_prediction"] = *p.closed_form_prediction;
    list.push_back(std::move(entry));
  }
  doc["policies"] = std::move(list);
  return doc;
}

nlohmann::json CompareReport::to_json(const McSummary& summary) const {
  nlohmann::json doc;
  nlohmann::json order = nlohmann::json::array();
  for (std::size_t idx : ranking) order.push_back(summary.policies[idx].label);
  doc["ranking"] = std::move(order);
  nlohmann::json pair_list = nlohmann::json::array();
  for (const Pair& p : pairs) {
    nlohmann::json entry;
    entry["first"] = summary.policies[p.first].label;
    entry["second"] = summary.policies[p.second].label;
    entry["diff"] = p.diff;
    entry["combined_se"] = p.combined_se;
    entry["indistinguishable"] = p.indistinguishable;
    pair_list.push_back(std::move(entry));
  }
  doc["pairs"] = std::move(pair_list);
  return doc;
}

std::string CompareReport::to_text(const McSummary& summary) const {
  std::ostringstream out;
  out << "ranking (" << (summary.primal ? "lower mean energy is better"
                                        : "higher mean bits is better")
      << "):\n";
  for (std::size_t r = 0; r < ranking.size(); ++r) {
    const PolicyStats& p = summary.policies[ranking[r]];
    out << "  " << (r + 1) << ". " << p.label << "  mean=" << p.mean
        << "  se=" << p.std_error << '\n';
  }
  for (const Pair& p : pairs) {
    if (p.indistinguishable) {
      out << "  ~ " << summary.policies[p.first].label << " and "
          << summary.policies[p.second].label
          << " are statistically indistinguishable (diff " << p.diff << " <= 2*"
          << p.combined_se << ")\n";
    }
  }
  return out.str();
}

}  // namespace sched
