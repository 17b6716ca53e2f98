#pragma once

// Scheduling policies. Slot indices count down: t = T (first decision) .. 1
// (deadline slot). Causal kinds see only the current gain and consult a
// threshold table; non-causal kinds get the whole gain vector up front.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sched/errors.hpp"
#include "sched/thresholds.hpp"

namespace sched {

// Remaining bits at the start of slot t (t slots left to the deadline).
struct QueueState {
  double beta = 0.0;
  int t = 1;
};

// Remaining energy at the start of slot t.
struct EnergyState {
  double eps = 0.0;
  int t = 1;
};

enum class PolicyKind {
  CausalPrimal,     // optimal energy minimizer under causal gains
  CausalDual,       // optimal bit maximizer under causal gains
  NonCausalPrimal,  // gains known in advance
  NonCausalDual,
  EqualBit,         // beta/t each slot; the large-n limit policy
  DeadlineFlush,    // baseline: do nothing until t=1, then send everything
};

const char* to_string(PolicyKind kind);
PolicyKind policy_kind_from_string(const std::string& name);

// True for policies that allocate bits against a bit budget (energy is the
// realized cost); false for energy-budget (dual) policies.
bool is_primal(PolicyKind kind);

// Whether the policy needs a threshold table, and of which kind.
std::optional<TableKind> required_table(PolicyKind kind);

struct PolicySpec {
  PolicySpec(PolicyKind kind, MonomialCost cost, std::optional<ThresholdTable> table = {});

  // {"kind": ..., "n": ..., "table": <path>}; the table path (JSON or CSV) is
  // resolved relative to base_dir and is required for causal kinds.
  static PolicySpec from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);

  PolicyKind kind;
  MonomialCost cost;
  std::optional<ThresholdTable> table;
};

// One complete run of a policy over a gain sequence g_T..g_1.
// For primal policies, allocations are bits and per_slot_cost is energy;
// for dual policies, allocations are energies and per_slot_cost is bits.
struct EpisodeTrace {
  std::vector<double> gains;
  std::vector<double> allocations;
  std::vector<double> per_slot_cost;
  double total = 0.0;
};

// Slot energy b^n/g for transmitting b bits at gain g.
double slot_energy(double b, double g, const MonomialCost& cost);

// Bits (g*e)^{1/n} bought by energy e at gain g; exact inverse of slot_energy.
double slot_bits(double e, double g, const MonomialCost& cost);

// Optimal causal bit allocation: beta * w / (w + eta_{n,t}) with
// w = g^{1/(n-1)}, and the full remainder at t = 1.
double causal_primal_bits(const QueueState& state, double g, const PolicySpec& spec);

// Optimal causal energy allocation, same ratio form against zeta weights.
double causal_dual_energy(const EnergyState& state, double g, const PolicySpec& spec);

// b_t = B * g_t^{1/(n-1)} / sum_s g_s^{1/(n-1)}; renormalized so the
// allocations sum to the budget exactly.
std::vector<double> noncausal_primal(double budget_bits, const std::vector<double>& gains,
                                     const MonomialCost& cost);

// Identical proportions to noncausal_primal, applied to the energy budget.
std::vector<double> noncausal_dual(double budget_energy, const std::vector<double>& gains,
                                   const MonomialCost& cost);

// beta/t.
double equal_bit(const QueueState& state);

}  // namespace sched
