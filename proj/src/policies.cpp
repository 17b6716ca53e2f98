#include "sched/policies.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <utility>

#include <nlohmann/json.hpp>

namespace sched {

const char* to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::CausalPrimal: return "causal_primal";
    case PolicyKind::CausalDual: return "causal_dual";
    case PolicyKind::NonCausalPrimal: return "noncausal_primal";
    case PolicyKind::NonCausalDual: return "noncausal_dual";
    case PolicyKind::EqualBit: return "equal_bit";
    case PolicyKind::DeadlineFlush: return "deadline_flush";
  }
  return "?";
}

PolicyKind policy_kind_from_string(const std::string& name) {
  if (name == "causal_primal") return PolicyKind::CausalPrimal;
  if (name == "causal_dual") return PolicyKind::CausalDual;
  if (name == "noncausal_primal") return PolicyKind::NonCausalPrimal;
  if (name == "noncausal_dual") return PolicyKind::NonCausalDual;
  if (name == "equal_bit") return PolicyKind::EqualBit;
  if (name == "deadline_flush") return PolicyKind::DeadlineFlush;
  throw std::invalid_argument("unknown policy kind: " + name);
}

bool is_primal(PolicyKind kind) {
  return kind != PolicyKind::CausalDual && kind != PolicyKind::NonCausalDual;
}

std::optional<TableKind> required_table(PolicyKind kind) {
  if (kind == PolicyKind::CausalPrimal) return TableKind::PrimalXi;
  if (kind == PolicyKind::CausalDual) return TableKind::DualZeta;
  return std::nullopt;
}

PolicySpec::PolicySpec(PolicyKind kind_, MonomialCost cost_, std::optional<ThresholdTable> table_)
    : kind(kind_), cost(std::move(cost_)), table(std::move(table_)) {
  const auto need = required_table(kind);
  if (!need) {
    table.reset();  // table-free kinds ignore any table supplied
    return;
  }
  if (!table) {
    throw TableMismatch(std::string(to_string(kind)) + " requires a threshold table");
  }
  if (table->kind() != *need) {
    throw TableMismatch(std::string(to_string(kind)) + " requires a " +
                        to_string(*need) + " table, got " + to_string(table->kind()));
  }
  if (table->order() != cost.order()) {
    std::ostringstream msg;
    msg << "table order n=" << table->order() << " does not match cost n=" << cost.order();
    throw TableMismatch(msg.str());
  }
}

namespace {

void check_state(double amount, int t) {
  if (!std::isfinite(amount) || amount < 0.0) {
    throw std::invalid_argument("remaining budget must be finite and >= 0");
  }
  if (t < 1) throw IndexOutOfHorizon("slot index t must be >= 1");
}

double check_gain(double g) {
  if (!(g > 0.0) || !std::isfinite(g)) throw NonPositiveGain("gain must be finite and > 0");
  return g;
}

// Shared ratio rule for both causal policies: amount * w/(w + deferral).
double causal_split(double amount, int t, double g, const PolicySpec& spec) {
  if (t == 1) return amount;  // deadline: flush regardless of the gain
  if (t > spec.table->horizon()) {
    std::ostringstream msg;
    msg << "slot t=" << t << " beyond table horizon " << spec.table->horizon();
    throw TableMismatch(msg.str());
  }
  const double w = spec.cost.gain_weight(g);
  const double share = w / (w + spec.table->eta(t));
  return std::clamp(amount * share, 0.0, amount);
}

std::vector<double> proportional_split(double budget, const std::vector<double>& gains,
                                       const MonomialCost& cost, const char* what) {
  if (gains.empty()) throw EmptyHorizon(std::string(what) + ": no slots");
  if (!std::isfinite(budget) || budget < 0.0) {
    throw std::invalid_argument(std::string(what) + ": budget must be finite and >= 0");
  }
  std::vector<double> weights(gains.size());
  double weight_sum = 0.0;
  for (std::size_t i = 0; i < gains.size(); ++i) {
    weights[i] = cost.gain_weight(check_gain(gains[i]));
    weight_sum += weights[i];
  }
  std::vector<double> alloc(gains.size());
  double alloc_sum = 0.0;
  std::size_t largest = 0;
  for (std::size_t i = 0; i < gains.size(); ++i) {
    alloc[i] = budget * weights[i] / weight_sum;
    alloc_sum += alloc[i];
    if (alloc[i] > alloc[largest]) largest = i;
  }
  // Fold the rounding residual into the largest share so the sum is exact.
  alloc[largest] += budget - alloc_sum;
  return alloc;
}

}  // namespace

double slot_energy(double b, double g, const MonomialCost& cost) {
  check_gain(g);
  if (!std::isfinite(b) || b < 0.0) throw std::invalid_argument("bits must be finite and >= 0");
  if (b == 0.0) return 0.0;
  return std::pow(b, cost.order()) / g;
}

double slot_bits(double e, double g, const MonomialCost& cost) {
  check_gain(g);
  if (!std::isfinite(e) || e < 0.0) throw std::invalid_argument("energy must be finite and >= 0");
  if (e == 0.0) return 0.0;
  return std::pow(g * e, 1.0 / cost.order());
}

double causal_primal_bits(const QueueState& state, double g, const PolicySpec& spec) {
  if (spec.kind != PolicyKind::CausalPrimal) {
    throw TableMismatch("causal_primal_bits needs a CausalPrimal spec");
  }
  check_state(state.beta, state.t);
  check_gain(g);
  return causal_split(state.beta, state.t, g, spec);
}

double causal_dual_energy(const EnergyState& state, double g, const PolicySpec& spec) {
  if (spec.kind != PolicyKind::CausalDual) {
    throw TableMismatch("causal_dual_energy needs a CausalDual spec");
  }
  check_state(state.eps, state.t);
  check_gain(g);
  return causal_split(state.eps, state.t, g, spec);
}

std::vector<double> noncausal_primal(double budget_bits, const std::vector<double>& gains,
                                     const MonomialCost& cost) {
  return proportional_split(budget_bits, gains, cost, "noncausal_primal");
}

std::vector<double> noncausal_dual(double budget_energy, const std::vector<double>& gains,
                                   const MonomialCost& cost) {
  return proportional_split(budget_energy, gains, cost, "noncausal_dual");
}

double equal_bit(const QueueState& state) {
  check_state(state.beta, state.t);
  return state.beta / static_cast<double>(state.t);
}

PolicySpec PolicySpec::from_json(const nlohmann::json& doc,
                                 const std::filesystem::path& base_dir) {
  const PolicyKind kind = policy_kind_from_string(doc.at("kind").get<std::string>());
  std::optional<ThresholdTable> table;
  if (doc.contains("table")) {
    const std::filesystem::path path =
        base_dir / doc.at("table").get<std::string>();
    if (path.extension() == ".csv") {
      table = ThresholdTable::read_csv(path);
    } else {
      std::ifstream in(path);
      if (!in) throw std::runtime_error("cannot open table file " + path.string());
      table = ThresholdTable::from_json(nlohmann::json::parse(in));
    }
  }
  double order;
  if (doc.contains("n")) {
    order = doc.at("n").get<double>();
  } else if (table) {
    order = table->order();
  } else {
    throw std::invalid_argument("policy spec needs an order n or a table");
  }
  return PolicySpec(kind, MonomialCost(order), std::move(table));
}

}  // namespace sched
