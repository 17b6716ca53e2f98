#pragma once

// Backward recursions for the statistical constants behind the optimal
// schedulers: xi (primal, expected unit-bit energy over t slots) and zeta
// (dual). The recursion state is kept as the (n-1)-th root oriented to grow
// like t — eta_state(t) = (1/xi_t)^{1/(n-1)} respectively zeta_t^{1/(n-1)} —
// because xi itself underflows like t^{-(n-1)} and the inner powers overflow
// once n reaches a few tens.

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sched/channel.hpp"
#include "sched/errors.hpp"
#include "sched/quadrature.hpp"

namespace sched {

// Monomial order n of the slot cost b^n/g. Orders n <= 1 are rejected: the
// n = 1 problem degenerates to a linear program with a different solution
// structure, and n < 1 is not convex.
class MonomialCost {
 public:
  explicit MonomialCost(double order);

  double order() const { return n_; }

  // g^{1/(n-1)}, the opportunism weight of a gain; computed as
  // exp(ln g / (n-1)) so it stays stable for n near 1 and extreme gains.
  double gain_weight(double g) const;

 private:
  double n_;
};

enum class TableKind { PrimalXi, DualZeta };

const char* to_string(TableKind kind);

class ThresholdTable {
 public:
  ThresholdTable(TableKind kind, double order, std::vector<double> values,
                 std::vector<double> eta_state);

  TableKind kind() const { return kind_; }
  double order() const { return n_; }
  int horizon() const { return static_cast<int>(values_.size()); }

  // xi_{n,t} or zeta_{n,t}, t = 1..T. May be subnormal/0 (primal) or inf
  // (dual) for extreme n; the eta_state representation stays finite.
  double value(int t) const;

  // Recursion state, t = 1..T: (1/xi_t)^{1/(n-1)} for primal tables,
  // zeta_t^{1/(n-1)} for dual ones.
  double eta_state(int t) const;

  // Deferral weight used by the slot-t policy, t = 2..T: eta_{n,t} =
  // (1/xi_{n,t-1})^{1/(n-1)} for primal, zeta_{n,t-1}^{1/(n-1)} for dual.
  double eta(int t) const;

  nlohmann::json to_json() const;
  static ThresholdTable from_json(const nlohmann::json& doc);

  // Columns (t, value, eta); eta is empty on the t = 1 row. 17 significant
  // digits, so a read-back reproduces the table.
  void write_csv(const std::filesystem::path& path) const;
  static ThresholdTable read_csv(const std::filesystem::path& path);

 private:
  void check_t(int t, int lowest) const;

  TableKind kind_;
  double n_;
  std::vector<double> values_;
  std::vector<double> eta_state_;
};

inline constexpr int kMaxHorizon = 10000;  // cost is linear in T quadrature calls

// values[1] = E[1/g]; values[t] = E[(g^{1/(n-1)} + (1/values[t-1])^{1/(n-1)})^{-(n-1)}].
ThresholdTable xi_table(const FadingModel& model, const MonomialCost& cost, int horizon,
                        const QuadratureConfig& cfg = {});

// values[1] = (E[g^{1/n}])^n;
// values[t] = (E[(g^{1/(n-1)} + values[t-1]^{1/(n-1)})^{(n-1)/n}])^n.
ThresholdTable zeta_table(const FadingModel& model, const MonomialCost& cost, int horizon,
                          const QuadratureConfig& cfg = {});

// Expected energy to deliver beta bits in t slots under the optimal causal
// policy: beta^n * xi_{n,t}.
double expected_primal_cost(double beta, const MonomialCost& cost, const ThresholdTable& table,
                            int t);

// Relative deviation of (1/xi_{n,t})^{1/(n-1)} from its large-n limit t.
double limit_gap(const ThresholdTable& table, int t);

}  // namespace sched
