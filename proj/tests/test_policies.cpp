#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <vector>

#include <nlohmann/json.hpp>

#include "sched/channel.hpp"
#include "sched/policies.hpp"

using sched::EnergyState;
using sched::FadingModel;
using sched::MonomialCost;
using sched::PolicyKind;
using sched::PolicySpec;
using sched::QueueState;
using sched::ThresholdTable;
using sched::causal_dual_energy;
using sched::causal_primal_bits;
using sched::equal_bit;
using sched::noncausal_dual;
using sched::noncausal_primal;
using sched::slot_bits;
using sched::slot_energy;
using sched::validate;
using sched::xi_table;
using sched::zeta_table;

namespace {

FadingModel two_atom() { return validate(FadingModel::discrete({{1.0, 0.5}, {4.0, 0.5}})); }

// Independent route to the non-causal optimum: bisection on the Lagrange
// multiplier of  min sum b_t^n/g_t  s.t.  sum b_t = B, where stationarity
// gives b_t = (lambda g_t / n)^{1/(n-1)}.
std::vector<double> noncausal_by_multiplier(double budget, const std::vector<double>& gains,
                                            double n) {
  auto total = [&](double lambda) {
    double sum = 0.0;
    for (double g : gains) sum += std::pow(lambda * g / n, 1.0 / (n - 1.0));
    return sum;
  };
  double lo = 1e-12;
  double hi = 1.0;
  while (total(hi) < budget) hi *= 2.0;
  while (total(lo) > budget) lo *= 0.5;
  for (int iter = 0; iter < 500; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (total(mid) < budget ? lo : hi) = mid;
  }
  std::vector<double> alloc;
  for (double g : gains) alloc.push_back(std::pow(0.5 * (lo + hi) * g / n, 1.0 / (n - 1.0)));
  return alloc;
}

}  // namespace

TEST_SUITE_BEGIN("policies");

TEST_CASE("slot cost maps") {
  const MonomialCost n2(2.0);
  CHECK(slot_energy(0.0, 5.0, n2) == 0.0);
  CHECK(slot_energy(2.0, 4.0, n2) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(slot_energy(2.0, 1.0, MonomialCost(2.67)) ==
        doctest::Approx(6.3642918700393494).epsilon(1e-13));

  CHECK(slot_bits(0.0, 5.0, n2) == 0.0);
  CHECK(slot_bits(1.0, 4.0, n2) == doctest::Approx(2.0).epsilon(1e-15));

  for (double b : {0.1, 1.0, 10.0}) {
    for (double n : {1.5, 2.0, 2.67, 5.0}) {
      const MonomialCost cost(n);
      CHECK(slot_bits(slot_energy(b, 3.7, cost), 3.7, cost) ==
            doctest::Approx(b).epsilon(1e-12));
    }
  }

  CHECK_THROWS_AS(slot_energy(1.0, 0.0, n2), sched::NonPositiveGain);
  CHECK_THROWS_AS(slot_bits(1.0, -2.0, n2), sched::NonPositiveGain);
  CHECK_THROWS_AS(slot_energy(-1.0, 1.0, n2), std::invalid_argument);
}

TEST_CASE("causal primal policy") {
  const MonomialCost cost(2.0);
  const ThresholdTable table = xi_table(two_atom(), cost, 6);
  const PolicySpec spec(PolicyKind::CausalPrimal, cost, table);

  // Deadline flush ignores the gain entirely.
  CHECK(causal_primal_bits(QueueState{7.0, 1}, 0.01, spec) == 7.0);

  // xi_{2,1} = 5/8 so the t=2 split at g=1 is 10/(1 + 8/5) = 10/2.6.
  CHECK(causal_primal_bits(QueueState{10.0, 2}, 1.0, spec) ==
        doctest::Approx(10.0 / 2.6).epsilon(1e-13));

  // Zero remaining bits: keep returning zero until the deadline.
  CHECK(causal_primal_bits(QueueState{0.0, 3}, 5.0, spec) == 0.0);

  // Feasibility across gains.
  for (double g : {1e-6, 0.3, 1.0, 40.0, 1e9}) {
    const double b = causal_primal_bits(QueueState{3.0, 4}, g, spec);
    CHECK(b >= 0.0);
    CHECK(b <= 3.0);
  }

  CHECK_THROWS_AS(causal_primal_bits(QueueState{1.0, 7}, 1.0, spec), sched::TableMismatch);
  CHECK_THROWS_AS(causal_primal_bits(QueueState{1.0, 2}, 0.0, spec), sched::NonPositiveGain);
  CHECK_THROWS_AS(causal_primal_bits(QueueState{-1.0, 2}, 1.0, spec), std::invalid_argument);
}

TEST_CASE("constant channel reduces the causal policy to equal bits") {
  const MonomialCost cost(3.3);
  const FadingModel model = validate(FadingModel::deterministic(0.7));
  const ThresholdTable table = xi_table(model, cost, 9);
  const PolicySpec spec(PolicyKind::CausalPrimal, cost, table);
  for (int t = 2; t <= 9; ++t) {
    CHECK(causal_primal_bits(QueueState{4.0, t}, 0.7, spec) ==
          doctest::Approx(4.0 / t).epsilon(1e-12));
  }
}

TEST_CASE("causal dual policy") {
  const MonomialCost cost(2.0);
  const ThresholdTable unit = zeta_table(validate(FadingModel::deterministic(1.0)), cost, 4);
  const PolicySpec unit_spec(PolicyKind::CausalDual, cost, unit);
  CHECK(causal_dual_energy(EnergyState{3.0, 1}, 0.2, unit_spec) == 3.0);
  // zeta_{2,3} = 3: equal split 8 * 1/(1+3) = 2.
  CHECK(causal_dual_energy(EnergyState{8.0, 4}, 1.0, unit_spec) ==
        doctest::Approx(2.0).epsilon(1e-13));

  const ThresholdTable z = zeta_table(two_atom(), cost, 2);
  const PolicySpec spec(PolicyKind::CausalDual, cost, z);
  // zeta_{2,1} = 2.25: 10 * 4/(4+2.25) = 6.4.
  CHECK(causal_dual_energy(EnergyState{10.0, 2}, 4.0, spec) ==
        doctest::Approx(6.4).epsilon(1e-13));
}

TEST_CASE("policy spec validation") {
  const MonomialCost cost(2.0);
  const ThresholdTable xi = xi_table(two_atom(), cost, 4);
  const ThresholdTable zeta = zeta_table(two_atom(), cost, 4);

  CHECK_THROWS_AS(PolicySpec(PolicyKind::CausalPrimal, cost, std::nullopt),
                  sched::TableMismatch);
  CHECK_THROWS_AS(PolicySpec(PolicyKind::CausalPrimal, cost, zeta), sched::TableMismatch);
  CHECK_THROWS_AS(PolicySpec(PolicyKind::CausalDual, cost, xi), sched::TableMismatch);
  CHECK_THROWS_AS(PolicySpec(PolicyKind::CausalPrimal, MonomialCost(2.5), xi),
                  sched::TableMismatch);

  // Table-free kinds drop any table handed to them.
  const PolicySpec equal(PolicyKind::EqualBit, cost, xi);
  CHECK_FALSE(equal.table.has_value());
}

TEST_CASE("policy spec from json") {
  const MonomialCost cost(2.0);
  const ThresholdTable xi = xi_table(two_atom(), cost, 4);
  const auto dir = std::filesystem::temp_directory_path();
  const auto path = dir / "sched_test_policy_table.json";
  {
    std::ofstream out(path);
    out << xi.to_json().dump();
  }
  const PolicySpec spec = PolicySpec::from_json(
      nlohmann::json{{"kind", "causal_primal"}, {"table", "sched_test_policy_table.json"}},
      dir);
  CHECK(spec.kind == PolicyKind::CausalPrimal);
  CHECK(spec.cost.order() == 2.0);
  CHECK(spec.table->horizon() == 4);
  std::filesystem::remove(path);

  const PolicySpec equal =
      PolicySpec::from_json(nlohmann::json{{"kind", "equal_bit"}, {"n", 2.67}}, dir);
  CHECK(equal.kind == PolicyKind::EqualBit);
  CHECK_THROWS(PolicySpec::from_json(nlohmann::json{{"kind", "equal_bit"}}, dir));
}

TEST_CASE("non-causal allocations") {
  const MonomialCost n2(2.0);
  SUBCASE("equal gains split evenly and sum exactly") {
    const std::vector<double> gains(7, 2.5);
    const auto alloc = noncausal_primal(10.0, gains, n2);
    for (double b : alloc) CHECK(b == doctest::Approx(10.0 / 7.0).epsilon(1e-14));
    CHECK(std::accumulate(alloc.begin(), alloc.end(), 0.0) ==
          doctest::Approx(10.0).epsilon(1e-13));
  }
  SUBCASE("quadratic cost allocates proportionally to the gain") {
    const auto alloc = noncausal_primal(10.0, {4.0, 1.0}, n2);
    CHECK(alloc[0] == doctest::Approx(8.0).epsilon(1e-14));
    CHECK(alloc[1] == doctest::Approx(2.0).epsilon(1e-14));
  }
  SUBCASE("cubic cost matches an independent multiplier solve") {
    const std::vector<double> gains = {8.0, 1.0};
    const auto alloc = noncausal_primal(10.0, gains, MonomialCost(3.0));
    CHECK(alloc[0] == doctest::Approx(7.3879612503625856).epsilon(1e-12));
    CHECK(alloc[1] == doctest::Approx(2.6120387496374144).epsilon(1e-12));
    const auto reference = noncausal_by_multiplier(10.0, gains, 3.0);
    CHECK(alloc[0] == doctest::Approx(reference[0]).epsilon(1e-9));
    CHECK(alloc[1] == doctest::Approx(reference[1]).epsilon(1e-9));
  }
  SUBCASE("random gains: multiplier solve agrees across orders") {
    const std::vector<double> gains = {0.3, 2.0, 7.7, 1.1, 0.9};
    for (double n : {1.5, 2.67, 4.0}) {
      const auto alloc = noncausal_primal(5.0, gains, MonomialCost(n));
      const auto reference = noncausal_by_multiplier(5.0, gains, n);
      for (std::size_t i = 0; i < gains.size(); ++i) {
        CHECK(alloc[i] == doctest::Approx(reference[i]).epsilon(1e-8));
      }
      CHECK(std::accumulate(alloc.begin(), alloc.end(), 0.0) ==
            doctest::Approx(5.0).epsilon(1e-13));
    }
  }
  SUBCASE("dual proportions equal primal proportions") {
    const std::vector<double> gains = {0.4, 3.0, 1.7};
    const auto bits = noncausal_primal(2.0, gains, MonomialCost(2.67));
    const auto energy = noncausal_dual(9.0, gains, MonomialCost(2.67));
    for (std::size_t i = 0; i < gains.size(); ++i) {
      CHECK(bits[i] / 2.0 == doctest::Approx(energy[i] / 9.0).epsilon(1e-14));
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(noncausal_primal(1.0, {}, n2), sched::EmptyHorizon);
    CHECK_THROWS_AS(noncausal_primal(1.0, {1.0, 0.0}, n2), sched::NonPositiveGain);
    CHECK_THROWS_AS(noncausal_dual(1.0, {}, n2), sched::EmptyHorizon);
  }
}

TEST_CASE("equal bit") {
  CHECK(equal_bit(QueueState{10.0, 5}) == 2.0);
  CHECK(equal_bit(QueueState{3.25, 1}) == 3.25);
  double remaining = 12.0;
  for (int t = 6; t >= 1; --t) {
    const double b = equal_bit(QueueState{remaining, t});
    CHECK(b == doctest::Approx(2.0).epsilon(1e-14));
    remaining -= b;
  }
  CHECK(remaining == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_SUITE_END();
