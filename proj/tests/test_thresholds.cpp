#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "sched/channel.hpp"
#include "sched/thresholds.hpp"

using sched::FadingModel;
using sched::MonomialCost;
using sched::TableKind;
using sched::ThresholdTable;
using sched::expect;
using sched::limit_gap;
using sched::validate;
using sched::xi_table;
using sched::zeta_table;

namespace {

FadingModel two_atom() { return validate(FadingModel::discrete({{1.0, 0.5}, {4.0, 0.5}})); }

FadingModel trunc_exp() { return validate(FadingModel::truncated_exponential(0.001, 1.0)); }

// Reference recursion computed directly in xi with naive powers; safe for
// moderate n, used to certify the eta-parameterized production path.
std::vector<double> xi_direct(const FadingModel& model, double n, int horizon) {
  std::vector<double> xi(static_cast<std::size_t>(horizon));
  xi[0] = expect(model, [](double g) { return 1.0 / g; });
  for (int t = 2; t <= horizon; ++t) {
    const double prev = xi[static_cast<std::size_t>(t - 2)];
    const double defer = std::pow(1.0 / prev, 1.0 / (n - 1.0));
    xi[static_cast<std::size_t>(t - 1)] = expect(model, [&](double g) {
      return std::pow(std::pow(g, 1.0 / (n - 1.0)) + defer, -(n - 1.0));
    });
  }
  return xi;
}

}  // namespace

TEST_SUITE_BEGIN("thresholds");

TEST_CASE("monomial order must exceed one") {
  CHECK_THROWS_AS(MonomialCost(1.0), std::invalid_argument);
  CHECK_THROWS_AS(MonomialCost(0.5), std::invalid_argument);
  CHECK_THROWS_AS(MonomialCost(-3.0), std::invalid_argument);
  CHECK_THROWS_AS(MonomialCost(std::nan("")), std::invalid_argument);
  CHECK(MonomialCost(1.0001).order() == 1.0001);
  CHECK(MonomialCost(2.0).gain_weight(4.0) == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("constant channel closed forms: xi*c*t^{n-1} = 1 and zeta = c*t^{n-1}") {
  for (double c : {0.5, 1.0, 3.0}) {
    const FadingModel model = validate(FadingModel::deterministic(c));
    for (double n : {1.5, 2.0, 2.67, 5.0}) {
      const MonomialCost cost(n);
      const ThresholdTable xi = xi_table(model, cost, 50);
      const ThresholdTable zeta = zeta_table(model, cost, 50);
      for (int t = 1; t <= 50; ++t) {
        const double scale = c * std::pow(static_cast<double>(t), n - 1.0);
        CHECK(xi.value(t) * scale == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(zeta.value(t) / scale == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("two-atom quadratic table matches the exact rational recursion") {
  // xi_1 = 1/2 + 1/8 = 5/8; xi_2 = (1/2)(1/(1+8/5)) + (1/2)(1/(4+8/5)) = 205/728.
  const ThresholdTable xi = xi_table(two_atom(), MonomialCost(2.0), 2);
  CHECK(xi.value(1) == doctest::Approx(5.0 / 8.0).epsilon(1e-15));
  CHECK(xi.value(2) == doctest::Approx(205.0 / 728.0).epsilon(1e-13));
  CHECK(xi.eta(2) == doctest::Approx(8.0 / 5.0).epsilon(1e-13));
}

TEST_CASE("zeta examples") {
  const ThresholdTable unit = zeta_table(validate(FadingModel::deterministic(1.0)),
                                         MonomialCost(2.0), 4);
  for (int t = 1; t <= 4; ++t) {
    CHECK(unit.value(t) == doctest::Approx(static_cast<double>(t)).epsilon(1e-13));
  }
  const ThresholdTable z = zeta_table(two_atom(), MonomialCost(2.0), 3);
  CHECK(z.value(1) == doctest::Approx(2.25).epsilon(1e-14));  // (E[sqrt g])^2 = 1.5^2
  // Frozen from a 30-digit reference evaluation of the recursion.
  CHECK(z.value(2) == doctest::Approx(4.6284695471649933).epsilon(1e-13));
  CHECK(z.value(3) == doctest::Approx(7.0486672268257320).epsilon(1e-13));
}

TEST_CASE("fractional-order tables match a high-precision reference") {
  // 30-digit reference evaluation of both recursions at n = 2.67 on the
  // two-atom channel; exercises the carried-root algebra off the quadratic
  // special case.
  const ThresholdTable xi = xi_table(two_atom(), MonomialCost(2.67), 3);
  CHECK(xi.value(1) == doctest::Approx(0.625).epsilon(1e-15));
  CHECK(xi.value(2) == doctest::Approx(0.18056091618141748).epsilon(1e-13));
  CHECK(xi.value(3) == doctest::Approx(0.087223050832785244).epsilon(1e-13));

  const ThresholdTable zeta = zeta_table(two_atom(), MonomialCost(2.67), 2);
  CHECK(zeta.value(1) == doctest::Approx(2.1861168382880958).epsilon(1e-13));
  CHECK(zeta.value(2) == doctest::Approx(7.0479598797676093).epsilon(1e-13));
}

TEST_CASE("eta indexing is the policy's deferral weight") {
  const ThresholdTable xi = xi_table(two_atom(), MonomialCost(2.67), 8);
  for (int t = 2; t <= 8; ++t) {
    const double expected = std::pow(1.0 / xi.value(t - 1), 1.0 / (2.67 - 1.0));
    CHECK(xi.eta(t) == doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK_THROWS_AS(xi.eta(1), sched::IndexOutOfHorizon);
  CHECK_THROWS_AS(xi.eta(9), sched::IndexOutOfHorizon);
  CHECK_THROWS_AS(xi.value(0), sched::IndexOutOfHorizon);
}

TEST_CASE("monotonicity across the model sweep") {
  const std::vector<FadingModel> models = {validate(FadingModel::deterministic(1.0)),
                                           two_atom(), trunc_exp()};
  for (const FadingModel& model : models) {
    const bool random_channel = model.kind() != sched::FadingKind::Deterministic;
    for (double n : {1.5, 2.0, 2.67, 5.0, 20.0}) {
      CAPTURE(n);
      const MonomialCost cost(n);
      const ThresholdTable xi = xi_table(model, cost, 30);
      const ThresholdTable zeta = zeta_table(model, cost, 30);
      for (int t = 1; t < 30; ++t) {
        CHECK(xi.value(t + 1) <= xi.value(t) * (1.0 + 1e-12));
        if (random_channel) CHECK(xi.value(t + 1) < xi.value(t) * (1.0 - 1e-12));
        CHECK(zeta.value(t + 1) >= zeta.value(t) * (1.0 - 1e-12));
      }
      for (int t = 2; t < 30; ++t) {
        CHECK(xi.eta(t + 1) > xi.eta(t) * (1.0 + 1e-12));
      }
    }
  }
}

TEST_CASE("eta parameterization agrees with the direct xi recursion") {
  for (const FadingModel& model : {two_atom(), trunc_exp()}) {
    for (double n : {1.5, 2.0, 5.0}) {
      CAPTURE(n);
      const ThresholdTable table = xi_table(model, MonomialCost(n), 20);
      const std::vector<double> direct = xi_direct(model, n, 20);
      for (int t = 1; t <= 20; ++t) {
        CHECK(table.value(t) ==
              doctest::Approx(direct[static_cast<std::size_t>(t - 1)]).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("scale covariance on discrete channels") {
  const double a = 3.0;
  const FadingModel base = two_atom();
  const FadingModel scaled = validate(FadingModel::discrete({{a, 0.5}, {4.0 * a, 0.5}}));
  for (double n : {1.5, 2.0, 5.0}) {
    const MonomialCost cost(n);
    const ThresholdTable xi0 = xi_table(base, cost, 12);
    const ThresholdTable xi1 = xi_table(scaled, cost, 12);
    const ThresholdTable z0 = zeta_table(base, cost, 12);
    const ThresholdTable z1 = zeta_table(scaled, cost, 12);
    for (int t = 1; t <= 12; ++t) {
      CHECK(xi1.value(t) == doctest::Approx(xi0.value(t) / a).epsilon(1e-11));
      CHECK(z1.value(t) == doctest::Approx(z0.value(t) * a).epsilon(1e-11));
    }
  }
}

TEST_CASE("expected_primal_cost") {
  const ThresholdTable unit = xi_table(validate(FadingModel::deterministic(1.0)),
                                       MonomialCost(2.0), 5);
  CHECK(sched::expected_primal_cost(0.0, MonomialCost(2.0), unit, 3) == 0.0);
  CHECK(sched::expected_primal_cost(10.0, MonomialCost(2.0), unit, 5) ==
        doctest::Approx(20.0).epsilon(1e-12));

  const ThresholdTable xi2 = xi_table(two_atom(), MonomialCost(2.0), 2);
  CHECK(sched::expected_primal_cost(1.0, MonomialCost(2.0), xi2, 2) ==
        doctest::Approx(205.0 / 728.0).epsilon(1e-13));

  CHECK_THROWS_AS(sched::expected_primal_cost(1.0, MonomialCost(2.0), xi2, 3),
                  sched::IndexOutOfHorizon);
  CHECK_THROWS_AS(sched::expected_primal_cost(0.0, MonomialCost(2.0), xi2, 0),
                  sched::IndexOutOfHorizon);
  const ThresholdTable z = zeta_table(two_atom(), MonomialCost(2.0), 2);
  CHECK_THROWS_AS(sched::expected_primal_cost(1.0, MonomialCost(2.0), z, 1),
                  sched::TableMismatch);
}

TEST_CASE("limit gap") {
  const ThresholdTable unit = xi_table(validate(FadingModel::deterministic(1.0)),
                                       MonomialCost(7.3), 40);
  for (int t = 1; t <= 40; ++t) CHECK(limit_gap(unit, t) == 0.0);

  // At n=2 the state is 1/xi_1 = 1/E[1/g]; E[1/g] = e^0.001 E1(0.001).
  const ThresholdTable n2 = xi_table(trunc_exp(), MonomialCost(2.0), 1);
  CHECK(limit_gap(n2, 1) == doctest::Approx(0.8422183860228318).epsilon(1e-9));

  const ThresholdTable n200 = xi_table(trunc_exp(), MonomialCost(200.0), 5);
  for (int t = 1; t <= 5; ++t) CHECK(limit_gap(n200, t) <= 0.10);
}

TEST_CASE("large order stays finite in the eta representation") {
  const ThresholdTable big = xi_table(trunc_exp(), MonomialCost(100.0), 20);
  for (int t = 1; t <= 20; ++t) {
    CHECK(std::isfinite(big.eta_state(t)));
    CHECK(big.value(t) > 0.0);
  }
  const ThresholdTable zeta = zeta_table(trunc_exp(), MonomialCost(100.0), 20);
  for (int t = 1; t <= 20; ++t) CHECK(std::isfinite(zeta.eta_state(t)));
}

TEST_CASE("horizon validation") {
  CHECK_THROWS_AS(xi_table(two_atom(), MonomialCost(2.0), 0), std::invalid_argument);
  CHECK_THROWS_AS(xi_table(two_atom(), MonomialCost(2.0), 10001), std::invalid_argument);
}

TEST_CASE("json and csv round trips") {
  const ThresholdTable xi = xi_table(two_atom(), MonomialCost(2.67), 12);
  const ThresholdTable from_json = ThresholdTable::from_json(xi.to_json());
  CHECK(from_json.kind() == TableKind::PrimalXi);
  CHECK(from_json.order() == xi.order());
  for (int t = 1; t <= 12; ++t) {
    CHECK(from_json.value(t) == xi.value(t));
    CHECK(from_json.eta_state(t) == xi.eta_state(t));
  }

  const std::filesystem::path path =
      std::filesystem::temp_directory_path() / "sched_test_table.csv";
  xi.write_csv(path);
  const ThresholdTable from_csv = ThresholdTable::read_csv(path);
  CHECK(from_csv.kind() == TableKind::PrimalXi);
  CHECK(from_csv.order() == xi.order());
  for (int t = 1; t <= 12; ++t) {
    CHECK(from_csv.value(t) == xi.value(t));  // %.17g round-trips exactly
  }
  std::filesystem::remove(path);

  const ThresholdTable zeta = zeta_table(two_atom(), MonomialCost(2.0), 6);
  const std::filesystem::path zpath =
      std::filesystem::temp_directory_path() / "sched_test_table_zeta.csv";
  zeta.write_csv(zpath);
  const ThresholdTable zround = ThresholdTable::read_csv(zpath);
  CHECK(zround.kind() == TableKind::DualZeta);
  for (int t = 1; t <= 6; ++t) CHECK(zround.value(t) == zeta.value(t));
  std::filesystem::remove(zpath);
}

TEST_SUITE_END();
