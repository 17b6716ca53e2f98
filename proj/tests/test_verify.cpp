#include <doctest.h>

#include "sched/verify.hpp"

TEST_SUITE_BEGIN("verify");

TEST_CASE("threshold suite passes at defaults") {
  const auto results = sched::verify::run_threshold_suite({});
  for (const auto& r : results) {
    CAPTURE(r.name);
    CAPTURE(r.detail);
    CHECK(r.pass);
  }
  CHECK(sched::verify::all_passed(results));
}

TEST_CASE("policy suite passes at defaults") {
  const auto results = sched::verify::run_policy_suite({});
  for (const auto& r : results) {
    CAPTURE(r.name);
    CAPTURE(r.detail);
    CHECK(r.pass);
  }
}

TEST_CASE("dp suite passes at reduced grid") {
  sched::verify::DpSuiteOptions opts;
  opts.grid = 128;          // unit-test scale; the acceptance suite runs 512
  opts.value_tol = 0.02;
  opts.draws = 300;
  const auto results = sched::verify::run_dp_suite(opts);
  for (const auto& r : results) {
    CAPTURE(r.name);
    CAPTURE(r.detail);
    CHECK(r.pass);
  }
}

TEST_SUITE_END();
