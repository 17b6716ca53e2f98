#pragma once

// Invariant suites behind the `verify` CLI command. Each check returns the
// observed worst case next to its bound so failures are diagnosable from the
// report alone.

#include <cstdint>
#include <string>
#include <vector>

#include "sched/channel.hpp"
#include "sched/thresholds.hpp"

namespace sched::verify {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;  // observed vs expected
};

// The canonical channel set: constant unit gain, the 1-or-4 two-atom
// channel, and the truncated exponential with threshold 1e-3 and unit rate.
std::vector<FadingModel> canonical_models();
FadingModel two_atom_model();
FadingModel truncated_exponential_model();

struct ThresholdSuiteOptions {
  std::vector<double> orders = {1.5, 2.0, 2.67, 5.0, 20.0};
  int horizon = 50;
  double monotonicity_margin = 1e-12;  // relative strictness margin
  double closed_form_tol = 1e-12;
  double limit_gap_bound = 0.10;       // at n=200, t <= 5, truncated exponential
};

struct PolicySuiteOptions {
  int draws = 1000;
  std::uint64_t seed = 20240901;
  double stationarity_tol = 1e-8;  // first-order residual, relative to scale
  double identity_tol = 1e-12;     // ratio identities
};

struct DpSuiteOptions {
  int draws = 1000;
  std::uint64_t seed = 20240902;
  double argmin_tol = 1e-8;  // |one_step_argmin - policy| / beta
  int grid = 512;            // states = actions = grid
  int atoms = 16;
  double value_tol = 0.005;  // DP expected value vs closed form, relative
};

std::vector<CheckResult> run_threshold_suite(const ThresholdSuiteOptions& opts = {});
std::vector<CheckResult> run_policy_suite(const PolicySuiteOptions& opts = {});
std::vector<CheckResult> run_dp_suite(const DpSuiteOptions& opts = {});

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace sched::verify
