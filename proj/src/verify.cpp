#include "sched/verify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "sched/oracle.hpp"
#include "sched/policies.hpp"
#include "sched/rng.hpp"

namespace sched::verify {

namespace {

std::string fmt(double x) {
  std::ostringstream out;
  out.precision(6);
  out << x;
  return out.str();
}

CheckResult bound_check(std::string name, double observed, double bound) {
  CheckResult r;
  r.pass = observed <= bound;
  r.detail = "observed " + fmt(observed) + ", bound " + fmt(bound);
  r.name = std::move(name);
  return r;
}

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = next_uniform(rng);
  return lo * std::exp(u * std::log(hi / lo));
}

}  // namespace

FadingModel two_atom_model() {
  return validate(FadingModel::discrete({{1.0, 0.5}, {4.0, 0.5}}));
}

FadingModel truncated_exponential_model() {
  return validate(FadingModel::truncated_exponential(0.001, 1.0));
}

std::vector<FadingModel> canonical_models() {
  return {validate(FadingModel::deterministic(1.0)), two_atom_model(),
          truncated_exponential_model()};
}

std::vector<CheckResult> run_threshold_suite(const ThresholdSuiteOptions& opts) {
  std::vector<CheckResult> results;
  const double margin = opts.monotonicity_margin;

  for (const FadingModel& model : canonical_models()) {
    const bool random_channel = model.kind() != FadingKind::Deterministic;
    for (double n : opts.orders) {
      const MonomialCost cost(n);
      const ThresholdTable xi = xi_table(model, cost, opts.horizon);
      const ThresholdTable zeta = zeta_table(model, cost, opts.horizon);

      bool xi_monotone = true;
      bool eta_growing = true;
      bool zeta_monotone = true;
      for (int t = 1; t < opts.horizon; ++t) {
        const double cur = xi.value(t);
        const double next = xi.value(t + 1);
        if (random_channel ? !(next < cur * (1.0 - margin)) : !(next <= cur * (1.0 + margin))) {
          xi_monotone = false;
        }
        if (!(zeta.value(t + 1) >= zeta.value(t) * (1.0 - margin))) zeta_monotone = false;
      }
      for (int t = 2; t < opts.horizon; ++t) {
        if (!(xi.eta(t + 1) > xi.eta(t) * (1.0 + margin))) eta_growing = false;
      }

      std::ostringstream tag;
      tag << to_string(model.kind()) << " n=" << n;
      CheckResult r;
      r.name = "xi nonincreasing (" + tag.str() + ")";
      r.pass = xi_monotone;
      r.detail = xi_monotone ? "monotone over t=1.." + std::to_string(opts.horizon)
                             : "monotonicity violated";
      results.push_back(r);
      r.name = "eta increasing (" + tag.str() + ")";
      r.pass = eta_growing;
      r.detail = eta_growing ? "strictly increasing" : "growth violated";
      results.push_back(r);
      r.name = "zeta nondecreasing (" + tag.str() + ")";
      r.pass = zeta_monotone;
      r.detail = zeta_monotone ? "monotone" : "monotonicity violated";
      results.push_back(r);
    }
  }

  // Constant-channel closed forms: xi = 1/(c t^{n-1}), zeta = c t^{n-1}.
  {
    double worst = 0.0;
    for (double c : {0.5, 1.0, 3.0}) {
      const FadingModel model = validate(FadingModel::deterministic(c));
      for (double n : {1.5, 2.0, 2.67, 5.0}) {
        const MonomialCost cost(n);
        const ThresholdTable xi = xi_table(model, cost, opts.horizon);
        const ThresholdTable zeta = zeta_table(model, cost, opts.horizon);
        for (int t = 1; t <= opts.horizon; ++t) {
          const double scale = c * std::pow(static_cast<double>(t), n - 1.0);
          worst = std::max(worst, std::abs(xi.value(t) * scale - 1.0));
          worst = std::max(worst, std::abs(zeta.value(t) / scale - 1.0));
        }
      }
    }
    results.push_back(bound_check("constant-channel closed forms", worst, opts.closed_form_tol));
  }

  // Large-n limit of the eta parameterization.
  {
    const FadingModel unit = validate(FadingModel::deterministic(1.0));
    double worst = 0.0;
    for (double n : opts.orders) {
      const ThresholdTable xi = xi_table(unit, MonomialCost(n), opts.horizon);
      for (int t = 1; t <= opts.horizon; ++t) worst = std::max(worst, limit_gap(xi, t));
    }
    CheckResult r;
    r.name = "limit gap zero on the unit constant channel";
    r.pass = worst == 0.0;
    r.detail = "max gap " + fmt(worst);
    results.push_back(r);

    const FadingModel trunc = truncated_exponential_model();
    std::map<int, ThresholdTable> tables;
    for (int n : {50, 100, 200}) {
      tables.emplace(n, xi_table(trunc, MonomialCost(n), 5));
    }
    double worst200 = 0.0;
    bool decreasing = true;
    for (int t = 1; t <= 5; ++t) {
      const double g50 = limit_gap(tables.at(50), t);
      const double g100 = limit_gap(tables.at(100), t);
      const double g200 = limit_gap(tables.at(200), t);
      worst200 = std::max(worst200, g200);
      if (!(g200 < g100 && g100 < g50)) decreasing = false;
    }
    results.push_back(bound_check("limit gap at n=200, truncated exponential", worst200,
                                  opts.limit_gap_bound));
    r.name = "limit gap decreasing in n (50 -> 100 -> 200)";
    r.pass = decreasing;
    r.detail = decreasing ? "strictly decreasing at every t <= 5" : "not decreasing";
    results.push_back(r);
  }

  // Scale covariance on the two-atom channel: g -> a*g divides xi by a and
  // multiplies zeta by a.
  {
    double worst = 0.0;
    for (double a : {0.25, 3.0}) {
      const FadingModel base = two_atom_model();
      const FadingModel scaled =
          validate(FadingModel::discrete({{1.0 * a, 0.5}, {4.0 * a, 0.5}}));
      for (double n : {1.5, 2.0, 5.0}) {
        const MonomialCost cost(n);
        const ThresholdTable xi0 = xi_table(base, cost, 10);
        const ThresholdTable xi1 = xi_table(scaled, cost, 10);
        const ThresholdTable z0 = zeta_table(base, cost, 10);
        const ThresholdTable z1 = zeta_table(scaled, cost, 10);
        for (int t = 1; t <= 10; ++t) {
          worst = std::max(worst, rel_err(xi1.value(t), xi0.value(t) / a));
          worst = std::max(worst, rel_err(z1.value(t), z0.value(t) * a));
        }
      }
    }
    results.push_back(bound_check("scale covariance of xi and zeta", worst, 1e-9));
  }

  return results;
}

std::vector<CheckResult> run_policy_suite(const PolicySuiteOptions& opts) {
  std::vector<CheckResult> results;
  std::mt19937_64 rng = make_engine(SeededStream{opts.seed, 0});

  const std::vector<double> orders = {1.5, 2.0, 2.67, 5.0};
  const std::vector<FadingModel> models = canonical_models();
  constexpr int kHorizon = 6;

  // Tables per (model, n).
  std::vector<std::vector<ThresholdTable>> tables;
  for (const FadingModel& model : models) {
    std::vector<ThresholdTable> row;
    for (double n : orders) row.push_back(xi_table(model, MonomialCost(n), kHorizon));
    tables.push_back(std::move(row));
  }

  double worst_stationarity = 0.0;
  double worst_ratio = 0.0;
  double worst_feasibility = 0.0;
  double worst_homogeneity = 0.0;
  bool opportunistic = true;

  for (int draw = 0; draw < opts.draws; ++draw) {
    const std::size_t mi = static_cast<std::size_t>(next_uniform(rng) * models.size());
    const std::size_t ni = static_cast<std::size_t>(next_uniform(rng) * orders.size());
    const MonomialCost cost(orders[ni]);
    const ThresholdTable& table = tables[mi][ni];
    const int t = 2 + static_cast<int>(next_uniform(rng) * (kHorizon - 1));
    const double beta = log_uniform(rng, 0.1, 10.0);
    const double g = log_uniform(rng, 0.05, 20.0);
    const double n = cost.order();

    PolicySpec spec(PolicyKind::CausalPrimal, cost, table);
    const double b = causal_primal_bits(QueueState{beta, t}, g, spec);

    if (b < 0.0 || b > beta) worst_feasibility = std::max(worst_feasibility, 1.0);

    const double xi_prev = table.value(t - 1);
    const double residual =
        n * std::pow(b, n - 1.0) / g - n * std::pow(beta - b, n - 1.0) * xi_prev;
    const double scale = n * std::pow(beta, n - 1.0) * (1.0 / g + xi_prev);
    worst_stationarity = std::max(worst_stationarity, std::abs(residual) / scale);

    // b * eta = (beta - b) * g^{1/(n-1)}
    const double lhs = b * table.eta(t);
    const double rhs = (beta - b) * cost.gain_weight(g);
    worst_ratio = std::max(worst_ratio, rel_err(lhs, rhs));

    const double lambda = log_uniform(rng, 0.01, 100.0);
    const double scaled = causal_primal_bits(QueueState{lambda * beta, t}, g, spec);
    worst_homogeneity = std::max(worst_homogeneity, rel_err(scaled, lambda * b));

    const double b_hi = causal_primal_bits(QueueState{beta, t}, g * 1.5, spec);
    if (!(b_hi > b)) opportunistic = false;
  }

  results.push_back(
      bound_check("first-order stationarity residual", worst_stationarity,
                  opts.stationarity_tol));
  results.push_back(bound_check("allocation ratio identity", worst_ratio, opts.identity_tol));
  results.push_back(bound_check("feasibility 0 <= b <= beta", worst_feasibility, 0.0));
  results.push_back(bound_check("homogeneity in beta", worst_homogeneity, 1e-12));
  {
    CheckResult r;
    r.name = "strictly opportunistic in the gain";
    r.pass = opportunistic;
    r.detail = opportunistic ? "b increases with g on every draw" : "violated";
    results.push_back(r);
  }

  // Quadratic case: b/(beta-b) = g * xi_{2,t-1}.
  {
    double worst = 0.0;
    for (const FadingModel& model : models) {
      const MonomialCost cost(2.0);
      const ThresholdTable table = xi_table(model, cost, kHorizon);
      PolicySpec spec(PolicyKind::CausalPrimal, cost, table);
      for (int t = 2; t <= kHorizon; ++t) {
        for (double g : {0.2, 1.0, 7.5}) {
          const double beta = 3.0;
          const double b = causal_primal_bits(QueueState{beta, t}, g, spec);
          worst = std::max(worst, rel_err(b / (beta - b), g * table.value(t - 1)));
        }
      }
    }
    results.push_back(bound_check("quadratic-cost ratio b/(beta-b) = g*xi", worst,
                                  opts.identity_tol));
  }

  // Non-causal proportionality and the shared primal/dual proportions.
  {
    double worst_prop = 0.0;
    double worst_shared = 0.0;
    for (int draw = 0; draw < opts.draws; ++draw) {
      const int horizon = 1 + static_cast<int>(next_uniform(rng) * 16.0);
      const double n = 1.2 + next_uniform(rng) * 5.0;
      const MonomialCost cost(n);
      std::vector<double> gains(static_cast<std::size_t>(horizon));
      for (double& g : gains) g = log_uniform(rng, 0.05, 20.0);
      const double bit_budget = log_uniform(rng, 0.5, 20.0);
      const double energy_budget = log_uniform(rng, 0.5, 20.0);
      const std::vector<double> bits = noncausal_primal(bit_budget, gains, cost);
      const std::vector<double> energies = noncausal_dual(energy_budget, gains, cost);
      for (std::size_t i = 0; i < gains.size(); ++i) {
        worst_prop = std::max(worst_prop, rel_err(bits[i] * cost.gain_weight(gains[0]),
                                                  bits[0] * cost.gain_weight(gains[i])));
        worst_shared = std::max(
            worst_shared, rel_err(bits[i] / bit_budget, energies[i] / energy_budget));
      }
    }
    results.push_back(bound_check("non-causal allocations proportional to g^{1/(n-1)}",
                                  worst_prop, opts.identity_tol));
    results.push_back(bound_check("primal and dual non-causal proportions coincide",
                                  worst_shared, opts.identity_tol));
  }

  // On a constant channel the causal, non-causal and equal-bit schedules
  // coincide slot by slot.
  {
    double worst = 0.0;
    const FadingModel model = validate(FadingModel::deterministic(2.0));
    const MonomialCost cost(2.67);
    const ThresholdTable table = xi_table(model, cost, kHorizon);
    PolicySpec spec(PolicyKind::CausalPrimal, cost, table);
    const double budget = 10.0;
    const std::vector<double> gains(kHorizon, 2.0);
    const std::vector<double> plan = noncausal_primal(budget, gains, cost);
    double remaining = budget;
    for (int t = kHorizon; t >= 1; --t) {
      const double causal = causal_primal_bits(QueueState{remaining, t}, 2.0, spec);
      const double equal = equal_bit(QueueState{remaining, t});
      const double planned = plan[static_cast<std::size_t>(kHorizon - t)];
      worst = std::max(worst, rel_err(causal, equal));
      worst = std::max(worst, rel_err(planned, equal));
      remaining -= causal;
    }
    results.push_back(
        bound_check("constant channel: causal == non-causal == equal-bit", worst, 1e-12));
  }

  return results;
}

std::vector<CheckResult> run_dp_suite(const DpSuiteOptions& opts) {
  std::vector<CheckResult> results;
  std::mt19937_64 rng = make_engine(SeededStream{opts.seed, 0});

  // one_step_argmin against the closed-form policy on randomized draws.
  {
    const std::vector<double> orders = {1.5, 2.0, 2.67, 5.0};
    constexpr int kHorizon = 6;
    double worst = 0.0;
    for (int draw = 0; draw < opts.draws; ++draw) {
      FadingModel model = [&] {
        if (next_uniform(rng) < 0.25) {
          return validate(FadingModel::deterministic(log_uniform(rng, 0.2, 5.0)));
        }
        const int atom_count = 2 + static_cast<int>(next_uniform(rng) * 4.0);
        std::vector<GainAtom> atoms(static_cast<std::size_t>(atom_count));
        for (GainAtom& a : atoms) {
          a.gain = log_uniform(rng, 0.1, 10.0);
          a.prob = 0.05 + next_uniform(rng);
        }
        return validate(FadingModel::discrete(std::move(atoms)));
      }();
      const MonomialCost cost(orders[static_cast<std::size_t>(next_uniform(rng) * 4.0)]);
      const ThresholdTable table = xi_table(model, cost, kHorizon);
      const int t = 2 + static_cast<int>(next_uniform(rng) * (kHorizon - 1));
      const double beta = log_uniform(rng, 0.1, 10.0);
      const double g = log_uniform(rng, 0.05, 20.0);

      PolicySpec spec(PolicyKind::CausalPrimal, cost, table);
      const double closed = causal_primal_bits(QueueState{beta, t}, g, spec);
      const double searched = one_step_argmin(beta, g, cost, table.value(t - 1));
      worst = std::max(worst, std::abs(searched - closed) / beta);
    }
    results.push_back(bound_check("one-step argmin matches the policy (per unit beta)",
                                  worst, opts.argmin_tol));
  }

  const FadingModel model = two_atom_model();

  // DP value certification against beta^n * xi_{n,t}.
  for (double n : {2.0, 2.67}) {
    const MonomialCost cost(n);
    constexpr int kHorizon = 6;
    const ThresholdTable xi = xi_table(model, cost, kHorizon);
    GridSpec grid;
    grid.state_points = opts.grid;
    grid.action_points = opts.grid;
    grid.gain_atoms = opts.atoms;
    grid.state_max = 1.0;
    const DpSolution dp = dp_solve_primal(model, cost, kHorizon, grid);
    double worst = 0.0;
    for (int t = 1; t <= kHorizon; ++t) {
      worst = std::max(worst, rel_err(dp.expected_value(t, 1.0),
                                      expected_primal_cost(1.0, cost, xi, t)));
    }
    results.push_back(bound_check("primal DP value vs closed form (n=" + fmt(n) + ")", worst,
                                  opts.value_tol));

    // Greedy action within one action-grid cell of the policy.
    PolicySpec spec(PolicyKind::CausalPrimal, cost, xi);
    double worst_action = 0.0;
    const auto& states = dp.states();
    for (int t = 2; t <= kHorizon; ++t) {
      for (std::size_t i : {states.size() / 2, states.size() - 1}) {
        for (int j = 0; j < opts.atoms; ++j) {
          const double beta = states[i];
          const double g = dp.atoms()[static_cast<std::size_t>(j)];
          const double closed = causal_primal_bits(QueueState{beta, t}, g, spec);
          const double cell = beta / static_cast<double>(opts.grid - 1);
          const double diff = std::abs(dp.greedy_action(t, static_cast<int>(i), j) - closed);
          worst_action = std::max(worst_action, diff / cell);
        }
      }
    }
    results.push_back(bound_check(
        "primal DP greedy action within one cell (n=" + fmt(n) + ")", worst_action, 1.0));
  }

  // Dual DP value certification against (zeta_{n,t} * eps)^{1/n}.
  {
    const MonomialCost cost(2.0);
    constexpr int kHorizon = 4;
    const ThresholdTable zeta = zeta_table(model, cost, kHorizon);
    GridSpec grid;
    grid.state_points = opts.grid;
    grid.action_points = opts.grid;
    grid.gain_atoms = opts.atoms;
    grid.state_max = 1.0;
    const DpSolution dp = dp_solve_dual(model, cost, kHorizon, grid);
    double worst = 0.0;
    for (int t = 1; t <= kHorizon; ++t) {
      const double closed = std::pow(zeta.value(t) * 1.0, 1.0 / cost.order());
      worst = std::max(worst, rel_err(dp.expected_value(t, 1.0), closed));
    }
    results.push_back(bound_check("dual DP value vs (zeta*eps)^{1/n}", worst, opts.value_tol));
  }

  return results;
}

bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(),
                     [](const CheckResult& r) { return r.pass; });
}

}  // namespace sched::verify
