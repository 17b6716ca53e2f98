#pragma once

// Independent verification engines: a discretized backward-induction solver
// for the primal/dual scheduling DPs and a derivative-free one-step
// minimizer. Neither consults the closed-form policies or the threshold
// recursions — that independence is what makes them usable as oracles.

#include <filesystem>
#include <functional>
#include <vector>

#include "sched/channel.hpp"
#include "sched/errors.hpp"
#include "sched/thresholds.hpp"

namespace sched {

struct GridSpec {
  int state_points = 512;   // geometric grid over remaining bits/energy
  int action_points = 512;  // uniform candidate actions per state
  int gain_atoms = 16;      // equal-probability quantile atoms of the model
  double state_max = 1.0;   // grids cover [0, state_max]

  void check() const;  // all counts >= 8, state_max > 0
};

// Backward-induction tables. value(t, i, j) approximates the optimal
// cost-to-go (primal) or reward-to-go (dual) at state states()[i] when the
// current gain is atoms()[j]; greedy_action is the minimizing/maximizing
// allocation found there.
class DpSolution {
 public:
  DpSolution(int horizon, std::vector<double> states, std::vector<double> atoms,
             std::vector<double> values, std::vector<double> actions,
             std::vector<double> state_expectations);

  int horizon() const { return horizon_; }
  const std::vector<double>& states() const { return states_; }
  const std::vector<double>& atoms() const { return atoms_; }

  double value(int t, int state_idx, int atom_idx) const;
  double greedy_action(int t, int state_idx, int atom_idx) const;

  // Gain-averaged value at slot t, linearly interpolated in the state.
  double expected_value(int t, double state) const;

  // Columns (t, state, atom, value, action).
  void write_csv(const std::filesystem::path& path) const;

 private:
  std::size_t index(int t, int state_idx, int atom_idx) const;

  int horizon_;
  std::vector<double> states_;
  std::vector<double> atoms_;
  std::vector<double> values_;
  std::vector<double> actions_;
  std::vector<double> state_expectations_;  // horizon x states
};

// Minimize b^n/g + J(beta - b) over the action grid with golden-section
// refinement, never calling the closed-form policy.
DpSolution dp_solve_primal(const FadingModel& model, const MonomialCost& cost, int horizon,
                           const GridSpec& grid);

// Maximize (g e)^{1/n} + W(eps - e); terminal rule W_1 = (g eps)^{1/n}.
DpSolution dp_solve_dual(const FadingModel& model, const MonomialCost& cost, int horizon,
                         const GridSpec& grid);

// Golden-section search on [a, b]; returns the midpoint of the final
// bracket of width tol.
double golden_section_min(const std::function<double(double)>& f, double a, double b,
                          double tol);
double golden_section_max(const std::function<double(double)>& f, double a, double b,
                          double tol);

// argmin over [0, beta] of b^n/g + (beta-b)^n * xi_prev, located by
// golden-section to width 1e-12*beta and sharpened by a sign bisection of
// the objective's slope (the bracketing comparison goes numerically blind
// once the objective flattens near its minimum).
double one_step_argmin(double beta, double g, const MonomialCost& cost, double xi_prev);

// Equal-probability quantile-midpoint atoms of a validated model.
std::vector<double> quantize_gains(const FadingModel& model, int atom_count);

}  // namespace sched
