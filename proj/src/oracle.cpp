#include "sched/oracle.hpp"

#include "sched/policies.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace sched {

void GridSpec::check() const {
  if (state_points < 8 || action_points < 8 || gain_atoms < 8) {
    throw std::invalid_argument("grid counts must all be >= 8");
  }
  if (!(state_max > 0.0) || !std::isfinite(state_max)) {
    throw std::invalid_argument("state_max must be finite and > 0");
  }
}

double golden_section_min(const std::function<double(double)>& f, double a, double b,
                          double tol) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int iter = 0; iter < 200 && (b - a) > tol; ++iter) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

double golden_section_max(const std::function<double(double)>& f, double a, double b,
                          double tol) {
  return golden_section_min([&](double x) { return -f(x); }, a, b, tol);
}

double one_step_argmin(double beta, double g, const MonomialCost& cost, double xi_prev) {
  if (!(xi_prev > 0.0)) throw std::invalid_argument("xi_prev must be > 0");
  if (!(g > 0.0)) throw NonPositiveGain("gain must be > 0");
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
  if (beta == 0.0) return 0.0;

  const double n = cost.order();
  auto objective = [&](double b) {
    return std::pow(b, n) / g + std::pow(beta - b, n) * xi_prev;
  };
  const double mid = golden_section_min(objective, 0.0, beta, 1e-12 * beta);

  // The objective is flat to machine precision within ~sqrt(eps) of the
  // minimizer, so value comparisons alone cannot localize it to 1e-12*beta.
  // Finish with a sign bisection of the slope, which has no cancellation at
  // the optimum. Strict convexity makes the slope cross zero exactly once.
  auto slope = [&](double b) {
    return n * std::pow(b, n - 1.0) / g - n * std::pow(beta - b, n - 1.0) * xi_prev;
  };
  double lo = std::max(0.0, mid - 1e-4 * beta);
  double hi = std::min(beta, mid + 1e-4 * beta);
  if (!(slope(lo) < 0.0) || !(slope(hi) > 0.0)) {
    lo = 0.0;  // slope(0) <= 0 and slope(beta) >= 0 always
    hi = beta;
  }
  for (int iter = 0; iter < 100 && (hi - lo) > 1e-16 * beta; ++iter) {
    const double m = 0.5 * (lo + hi);
    if (slope(m) < 0.0) {
      lo = m;
    } else {
      hi = m;
    }
  }
  return 0.5 * (lo + hi);
}

std::vector<double> quantize_gains(const FadingModel& model, int atom_count) {
  std::vector<double> atoms(static_cast<std::size_t>(atom_count));
  for (int j = 0; j < atom_count; ++j) {
    atoms[static_cast<std::size_t>(j)] =
        model.inverse_cdf((j + 0.5) / static_cast<double>(atom_count));
  }
  return atoms;
}

namespace {

// Geometric spacing matches how the value scales (like state^n): uniform
// grids would waste nearly all their resolution at large states.
std::vector<double> make_state_grid(int count, double state_max) {
  constexpr double kSmallestFraction = 1e-6;
  std::vector<double> grid(static_cast<std::size_t>(count));
  grid[0] = 0.0;
  for (int i = 1; i < count; ++i) {
    const double frac = static_cast<double>(count - 1 - i) / static_cast<double>(count - 2);
    grid[static_cast<std::size_t>(i)] = state_max * std::exp(std::log(kSmallestFraction) * frac);
  }
  grid[static_cast<std::size_t>(count - 1)] = state_max;
  return grid;
}

double lerp_grid(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
  const std::size_t lo = hi - 1;
  const double w = (x - xs[lo]) / (xs[hi] - xs[lo]);
  return ys[lo] + w * (ys[hi] - ys[lo]);
}

// Monotone cubic Hermite (Fritsch-Carlson) interpolant of the cost-to-go.
// Piecewise-linear interpolation would pin the inner argmin to state-grid
// kinks, which is coarser than one action cell; the C^1 interpolant keeps
// the greedy action accurate to the action grid without overshooting the
// monotone data.
class MonotoneCubic {
 public:
  MonotoneCubic(const std::vector<double>& xs, const std::vector<double>& ys)
      : xs_(xs), ys_(ys), slopes_(xs.size()) {
    const std::size_t count = xs.size();
    std::vector<double> secant(count - 1);
    for (std::size_t i = 0; i + 1 < count; ++i) {
      secant[i] = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
    }
    slopes_.front() = secant.front();
    slopes_.back() = secant.back();
    for (std::size_t i = 1; i + 1 < count; ++i) {
      if (secant[i - 1] * secant[i] <= 0.0) {
        slopes_[i] = 0.0;
      } else {
        const double h0 = xs[i] - xs[i - 1];
        const double h1 = xs[i + 1] - xs[i];
        const double w0 = 2.0 * h1 + h0;
        const double w1 = h1 + 2.0 * h0;
        slopes_[i] = (w0 + w1) / (w0 / secant[i - 1] + w1 / secant[i]);
      }
    }
  }

  double operator()(double x) const {
    if (x <= xs_.front()) return ys_.front();
    if (x >= xs_.back()) return ys_.back();
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    const std::size_t hi = static_cast<std::size_t>(it - xs_.begin());
    const std::size_t lo = hi - 1;
    const double h = xs_[hi] - xs_[lo];
    const double u = (x - xs_[lo]) / h;
    const double u2 = u * u;
    const double u3 = u2 * u;
    return ys_[lo] * (2.0 * u3 - 3.0 * u2 + 1.0) + h * slopes_[lo] * (u3 - 2.0 * u2 + u) +
           ys_[hi] * (-2.0 * u3 + 3.0 * u2) + h * slopes_[hi] * (u3 - u2);
  }

 private:
  const std::vector<double>& xs_;
  const std::vector<double>& ys_;
  std::vector<double> slopes_;
};

void check_monotone(const std::vector<double>& values, int t, const char* what) {
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    const double slack = 1e-9 * std::max({std::abs(values[i]), std::abs(values[i + 1]), 1e-300});
    if (values[i + 1] < values[i] - slack) {
      std::ostringstream msg;
      msg << what << " value table non-monotone in state at t=" << t << " (index " << i
          << "); refine the grid";
      throw GridTooCoarse(msg.str());
    }
  }
}

enum class Sense { Minimize, Maximize };

DpSolution solve(const FadingModel& model, const MonomialCost& cost, int horizon,
                 const GridSpec& grid, Sense sense) {
  grid.check();
  if (!model.validated()) throw std::logic_error("dp solver needs a validated model");
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");

  const double n = cost.order();
  const std::vector<double> atoms = quantize_gains(model, grid.gain_atoms);
  const std::vector<double> states = make_state_grid(grid.state_points, grid.state_max);
  const std::size_t S = states.size();
  const std::size_t A = atoms.size();

  std::vector<double> values(static_cast<std::size_t>(horizon) * S * A, 0.0);
  std::vector<double> actions(static_cast<std::size_t>(horizon) * S * A, 0.0);
  std::vector<double> expectations(static_cast<std::size_t>(horizon) * S, 0.0);
  auto at = [&](int t, std::size_t i, std::size_t j) {
    return (static_cast<std::size_t>(t - 1) * S + i) * A + j;
  };

  // Terminal slot: everything remaining goes out, whatever the gain.
  for (std::size_t i = 0; i < S; ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < A; ++j) {
      const double g = atoms[j];
      const double v = sense == Sense::Minimize ? slot_energy(states[i], g, cost)
                                                : slot_bits(states[i], g, cost);
      values[at(1, i, j)] = v;
      actions[at(1, i, j)] = states[i];
      mean += v;
    }
    expectations[i] = mean / static_cast<double>(A);
  }

  std::vector<double> bar_prev(states.size());
  for (std::size_t i = 0; i < S; ++i) bar_prev[i] = expectations[i];
  check_monotone(bar_prev, 1, sense == Sense::Minimize ? "primal" : "dual");

  const int action_cells = grid.action_points - 1;
  for (int t = 2; t <= horizon; ++t) {
    const MonotoneCubic cost_to_go(states, bar_prev);
    for (std::size_t i = 0; i < S; ++i) {
      const double budget = states[i];
      double mean = 0.0;
      for (std::size_t j = 0; j < A; ++j) {
        const double g = atoms[j];
        double best_x = 0.0;
        double best_v;
        if (budget == 0.0) {
          best_v = bar_prev.front();
        } else {
          auto objective = [&](double x) {
            const double now = sense == Sense::Minimize ? slot_energy(x, g, cost)
                                                        : slot_bits(x, g, cost);
            return now + cost_to_go(budget - x);
          };
          // Coarse scan over the action grid, then golden-section inside the
          // bracketing pair of cells.
          int best_k = 0;
          best_v = objective(0.0);
          const bool minimize = sense == Sense::Minimize;
          for (int k = 1; k <= action_cells; ++k) {
            const double x = budget * k / action_cells;
            const double v = objective(x);
            if (minimize ? v < best_v : v > best_v) {
              best_v = v;
              best_k = k;
            }
          }
          const double lo = budget * std::max(best_k - 1, 0) / action_cells;
          const double hi = budget * std::min(best_k + 1, action_cells) / action_cells;
          const double tol = std::max(1e-10 * budget, 1e-14);
          best_x = minimize ? golden_section_min(objective, lo, hi, tol)
                            : golden_section_max(objective, lo, hi, tol);
          const double refined = objective(best_x);
          if (minimize ? refined <= best_v : refined >= best_v) {
            best_v = refined;
          } else {
            best_x = budget * best_k / action_cells;  // keep the scan point
          }
        }
        values[at(t, i, j)] = best_v;
        actions[at(t, i, j)] = best_x;
        mean += best_v;
      }
      expectations[static_cast<std::size_t>(t - 1) * S + i] = mean / static_cast<double>(A);
    }
    for (std::size_t j = 0; j < A; ++j) {
      std::vector<double> column(S);
      for (std::size_t i = 0; i < S; ++i) column[i] = values[at(t, i, j)];
      check_monotone(column, t, sense == Sense::Minimize ? "primal" : "dual");
    }
    for (std::size_t i = 0; i < S; ++i) {
      bar_prev[i] = expectations[static_cast<std::size_t>(t - 1) * S + i];
    }
    check_monotone(bar_prev, t, sense == Sense::Minimize ? "primal" : "dual");
  }

  return DpSolution(horizon, states, atoms, std::move(values), std::move(actions),
                    std::move(expectations));
}

}  // namespace

DpSolution dp_solve_primal(const FadingModel& model, const MonomialCost& cost, int horizon,
                           const GridSpec& grid) {
  return solve(model, cost, horizon, grid, Sense::Minimize);
}

DpSolution dp_solve_dual(const FadingModel& model, const MonomialCost& cost, int horizon,
                         const GridSpec& grid) {
  return solve(model, cost, horizon, grid, Sense::Maximize);
}

DpSolution::DpSolution(int horizon, std::vector<double> states, std::vector<double> atoms,
                       std::vector<double> values, std::vector<double> actions,
                       std::vector<double> state_expectations)
    : horizon_(horizon),
      states_(std::move(states)),
      atoms_(std::move(atoms)),
      values_(std::move(values)),
      actions_(std::move(actions)),
      state_expectations_(std::move(state_expectations)) {}

std::size_t DpSolution::index(int t, int state_idx, int atom_idx) const {
  if (t < 1 || t > horizon_) throw IndexOutOfHorizon("dp solution: t outside 1..T");
  if (state_idx < 0 || state_idx >= static_cast<int>(states_.size()) || atom_idx < 0 ||
      atom_idx >= static_cast<int>(atoms_.size())) {
    throw std::out_of_range("dp solution: index outside the grid");
  }
  return (static_cast<std::size_t>(t - 1) * states_.size() +
          static_cast<std::size_t>(state_idx)) *
             atoms_.size() +
         static_cast<std::size_t>(atom_idx);
}

double DpSolution::value(int t, int state_idx, int atom_idx) const {
  return values_[index(t, state_idx, atom_idx)];
}

double DpSolution::greedy_action(int t, int state_idx, int atom_idx) const {
  return actions_[index(t, state_idx, atom_idx)];
}

double DpSolution::expected_value(int t, double state) const {
  if (t < 1 || t > horizon_) throw IndexOutOfHorizon("dp solution: t outside 1..T");
  const std::size_t offset = static_cast<std::size_t>(t - 1) * states_.size();
  const std::vector<double> row(state_expectations_.begin() + static_cast<std::ptrdiff_t>(offset),
                                state_expectations_.begin() +
                                    static_cast<std::ptrdiff_t>(offset + states_.size()));
  return lerp_grid(states_, row, state);
}

void DpSolution::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "t,state,atom,value,action\n";
  char buf[64];
  for (int t = 1; t <= horizon_; ++t) {
    for (std::size_t i = 0; i < states_.size(); ++i) {
      for (std::size_t j = 0; j < atoms_.size(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", states_[i]);
        out << t << ',' << buf;
        std::snprintf(buf, sizeof buf, "%.17g", atoms_[j]);
        out << ',' << buf;
        std::snprintf(buf, sizeof buf, "%.17g",
                      values_[(static_cast<std::size_t>(t - 1) * states_.size() + i) *
                                  atoms_.size() +
                              j]);
        out << ',' << buf;
        std::snprintf(buf, sizeof buf, "%.17g",
                      actions_[(static_cast<std::size_t>(t - 1) * states_.size() + i) *
                                   atoms_.size() +
                               j]);
        out << ',' << buf << '\n';
      }
    }
  }
}

}  // namespace sched
