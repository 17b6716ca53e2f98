#include "sched/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace sched {

namespace {

// 15-point Gauss-Legendre rule on [-1, 1]; nodes are symmetric about 0.
constexpr int kOrder = 15;
constexpr double kNodes[kOrder] = {
    -0.98799251802048542849, -0.93727339240070590431, -0.84820658341042721620,
    -0.72441773136017004742, -0.57097217260853884754, -0.39415134707756336990,
    -0.20119409399743452230, 0.0,
    0.20119409399743452230,  0.39415134707756336990,  0.57097217260853884754,
    0.72441773136017004742,  0.84820658341042721620,  0.93727339240070590431,
    0.98799251802048542849};
constexpr double kWeights[kOrder] = {
    0.03075324199611726835, 0.07036604748810812471, 0.10715922046717193501,
    0.13957067792615431445, 0.16626920581699393355, 0.18616100001556221103,
    0.19843148532711157646, 0.20257824192556127288, 0.19843148532711157646,
    0.18616100001556221103, 0.16626920581699393355, 0.13957067792615431445,
    0.10715922046717193501, 0.07036604748810812471, 0.03075324199611726835};

double gauss15(const std::function<double(double)>& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = 0.0;
  for (int i = 0; i < kOrder; ++i) {
    sum += kWeights[i] * f(mid + half * kNodes[i]);
  }
  return sum * half;
}

struct Panel {
  double a, b;
  double value;  // two-half estimate, kept as the panel's contribution
  double error;
};

Panel make_panel(const std::function<double(double)>& f, double a, double b) {
  const double whole = gauss15(f, a, b);
  const double mid = 0.5 * (a + b);
  const double halves = gauss15(f, a, mid) + gauss15(f, mid, b);
  return Panel{a, b, halves, std::abs(whole - halves)};
}

struct WorseError {
  bool operator()(const Panel& x, const Panel& y) const {
    if (x.error != y.error) return x.error < y.error;
    return x.a < y.a;  // deterministic tie-break
  }
};

}  // namespace

void QuadratureConfig::check() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
    throw std::invalid_argument("quadrature tolerances must be strictly positive");
  }
  if (max_subdivisions < 16) {
    throw std::invalid_argument("quadrature max_subdivisions must be >= 16");
  }
}

QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double lo,
                                    double hi, const QuadratureConfig& cfg) {
  cfg.check();
  if (!(hi > lo)) {
    throw std::invalid_argument("integrate_adaptive: empty interval");
  }

  std::priority_queue<Panel, std::vector<Panel>, WorseError> panels;
  double total = 0.0;
  double total_error = 0.0;

  // Seed with four panels so the first refinement decisions see some
  // structure instead of one coarse estimate.
  const int kSeedPanels = 4;
  for (int i = 0; i < kSeedPanels; ++i) {
    const double a = lo + (hi - lo) * i / kSeedPanels;
    const double b = lo + (hi - lo) * (i + 1) / kSeedPanels;
    Panel p = make_panel(f, a, b);
    total += p.value;
    total_error += p.error;
    panels.push(p);
  }

  auto tolerance = [&] { return std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total)); };

  while (total_error > tolerance() &&
         static_cast<int>(panels.size()) < cfg.max_subdivisions) {
    Panel worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Panel left = make_panel(f, worst.a, mid);
    Panel right = make_panel(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
  }

  QuadratureResult result{total, total_error, static_cast<int>(panels.size())};
  if (total_error > tolerance() || !std::isfinite(total)) {
    std::ostringstream msg;
    msg << "adaptive quadrature did not converge: estimate " << total
        << ", error bound " << total_error << ", panels " << panels.size();
    throw QuadratureNotConverged(msg.str(), total, total_error);
  }
  return result;
}

}  // namespace sched
