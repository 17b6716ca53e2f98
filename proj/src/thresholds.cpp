#include "sched/thresholds.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <utility>

#include <nlohmann/json.hpp>

namespace sched {

MonomialCost::MonomialCost(double order) : n_(order) {
  if (!std::isfinite(order) || order <= 1.0) {
    throw std::invalid_argument("monomial order must be a finite real > 1");
  }
}

double MonomialCost::gain_weight(double g) const {
  if (!(g > 0.0)) throw NonPositiveGain("gain must be > 0");
  return std::exp(std::log(g) / (n_ - 1.0));
}

const char* to_string(TableKind kind) {
  return kind == TableKind::PrimalXi ? "xi" : "zeta";
}

ThresholdTable::ThresholdTable(TableKind kind, double order, std::vector<double> values,
                               std::vector<double> eta_state)
    : kind_(kind), n_(order), values_(std::move(values)), eta_state_(std::move(eta_state)) {
  if (values_.empty() || values_.size() != eta_state_.size()) {
    throw std::invalid_argument("threshold table: values/eta_state size mismatch");
  }
  // Monotonicity is checked on the eta_state representation, which never
  // under/overflows: it must be strictly increasing for both kinds
  // (equivalently xi nonincreasing, zeta nondecreasing).
  for (std::size_t i = 0; i + 1 < eta_state_.size(); ++i) {
    if (!(eta_state_[i + 1] >= eta_state_[i])) {
      std::ostringstream msg;
      msg << "threshold table not monotone at t=" << (i + 2) << ": eta_state "
          << eta_state_[i + 1] << " < " << eta_state_[i];
      throw std::invalid_argument(msg.str());
    }
  }
  for (double s : eta_state_) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw std::invalid_argument("threshold table eta_state must be finite and > 0");
    }
  }
}

void ThresholdTable::check_t(int t, int lowest) const {
  if (t < lowest || t > horizon()) {
    std::ostringstream msg;
    msg << "slot index t=" << t << " outside " << lowest << ".." << horizon();
    throw IndexOutOfHorizon(msg.str());
  }
}

double ThresholdTable::value(int t) const {
  check_t(t, 1);
  return values_[static_cast<std::size_t>(t - 1)];
}

double ThresholdTable::eta_state(int t) const {
  check_t(t, 1);
  return eta_state_[static_cast<std::size_t>(t - 1)];
}

double ThresholdTable::eta(int t) const {
  check_t(t, 2);
  return eta_state_[static_cast<std::size_t>(t - 2)];
}

namespace {

void check_horizon(int horizon) {
  if (horizon < 1 || horizon > kMaxHorizon) {
    throw std::invalid_argument("horizon must be in 1..10000");
  }
}

// value from eta_state; may underflow/overflow to 0/inf at extreme n*ln(s),
// which is why the state vector is the authoritative representation.
double primal_value_from_state(double s, double n) { return std::exp(-(n - 1.0) * std::log(s)); }
double dual_value_from_state(double s, double n) { return std::exp((n - 1.0) * std::log(s)); }

// A constant channel collapses both recursions to eta_state = w * t with
// w = c^{1/(n-1)} (the update s -> s + w telescopes). Evaluating that form
// directly keeps the unit-gain case bit-exact, which general-path rounding
// through exp/log would not.
std::optional<ThresholdTable> constant_channel_table(const FadingModel& model, double n,
                                                     int horizon, TableKind kind) {
  if (model.kind() != FadingKind::Deterministic) return std::nullopt;
  const double w = std::exp(std::log(model.deterministic_gain()) / (n - 1.0));
  std::vector<double> values(static_cast<std::size_t>(horizon));
  std::vector<double> state(static_cast<std::size_t>(horizon));
  for (int t = 1; t <= horizon; ++t) {
    const double s = w * static_cast<double>(t);
    state[static_cast<std::size_t>(t - 1)] = s;
    values[static_cast<std::size_t>(t - 1)] =
        kind == TableKind::PrimalXi ? primal_value_from_state(s, n) : dual_value_from_state(s, n);
  }
  return ThresholdTable(kind, n, std::move(values), std::move(state));
}

}  // namespace

ThresholdTable xi_table(const FadingModel& model, const MonomialCost& cost, int horizon,
                        const QuadratureConfig& cfg) {
  check_horizon(horizon);
  if (!model.validated()) throw std::logic_error("xi_table: model must be validated first");
  const double n = cost.order();
  if (auto exact = constant_channel_table(model, n, horizon, TableKind::PrimalXi)) {
    return *std::move(exact);
  }

  std::vector<double> values(static_cast<std::size_t>(horizon));
  std::vector<double> state(static_cast<std::size_t>(horizon));

  const double inv_moment = expect(model, [](double g) { return 1.0 / g; }, cfg);
  values[0] = inv_moment;
  state[0] = std::exp(-std::log(inv_moment) / (n - 1.0));

  for (int t = 2; t <= horizon; ++t) {
    const double s = state[static_cast<std::size_t>(t - 2)];
    // xi_t = s^{-(n-1)} * E[(1 + g^{1/(n-1)}/s)^{-(n-1)}]; the normalized
    // expectation M lies in (0,1), so the state update s * M^{-1/(n-1)}
    // never leaves double range.
    const double m = expect(
        model,
        [&](double g) { return std::exp(-(n - 1.0) * std::log1p(cost.gain_weight(g) / s)); },
        cfg);
    const double next = s * std::exp(-std::log(m) / (n - 1.0));
    state[static_cast<std::size_t>(t - 1)] = next;
    values[static_cast<std::size_t>(t - 1)] = primal_value_from_state(next, n);
  }
  return ThresholdTable(TableKind::PrimalXi, n, std::move(values), std::move(state));
}

ThresholdTable zeta_table(const FadingModel& model, const MonomialCost& cost, int horizon,
                          const QuadratureConfig& cfg) {
  check_horizon(horizon);
  if (!model.validated()) throw std::logic_error("zeta_table: model must be validated first");
  const double n = cost.order();
  if (auto exact = constant_channel_table(model, n, horizon, TableKind::DualZeta)) {
    return *std::move(exact);
  }

  std::vector<double> values(static_cast<std::size_t>(horizon));
  std::vector<double> state(static_cast<std::size_t>(horizon));

  const double root_moment = expect(
      model, [&](double g) { return std::exp(std::log(g) / n); }, cfg);
  values[0] = std::pow(root_moment, n);
  state[0] = std::exp(std::log(root_moment) * n / (n - 1.0));

  for (int t = 2; t <= horizon; ++t) {
    const double s = state[static_cast<std::size_t>(t - 2)];
    // zeta_t = s^{n-1} * (E[(1 + g^{1/(n-1)}/s)^{(n-1)/n}])^n with the
    // normalized expectation M >= 1; state update s * M^{n/(n-1)}.
    const double m = expect(
        model,
        [&](double g) {
          return std::exp((n - 1.0) / n * std::log1p(cost.gain_weight(g) / s));
        },
        cfg);
    const double next = s * std::exp(std::log(m) * n / (n - 1.0));
    state[static_cast<std::size_t>(t - 1)] = next;
    values[static_cast<std::size_t>(t - 1)] = dual_value_from_state(next, n);
  }
  return ThresholdTable(TableKind::DualZeta, n, std::move(values), std::move(state));
}

double expected_primal_cost(double beta, const MonomialCost& cost, const ThresholdTable& table,
                            int t) {
  if (table.kind() != TableKind::PrimalXi) {
    throw TableMismatch("expected_primal_cost needs a primal xi table");
  }
  if (table.order() != cost.order()) {
    throw TableMismatch("expected_primal_cost: table order does not match cost");
  }
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("beta must be finite and >= 0");
  }
  if (beta == 0.0) {
    table.value(t);  // still enforce the index check
    return 0.0;
  }
  return std::pow(beta, cost.order()) * table.value(t);
}

double limit_gap(const ThresholdTable& table, int t) {
  if (table.kind() != TableKind::PrimalXi) {
    throw TableMismatch("limit_gap is defined for primal xi tables");
  }
  const double s = table.eta_state(t);
  return std::abs(s - static_cast<double>(t)) / static_cast<double>(t);
}

nlohmann::json ThresholdTable::to_json() const {
  nlohmann::json doc;
  doc["kind"] = to_string(kind_);
  doc["n"] = n_;
  doc["horizon"] = horizon();
  doc["values"] = values_;
  doc["eta_state"] = eta_state_;
  return doc;
}

ThresholdTable ThresholdTable::from_json(const nlohmann::json& doc) {
  const std::string kind = doc.at("kind").get<std::string>();
  if (kind != "xi" && kind != "zeta") {
    throw std::invalid_argument("threshold table kind must be 'xi' or 'zeta'");
  }
  ThresholdTable table(kind == "xi" ? TableKind::PrimalXi : TableKind::DualZeta,
                       doc.at("n").get<double>(),
                       doc.at("values").get<std::vector<double>>(),
                       doc.at("eta_state").get<std::vector<double>>());
  if (doc.contains("horizon") && doc.at("horizon").get<int>() != table.horizon()) {
    throw std::invalid_argument("threshold table horizon does not match values length");
  }
  return table;
}

void ThresholdTable::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", n_);
  out << "# kind=" << to_string(kind_) << " n=" << buf << '\n';
  out << "t,value,eta\n";
  for (int t = 1; t <= horizon(); ++t) {
    out << t << ',';
    std::snprintf(buf, sizeof buf, "%.17g", value(t));
    out << buf << ',';
    if (t >= 2) {
      std::snprintf(buf, sizeof buf, "%.17g", eta(t));
      out << buf;
    }
    out << '\n';
  }
}

ThresholdTable ThresholdTable::read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());

  std::string line;
  bool have_meta = false;
  bool primal = true;
  double n = 0.0;
  std::vector<double> values;
  std::vector<double> etas;  // eta(t) for t >= 2
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream meta(line.substr(1));
      std::string token;
      while (meta >> token) {
        if (token.rfind("kind=", 0) == 0) {
          primal = token.substr(5) == "xi";
          have_meta = true;
        } else if (token.rfind("n=", 0) == 0) {
          n = std::stod(token.substr(2));
        }
      }
      continue;
    }
    if (line[0] == 't') continue;  // header row
    std::istringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');  // t
    std::getline(row, cell, ',');
    values.push_back(std::stod(cell));
    if (std::getline(row, cell, ',') && !cell.empty()) etas.push_back(std::stod(cell));
  }
  if (!have_meta || !(n > 1.0)) {
    throw std::runtime_error("table CSV " + path.string() +
                             " lacks the '# kind=... n=...' metadata line");
  }
  if (values.empty() || etas.size() + 1 != values.size()) {
    throw std::runtime_error("malformed table file " + path.string());
  }
  // eta(t) = eta_state(t-1); the final state entry is recovered from the
  // final value.
  std::vector<double> state(values.size());
  for (std::size_t i = 0; i < etas.size(); ++i) state[i] = etas[i];
  state.back() = primal ? std::exp(-std::log(values.back()) / (n - 1.0))
                        : std::exp(std::log(values.back()) / (n - 1.0));
  return ThresholdTable(primal ? TableKind::PrimalXi : TableKind::DualZeta, n,
                        std::move(values), std::move(state));
}

}  // namespace sched
