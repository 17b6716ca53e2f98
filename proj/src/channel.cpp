#include "sched/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include <nlohmann/json.hpp>

namespace sched {

const char* to_string(FadingKind kind) {
  switch (kind) {
    case FadingKind::Deterministic: return "deterministic";
    case FadingKind::Discrete: return "discrete";
    case FadingKind::TruncatedExponential: return "truncated_exponential";
    case FadingKind::TabulatedPdf: return "tabulated_pdf";
  }
  return "?";
}

FadingModel FadingModel::deterministic(double gain) {
  FadingModel m;
  m.kind_ = FadingKind::Deterministic;
  m.gain_ = gain;
  return m;
}

FadingModel FadingModel::discrete(std::vector<GainAtom> atoms) {
  FadingModel m;
  m.kind_ = FadingKind::Discrete;
  m.atoms_ = std::move(atoms);
  return m;
}

FadingModel FadingModel::truncated_exponential(double threshold, double rate) {
  FadingModel m;
  m.kind_ = FadingKind::TruncatedExponential;
  m.threshold_ = threshold;
  m.rate_ = rate;
  return m;
}

FadingModel FadingModel::tabulated_pdf(std::vector<double> gains, std::vector<double> densities) {
  FadingModel m;
  m.kind_ = FadingKind::TabulatedPdf;
  m.grid_ = std::move(gains);
  m.density_ = std::move(densities);
  return m;
}

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw InvalidModel(what);
}

}  // namespace

FadingModel validate(FadingModel model, const QuadratureConfig& cfg) {
  cfg.check();
  switch (model.kind_) {
    case FadingKind::Deterministic: {
      if (!std::isfinite(model.gain_)) throw InvalidModel("deterministic gain must be finite");
      if (model.gain_ <= 0.0) throw NonPositiveSupport("deterministic gain must be > 0");
      break;
    }
    case FadingKind::Discrete: {
      require(!model.atoms_.empty(), "discrete model needs at least one atom");
      double mass = 0.0;
      for (const GainAtom& a : model.atoms_) {
        if (!std::isfinite(a.gain) || !std::isfinite(a.prob)) {
          throw InvalidModel("discrete atom must be finite");
        }
        if (a.gain <= 0.0) throw NonPositiveSupport("discrete atom gain must be > 0");
        require(a.prob >= 0.0, "discrete atom probability must be >= 0");
        mass += a.prob;
      }
      require(mass > 0.0, "discrete model has zero total mass");
      model.atom_cum_.clear();
      model.atom_cum_.reserve(model.atoms_.size());
      double cum = 0.0;
      for (GainAtom& a : model.atoms_) {
        a.prob /= mass;
        cum += a.prob;
        model.atom_cum_.push_back(cum);
      }
      model.atom_cum_.back() = 1.0;
      break;
    }
    case FadingKind::TruncatedExponential: {
      if (!std::isfinite(model.threshold_) || !std::isfinite(model.rate_)) {
        throw InvalidModel("truncated exponential parameters must be finite");
      }
      require(model.rate_ > 0.0, "truncated exponential rate must be > 0");
      if (model.threshold_ < 0.0) {
        throw NonPositiveSupport("truncated exponential threshold must be >= 0");
      }
      if (model.threshold_ == 0.0) {
        throw DivergentInverseMoment(
            "E[1/g] diverges for the exponential truncated at zero");
      }
      break;
    }
    case FadingKind::TabulatedPdf: {
      require(model.grid_.size() >= 2, "tabulated pdf needs at least two grid points");
      require(model.grid_.size() == model.density_.size(),
              "tabulated pdf grid/density size mismatch");
      for (std::size_t i = 0; i < model.grid_.size(); ++i) {
        if (!std::isfinite(model.grid_[i]) || !std::isfinite(model.density_[i])) {
          throw InvalidModel("tabulated pdf entries must be finite");
        }
        if (model.grid_[i] <= 0.0) throw NonPositiveSupport("tabulated pdf gain must be > 0");
        require(model.density_[i] >= 0.0, "tabulated pdf density must be >= 0");
        if (i > 0) require(model.grid_[i] > model.grid_[i - 1], "tabulated pdf grid must increase");
      }
      double mass = 0.0;
      for (std::size_t i = 0; i + 1 < model.grid_.size(); ++i) {
        mass += 0.5 * (model.density_[i] + model.density_[i + 1]) *
                (model.grid_[i + 1] - model.grid_[i]);
      }
      require(mass > 0.0, "tabulated pdf has zero total mass");
      for (double& d : model.density_) d /= mass;
      model.segment_cum_.assign(model.grid_.size(), 0.0);
      double cum = 0.0;
      for (std::size_t i = 0; i + 1 < model.grid_.size(); ++i) {
        cum += 0.5 * (model.density_[i] + model.density_[i + 1]) *
               (model.grid_[i + 1] - model.grid_[i]);
        model.segment_cum_[i + 1] = cum;
      }
      model.segment_cum_.back() = 1.0;
      break;
    }
  }

  model.validated_ = true;

  // E[1/g] must come out finite under the configured quadrature; the primal
  // threshold recursion starts from it. True divergence is caught by the
  // analytic checks above, so QuadratureNotConverged here means the
  // subdivision budget is too small and propagates as such.
  const double inv_moment = expect(model, [](double g) { return 1.0 / g; }, cfg);
  if (!std::isfinite(inv_moment)) {
    throw DivergentInverseMoment("E[1/g] is not finite");
  }
  return model;
}

double expect(const FadingModel& model, const std::function<double(double)>& f,
              const QuadratureConfig& cfg) {
  if (!model.validated()) {
    throw std::logic_error("expect: model must be validated first");
  }
  switch (model.kind()) {
    case FadingKind::Deterministic:
      return f(model.deterministic_gain());
    case FadingKind::Discrete: {
      double sum = 0.0;
      for (const GainAtom& a : model.atoms()) sum += a.prob * f(a.gain);
      return sum;
    }
    case FadingKind::TruncatedExponential: {
      // u = exp(-(g - threshold) * rate) maps the tail to (0, 1]; the density
      // becomes uniform in u, so E[f(g)] = \int_0^1 f(threshold - ln(u)/rate) du.
      const double threshold = model.threshold();
      const double rate = model.rate();
      auto integrand = [&](double u) { return f(threshold - std::log(u) / rate); };
      return integrate_adaptive(integrand, 0.0, 1.0, cfg).value;
    }
    case FadingKind::TabulatedPdf: {
      // Trapezoid on the model's own grid; no extrapolation past the ends.
      const auto& x = model.grid_gains();
      const auto& d = model.grid_densities();
      double sum = 0.0;
      double prev = f(x[0]) * d[0];
      for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double next = f(x[i + 1]) * d[i + 1];
        sum += 0.5 * (prev + next) * (x[i + 1] - x[i]);
        prev = next;
      }
      return sum;
    }
  }
  throw std::logic_error("expect: unknown model kind");
}

double FadingModel::inverse_cdf(double u) const {
  if (!validated_) throw std::logic_error("inverse_cdf: model must be validated first");
  if (!(u >= 0.0 && u < 1.0)) throw std::invalid_argument("inverse_cdf: u must be in [0,1)");
  switch (kind_) {
    case FadingKind::Deterministic:
      return gain_;
    case FadingKind::Discrete: {
      // First atom whose cumulative probability exceeds u.
      auto it = std::upper_bound(atom_cum_.begin(), atom_cum_.end(), u);
      if (it == atom_cum_.end()) --it;
      return atoms_[static_cast<std::size_t>(it - atom_cum_.begin())].gain;
    }
    case FadingKind::TruncatedExponential:
      return threshold_ - std::log1p(-u) / rate_;
    case FadingKind::TabulatedPdf: {
      auto it = std::upper_bound(segment_cum_.begin(), segment_cum_.end(), u);
      if (it == segment_cum_.begin()) ++it;
      if (it == segment_cum_.end()) --it;
      const std::size_t hi = static_cast<std::size_t>(it - segment_cum_.begin());
      const std::size_t lo = hi - 1;
      const double x0 = grid_[lo];
      const double h = grid_[hi] - x0;
      const double f0 = density_[lo];
      const double slope = (density_[hi] - f0) / h;
      const double v = u - segment_cum_[lo];  // mass to cover inside the segment
      double s;
      if (std::abs(slope) * h <= 1e-14 * std::max(f0, density_[hi])) {
        s = v / f0;
      } else {
        // Solve f0*s + slope*s^2/2 = v; rationalized root is stable for
        // either sign of slope.
        const double disc = f0 * f0 + 2.0 * slope * v;
        s = 2.0 * v / (f0 + std::sqrt(std::max(disc, 0.0)));
      }
      return x0 + std::clamp(s, 0.0, h);
    }
  }
  throw std::logic_error("inverse_cdf: unknown model kind");
}

std::vector<double> sample(const FadingModel& model, SeededStream stream, std::size_t count) {
  if (!model.validated()) throw std::logic_error("sample: model must be validated first");
  std::mt19937_64 engine = make_engine(stream);
  std::vector<double> gains(count);
  for (double& g : gains) g = model.inverse_cdf(next_uniform(engine));
  return gains;
}

FadingModel FadingModel::from_json(const nlohmann::json& doc) {
  const std::string kind = doc.at("kind").get<std::string>();
  if (kind == "deterministic") {
    return deterministic(doc.at("gain").get<double>());
  }
  if (kind == "discrete") {
    std::vector<GainAtom> atoms;
    for (const auto& entry : doc.at("atoms")) {
      if (entry.is_array()) {
        atoms.push_back({entry.at(0).get<double>(), entry.at(1).get<double>()});
      } else {
        atoms.push_back({entry.at("gain").get<double>(), entry.at("prob").get<double>()});
      }
    }
    return discrete(std::move(atoms));
  }
  if (kind == "truncated_exponential") {
    return truncated_exponential(doc.at("threshold").get<double>(), doc.at("rate").get<double>());
  }
  if (kind == "tabulated_pdf") {
    return tabulated_pdf(doc.at("gains").get<std::vector<double>>(),
                         doc.at("densities").get<std::vector<double>>());
  }
  throw InvalidModel("unknown fading model kind: " + kind);
}

nlohmann::json FadingModel::to_json() const {
  nlohmann::json doc;
  doc["kind"] = to_string(kind_);
  switch (kind_) {
    case FadingKind::Deterministic:
      doc["gain"] = gain_;
      break;
    case FadingKind::Discrete: {
      nlohmann::json atoms = nlohmann::json::array();
      for (const GainAtom& a : atoms_) atoms.push_back({a.gain, a.prob});
      doc["atoms"] = std::move(atoms);
      break;
    }
    case FadingKind::TruncatedExponential:
      doc["threshold"] = threshold_;
      doc["rate"] = rate_;
      break;
    case FadingKind::TabulatedPdf:
      doc["gains"] = grid_;
      doc["densities"] = density_;
      break;
  }
  return doc;
}

}  // namespace sched
