#pragma once

// Fading-gain distributions: construction, validation/normalization, exact or
// numerical expectation of functionals of the gain, and reproducible
// inverse-CDF sampling.

#include <cstdint>
#include <functional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sched/quadrature.hpp"
#include "sched/rng.hpp"

namespace sched {

enum class FadingKind { Deterministic, Discrete, TruncatedExponential, TabulatedPdf };

const char* to_string(FadingKind kind);

struct GainAtom {
  double gain = 0.0;
  double prob = 0.0;
};

// A channel-gain distribution. Build one through the factory functions, then
// pass it through validate() before calling expect / sample / inverse_cdf.
// Validation normalizes the total mass to one and proves E[1/g] finite.
class FadingModel {
 public:
  static FadingModel deterministic(double gain);
  static FadingModel discrete(std::vector<GainAtom> atoms);
  static FadingModel truncated_exponential(double threshold, double rate);
  static FadingModel tabulated_pdf(std::vector<double> gains, std::vector<double> densities);

  static FadingModel from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;

  FadingKind kind() const { return kind_; }
  bool validated() const { return validated_; }

  double deterministic_gain() const { return gain_; }
  const std::vector<GainAtom>& atoms() const { return atoms_; }
  double threshold() const { return threshold_; }
  double rate() const { return rate_; }
  const std::vector<double>& grid_gains() const { return grid_; }
  const std::vector<double>& grid_densities() const { return density_; }

  // Quantile function for u in [0, 1); requires a validated model.
  double inverse_cdf(double u) const;

 private:
  FadingModel() = default;

  FadingKind kind_ = FadingKind::Deterministic;
  bool validated_ = false;

  double gain_ = 0.0;                 // Deterministic
  std::vector<GainAtom> atoms_;       // Discrete
  std::vector<double> atom_cum_;      // cumulative probabilities
  double threshold_ = 0.0;            // TruncatedExponential
  double rate_ = 0.0;
  std::vector<double> grid_;          // TabulatedPdf
  std::vector<double> density_;
  std::vector<double> segment_cum_;   // cumulative mass up to grid_[i]

  friend FadingModel validate(FadingModel model, const QuadratureConfig& cfg);
};

// Normalizes and checks the model; returns the validated copy.
// Throws NonPositiveSupport, DivergentInverseMoment or InvalidModel.
FadingModel validate(FadingModel model, const QuadratureConfig& cfg = {});

// E[f(g)]. Exact weighted sum for Deterministic/Discrete; adaptive
// Gauss-Legendre on the tail-compressed variable u = exp(-(g-threshold)*rate)
// for the truncated exponential; trapezoid on the grid for TabulatedPdf.
double expect(const FadingModel& model, const std::function<double(double)>& f,
              const QuadratureConfig& cfg = {});

// count i.i.d. draws via inverse CDF; identical stream => identical output.
std::vector<double> sample(const FadingModel& model, SeededStream stream, std::size_t count);

}  // namespace sched
