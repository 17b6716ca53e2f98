#include <doctest.h>

#include <cmath>
#include <vector>

#include <nlohmann/json.hpp>

#include "sched/channel.hpp"

using sched::FadingKind;
using sched::FadingModel;
using sched::SeededStream;
using sched::expect;
using sched::sample;
using sched::validate;

namespace {

// Independent reference for E[1/g] on the truncated exponential:
// E[1/g] = e^threshold * E1(threshold) (unit rate), with E1 from its
// alternating series  E1(x) = -gamma - ln x + sum_k (-1)^{k+1} x^k / (k k!).
double exp_integral_e1(double x) {
  const double gamma = 0.57721566490153286061;
  double sum = -gamma - std::log(x);
  double term = 1.0;  // x^k / k!
  for (int k = 1; k <= 30; ++k) {
    term *= x / k;
    sum += (k % 2 == 1 ? 1.0 : -1.0) * term / k;
  }
  return sum;
}

FadingModel trunc_exp() { return validate(FadingModel::truncated_exponential(0.001, 1.0)); }

struct MeanAccumulator {
  double sum = 0.0;
  double sq_sum = 0.0;
  long long count = 0;

  void add(double x) {
    sum += x;
    sq_sum += x * x;
    ++count;
  }
  double mean() const { return sum / static_cast<double>(count); }
  double std_error() const {
    const double m = mean();
    const double var = (sq_sum - sum * m) / static_cast<double>(count - 1);
    return std::sqrt(var / static_cast<double>(count));
  }
};

}  // namespace

TEST_SUITE_BEGIN("channel");

TEST_CASE("validation accepts and normalizes well-formed models") {
  const FadingModel det = validate(FadingModel::deterministic(1.0));
  CHECK(det.validated());

  const FadingModel disc = validate(FadingModel::discrete({{1.0, 2.0}, {4.0, 2.0}}));
  CHECK(disc.atoms()[0].prob == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(disc.atoms()[1].prob == doctest::Approx(0.5).epsilon(1e-15));

  CHECK(trunc_exp().validated());
}

TEST_CASE("validation rejects bad support and divergent inverse moments") {
  CHECK_THROWS_AS(validate(FadingModel::deterministic(0.0)), sched::NonPositiveSupport);
  CHECK_THROWS_AS(validate(FadingModel::deterministic(-2.0)), sched::NonPositiveSupport);
  CHECK_THROWS_AS(validate(FadingModel::discrete({{-1.0, 0.5}, {4.0, 0.5}})),
                  sched::NonPositiveSupport);
  CHECK_THROWS_AS(validate(FadingModel::truncated_exponential(-0.5, 1.0)),
                  sched::NonPositiveSupport);
  CHECK_THROWS_AS(validate(FadingModel::truncated_exponential(0.0, 1.0)),
                  sched::DivergentInverseMoment);
  CHECK_THROWS_AS(validate(FadingModel::truncated_exponential(0.001, 0.0)),
                  sched::InvalidModel);
  CHECK_THROWS_AS(validate(FadingModel::discrete({})), sched::InvalidModel);
  CHECK_THROWS_AS(validate(FadingModel::tabulated_pdf({0.0, 1.0}, {1.0, 1.0})),
                  sched::NonPositiveSupport);
}

TEST_CASE("exact expectations for point masses and atoms") {
  const FadingModel det = validate(FadingModel::deterministic(1.0));
  CHECK(expect(det, [](double g) { return 1.0 / g; }) == 1.0);

  const FadingModel disc = validate(FadingModel::discrete({{1.0, 0.5}, {4.0, 0.5}}));
  // Bit-for-bit the plain weighted sum, no quadrature involved.
  const double by_hand = 0.5 * (1.0 / 1.0) + 0.5 * (1.0 / 4.0);
  CHECK(expect(disc, [](double g) { return 1.0 / g; }) == by_hand);
  CHECK(expect(disc, [](double g) { return g; }) == 0.5 * 1.0 + 0.5 * 4.0);
}

TEST_CASE("truncated exponential E[1/g] matches the exponential-integral series") {
  const double reference = std::exp(0.001) * exp_integral_e1(0.001);
  CHECK(reference == doctest::Approx(6.3378740703254880).epsilon(1e-12));
  CHECK(expect(trunc_exp(), [](double g) { return 1.0 / g; }) ==
        doctest::Approx(reference).epsilon(1e-9));
}

TEST_CASE("continuous models integrate the constant to one") {
  CHECK(expect(trunc_exp(), [](double) { return 1.0; }) ==
        doctest::Approx(1.0).epsilon(1e-9));

  std::vector<double> gains;
  std::vector<double> dens;
  for (int i = 0; i <= 2000; ++i) {
    const double g = 1.0 + 2.0 * i / 2000.0;  // triangle on [1,3], peak at 2
    gains.push_back(g);
    dens.push_back(1.0 - std::abs(g - 2.0));
  }
  const FadingModel tab = validate(FadingModel::tabulated_pdf(gains, dens));
  CHECK(expect(tab, [](double) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(expect(tab, [](double g) { return g; }) == doctest::Approx(2.0).epsilon(1e-5));

  // No extrapolation: a functional supported outside the grid contributes 0.
  CHECK(expect(tab, [](double g) { return g > 3.0 ? 1.0 : 0.0; }) == 0.0);
}

TEST_CASE("sampling is deterministic per stream and exact for degenerate models") {
  const FadingModel det = validate(FadingModel::deterministic(2.0));
  CHECK(sample(det, SeededStream{9, 0}, 3) == std::vector<double>{2.0, 2.0, 2.0});

  const FadingModel single = validate(FadingModel::discrete({{1.0, 1.0}}));
  CHECK(sample(single, SeededStream{9, 4}, 5) == std::vector<double>(5, 1.0));

  const FadingModel model = trunc_exp();
  const auto a = sample(model, SeededStream{42, 7}, 1000);
  const auto b = sample(model, SeededStream{42, 7}, 1000);
  const auto c = sample(model, SeededStream{42, 8}, 1000);
  CHECK(a == b);
  CHECK(a != c);
  for (double g : a) CHECK(g >= 0.001);
}

TEST_CASE("two-atom sampling respects the probabilities") {
  const FadingModel disc = validate(FadingModel::discrete({{1.0, 0.5}, {4.0, 0.5}}));
  long long ones = 0;
  const auto draws = sample(disc, SeededStream{7, 0}, 100000);
  for (double g : draws) {
    CHECK((g == 1.0 || g == 4.0));
    if (g == 1.0) ++ones;
  }
  CHECK(ones > 49000);
  CHECK(ones < 51000);
}

TEST_CASE("monte carlo means agree with quadrature expectations") {
  const FadingModel model = trunc_exp();
  // 1/g, sqrt(g), and the opportunism weight g^{1/(n-1)} at n = 2.67.
  const std::vector<std::pair<const char*, double (*)(double)>> functionals = {
      {"inverse", [](double g) { return 1.0 / g; }},
      {"sqrt", [](double g) { return std::sqrt(g); }},
      {"weight", [](double g) { return std::exp(std::log(g) / (2.67 - 1.0)); }}};
  int stream = 100;
  for (const auto& [name, f] : functionals) {
    CAPTURE(name);
    const double reference = expect(model, f);
    MeanAccumulator acc;
    const auto draws = sample(model, SeededStream{2024, static_cast<std::uint64_t>(stream++)},
                              1000000);
    for (double g : draws) acc.add(f(g));
    CHECK(std::abs(acc.mean() - reference) <= 4.0 * acc.std_error());
  }
}

TEST_CASE("ten million draws pin the heavy-tailed inverse moment") {
  const FadingModel model = trunc_exp();
  const double reference = expect(model, [](double g) { return 1.0 / g; });
  MeanAccumulator acc;
  for (int chunk = 0; chunk < 10; ++chunk) {
    const auto draws =
        sample(model, SeededStream{77, static_cast<std::uint64_t>(chunk)}, 1000000);
    for (double g : draws) acc.add(1.0 / g);
  }
  CHECK(std::abs(acc.mean() - reference) <= 3.0 * acc.std_error());
}

TEST_CASE("tabulated sampling matches its own expectation") {
  std::vector<double> gains;
  std::vector<double> dens;
  for (int i = 0; i <= 400; ++i) {
    const double g = 0.5 + 2.5 * i / 400.0;
    gains.push_back(g);
    dens.push_back(std::exp(-g));
  }
  const FadingModel tab = validate(FadingModel::tabulated_pdf(gains, dens));
  const double reference = expect(tab, [](double g) { return g; });
  MeanAccumulator acc;
  const auto draws = sample(tab, SeededStream{5, 0}, 200000);
  for (double g : draws) {
    CHECK(g >= 0.5);
    CHECK(g <= 3.0);
    acc.add(g);
  }
  CHECK(std::abs(acc.mean() - reference) <= 4.0 * acc.std_error());
}

TEST_CASE("json round trip") {
  const nlohmann::json doc = {
      {"kind", "truncated_exponential"}, {"threshold", 0.001}, {"rate", 1.0}};
  const FadingModel model = validate(FadingModel::from_json(doc));
  CHECK(model.kind() == FadingKind::TruncatedExponential);
  CHECK(model.threshold() == 0.001);
  CHECK(model.rate() == 1.0);
  const FadingModel round = validate(FadingModel::from_json(model.to_json()));
  CHECK(round.threshold() == model.threshold());

  const FadingModel disc = validate(FadingModel::discrete({{1.0, 0.25}, {4.0, 0.75}}));
  const FadingModel disc_round = validate(FadingModel::from_json(disc.to_json()));
  CHECK(disc_round.atoms()[1].prob == doctest::Approx(0.75).epsilon(1e-15));
  CHECK_THROWS_AS(FadingModel::from_json(nlohmann::json{{"kind", "rayleigh"}}),
                  sched::InvalidModel);
}

TEST_SUITE_END();
