#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "dirgp/cases.hpp"
#include "dirgp/errors.hpp"
#include "dirgp/rng.hpp"

using namespace dirgp;

namespace {

constexpr double kDeg = M_PI / 180.0;

// Trapezoid integral of a periodic curve, independent of the library's own.
double integrate(const std::function<double(double)>& f, int cells = 72000) {
  const double h = 360.0 / cells;
  double acc = 0.0;
  for (int j = 0; j < cells; ++j) {
    acc += 0.5 * (f(j * h) + f((j + 1) * h)) * h;
  }
  return acc;
}

}  // namespace

TEST_CASE("case 1: flat rate, known shape and scale values") {
  const CaseSpec c = builtin_case(1);
  CHECK(c.label == "Case1");
  CHECK(c.builtin_number == 1);
  CHECK(c.expected_total == 1000.0);
  for (const double theta : {0.0, 77.3, 200.0, 359.9}) {
    CHECK(c.rate(theta) == doctest::Approx(1000.0 / 360.0).epsilon(1e-14));
  }
  // xi(theta) = -0.2 + sin(theta - 30)/10
  CHECK(c.shape(120.0) == doctest::Approx(-0.1).epsilon(1e-13));
  CHECK(c.shape(30.0) == doctest::Approx(-0.2).epsilon(1e-13));
  CHECK(c.shape(300.0) == doctest::Approx(-0.3).epsilon(1e-13));
  // sigma(theta) = max(sin th + cos 2th + 2, 0.01)
  CHECK(c.scale(0.0) == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(c.scale(90.0) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(c.scale(270.0) == doctest::Approx(0.01).epsilon(1e-13));  // clamp active
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("case 2: sinusoidal rate normalised to the expected count") {
  const CaseSpec c = builtin_case(2);
  CHECK(integrate(c.rate) == doctest::Approx(1000.0).epsilon(1e-6));
  // proportional to max(sin theta + 1.1, 0): ratio at 90 vs 270 is 21
  CHECK(c.rate(90.0) / c.rate(270.0) == doctest::Approx(21.0).epsilon(1e-9));
  // rate stays nonnegative through the near-zero trough
  for (double t = 250.0; t <= 290.0; t += 0.5) CHECK(c.rate(t) >= 0.0);
  // shape and scale shared with case 1
  const CaseSpec c1 = builtin_case(1);
  for (const double theta : {12.0, 140.0, 265.0}) {
    CHECK(c.shape(theta) == c1.shape(theta));
    CHECK(c.scale(theta) == c1.scale(theta));
  }
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("case 3: mixture-built truth validates and carries its definition") {
  const CaseSpec c = builtin_case(3);
  CHECK(c.mixture.has_value());
  CHECK(integrate(c.rate) == doctest::Approx(1000.0).epsilon(1e-6));
  // the shape bump peaks at its centre: baseline -0.2 plus amplitude 0.35
  CHECK(c.shape(30.0) == doctest::Approx(0.15).epsilon(1e-12));
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("cases 4 to 6 are the first three at five times the rate") {
  for (int k = 4; k <= 6; ++k) {
    const CaseSpec hi = builtin_case(k);
    const CaseSpec lo = builtin_case(k - 3);
    CHECK(hi.expected_total == 5000.0);
    CHECK(hi.label == "Case" + std::to_string(k));
    for (const double theta : {0.0, 45.5, 123.0, 288.8}) {
      CHECK(hi.rate(theta) == doctest::Approx(5.0 * lo.rate(theta)).epsilon(1e-12));
      CHECK(hi.shape(theta) == doctest::Approx(lo.shape(theta)).epsilon(1e-14));
      CHECK(hi.scale(theta) == doctest::Approx(lo.scale(theta)).epsilon(1e-14));
    }
    CHECK_NOTHROW(hi.validate());
  }
  CHECK_THROWS_AS(builtin_case(0), ContractError);
  CHECK_THROWS_AS(builtin_case(7), ContractError);
}

TEST_CASE("mixture curve evaluates wrapped gaussian bumps") {
  MixtureCurve curve;
  curve.baseline = 0.5;
  curve.components = {{2.0, 350.0, 20.0}};
  // theta = 10 is 20 degrees from the centre across the wrap point
  CHECK(curve(10.0) == doctest::Approx(0.5 + 2.0 * std::exp(-0.5)).epsilon(1e-13));
  CHECK(curve(350.0) == doctest::Approx(2.5).epsilon(1e-13));
  // 180 degrees away: amplitude * exp(-0.5 * 81) is negligible but exact
  CHECK(curve(170.0) ==
        doctest::Approx(0.5 + 2.0 * std::exp(-0.5 * 81.0)).epsilon(1e-13));
  // periodicity of the wrap
  CHECK(curve(45.0) == doctest::Approx(curve(45.0 + 360.0)).epsilon(1e-13));
  CHECK(curve(45.0) == doctest::Approx(curve(45.0 - 720.0)).epsilon(1e-13));

  MixtureCurve bad;
  CHECK_THROWS_AS(bad.validate(), ContractError);  // no components
  bad.components.assign(6, MixtureComponent{});
  CHECK_THROWS_AS(bad.validate(), ContractError);  // too many
  bad.components.assign(1, MixtureComponent{1.0, 0.0, 0.0});
  CHECK_THROWS_AS(bad.validate(), ContractError);  // zero width
}

TEST_CASE("custom mixture cases normalise the clamped rate shape") {
  MixtureDefinition def;
  def.rate_shape.baseline = -0.3;  // negative between bumps, clamped to zero
  def.rate_shape.components = {{1.5, 90.0, 25.0}};
  def.shape.baseline = 0.1;
  def.shape.components = {{-0.2, 180.0, 50.0}};
  def.scale.baseline = 1.0;
  def.scale.components = {{0.5, 0.0, 30.0}};
  const CaseSpec c = case_from_mixtures("west-bump", def, 250.0);
  CHECK(c.label == "west-bump");
  CHECK(c.builtin_number == 0);
  CHECK(integrate(c.rate) == doctest::Approx(250.0).epsilon(1e-6));
  CHECK(c.rate(270.0) == 0.0);  // clamp region
  const double peak = c.rate(90.0);
  CHECK(peak > 0.0);
  // normalisation preserves the shape: rate is proportional to max(mix, 0)
  CHECK(c.rate(100.0) / peak ==
        doctest::Approx(std::max(def.rate_shape(100.0), 0.0) /
                        std::max(def.rate_shape(90.0), 0.0))
            .epsilon(1e-12));

  MixtureDefinition hollow = def;
  hollow.rate_shape.baseline = -5.0;
  CHECK_THROWS_AS(case_from_mixtures("hollow", hollow, 100.0), ContractError);
}

TEST_CASE("case validation rejects broken truths") {
  CaseSpec spec;
  spec.label = "broken";
  spec.expected_total = 360.0;
  spec.rate = [](double) { return 1.0; };
  spec.shape = [](double) { return 0.1; };
  spec.scale = [](double t) { return t < 100.0 ? 1.0 : 0.0; };
  CHECK_THROWS_AS(spec.validate(), ContractError);

  spec.scale = [](double) { return 1.0; };
  spec.shape = [](double t) { return t > 200.0 ? -1.5 : 0.0; };
  CHECK_THROWS_AS(spec.validate(), ContractError);

  spec.shape = [](double) { return 0.0; };
  spec.rate = [](double t) { return t < 50.0 ? -0.1 : 1.0; };
  CHECK_THROWS_AS(spec.validate(), ContractError);

  spec.rate = [](double) { return 1.0; };
  spec.expected_total = 500.0;  // integral is 360
  CHECK_THROWS_AS(spec.validate(), ContractError);

  spec.expected_total = 360.0;
  CHECK_NOTHROW(spec.validate());
  spec.label = "";
  CHECK_THROWS_AS(spec.validate(), ContractError);
}

TEST_CASE("truth curves tabulate the spec pointwise") {
  const CaseSpec c = builtin_case(2);
  Eigen::VectorXd grid(5);
  grid << 0.0, 60.0, 133.7, 270.0, 359.0;
  const TruthCurves tc = truth_curves(c, grid);
  REQUIRE(tc.angles_deg.size() == 5);
  for (Eigen::Index i = 0; i < 5; ++i) {
    CHECK(tc.rate[i] == c.rate(grid[i]));
    CHECK(tc.xi[i] == c.shape(grid[i]));
    CHECK(tc.sigma[i] == c.scale(grid[i]));
  }
}

TEST_CASE("direction sampler: uniform rate gives the identity quantile") {
  const DirectionSampler s([](double) { return 2.0; });
  CHECK(s.total_mass() == doctest::Approx(720.0).epsilon(1e-12));
  for (const double u : {0.0, 0.1, 0.25, 0.5, 0.9, 0.999}) {
    CHECK(s.quantile(u) == doctest::Approx(360.0 * u).epsilon(1e-10));
  }
  CHECK(s.quantile(0.9999999) < 360.0);
  CHECK_THROWS_AS(s.quantile(1.0), DomainError);
  CHECK_THROWS_AS(s.quantile(-0.01), DomainError);
  CHECK(s.mass_between(0.0, 90.0) == doctest::Approx(180.0).epsilon(1e-12));
  // wrapped sector
  CHECK(s.mass_between(350.0, 10.0) == doctest::Approx(40.0).epsilon(1e-12));
  CHECK(s.mass_between(10.0, 10.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("direction sampler mass matches an independent integral") {
  const CaseSpec c = builtin_case(2);
  const DirectionSampler s(c.rate);
  CHECK(s.total_mass() == doctest::Approx(1000.0).epsilon(1e-5));
  const auto band = [&c](double lo, double hi) {
    return integrate([&](double t) {
      const double a = std::fmod(t, 360.0);
      const bool in = lo <= hi ? (a >= lo && a < hi) : (a >= lo || a < hi);
      return in ? c.rate(a) : 0.0;
    });
  };
  // indicator integrand is only piecewise smooth; tolerance reflects the grid
  CHECK(s.mass_between(30.0, 120.0) == doctest::Approx(band(30.0, 120.0)).epsilon(1e-3));
  CHECK(s.mass_between(300.0, 45.0) == doctest::Approx(band(300.0, 45.0)).epsilon(1e-3));
}

TEST_CASE("direction sampler round trip through the quantile") {
  const CaseSpec c = builtin_case(3);
  const DirectionSampler s(c.rate);
  for (const double u : {0.05, 0.3, 0.62, 0.97}) {
    const double theta = s.quantile(u);
    CHECK(s.mass_between(0.0, theta) ==
          doctest::Approx(u * s.total_mass()).epsilon(1e-8));
  }
  // quantile is nondecreasing
  double prev = s.quantile(0.0);
  for (int k = 1; k <= 200; ++k) {
    const double cur = s.quantile(k / 201.0);
    CHECK(cur >= prev);
    prev = cur;
  }
}

TEST_CASE("sampled directions follow the rate across octants") {
  const CaseSpec c = builtin_case(2);
  const DirectionSampler s(c.rate);
  Rng rng(61);
  const int n = 20000;
  std::vector<int> counts(8, 0);
  for (int i = 0; i < n; ++i) {
    const double theta = s.sample(rng);
    counts[static_cast<int>(theta / 45.0)] += 1;
  }
  for (int k = 0; k < 8; ++k) {
    const double p = s.mass_between(45.0 * k, 45.0 * (k + 1)) / s.total_mass();
    const double se = std::sqrt(p * (1.0 - p) * n);
    CHECK(std::fabs(counts[k] - n * p) < 5.0 * se + 3.0);
  }
}

TEST_CASE("simulated samples have the right count behaviour") {
  const CaseSpec c = builtin_case(1);
  Rng rng(62);
  const PeaksSample fixed = simulate_sample(c, rng, 500);
  CHECK(fixed.angles_deg.size() == 500);
  CHECK(fixed.sizes.size() == 500);
  CHECK(fixed.period == 1.0);
  for (Eigen::Index i = 0; i < 500; ++i) {
    CHECK(fixed.angles_deg[i] >= 0.0);
    CHECK(fixed.angles_deg[i] < 360.0);
    CHECK(fixed.sizes[i] >= 0.0);
  }
  const PeaksSample empty = simulate_sample(c, rng, 0);
  CHECK(empty.angles_deg.size() == 0);

  // Poisson counts: mean over replicates near expected_total * period
  const double period = 0.5;
  const int reps = 100;
  double total = 0.0;
  for (int r = 0; r < reps; ++r) {
    total += static_cast<double>(simulate_sample(c, rng, std::nullopt, period).sizes.size());
  }
  const double mean_n = total / reps;
  const double se = std::sqrt(500.0 / reps);
  CHECK(std::fabs(mean_n - 500.0) < 5.0 * se);

  CHECK_THROWS_AS(simulate_sample(c, rng, std::nullopt, 0.0), ContractError);
  CHECK_THROWS_AS(simulate_sample(c, rng, -1), ContractError);
}

TEST_CASE("simulated sizes match the pointwise distribution in a narrow band") {
  // Near theta = 0 case 1 has xi about -0.2 + sin(-30)/10 and sigma about 3;
  // a 2-degree band is narrow enough to treat the parameters as constant.
  const CaseSpec c = builtin_case(1);
  Rng rng(63);
  std::vector<double> band;
  while (band.size() < 2000) {
    const PeaksSample s = simulate_sample(c, rng, 4000);
    for (Eigen::Index i = 0; i < s.sizes.size(); ++i) {
      if (s.angles_deg[i] < 2.0) band.push_back(s.sizes[i]);
    }
  }
  const double xi = c.shape(1.0);
  const double sigma = c.scale(1.0);
  // Kolmogorov test against the band-centre GPD
  std::sort(band.begin(), band.end());
  double d = 0.0;
  const double n = static_cast<double>(band.size());
  for (std::size_t i = 0; i < band.size(); ++i) {
    const double f = gpd_cdf(band[i], xi, sigma);
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    d = std::max(d, std::max(std::fabs(f - lo), std::fabs(f - hi)));
  }
  // parameters drift slightly across the band, so allow more than 1.63/sqrt(n)
  CHECK(d < 0.06);
}
