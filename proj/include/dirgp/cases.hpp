#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dirgp/gpd.hpp"
#include "dirgp/rng.hpp"

namespace dirgp {

// One wrapped-Gaussian bump: amplitude * exp(-d^2 / (2 width^2)) where d is
// the circular distance (degrees) from the centre.
struct MixtureComponent {
  double amplitude = 1.0;
  double centre_deg = 0.0;
  double width_deg = 30.0;
};

// baseline + sum of one to five bumps; the building block for configurable
// truth curves.
struct MixtureCurve {
  double baseline = 0.0;
  std::vector<MixtureComponent> components;

  double operator()(double angle_deg) const;
  void validate() const;
};

struct MixtureDefinition {
  MixtureCurve rate_shape;  // unnormalised; scaled so the rate integrates to expected_total
  MixtureCurve shape;       // xi(theta)
  MixtureCurve scale;       // sigma(theta)
};

// A synthetic truth: directional occurrence rate (events per degree per
// return period) plus pointwise GPD parameters.
struct CaseSpec {
  std::string label;
  std::function<double(double)> rate;
  std::function<double(double)> shape;
  std::function<double(double)> scale;
  double expected_total = 1000.0;

  int builtin_number = 0;                    // 1..6 for built-ins, 0 for custom
  std::optional<MixtureDefinition> mixture;  // present for mixture-defined cases

  // Checks positivity of sigma, 1 + xi > 0 and rate >= 0 on a 0.1-degree
  // grid, and that the rate integrates to expected_total within 0.1%.
  void validate() const;
};

// Cases 1-3 have an expected 1000 events per period; cases 4-6 are the same
// curves with five times the rate.
CaseSpec builtin_case(int number);

CaseSpec case_from_mixtures(const std::string& label, const MixtureDefinition& def,
                            double expected_total);

struct TruthCurves {
  Eigen::VectorXd angles_deg;
  Eigen::VectorXd rate;
  Eigen::VectorXd xi;
  Eigen::VectorXd sigma;
};

TruthCurves truth_curves(const CaseSpec& spec, const Eigen::VectorXd& angles_deg);

// Inverse-CDF sampler for event directions, tabulated on a 0.05-degree grid
// with the density treated as constant within each cell.
class DirectionSampler {
 public:
  explicit DirectionSampler(const std::function<double(double)>& rate);

  double quantile(double u) const;  // u in [0, 1)
  double sample(Rng& rng) const { return quantile(rng.uniform()); }
  double total_mass() const { return total_; }
  // Integral of the rate over [lo, hi) in degrees, from the same table.
  double mass_between(double lo_deg, double hi_deg) const;

 private:
  std::vector<double> cum_;  // cumulative mass at cell right edges
  double cell_ = 0.05;
  double total_ = 0.0;
};

// Draws one sample of threshold exceedances: the event count is fixed_n if
// given, otherwise Poisson(expected_total * period); directions follow the
// normalised rate and sizes the pointwise GPD.
PeaksSample simulate_sample(const CaseSpec& spec, Rng& rng,
                            std::optional<int> fixed_n = std::nullopt,
                            double period = 1.0);

}  // namespace dirgp
