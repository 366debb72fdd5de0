#include "dirgp/cases.hpp"

#include <algorithm>
#include <cmath>

#include "dirgp/errors.hpp"

namespace dirgp {

namespace {

constexpr double kDegToRad = M_PI / 180.0;

double wrap_diff(double a, double b) {
  double d = std::fmod(a - b, 360.0);
  if (d < -180.0) d += 360.0;
  if (d >= 180.0) d -= 360.0;
  return d;
}

// Trapezoid integral over one period on a fine grid; the integrand is
// periodic, so this is highly accurate for the smooth curves used here.
double integrate_period(const std::function<double(double)>& f) {
  constexpr int kCells = 36000;
  constexpr double kStep = 360.0 / kCells;
  double acc = 0.0;
  double prev = f(0.0);
  const double first = prev;
  for (int j = 1; j < kCells; ++j) {
    const double cur = f(j * kStep);
    acc += 0.5 * (prev + cur) * kStep;
    prev = cur;
  }
  acc += 0.5 * (prev + first) * kStep;
  return acc;
}

}  // namespace

double MixtureCurve::operator()(double angle_deg) const {
  double v = baseline;
  for (const auto& c : components) {
    const double d = wrap_diff(angle_deg, c.centre_deg);
    v += c.amplitude * std::exp(-0.5 * d * d / (c.width_deg * c.width_deg));
  }
  return v;
}

void MixtureCurve::validate() const {
  if (components.empty() || components.size() > 5) {
    throw ContractError("mixture curve needs between one and five components");
  }
  for (const auto& c : components) {
    if (!(c.width_deg > 0.0)) throw ContractError("mixture component width must be positive");
  }
}

void CaseSpec::validate() const {
  if (label.empty()) throw ContractError("case: label must not be empty");
  if (!(expected_total > 0.0)) throw ContractError("case: expected_total must be positive");
  constexpr int kGrid = 3600;
  for (int j = 0; j < kGrid; ++j) {
    const double theta = j * (360.0 / kGrid);
    if (!(scale(theta) > 0.0)) {
      throw ContractError("case '" + label + "': sigma not positive at theta=" +
                          std::to_string(theta));
    }
    if (!(1.0 + shape(theta) > 0.0)) {
      throw ContractError("case '" + label + "': 1 + xi not positive at theta=" +
                          std::to_string(theta));
    }
    if (!(rate(theta) >= 0.0)) {
      throw ContractError("case '" + label + "': negative rate at theta=" +
                          std::to_string(theta));
    }
  }
  const double total = integrate_period(rate);
  if (std::fabs(total - expected_total) > 1e-3 * expected_total) {
    throw ContractError("case '" + label + "': rate integrates to " + std::to_string(total) +
                        ", expected " + std::to_string(expected_total));
  }
}

namespace {

double case12_shape(double theta) {
  return -0.2 + std::sin((theta - 30.0) * kDegToRad) / 10.0;
}

double case12_scale(double theta) {
  const double t = theta * kDegToRad;
  return std::max(std::sin(t) + std::cos(2.0 * t) + 2.0, 0.01);
}

MixtureDefinition default_case3_definition() {
  MixtureDefinition def;
  // Occurrence rate concentrated away from 270 degrees.
  def.rate_shape.baseline = 0.02;
  def.rate_shape.components = {{1.0, 60.0, 40.0}, {0.7, 150.0, 50.0}};
  // Shape largest (and positive) near 30 degrees.
  def.shape.baseline = -0.2;
  def.shape.components = {{0.35, 30.0, 40.0}};
  // Scale with two broad lobes.
  def.scale.baseline = 0.6;
  def.scale.components = {{1.4, 120.0, 45.0}, {0.8, 230.0, 60.0}};
  return def;
}

}  // namespace

CaseSpec case_from_mixtures(const std::string& label, const MixtureDefinition& def,
                            double expected_total) {
  def.rate_shape.validate();
  def.shape.validate();
  def.scale.validate();
  const double mass = integrate_period(
      [&def](double t) { return std::max(def.rate_shape(t), 0.0); });
  if (!(mass > 0.0)) throw ContractError("case: rate mixture has no mass");
  CaseSpec spec;
  spec.label = label;
  spec.expected_total = expected_total;
  const MixtureCurve rate_shape = def.rate_shape;
  const double scale_factor = expected_total / mass;
  spec.rate = [rate_shape, scale_factor](double t) {
    return std::max(rate_shape(t), 0.0) * scale_factor;
  };
  spec.shape = def.shape;
  spec.scale = def.scale;
  spec.mixture = def;
  spec.validate();
  return spec;
}

CaseSpec builtin_case(int number) {
  if (number < 1 || number > 6) throw ContractError("builtin_case: number must be 1..6");
  const int base = (number - 1) % 3 + 1;
  const double factor = number > 3 ? 5.0 : 1.0;
  CaseSpec spec;
  spec.label = "Case" + std::to_string(number);
  spec.builtin_number = number;
  spec.expected_total = 1000.0 * factor;
  if (base == 1) {
    spec.rate = [factor](double) { return factor * 1000.0 / 360.0; };
    spec.shape = case12_shape;
    spec.scale = case12_scale;
  } else if (base == 2) {
    const double c_rho =
        integrate_period([](double t) { return std::max(std::sin(t * kDegToRad) + 1.1, 0.0); });
    spec.rate = [factor, c_rho](double t) {
      return factor * 1000.0 * std::max(std::sin(t * kDegToRad) + 1.1, 0.0) / c_rho;
    };
    spec.shape = case12_shape;
    spec.scale = case12_scale;
  } else {
    CaseSpec inner = case_from_mixtures(spec.label, default_case3_definition(),
                                        spec.expected_total);
    inner.builtin_number = number;
    return inner;
  }
  spec.validate();
  return spec;
}

TruthCurves truth_curves(const CaseSpec& spec, const Eigen::VectorXd& angles_deg) {
  TruthCurves tc;
  tc.angles_deg = angles_deg;
  tc.rate.resize(angles_deg.size());
  tc.xi.resize(angles_deg.size());
  tc.sigma.resize(angles_deg.size());
  for (Eigen::Index i = 0; i < angles_deg.size(); ++i) {
    tc.rate[i] = spec.rate(angles_deg[i]);
    tc.xi[i] = spec.shape(angles_deg[i]);
    tc.sigma[i] = spec.scale(angles_deg[i]);
  }
  return tc;
}

DirectionSampler::DirectionSampler(const std::function<double(double)>& rate) {
  const int cells = static_cast<int>(std::lround(360.0 / cell_));
  cum_.resize(cells);
  double acc = 0.0;
  double left = std::max(rate(0.0), 0.0);
  for (int j = 0; j < cells; ++j) {
    const double right_angle = (j + 1 == cells) ? 0.0 : (j + 1) * cell_;
    const double right = std::max(rate(right_angle), 0.0);
    acc += 0.5 * (left + right) * cell_;
    cum_[j] = acc;
    left = right;
  }
  total_ = acc;
  if (!(total_ > 0.0)) throw ContractError("direction sampler: rate has no mass");
}

double DirectionSampler::quantile(double u) const {
  if (!(u >= 0.0 && u < 1.0)) {
    throw DomainError("direction quantile: u must be in [0, 1)");
  }
  const double target = u * total_;
  const auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
  const auto j = static_cast<std::size_t>(it - cum_.begin());
  if (j >= cum_.size()) return std::nextafter(360.0, 0.0);
  const double lo_mass = (j == 0) ? 0.0 : cum_[j - 1];
  const double cell_mass = cum_[j] - lo_mass;
  const double frac = cell_mass > 0.0 ? (target - lo_mass) / cell_mass : 0.0;
  const double angle = (static_cast<double>(j) + frac) * cell_;
  return std::min(angle, std::nextafter(360.0, 0.0));
}

double DirectionSampler::mass_between(double lo_deg, double hi_deg) const {
  const auto cum_at = [this](double angle) {
    const double a = std::clamp(angle, 0.0, 360.0);
    const double pos = a / cell_;
    const auto j = static_cast<std::size_t>(std::floor(pos));
    if (j >= cum_.size()) return total_;
    const double lo_mass = (j == 0) ? 0.0 : cum_[j - 1];
    return lo_mass + (cum_[j] - lo_mass) * (pos - static_cast<double>(j));
  };
  if (hi_deg >= lo_deg) return cum_at(hi_deg) - cum_at(lo_deg);
  // Wrapped sector.
  return (total_ - cum_at(lo_deg)) + cum_at(hi_deg);
}

PeaksSample simulate_sample(const CaseSpec& spec, Rng& rng, std::optional<int> fixed_n,
                            double period) {
  if (!(period > 0.0)) throw ContractError("simulate_sample: period must be positive");
  if (fixed_n && *fixed_n < 0) throw ContractError("simulate_sample: fixed_n must be >= 0");
  const DirectionSampler dirs(spec.rate);
  const std::int64_t n =
      fixed_n ? *fixed_n : rng.poisson(spec.expected_total * period);
  PeaksSample sample;
  sample.period = period;
  sample.angles_deg.resize(n);
  sample.sizes.resize(n);
  for (std::int64_t i = 0; i < n; ++i) {
    const double theta = dirs.sample(rng);
    sample.angles_deg[i] = theta;
    sample.sizes[i] = sample_gpd(rng, spec.shape(theta), spec.scale(theta));
  }
  sample.validate();
  return sample;
}

}  // namespace dirgp
