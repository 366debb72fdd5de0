#include "dirgp/retval.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "dirgp/errors.hpp"
#include "dirgp/gpd.hpp"
#include "dirgp/parallel.hpp"

namespace dirgp {

int octant_of(double angle_deg) {
  double a = std::fmod(angle_deg + 22.5, 360.0);
  if (a < 0.0) a += 360.0;
  const int k = static_cast<int>(a / 45.0);
  return k >= kNumOctants ? kNumOctants - 1 : k;
}

const std::string& sector_name(int sector) {
  static const std::array<std::string, kNumSectors> names = {
      "N", "NE", "E", "SE", "S", "SW", "W", "NW", "omni"};
  if (sector < 0 || sector >= kNumSectors) throw ContractError("sector_name: bad sector");
  return names[static_cast<std::size_t>(sector)];
}

double sector_centre_deg(int octant) {
  if (octant < 0 || octant >= kNumOctants) throw ContractError("sector_centre_deg: bad octant");
  return 45.0 * octant;
}

namespace {

// One replicate's sector maxima. Returns false when the supplied parameter
// state is infeasible at some simulated direction.
template <class ParamsAt>
bool replicate_maxima(const DirectionSampler& dirs, double mean_events,
                      const ParamsAt& params_at, Rng& rng,
                      std::array<double, kNumSectors>& maxima) {
  maxima.fill(0.0);
  const std::int64_t k = rng.poisson(mean_events);
  for (std::int64_t e = 0; e < k; ++e) {
    const double theta = dirs.sample(rng);
    double xi = 0.0;
    double sigma = 0.0;
    if (!params_at(theta, xi, sigma)) return false;
    const double y = sample_gpd(rng, xi, sigma);
    const int oct = octant_of(theta);
    maxima[oct] = std::max(maxima[oct], y);
    maxima[kOmniSector] = std::max(maxima[kOmniSector], y);
  }
  return true;
}

template <class StateParams>
ReturnDistributions simulate_impl(const DirectionSampler& dirs, double mean_events,
                                  const StateParams& params_for_state,
                                  std::int64_t n_states, const ReturnSimConfig& config,
                                  const Rng& rng) {
  if (config.replicates < 1) throw ContractError("return simulation: replicates must be >= 1");
  if (!(config.factor > 0.0)) throw ContractError("return simulation: factor must be positive");
  ReturnDistributions out;
  out.sectors.resize(kNumSectors);
  for (int s = 0; s < kNumSectors; ++s) {
    out.sectors[s].sector = s;
    out.sectors[s].values.resize(config.replicates);
  }
  std::vector<std::int64_t> rejected(config.replicates, 0);
  parallel_for(config.replicates, config.workers, [&](std::size_t r) {
    Rng sub = rng.substream(r);
    std::array<double, kNumSectors> maxima{};
    // A state that turns out infeasible at a simulated direction is redrawn
    // (with a fresh event stream) and counted.
    for (int attempt = 0;; ++attempt) {
      if (attempt >= 100) {
        throw NumericError("return simulation: 100 consecutive infeasible states");
      }
      const std::int64_t idx =
          n_states > 1 ? static_cast<std::int64_t>(sub.uniform_int(n_states)) : 0;
      const auto params_at = params_for_state(idx);
      if (replicate_maxima(dirs, mean_events, params_at, sub, maxima)) break;
      ++rejected[r];
    }
    for (int s = 0; s < kNumSectors; ++s) out.sectors[s].values[r] = maxima[s];
  });
  for (const auto r : rejected) out.infeasible_states += r;
  return out;
}

}  // namespace

ReturnDistributions simulate_return_distribution(
    const PosteriorDraws& draws, const BasisSpec& basis_xi, const BasisSpec& basis_nu,
    const std::function<double(double)>& rate, double expected_total,
    const ReturnSimConfig& config, const Rng& rng) {
  if (draws.states.empty()) throw ContractError("return simulation: no parameter states");
  const DirectionSampler dirs(rate);
  const double mean_events = config.factor * expected_total;
  const auto params_for_state = [&](std::int64_t idx) {
    const CoefficientState& st = draws.states[static_cast<std::size_t>(idx)];
    return [&basis_xi, &basis_nu, &st](double theta, double& xi, double& sigma) {
      xi = curve_value(basis_xi, st.beta_xi, theta);
      const double nu = curve_value(basis_nu, st.beta_nu, theta);
      if (!(1.0 + xi > 0.0) || !(nu > 0.0)) return false;
      sigma = nu / (1.0 + xi);
      return true;
    };
  };
  return simulate_impl(dirs, mean_events, params_for_state,
                       static_cast<std::int64_t>(draws.states.size()), config, rng);
}

ReturnDistributions simulate_return_distribution(const CaseSpec& truth,
                                                 const ReturnSimConfig& config,
                                                 const Rng& rng) {
  const DirectionSampler dirs(truth.rate);
  const double mean_events = config.factor * truth.expected_total;
  const auto params_for_state = [&truth](std::int64_t) {
    return [&truth](double theta, double& xi, double& sigma) {
      xi = truth.shape(theta);
      sigma = truth.scale(theta);
      return sigma > 0.0 && 1.0 + xi > 0.0;
    };
  };
  return simulate_impl(dirs, mean_events, params_for_state, 1, config, rng);
}

double percentile(const Eigen::VectorXd& values, double q) {
  if (values.size() == 0) throw ContractError("percentile: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw ContractError("percentile: q must be in [0, 1]");
  std::vector<double> sorted(values.data(), values.data() + values.size());
  std::sort(sorted.begin(), sorted.end());
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace dirgp
