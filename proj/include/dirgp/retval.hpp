#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "dirgp/basis.hpp"
#include "dirgp/cases.hpp"
#include "dirgp/rng.hpp"
#include "dirgp/state.hpp"

namespace dirgp {

// Directional octants are half-open 45-degree sectors [c - 22.5, c + 22.5)
// centred on 0, 45, ..., 315 degrees; sector index 8 is omnidirectional.
inline constexpr int kNumOctants = 8;
inline constexpr int kOmniSector = 8;
inline constexpr int kNumSectors = 9;

int octant_of(double angle_deg);  // 0..7
const std::string& sector_name(int sector);  // "N", "NE", ..., "NW", "omni"
double sector_centre_deg(int octant);

// Values of the per-period maximum, one per simulation replicate, for one
// sector; an empty sector contributes the threshold value 0.
struct EmpiricalDistribution {
  int sector = kOmniSector;
  Eigen::VectorXd values;  // in replicate order, not sorted
};

struct ReturnSimConfig {
  double factor = 10.0;  // simulated span, in units of the return period
  int replicates = 1000;
  unsigned workers = 1;
};

struct ReturnDistributions {
  std::vector<EmpiricalDistribution> sectors;  // size 9, indexed by sector id
  std::int64_t infeasible_states = 0;  // parameter states rejected and redrawn
};

// Model-based: each replicate samples one parameter state uniformly from the
// draws, then simulates Poisson(factor * expected_total) events with
// directions from `rate` and sizes from the state's pointwise GPD.
ReturnDistributions simulate_return_distribution(
    const PosteriorDraws& draws, const BasisSpec& basis_xi, const BasisSpec& basis_nu,
    const std::function<double(double)>& rate, double expected_total,
    const ReturnSimConfig& config, const Rng& rng);

// Truth-based: the known case curves play the role of the parameter state.
ReturnDistributions simulate_return_distribution(const CaseSpec& truth,
                                                 const ReturnSimConfig& config,
                                                 const Rng& rng);

// Order-statistic percentile with linear interpolation: position
// q * (n - 1) between the sorted values.
double percentile(const Eigen::VectorXd& values, double q);

// The non-exceedance probability quoted for return values.
inline constexpr double kReturnPercentile = 0.375;

}  // namespace dirgp
