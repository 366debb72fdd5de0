#pragma once

#include <Eigen/Dense>

#include "dirgp/rng.hpp"

namespace dirgp {

// Exceedances of a fixed threshold, tagged with the direction at which each
// occurred. `period` is the observation span in units of the return period.
struct PeaksSample {
  Eigen::VectorXd angles_deg;  // in [0, 360)
  Eigen::VectorXd sizes;       // exceedance sizes, >= 0
  double period = 1.0;

  Eigen::Index size() const { return sizes.size(); }
  void validate() const;  // throws ContractError
};

// Generalised Pareto parameters per observation, in the (shape, adjusted
// scale) parameterisation nu = sigma * (1 + xi). Feasibility means nu > 0
// and 1 + xi > 0 everywhere.
struct PointwiseParams {
  Eigen::VectorXd xi;
  Eigen::VectorXd nu;
};

// Below this |xi| the likelihood and its shape gradient switch to series
// expansions about xi = 0.
inline constexpr double kXiTol = 1e-6;

double sigma_from_nu(double nu, double xi);  // throws DomainError
Eigen::VectorXd sigma_from_nu(const Eigen::VectorXd& nu, const Eigen::VectorXd& xi);

// Negative log-likelihood of the sample. Returns +infinity (rather than
// throwing) when parameters are infeasible or an observation falls outside
// the support, so optimisers and samplers can treat such states as rejected.
double neg_log_likelihood(const PeaksSample& sample, const PointwiseParams& params);

struct LoglikGradient {
  Eigen::VectorXd d_xi;  // per-observation d log f / d xi
  Eigen::VectorXd d_nu;  // per-observation d log f / d nu
};

// Throws DomainError when the state is infeasible or out of support.
LoglikGradient loglik_gradient(const PeaksSample& sample, const PointwiseParams& params);

struct FisherWeights {
  Eigen::VectorXd w_xi;  // E[-d2 log f / d xi2] = 1 / (1 + xi)^2
  Eigen::VectorXd w_nu;  // E[-d2 log f / d nu2] = 1 / (nu^2 (1 + 2 xi))
};

// Requires 1 + 2 xi > 0 for every observation (DomainError otherwise).
FisherWeights expected_fisher(const PointwiseParams& params);

// Quantile of GPD(xi, sigma) at probability u in [0, 1).
double gpd_quantile(double u, double xi, double sigma);
double gpd_cdf(double y, double xi, double sigma);
double sample_gpd(Rng& rng, double xi, double sigma);

}  // namespace dirgp
