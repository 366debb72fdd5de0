#pragma once

#include <Eigen/Dense>

namespace dirgp {

struct CoefficientState;
struct PosteriorDraws;

// Two-sample Kolmogorov-Smirnov distance: the supremum over the pooled
// support of the absolute difference of the right-continuous ECDFs.
double ks_distance(const Eigen::VectorXd& f0, const Eigen::VectorXd& f1);

// Cramer-von Mises discrepancy of f1 from reference f0: the mean over f0's
// sample points of the squared ECDF difference. Asymmetric by construction.
double cvm_distance(const Eigen::VectorXd& f0, const Eigen::VectorXd& f1);

// KL cap returned (instead of infinity) for essentially disjoint samples.
inline constexpr double kKlCap = 1e6;

// KL divergence KL(f0 || f1) between two samples: both ECDFs are linearly
// interpolated onto a shared grid of `grid_size` points spanning the pooled
// range, differenced into bin densities with a 1e-12 floor, then summed as
// sum f0 log(f0 / f1) dx. Result is clamped to [0 - eps, kKlCap].
double kl_divergence(const Eigen::VectorXd& f0, const Eigen::VectorXd& f1,
                     int grid_size = 1000);

// Effective sample size of a scalar chain of length m >= 10: the Geyer
// initial-positive-sequence estimate with biased autocovariances summed
// directly up to lag m/2 and the result clamped to (0, m]. A zero-variance
// chain returns m.
double effective_sample_size(const Eigen::VectorXd& chain);

// min over monitored scalars (every coefficient and both precisions) of the
// ESS, divided by elapsed hours; for bootstrap draws, replicates per hour.
double ess_per_hour(const PosteriorDraws& draws);
// The min-ESS alone (MCMC draws only).
double min_effective_sample_size(const PosteriorDraws& draws);

}  // namespace dirgp
