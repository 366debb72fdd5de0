#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace dirgp {

// One point in the model's parameter space: coefficients for both curves
// plus the roughness precisions.
struct CoefficientState {
  Eigen::VectorXd beta_xi;
  Eigen::VectorXd beta_nu;
  double lambda_xi = 1.0;
  double lambda_nu = 1.0;
};

enum class DrawsSource { Mcmc, Bootstrap };

// A set of parameter states carrying its own uncertainty semantics: MCMC
// draws from a posterior, or bootstrap refits around a penalised MLE.
struct PosteriorDraws {
  DrawsSource source = DrawsSource::Mcmc;
  std::vector<CoefficientState> states;
  double elapsed_hours = 0.0;

  // MCMC bookkeeping (sampling phase only).
  int n_iterations = 0;
  int burn_in = 0;
  std::int64_t proposals_xi = 0;
  std::int64_t accepts_xi = 0;
  std::int64_t proposals_nu = 0;
  std::int64_t accepts_nu = 0;
  double final_step_xi = 0.0;
  double final_step_nu = 0.0;

  // Bootstrap bookkeeping: per-replicate convergence flags.
  std::vector<std::uint8_t> replicate_converged;
};

}  // namespace dirgp
