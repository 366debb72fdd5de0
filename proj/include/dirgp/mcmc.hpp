#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>

#include "dirgp/mle.hpp"
#include "dirgp/rng.hpp"
#include "dirgp/state.hpp"

namespace dirgp {

enum class SamplerKind { MetropolisHastings, Mmala };

struct ChainConfig {
  SamplerKind sampler = SamplerKind::Mmala;
  int n_iterations = 2500;
  int burn_in = 500;
  double step_xi = 0.1;   // proposal scale epsilon, adapted during burn-in
  double step_nu = 0.1;
  double kappa = 1.0;     // random-walk preconditioner weight (MH only)
  double prior_a = 1e-3;  // Gamma(a, b) prior on both precisions
  double prior_b = 1e-3;
  double adapt_target = 0.25;  // Robbins-Monro acceptance target
  std::uint64_t seed = 1;

  void validate() const;
};

enum class CurveBlock { Xi, Nu };

// Conjugate draw for one precision: Gamma(a + p/2, b + beta' R beta / 2),
// in shape-rate form.
double gibbs_update_precision(const Eigen::VectorXd& beta, const Eigen::MatrixXd& r,
                              double a, double b, Rng& rng);

// Log of the full conditional of one coefficient block (likelihood minus its
// own penalty; terms free of the block are dropped). -infinity if infeasible.
double log_conditional(const Design& design, const CoefficientState& state, CurveBlock block);

// Gradient of log_conditional with respect to the block's coefficients.
// Throws DomainError on an infeasible state.
Eigen::VectorXd grad_log_conditional(const Design& design, const CoefficientState& state,
                                     CurveBlock block);

// Symmetric random-walk proposal beta + (B'B + kappa R)^{-1} eps z with the
// preconditioner factored once per chain.
class MhProposal {
 public:
  MhProposal(const Eigen::MatrixXd& b, const Eigen::MatrixXd& r, double kappa);
  Eigen::VectorXd propose(const Eigen::VectorXd& beta, double eps, Rng& rng) const;
  const Eigen::MatrixXd& preconditioner() const { return matrix_; }

 private:
  Eigen::MatrixXd matrix_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

struct MmalaStep {
  Eigen::VectorXd proposal;
  double log_q_forward = 0.0;
};

// Simplified manifold MALA proposal: a Gaussian centred at
// beta + (eps^2 / 2) H^{-1} grad with covariance eps^2 H^{-1}, where
// H = B' W B + lambda R is the expected-information metric at `state`.
MmalaStep mmala_propose(const Design& design, const CoefficientState& state,
                        CurveBlock block, double eps, Rng& rng);

// Log-density of `to` under the mMALA kernel launched from `from_state`'s
// block value; used for the reverse move in the acceptance ratio.
double mmala_log_q(const Design& design, const CoefficientState& from_state,
                   const Eigen::VectorXd& to, CurveBlock block, double eps);

// One uniform draw against min(1, exp(log_ratio)).
bool metropolis_accept(double log_ratio, Rng& rng);

// Metropolis-within-Gibbs: per iteration the nu block, the xi block, then
// conjugate draws of lambda_nu and lambda_xi. Proposal scales adapt during
// burn-in only. Bit-reproducible for a fixed seed and config.
PosteriorDraws run_chain(const Design& design, const ChainConfig& config,
                         std::optional<CoefficientState> init = std::nullopt);

}  // namespace dirgp
