#include "dirgp/mcmc.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "dirgp/errors.hpp"

namespace dirgp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogTwoPi = 1.8378770664093453;

const Eigen::MatrixXd& block_basis(const Design& d, CurveBlock b) {
  return b == CurveBlock::Xi ? d.b_xi : d.b_nu;
}
const Eigen::MatrixXd& block_penalty(const Design& d, CurveBlock b) {
  return b == CurveBlock::Xi ? d.r_xi : d.r_nu;
}
const Eigen::VectorXd& block_beta(const CoefficientState& s, CurveBlock b) {
  return b == CurveBlock::Xi ? s.beta_xi : s.beta_nu;
}
Eigen::VectorXd& block_beta(CoefficientState& s, CurveBlock b) {
  return b == CurveBlock::Xi ? s.beta_xi : s.beta_nu;
}
double block_lambda(const CoefficientState& s, CurveBlock b) {
  return b == CurveBlock::Xi ? s.lambda_xi : s.lambda_nu;
}

// Expected-information metric of one block at the current state:
// H = B' W B + lambda R with the clamped working weights.
Eigen::LLT<Eigen::MatrixXd> block_metric(const Design& d, const CoefficientState& s,
                                         CurveBlock b, Eigen::VectorXd* grad_out) {
  const PointwiseParams p = curves_at_sample(d, s);
  const LoglikGradient g = loglik_gradient(d.sample, p);
  const FisherWeights w = fisher_clamped(p);
  const Eigen::MatrixXd& basis = block_basis(d, b);
  const Eigen::MatrixXd& r = block_penalty(d, b);
  const double lambda = block_lambda(s, b);
  const Eigen::VectorXd& gvec = b == CurveBlock::Xi ? g.d_xi : g.d_nu;
  const Eigen::VectorXd& wvec = b == CurveBlock::Xi ? w.w_xi : w.w_nu;
  if (grad_out) {
    *grad_out = basis.transpose() * gvec - lambda * (r * block_beta(s, b));
  }
  const Eigen::MatrixXd h = basis.transpose() * wvec.asDiagonal() * basis + lambda * r;
  Eigen::LLT<Eigen::MatrixXd> llt(h);
  if (llt.info() != Eigen::Success) {
    throw NumericError("mmala: information metric is not positive definite");
  }
  return llt;
}

double gaussian_log_density(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                            const Eigen::LLT<Eigen::MatrixXd>& h_llt, double eps) {
  // N(mean, eps^2 H^{-1}): log det(cov) = p log eps^2 - log det H.
  const auto p = static_cast<double>(x.size());
  const Eigen::MatrixXd l = h_llt.matrixL();
  double log_det_h = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) log_det_h += 2.0 * std::log(l(i, i));
  const Eigen::VectorXd t = l.transpose() * (x - mean) / eps;
  return -0.5 * p * kLogTwoPi - p * std::log(eps) + 0.5 * log_det_h - 0.5 * t.squaredNorm();
}

}  // namespace

void ChainConfig::validate() const {
  if (burn_in < 0) throw ContractError("chain: burn_in must be >= 0");
  if (n_iterations <= burn_in) throw ContractError("chain: n_iterations must exceed burn_in");
  if (!(step_xi > 0.0) || !(step_nu > 0.0)) throw ContractError("chain: steps must be positive");
  if (!(kappa > 0.0)) throw ContractError("chain: kappa must be positive");
  if (!(prior_a > 0.0) || !(prior_b > 0.0)) {
    throw ContractError("chain: prior parameters must be positive");
  }
  if (!(adapt_target > 0.0 && adapt_target < 1.0)) {
    throw ContractError("chain: adapt_target must be in (0, 1)");
  }
}

double gibbs_update_precision(const Eigen::VectorXd& beta, const Eigen::MatrixXd& r,
                              double a, double b, Rng& rng) {
  if (!(a > 0.0) || !(b > 0.0)) throw ContractError("gibbs: prior parameters must be positive");
  if (r.rows() != beta.size() || r.cols() != beta.size()) {
    throw ContractError("gibbs: penalty and coefficients do not match");
  }
  double quad = beta.dot(r * beta);
  if (quad < -1e-10) throw NumericError("gibbs: penalty quadratic form is negative");
  quad = std::max(quad, 0.0);
  const double shape = a + 0.5 * static_cast<double>(beta.size());
  const double rate = b + 0.5 * quad;
  return rng.gamma(shape, rate);
}

double log_conditional(const Design& design, const CoefficientState& state, CurveBlock block) {
  const double nll = neg_log_likelihood(design.sample, curves_at_sample(design, state));
  if (!std::isfinite(nll)) return -kInf;
  const Eigen::VectorXd& beta = block_beta(state, block);
  const double pen = beta.dot(block_penalty(design, block) * beta);
  return -nll - 0.5 * block_lambda(state, block) * pen;
}

Eigen::VectorXd grad_log_conditional(const Design& design, const CoefficientState& state,
                                     CurveBlock block) {
  const PointwiseParams p = curves_at_sample(design, state);
  const LoglikGradient g = loglik_gradient(design.sample, p);
  const Eigen::VectorXd& gvec = block == CurveBlock::Xi ? g.d_xi : g.d_nu;
  const Eigen::VectorXd& beta = block_beta(state, block);
  return block_basis(design, block).transpose() * gvec -
         block_lambda(state, block) * (block_penalty(design, block) * beta);
}

MhProposal::MhProposal(const Eigen::MatrixXd& b, const Eigen::MatrixXd& r, double kappa)
    : matrix_(b.transpose() * b + kappa * r), llt_(matrix_) {
  if (llt_.info() != Eigen::Success) {
    throw NumericError("mh proposal: preconditioner is not positive definite");
  }
}

Eigen::VectorXd MhProposal::propose(const Eigen::VectorXd& beta, double eps, Rng& rng) const {
  Eigen::VectorXd z(beta.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return beta + llt_.solve(eps * z);
}

MmalaStep mmala_propose(const Design& design, const CoefficientState& state,
                        CurveBlock block, double eps, Rng& rng) {
  Eigen::VectorXd grad;
  const Eigen::LLT<Eigen::MatrixXd> llt = block_metric(design, state, block, &grad);
  const Eigen::VectorXd& beta = block_beta(state, block);
  const Eigen::VectorXd mean = beta + 0.5 * eps * eps * llt.solve(grad);
  Eigen::VectorXd z(beta.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  // x = mean + eps L^{-T} z has covariance eps^2 (L L')^{-1} = eps^2 H^{-1}.
  MmalaStep step;
  step.proposal = mean + eps * llt.matrixU().solve(z);
  step.log_q_forward = gaussian_log_density(step.proposal, mean, llt, eps);
  return step;
}

double mmala_log_q(const Design& design, const CoefficientState& from_state,
                   const Eigen::VectorXd& to, CurveBlock block, double eps) {
  Eigen::VectorXd grad;
  const Eigen::LLT<Eigen::MatrixXd> llt = block_metric(design, from_state, block, &grad);
  const Eigen::VectorXd& beta = block_beta(from_state, block);
  const Eigen::VectorXd mean = beta + 0.5 * eps * eps * llt.solve(grad);
  return gaussian_log_density(to, mean, llt, eps);
}

bool metropolis_accept(double log_ratio, Rng& rng) {
  const double u = rng.uniform_pos();
  return std::log(u) < log_ratio;
}

PosteriorDraws run_chain(const Design& design, const ChainConfig& config,
                         std::optional<CoefficientState> init) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();

  CoefficientState state;
  if (init) {
    state = *init;
  } else {
    state = stationary_init(design);
    state.lambda_xi = 1.0;
    state.lambda_nu = 1.0;
  }
  if (state.beta_xi.size() != design.spec_xi.n_basis ||
      state.beta_nu.size() != design.spec_nu.n_basis) {
    throw ContractError("run_chain: initial coefficients do not match the bases");
  }
  double loglik = -neg_log_likelihood(design.sample, curves_at_sample(design, state));
  if (!std::isfinite(loglik)) throw ContractError("run_chain: initial state is infeasible");

  Rng rng(config.seed);
  const bool use_mmala = config.sampler == SamplerKind::Mmala;
  std::optional<MhProposal> mh_xi;
  std::optional<MhProposal> mh_nu;
  if (!use_mmala) {
    mh_xi.emplace(design.b_xi, design.r_xi, config.kappa);
    mh_nu.emplace(design.b_nu, design.r_nu, config.kappa);
  }

  PosteriorDraws draws;
  draws.source = DrawsSource::Mcmc;
  draws.n_iterations = config.n_iterations;
  draws.burn_in = config.burn_in;
  draws.states.reserve(static_cast<std::size_t>(config.n_iterations - config.burn_in));

  double log_step_xi = std::log(config.step_xi);
  double log_step_nu = std::log(config.step_nu);
  std::int64_t adapt_count_xi = 0;
  std::int64_t adapt_count_nu = 0;

  const auto update_block = [&](CurveBlock block, double eps) -> bool {
    const Eigen::VectorXd beta0 = block_beta(state, block);
    const Eigen::MatrixXd& r = block_penalty(design, block);
    const double lambda = block_lambda(state, block);
    const double pen0 = beta0.dot(r * beta0);
    const double lc_current = loglik - 0.5 * lambda * pen0;

    Eigen::VectorXd proposal;
    double log_q_forward = 0.0;
    if (use_mmala) {
      MmalaStep step = mmala_propose(design, state, block, eps, rng);
      proposal = std::move(step.proposal);
      log_q_forward = step.log_q_forward;
    } else {
      proposal = (block == CurveBlock::Xi ? *mh_xi : *mh_nu).propose(beta0, eps, rng);
    }

    block_beta(state, block) = proposal;
    const double nll_prop = neg_log_likelihood(design.sample, curves_at_sample(design, state));
    double log_ratio;
    if (!std::isfinite(nll_prop)) {
      log_ratio = -kInf;
    } else {
      const double lc_prop = -nll_prop - 0.5 * lambda * proposal.dot(r * proposal);
      log_ratio = lc_prop - lc_current;
      if (use_mmala) {
        // Reverse kernel launched from the proposal (the state currently
        // holds it), evaluated back at beta0.
        const double log_q_backward = mmala_log_q(design, state, beta0, block, eps);
        log_ratio += log_q_backward - log_q_forward;
      }
    }
    // The uniform is always drawn, so the stream does not depend on
    // feasibility of the proposal.
    const bool accepted = metropolis_accept(log_ratio, rng);
    if (accepted) {
      loglik = -nll_prop;
    } else {
      block_beta(state, block) = beta0;
    }
    return accepted;
  };

  for (int iter = 0; iter < config.n_iterations; ++iter) {
    if (iter >= config.burn_in) draws.states.push_back(state);
    if (iter + 1 == config.n_iterations) break;
    const bool adapting = iter < config.burn_in;

    for (const CurveBlock block : {CurveBlock::Nu, CurveBlock::Xi}) {
      const bool is_xi = block == CurveBlock::Xi;
      const double eps = std::exp(is_xi ? log_step_xi : log_step_nu);
      const bool accepted = update_block(block, eps);
      if (adapting) {
        // Robbins-Monro on log(eps), frozen once burn-in ends.
        auto& count = is_xi ? adapt_count_xi : adapt_count_nu;
        ++count;
        const double gain = std::pow(static_cast<double>(count), -0.6);
        double& log_step = is_xi ? log_step_xi : log_step_nu;
        log_step += gain * ((accepted ? 1.0 : 0.0) - config.adapt_target);
        log_step = std::clamp(log_step, -16.0, 3.0);
      } else {
        (is_xi ? draws.proposals_xi : draws.proposals_nu) += 1;
        if (accepted) (is_xi ? draws.accepts_xi : draws.accepts_nu) += 1;
      }
    }

    state.lambda_nu =
        gibbs_update_precision(state.beta_nu, design.r_nu, config.prior_a, config.prior_b, rng);
    state.lambda_xi =
        gibbs_update_precision(state.beta_xi, design.r_xi, config.prior_a, config.prior_b, rng);
  }

  draws.final_step_xi = std::exp(log_step_xi);
  draws.final_step_nu = std::exp(log_step_nu);
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  draws.elapsed_hours = std::max(elapsed.count() / 3600.0, 1e-12);
  return draws;
}

}  // namespace dirgp
