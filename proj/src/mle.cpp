#include "dirgp/mle.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "dirgp/errors.hpp"
#include "dirgp/parallel.hpp"

namespace dirgp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Block { Nu, Xi };

}  // namespace

Design make_design(const PeaksSample& sample, const BasisSpec& spec_xi,
                   const BasisSpec& spec_nu) {
  sample.validate();
  spec_xi.validate();
  spec_nu.validate();
  Design d;
  d.sample = sample;
  d.spec_xi = spec_xi;
  d.spec_nu = spec_nu;
  d.b_xi = evaluate_basis(spec_xi, sample.angles_deg);
  d.b_nu = evaluate_basis(spec_nu, sample.angles_deg);
  d.r_xi = roughness_matrix(spec_xi);
  d.r_nu = roughness_matrix(spec_nu);
  return d;
}

Design subset_design(const Design& full, const std::vector<Eigen::Index>& rows) {
  Design d;
  d.spec_xi = full.spec_xi;
  d.spec_nu = full.spec_nu;
  d.r_xi = full.r_xi;
  d.r_nu = full.r_nu;
  const auto m = static_cast<Eigen::Index>(rows.size());
  d.sample.period = full.sample.period;
  d.sample.angles_deg.resize(m);
  d.sample.sizes.resize(m);
  d.b_xi.resize(m, full.b_xi.cols());
  d.b_nu.resize(m, full.b_nu.cols());
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index r = rows[static_cast<std::size_t>(i)];
    if (r < 0 || r >= full.sample.size()) throw ContractError("subset_design: row out of range");
    d.sample.angles_deg[i] = full.sample.angles_deg[r];
    d.sample.sizes[i] = full.sample.sizes[r];
    d.b_xi.row(i) = full.b_xi.row(r);
    d.b_nu.row(i) = full.b_nu.row(r);
  }
  return d;
}

PointwiseParams curves_at_sample(const Design& design, const CoefficientState& state) {
  PointwiseParams p;
  p.xi = design.b_xi * state.beta_xi;
  p.nu = design.b_nu * state.beta_nu;
  return p;
}

double penalised_nll(const Design& design, const CoefficientState& state) {
  const double nll = neg_log_likelihood(design.sample, curves_at_sample(design, state));
  if (!std::isfinite(nll)) return kInf;
  const double pen_xi = state.beta_xi.dot(design.r_xi * state.beta_xi);
  const double pen_nu = state.beta_nu.dot(design.r_nu * state.beta_nu);
  return nll + 0.5 * state.lambda_xi * pen_xi + 0.5 * state.lambda_nu * pen_nu;
}

FisherWeights fisher_clamped(const PointwiseParams& params) {
  FisherWeights w;
  w.w_xi.resize(params.xi.size());
  w.w_nu.resize(params.xi.size());
  for (Eigen::Index i = 0; i < params.xi.size(); ++i) {
    const double onep = 1.0 + params.xi[i];
    const double nu = params.nu[i];
    // The state is likelihood-feasible for any 1 + xi > 0, but the expected
    // information needs 1 + 2 xi > 0; flooring keeps the update direction a
    // descent direction without restricting the feasible set.
    const double curv = std::max(1.0 + 2.0 * params.xi[i], 0.01);
    w.w_xi[i] = 1.0 / (onep * onep);
    w.w_nu[i] = 1.0 / (nu * nu * curv);
  }
  return w;
}

namespace {

Eigen::VectorXd broadcast_constant(const BasisSpec& spec, double value) {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(spec.n_basis);
  if (spec.kind == BasisKind::Fourier) {
    beta[0] = value;  // intercept column only
  } else {
    beta.setConstant(value);  // constant / spline / gp rows each sum to one
  }
  return beta;
}

}  // namespace

CoefficientState stationary_init(const Design& design) {
  const double mean_size = std::max(design.sample.sizes.mean(), 1e-8);
  CoefficientState constant_state;
  constant_state.beta_xi = Eigen::VectorXd::Zero(1);
  constant_state.beta_nu = Eigen::VectorXd::Constant(1, mean_size);
  constant_state.lambda_xi = 0.0;  // the refinement pass is unpenalised
  constant_state.lambda_nu = 0.0;
  const Design cdesign = make_design(design.sample, constant_basis(), constant_basis());
  const FitResult refined = irls_fit(cdesign, constant_state);
  CoefficientState out;
  out.beta_xi = broadcast_constant(design.spec_xi, refined.state.beta_xi[0]);
  out.beta_nu = broadcast_constant(design.spec_nu, refined.state.beta_nu[0]);
  return out;
}

FitResult irls_fit(const Design& design, const CoefficientState& init,
                   const FitControls& controls) {
  if (init.beta_xi.size() != design.spec_xi.n_basis ||
      init.beta_nu.size() != design.spec_nu.n_basis) {
    throw ContractError("irls_fit: initial coefficients do not match the bases");
  }
  if (!(init.lambda_xi >= 0.0) || !(init.lambda_nu >= 0.0)) {
    throw ContractError("irls_fit: penalties must be non-negative");
  }
  CoefficientState state = init;
  double current = penalised_nll(design, state);
  if (!std::isfinite(current)) {
    throw ContractError("irls_fit: initial state is infeasible");
  }

  FitResult result;
  bool stalled = false;
  int iter = 0;
  while (iter < controls.max_iter && !result.converged && !stalled) {
    ++iter;
    const double before = current;
    for (const Block block : {Block::Nu, Block::Xi}) {
      const PointwiseParams p = curves_at_sample(design, state);
      const LoglikGradient grad = loglik_gradient(design.sample, p);
      const FisherWeights weights = fisher_clamped(p);
      const bool is_xi = block == Block::Xi;
      const Eigen::MatrixXd& b = is_xi ? design.b_xi : design.b_nu;
      const Eigen::MatrixXd& r = is_xi ? design.r_xi : design.r_nu;
      const double lambda = is_xi ? state.lambda_xi : state.lambda_nu;
      Eigen::VectorXd& beta = is_xi ? state.beta_xi : state.beta_nu;
      const Eigen::VectorXd& g = is_xi ? grad.d_xi : grad.d_nu;
      const Eigen::VectorXd& w = is_xi ? weights.w_xi : weights.w_nu;

      const Eigen::MatrixXd h = b.transpose() * w.asDiagonal() * b + lambda * r;
      const Eigen::VectorXd rhs = b.transpose() * g - lambda * (r * beta);
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
      if (ldlt.info() != Eigen::Success) {
        throw NumericError("irls_fit: weighted normal equations are singular");
      }
      const Eigen::VectorXd step = ldlt.solve(rhs);

      // Step halving: accept the first scaled step that does not increase
      // the penalised NLL (infeasible proposals score +infinity).
      const Eigen::VectorXd beta0 = beta;
      double t = 1.0;
      bool accepted = false;
      for (int half = 0; half <= controls.max_halvings; ++half) {
        beta = beta0 + t * step;
        const double cand = penalised_nll(design, state);
        if (cand <= current) {
          current = cand;
          accepted = true;
          break;
        }
        t *= 0.5;
      }
      if (!accepted) {
        beta = beta0;
        stalled = true;
        break;
      }
    }
    assert(current <= before);
    if (!stalled && before - current <= controls.tol * std::max(1.0, std::fabs(before))) {
      result.converged = true;
    }
  }

  result.state = state;
  result.penalised_nll = current;
  result.nll = neg_log_likelihood(design.sample, curves_at_sample(design, state));
  result.iterations = iter;
  return result;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> grid(10);
  for (int i = 0; i < 10; ++i) {
    grid[static_cast<std::size_t>(i)] = std::pow(10.0, -3.0 + i);
  }
  return grid;
}

CvResult cross_validate(const PeaksSample& sample, const BasisSpec& spec_xi,
                        const BasisSpec& spec_nu, const std::vector<double>& lambda_grid,
                        int k_folds, const Rng& rng, const FitControls& controls,
                        unsigned workers) {
  const auto n = sample.size();
  if (k_folds < 2 || k_folds > n) {
    throw ContractError("cross_validate: need 2 <= k_folds <= n");
  }
  if (lambda_grid.empty()) throw ContractError("cross_validate: empty penalty grid");
  for (const double l : lambda_grid) {
    if (!(l >= 0.0)) throw ContractError("cross_validate: penalties must be non-negative");
  }

  const Design full = make_design(sample, spec_xi, spec_nu);

  // Random fold assignment: a Fisher-Yates shuffle, then position mod k.
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  Rng shuffle_rng = rng.substream(0);
  for (auto i = static_cast<std::size_t>(n) - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(shuffle_rng.uniform_int(i + 1));
    std::swap(perm[i], perm[j]);
  }

  struct Fold {
    Design train;
    PeaksSample test;
    Eigen::MatrixXd b_xi_test;
    Eigen::MatrixXd b_nu_test;
    CoefficientState init;
  };
  std::vector<Fold> folds(static_cast<std::size_t>(k_folds));
  for (int f = 0; f < k_folds; ++f) {
    std::vector<Eigen::Index> train_rows;
    std::vector<Eigen::Index> test_rows;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      (static_cast<int>(i % static_cast<std::size_t>(k_folds)) == f ? test_rows : train_rows)
          .push_back(perm[i]);
    }
    Fold& fold = folds[static_cast<std::size_t>(f)];
    fold.train = subset_design(full, train_rows);
    const auto m = static_cast<Eigen::Index>(test_rows.size());
    fold.test.period = sample.period;
    fold.test.angles_deg.resize(m);
    fold.test.sizes.resize(m);
    fold.b_xi_test.resize(m, full.b_xi.cols());
    fold.b_nu_test.resize(m, full.b_nu.cols());
    for (Eigen::Index i = 0; i < m; ++i) {
      const Eigen::Index r = test_rows[static_cast<std::size_t>(i)];
      fold.test.angles_deg[i] = full.sample.angles_deg[r];
      fold.test.sizes[i] = full.sample.sizes[r];
      fold.b_xi_test.row(i) = full.b_xi.row(r);
      fold.b_nu_test.row(i) = full.b_nu.row(r);
    }
    fold.init = stationary_init(fold.train);
  }

  const std::size_t g = lambda_grid.size();
  CvResult result;
  result.surface.resize(g * g);
  parallel_for(g * g, workers, [&](std::size_t pair) {
    const double lx = lambda_grid[pair / g];
    const double ln = lambda_grid[pair % g];
    CvPoint point;
    point.lambda_xi = lx;
    point.lambda_nu = ln;
    double total = 0.0;
    for (const Fold& fold : folds) {
      CoefficientState init = fold.init;
      init.lambda_xi = lx;
      init.lambda_nu = ln;
      const FitResult fit = irls_fit(fold.train, init, controls);
      if (!fit.converged) {
        ++point.failed_folds;
        total = kInf;
        continue;
      }
      PointwiseParams test_params;
      test_params.xi = fold.b_xi_test * fit.state.beta_xi;
      test_params.nu = fold.b_nu_test * fit.state.beta_nu;
      total += neg_log_likelihood(fold.test, test_params);
    }
    point.heldout_nll = total;
    result.surface[pair] = point;
  });

  // Argmin with ties resolved toward the smoother (larger) pair.
  double best = kInf;
  result.lambda_xi = lambda_grid.back();
  result.lambda_nu = lambda_grid.back();
  bool found = false;
  for (const CvPoint& point : result.surface) {
    const bool better =
        point.heldout_nll < best ||
        (point.heldout_nll == best &&
         (point.lambda_xi > result.lambda_xi ||
          (point.lambda_xi == result.lambda_xi && point.lambda_nu > result.lambda_nu)));
    if (!found || better) {
      best = point.heldout_nll;
      result.lambda_xi = point.lambda_xi;
      result.lambda_nu = point.lambda_nu;
      found = true;
    }
  }
  return result;
}

FitResult resample_refit(const Design& full, const FitResult& full_fit,
                         const std::vector<Eigen::Index>& rows,
                         const FitControls& controls) {
  const Design sub = subset_design(full, rows);
  return irls_fit(sub, full_fit.state, controls);
}

PosteriorDraws bootstrap(const Design& full, const FitResult& full_fit, int m_bootstrap,
                         const Rng& rng, const FitControls& controls, unsigned workers) {
  if (m_bootstrap < 1) throw ContractError("bootstrap: m_bootstrap must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  const auto n = static_cast<std::uint64_t>(full.sample.size());
  PosteriorDraws draws;
  draws.source = DrawsSource::Bootstrap;
  draws.states.resize(static_cast<std::size_t>(m_bootstrap));
  draws.replicate_converged.assign(static_cast<std::size_t>(m_bootstrap), 0);
  parallel_for(static_cast<std::size_t>(m_bootstrap), workers, [&](std::size_t rep) {
    Rng sub = rng.substream(rep);
    std::vector<Eigen::Index> rows(n);
    for (auto& row : rows) row = static_cast<Eigen::Index>(sub.uniform_int(n));
    const FitResult fit = resample_refit(full, full_fit, rows, controls);
    draws.states[rep] = fit.state;
    draws.replicate_converged[rep] = fit.converged ? 1 : 0;
  });
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  draws.elapsed_hours = std::max(elapsed.count() / 3600.0, 1e-12);
  return draws;
}

}  // namespace dirgp
