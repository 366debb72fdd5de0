#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dirgp/basis.hpp"
#include "dirgp/gpd.hpp"
#include "dirgp/rng.hpp"
#include "dirgp/state.hpp"

namespace dirgp {

// A sample with its design matrices and penalties evaluated once. Holds the
// sample by value so it is self-contained.
struct Design {
  PeaksSample sample;
  BasisSpec spec_xi;
  BasisSpec spec_nu;
  Eigen::MatrixXd b_xi;  // n x p_xi
  Eigen::MatrixXd b_nu;  // n x p_nu
  Eigen::MatrixXd r_xi;  // p_xi x p_xi
  Eigen::MatrixXd r_nu;  // p_nu x p_nu
};

Design make_design(const PeaksSample& sample, const BasisSpec& spec_xi,
                   const BasisSpec& spec_nu);

// Sub-design on a subset of rows (resamples, CV folds). Basis rows are
// reused, not re-evaluated.
Design subset_design(const Design& full, const std::vector<Eigen::Index>& rows);

PointwiseParams curves_at_sample(const Design& design, const CoefficientState& state);

// NLL plus (lambda/2) beta' R beta for both curves; +infinity when the state
// is infeasible or data fall outside the support.
double penalised_nll(const Design& design, const CoefficientState& state);

// Expected-information working weights with the shape floored away from the
// 1 + 2 xi = 0 boundary, where the expected information stops existing; used
// by the Newton-type updates, never by expected_fisher itself.
FisherWeights fisher_clamped(const PointwiseParams& params);

// Stationary starting point: a constant-curve unpenalised fit (xi = 0,
// nu = mean size, refined by a constant-basis IRLS pass) broadcast onto the
// requested bases. Precisions are left at 1; callers set them.
CoefficientState stationary_init(const Design& design);

struct FitControls {
  double tol = 1e-8;      // relative change of the penalised NLL
  int max_iter = 200;
  int max_halvings = 30;  // step-halving budget per block update
};

struct FitResult {
  CoefficientState state;
  double penalised_nll = 0.0;
  double nll = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Penalised maximum likelihood by iteratively reweighted least squares
// back-fitting across the two curves (nu block first, then xi), with
// expected-information weights and step halving. The penalised NLL never
// increases across iterations.
FitResult irls_fit(const Design& design, const CoefficientState& init,
                   const FitControls& controls = {});

// 10 log-spaced points on [1e-3, 1e6].
std::vector<double> default_lambda_grid();

struct CvPoint {
  double lambda_xi = 0.0;
  double lambda_nu = 0.0;
  double heldout_nll = 0.0;
  int failed_folds = 0;
};

struct CvResult {
  double lambda_xi = 1.0;
  double lambda_nu = 1.0;
  std::vector<CvPoint> surface;  // full product grid, row-major in (xi, nu)
};

// k-fold cross-validation over the product grid of penalties, scored by
// held-out unpenalised NLL. A pair whose fold fit fails to converge scores
// +infinity; ties prefer the smoother (larger) pair.
CvResult cross_validate(const PeaksSample& sample, const BasisSpec& spec_xi,
                        const BasisSpec& spec_nu, const std::vector<double>& lambda_grid,
                        int k_folds, const Rng& rng, const FitControls& controls = {},
                        unsigned workers = 1);

// Refit on the given resample rows, starting from the full-sample fit with
// its penalties held fixed.
FitResult resample_refit(const Design& full, const FitResult& full_fit,
                         const std::vector<Eigen::Index>& rows,
                         const FitControls& controls = {});

// Pair bootstrap around a fitted model: m_bootstrap resample refits, each
// from its own substream of rng.
PosteriorDraws bootstrap(const Design& full, const FitResult& full_fit, int m_bootstrap,
                         const Rng& rng, const FitControls& controls = {},
                         unsigned workers = 1);

}  // namespace dirgp
