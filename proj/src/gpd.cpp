#include "dirgp/gpd.hpp"

#include <cmath>
#include <limits>

#include "dirgp/errors.hpp"

namespace dirgp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// The per-observation log-density in the (xi, nu) parameterisation is
//   log f = log(1 + xi) - log nu - (1/xi + 1) log G,
//   G = 1 + xi (1 + xi) y / nu,
// valid on G > 0. All branches below are Taylor expansions of this same
// expression about xi = 0 (with a = y / nu):
//   -log f  = log nu - log(1+xi) + a + xi (2a - a^2/2)
//             + xi^2 (a - 3a^2/2 + a^3/3) + O(xi^3 a^4)
// which keeps the two branches continuous to well below 1e-8 at the switch.
// The series is only used when xi (1+xi) a is itself small; for extreme a
// the exact form is numerically fine even at tiny xi.
bool use_series(double xi, double u) { return std::fabs(xi) < kXiTol && std::fabs(u) < 0.25; }

double nll_one(double y, double xi, double nu) {
  if (!(nu > 0.0) || !(1.0 + xi > 0.0)) return kInf;
  const double a = y / nu;
  const double u = xi * (1.0 + xi) * a;
  if (1.0 + u <= 0.0) return kInf;
  if (use_series(xi, u)) {
    return std::log(nu) - std::log1p(xi) + a + xi * (2.0 * a - 0.5 * a * a) +
           xi * xi * (a - 1.5 * a * a + a * a * a / 3.0);
  }
  return std::log(nu) - std::log1p(xi) + (1.0 / xi + 1.0) * std::log1p(u);
}

}  // namespace

void PeaksSample::validate() const {
  if (angles_deg.size() != sizes.size()) {
    throw ContractError("sample: angle and size vectors differ in length");
  }
  if (!(period > 0.0)) throw ContractError("sample: period must be positive");
  for (Eigen::Index i = 0; i < sizes.size(); ++i) {
    if (!(angles_deg[i] >= 0.0) || !(angles_deg[i] < 360.0)) {
      throw ContractError("sample: angle out of [0, 360) at row " + std::to_string(i));
    }
    if (!(sizes[i] >= 0.0) || !std::isfinite(sizes[i])) {
      throw ContractError("sample: negative or non-finite size at row " + std::to_string(i));
    }
  }
}

double sigma_from_nu(double nu, double xi) {
  if (!(1.0 + xi > 0.0)) throw DomainError("sigma_from_nu: requires 1 + xi > 0");
  if (!(nu > 0.0)) throw DomainError("sigma_from_nu: requires nu > 0");
  return nu / (1.0 + xi);
}

Eigen::VectorXd sigma_from_nu(const Eigen::VectorXd& nu, const Eigen::VectorXd& xi) {
  if (nu.size() != xi.size()) throw ContractError("sigma_from_nu: length mismatch");
  Eigen::VectorXd sigma(nu.size());
  for (Eigen::Index i = 0; i < nu.size(); ++i) sigma[i] = sigma_from_nu(nu[i], xi[i]);
  return sigma;
}

double neg_log_likelihood(const PeaksSample& sample, const PointwiseParams& params) {
  if (params.xi.size() != sample.size() || params.nu.size() != sample.size()) {
    throw ContractError("neg_log_likelihood: parameter length mismatch");
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < sample.size(); ++i) {
    const double v = nll_one(sample.sizes[i], params.xi[i], params.nu[i]);
    if (v == kInf) return kInf;
    total += v;
  }
  return total;
}

LoglikGradient loglik_gradient(const PeaksSample& sample, const PointwiseParams& params) {
  if (params.xi.size() != sample.size() || params.nu.size() != sample.size()) {
    throw ContractError("loglik_gradient: parameter length mismatch");
  }
  LoglikGradient g;
  g.d_xi.resize(sample.size());
  g.d_nu.resize(sample.size());
  for (Eigen::Index i = 0; i < sample.size(); ++i) {
    const double y = sample.sizes[i];
    const double xi = params.xi[i];
    const double nu = params.nu[i];
    if (!(nu > 0.0) || !(1.0 + xi > 0.0)) {
      throw DomainError("loglik_gradient: infeasible parameters at row " + std::to_string(i));
    }
    const double a = y / nu;
    const double u = xi * (1.0 + xi) * a;
    const double big_g = 1.0 + u;
    if (big_g <= 0.0) {
      throw DomainError("loglik_gradient: observation outside support at row " +
                        std::to_string(i));
    }
    const double onep = 1.0 + xi;
    // d log f / d nu has a form with no xi -> 0 singularity.
    g.d_nu[i] = (onep * onep * a / big_g - 1.0) / nu;
    if (use_series(xi, u)) {
      // Taylor expansion of d log f / d xi about xi = 0.
      g.d_xi[i] = 1.0 / onep - 2.0 * a + 0.5 * a * a +
                  xi * (3.0 * a * a - 2.0 * a - 2.0 * a * a * a / 3.0);
    } else {
      g.d_xi[i] = -(1.0 + 2.0 * xi) * u / (xi * xi * big_g) + 1.0 / onep +
                  std::log1p(u) / (xi * xi);
    }
  }
  return g;
}

FisherWeights expected_fisher(const PointwiseParams& params) {
  FisherWeights w;
  w.w_xi.resize(params.xi.size());
  w.w_nu.resize(params.xi.size());
  for (Eigen::Index i = 0; i < params.xi.size(); ++i) {
    const double xi = params.xi[i];
    const double nu = params.nu[i];
    if (!(1.0 + 2.0 * xi > 0.0) || !(nu > 0.0)) {
      throw DomainError("expected_fisher: requires nu > 0 and 1 + 2 xi > 0");
    }
    w.w_xi[i] = 1.0 / ((1.0 + xi) * (1.0 + xi));
    w.w_nu[i] = 1.0 / (nu * nu * (1.0 + 2.0 * xi));
  }
  return w;
}

double gpd_quantile(double u, double xi, double sigma) {
  if (!(u >= 0.0) || !(u < 1.0)) throw DomainError("gpd_quantile: u must be in [0, 1)");
  if (!(sigma > 0.0)) throw DomainError("gpd_quantile: sigma must be positive");
  const double l = std::log1p(-u);  // log(1 - u)
  if (xi == 0.0) return -sigma * l;
  return sigma / xi * std::expm1(-xi * l);
}

double gpd_cdf(double y, double xi, double sigma) {
  if (!(sigma > 0.0)) throw DomainError("gpd_cdf: sigma must be positive");
  if (y <= 0.0) return 0.0;
  if (xi == 0.0) return -std::expm1(-y / sigma);
  const double g = 1.0 + xi * y / sigma;
  if (g <= 0.0) return 1.0;  // beyond the upper endpoint (xi < 0)
  return -std::expm1(-std::log(g) / xi);
}

double sample_gpd(Rng& rng, double xi, double sigma) {
  return gpd_quantile(rng.uniform(), xi, sigma);
}

}  // namespace dirgp
