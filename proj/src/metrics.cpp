#include "dirgp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "dirgp/errors.hpp"
#include "dirgp/state.hpp"

namespace dirgp {

namespace {

std::vector<double> sorted_copy(const Eigen::VectorXd& v) {
  std::vector<double> s(v.data(), v.data() + v.size());
  std::sort(s.begin(), s.end());
  return s;
}

// Right-continuous ECDF of a sorted sample at x: #(points <= x) / n.
double ecdf_at(const std::vector<double>& sorted, double x) {
  const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
  return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

// ECDF linearly interpolated between successive sample points; used to put
// both samples on a shared grid before differencing into densities.
double ecdf_linear_at(const std::vector<double>& sorted, double x) {
  const auto n = static_cast<double>(sorted.size());
  if (x < sorted.front()) return 0.0;
  if (x >= sorted.back()) return 1.0;
  const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
  const auto k = static_cast<std::size_t>(it - sorted.begin());  // in [1, n-1]
  const double lo = sorted[k - 1];
  const double hi = sorted[k];
  const double f_lo = static_cast<double>(k) / n;
  if (hi <= lo) return f_lo;
  const double f_hi = static_cast<double>(k + 1) / n;
  return f_lo + (x - lo) / (hi - lo) * (f_hi - f_lo);
}

}  // namespace

double ks_distance(const Eigen::VectorXd& f0, const Eigen::VectorXd& f1) {
  if (f0.size() == 0 || f1.size() == 0) throw ContractError("ks_distance: empty sample");
  const std::vector<double> a = sorted_copy(f0);
  const std::vector<double> b = sorted_copy(f1);
  // Merge walk: the supremum is attained at one of the pooled jump points.
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() || j < b.size()) {
    const double x = (j >= b.size() || (i < a.size() && a[i] <= b[j])) ? a[i] : b[j];
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double cvm_distance(const Eigen::VectorXd& f0, const Eigen::VectorXd& f1) {
  if (f0.size() == 0 || f1.size() == 0) throw ContractError("cvm_distance: empty sample");
  const std::vector<double> ref = sorted_copy(f0);
  const std::vector<double> other = sorted_copy(f1);
  double acc = 0.0;
  for (std::size_t k = 0; k < ref.size(); ++k) {
    // Right-continuous ECDF of the reference at its own k-th order statistic:
    // account for ties by counting all reference points <= ref[k].
    const double diff = ecdf_at(ref, ref[k]) - ecdf_at(other, ref[k]);
    acc += diff * diff;
  }
  return acc / static_cast<double>(ref.size());
}

double kl_divergence(const Eigen::VectorXd& f0, const Eigen::VectorXd& f1, int grid_size) {
  if (f0.size() == 0 || f1.size() == 0) throw ContractError("kl_divergence: empty sample");
  if (grid_size < 16) throw ContractError("kl_divergence: grid_size must be >= 16");
  const std::vector<double> a = sorted_copy(f0);
  const std::vector<double> b = sorted_copy(f1);
  const double lo = std::min(a.front(), b.front());
  const double hi = std::max(a.back(), b.back());
  if (!(hi > lo)) return 0.0;  // both samples concentrated on one point
  const int bins = grid_size - 1;
  const double dx = (hi - lo) / bins;
  constexpr double kFloor = 1e-12;
  double kl = 0.0;
  double prev_a = 0.0;
  double prev_b = 0.0;
  for (int j = 1; j <= bins; ++j) {
    const double x = (j == bins) ? hi : lo + dx * j;
    const double ca = ecdf_linear_at(a, x);
    const double cb = ecdf_linear_at(b, x);
    const double p = std::max((ca - prev_a) / dx, kFloor);
    const double q = std::max((cb - prev_b) / dx, kFloor);
    kl += p * std::log(p / q) * dx;
    prev_a = ca;
    prev_b = cb;
  }
  return std::clamp(kl, 0.0, kKlCap);
}

double effective_sample_size(const Eigen::VectorXd& chain) {
  const auto m = chain.size();
  if (m < 10) throw ContractError("effective_sample_size: need at least 10 draws");
  const double md = static_cast<double>(m);
  const double mean = chain.mean();
  const Eigen::VectorXd c = chain.array() - mean;
  const double c0 = c.squaredNorm() / md;
  if (c0 <= 0.0) return md;  // constant chain
  const auto max_lag = m / 2;
  // Geyer initial positive sequence over pair sums of autocorrelations.
  double pair_sum = 0.0;
  for (Eigen::Index t = 0; 2 * t + 1 <= max_lag; ++t) {
    double gamma = 0.0;
    for (const Eigen::Index lag : {2 * t, 2 * t + 1}) {
      // Biased (divide by m) autocovariance, as in the initial-sequence
      // construction.
      const double cov = c.head(m - lag).dot(c.tail(m - lag)) / md;
      gamma += cov / c0;
    }
    if (gamma <= 0.0) break;
    pair_sum += gamma;
  }
  const double denom = 2.0 * pair_sum - 1.0;
  if (denom <= 0.0) return md;
  return std::clamp(md / denom, std::numeric_limits<double>::min(), md);
}

namespace {

double min_ess_impl(const PosteriorDraws& draws) {
  if (draws.states.empty()) throw ContractError("ess: no states");
  const auto m = static_cast<Eigen::Index>(draws.states.size());
  const auto p_xi = draws.states.front().beta_xi.size();
  const auto p_nu = draws.states.front().beta_nu.size();
  Eigen::VectorXd scalar(m);
  double min_ess = std::numeric_limits<double>::infinity();
  const auto consider = [&](auto getter) {
    for (Eigen::Index t = 0; t < m; ++t) scalar[t] = getter(draws.states[t]);
    min_ess = std::min(min_ess, effective_sample_size(scalar));
  };
  for (Eigen::Index j = 0; j < p_xi; ++j) {
    consider([j](const CoefficientState& s) { return s.beta_xi[j]; });
  }
  for (Eigen::Index j = 0; j < p_nu; ++j) {
    consider([j](const CoefficientState& s) { return s.beta_nu[j]; });
  }
  consider([](const CoefficientState& s) { return s.lambda_xi; });
  consider([](const CoefficientState& s) { return s.lambda_nu; });
  return min_ess;
}

}  // namespace

double min_effective_sample_size(const PosteriorDraws& draws) { return min_ess_impl(draws); }

double ess_per_hour(const PosteriorDraws& draws) {
  if (!(draws.elapsed_hours > 0.0)) throw ContractError("ess_per_hour: elapsed time not set");
  if (draws.source == DrawsSource::Bootstrap) {
    return static_cast<double>(draws.states.size()) / draws.elapsed_hours;
  }
  return min_ess_impl(draws) / draws.elapsed_hours;
}

}  // namespace dirgp
