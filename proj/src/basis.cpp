#include "dirgp/basis.hpp"

#include <cmath>
#include <string>

#include "dirgp/errors.hpp"

namespace dirgp {

namespace {

constexpr double kPeriod = 360.0;
constexpr double kDegToRad = M_PI / 180.0;

double wrap_angle(double angle_deg) {
  double a = std::fmod(angle_deg, kPeriod);
  if (a < 0.0) a += kPeriod;
  return a;
}

// Values of the degree-d cardinal B-spline N_d at the points u + k for
// k = 0..d, where u in [0, 1). N_d is supported on (0, d+1), so these are
// exactly the basis functions active at u; they sum to one. Built with the
// Cox-de Boor recurrence on the integer knot grid.
void cardinal_bspline_values(int degree, double u, double* out) {
  out[0] = 1.0;
  for (int r = 1; r <= degree; ++r) {
    // out currently holds N_{r-1}(u + k) for k = 0..r-1.
    const double rr = static_cast<double>(r);
    double prev = out[r - 1];  // N_{r-1}(u + r - 1)
    out[r] = ((rr + 1.0 - (u + rr)) / rr) * prev;
    for (int k = r - 1; k >= 1; --k) {
      const double cur = out[k - 1];
      out[k] = ((u + k) / rr) * out[k] + ((rr + 1.0 - (u + k)) / rr) * cur;
      prev = cur;
    }
    out[0] = (u / rr) * out[0];
  }
}

void spline_row(const BasisSpec& spec, double angle_deg, Eigen::VectorXd& row) {
  const int p = spec.n_basis;
  const int d = spec.spline_degree;
  const double h = kPeriod / p;
  const double x = wrap_angle(angle_deg) / h;
  const double f = std::floor(x);
  const double u = x - f;
  const int base = static_cast<int>(f);
  double values[32];
  cardinal_bspline_values(d, u, values);
  // Basis j is the cardinal spline shifted to start at knot j and wrapped
  // around the circle; the d+1 active ones at x are j = base - k (mod p).
  for (int k = 0; k <= d; ++k) {
    const int j = ((base - k) % p + p) % p;
    row[j] += values[k];
  }
}

void fourier_row(const BasisSpec& spec, double angle_deg, Eigen::VectorXd& row) {
  const int order = spec.fourier_order;
  const double t = angle_deg * kDegToRad;
  row[0] = 1.0;
  // cos(k t), sin(k t) by the angle-addition recurrence.
  const double c1 = std::cos(t);
  const double s1 = std::sin(t);
  double ck = 1.0;
  double sk = 0.0;
  for (int k = 1; k <= order; ++k) {
    const double c = ck * c1 - sk * s1;
    const double s = sk * c1 + ck * s1;
    row[k] = c;
    row[order + k] = s;
    ck = c;
    sk = s;
  }
}

}  // namespace

void BasisSpec::validate() const {
  switch (kind) {
    case BasisKind::Constant:
      if (n_basis != 1) throw ContractError("constant basis requires n_basis == 1");
      break;
    case BasisKind::Spline:
      if (spline_degree < 1 || spline_degree > 30) {
        throw ContractError("spline degree must be in [1, 30]");
      }
      if (n_basis < spline_degree + 1) {
        throw ContractError("spline basis needs n_basis >= degree + 1");
      }
      break;
    case BasisKind::Fourier:
      if (fourier_order < 1) throw ContractError("fourier order must be >= 1");
      if (n_basis != 2 * fourier_order + 1) {
        throw ContractError("fourier basis requires n_basis == 2 * order + 1");
      }
      break;
    case BasisKind::GaussianProcess:
      if (n_basis < 2) throw ContractError("gp basis needs n_basis >= 2");
      if (!(correlation_length > 0.0)) {
        throw ContractError("gp correlation length must be positive");
      }
      break;
  }
}

BasisSpec constant_basis() { return BasisSpec{}; }

BasisSpec spline_basis(int p, int degree, bool periodic_penalty) {
  BasisSpec s;
  s.kind = BasisKind::Spline;
  s.n_basis = p;
  s.spline_degree = degree;
  s.periodic_penalty = periodic_penalty;
  s.validate();
  return s;
}

BasisSpec fourier_basis(int order) {
  BasisSpec s;
  s.kind = BasisKind::Fourier;
  s.fourier_order = order;
  s.n_basis = 2 * order + 1;
  s.validate();
  return s;
}

BasisSpec gp_basis(int p, double correlation_length) {
  BasisSpec s;
  s.kind = BasisKind::GaussianProcess;
  s.n_basis = p;
  s.correlation_length = correlation_length;
  s.validate();
  return s;
}

double gp_node_angle(const BasisSpec& spec, int j) {
  return (j + 0.5) * kPeriod / spec.n_basis;
}

int gp_node_index(const BasisSpec& spec, double angle_deg) {
  const int p = spec.n_basis;
  const double h = kPeriod / p;
  const double a = wrap_angle(angle_deg);
  // Node centres sit at (j + 0.5) h; the two nearest nodes bracket a/h - 0.5.
  const int lo = static_cast<int>(std::floor(a / h - 0.5));
  int best = -1;
  double best_dist = kPeriod;
  for (const int cand : {((lo % p) + p) % p, (((lo + 1) % p) + p) % p}) {
    double d = std::fabs(a - gp_node_angle(spec, cand));
    d = std::min(d, kPeriod - d);
    // Distances within 1e-12 of each other count as a tie, which resolves
    // to the lower node index.
    if (d < best_dist - 1e-12 || (d <= best_dist + 1e-12 && cand < best)) {
      best_dist = d;
      best = cand;
    }
  }
  return best;
}

Eigen::VectorXd basis_row(const BasisSpec& spec, double angle_deg) {
  Eigen::VectorXd row = Eigen::VectorXd::Zero(spec.n_basis);
  switch (spec.kind) {
    case BasisKind::Constant:
      row[0] = 1.0;
      break;
    case BasisKind::Spline:
      spline_row(spec, angle_deg, row);
      break;
    case BasisKind::Fourier:
      fourier_row(spec, angle_deg, row);
      break;
    case BasisKind::GaussianProcess:
      row[gp_node_index(spec, angle_deg)] = 1.0;
      break;
  }
  return row;
}

Eigen::MatrixXd evaluate_basis(const BasisSpec& spec, const Eigen::VectorXd& angles_deg) {
  spec.validate();
  Eigen::MatrixXd b(angles_deg.size(), spec.n_basis);
  for (Eigen::Index i = 0; i < angles_deg.size(); ++i) {
    b.row(i) = basis_row(spec, angles_deg[i]).transpose();
  }
  return b;
}

double curve_value(const BasisSpec& spec, const Eigen::VectorXd& beta, double angle_deg) {
  switch (spec.kind) {
    case BasisKind::Constant:
      return beta[0];
    case BasisKind::GaussianProcess:
      return beta[gp_node_index(spec, angle_deg)];
    case BasisKind::Spline: {
      const int p = spec.n_basis;
      const int d = spec.spline_degree;
      const double h = kPeriod / p;
      const double x = wrap_angle(angle_deg) / h;
      const double f = std::floor(x);
      const int base = static_cast<int>(f);
      double values[32];
      cardinal_bspline_values(d, x - f, values);
      double acc = 0.0;
      for (int k = 0; k <= d; ++k) {
        acc += values[k] * beta[((base - k) % p + p) % p];
      }
      return acc;
    }
    case BasisKind::Fourier: {
      const int order = spec.fourier_order;
      const double t = angle_deg * kDegToRad;
      const double c1 = std::cos(t);
      const double s1 = std::sin(t);
      double acc = beta[0];
      double ck = 1.0;
      double sk = 0.0;
      for (int k = 1; k <= order; ++k) {
        const double c = ck * c1 - sk * s1;
        const double s = sk * c1 + ck * s1;
        acc += c * beta[k] + s * beta[order + k];
        ck = c;
        sk = s;
      }
      return acc;
    }
  }
  return 0.0;
}

Eigen::VectorXd param_curve(const BasisSpec& spec, const Eigen::VectorXd& beta,
                            const Eigen::VectorXd& angles_deg) {
  if (beta.size() != spec.n_basis) {
    throw ContractError("param_curve: coefficient length does not match basis");
  }
  Eigen::VectorXd eta(angles_deg.size());
  for (Eigen::Index i = 0; i < angles_deg.size(); ++i) {
    eta[i] = curve_value(spec, beta, angles_deg[i]);
  }
  return eta;
}

Eigen::MatrixXd roughness_matrix(const BasisSpec& spec) {
  spec.validate();
  const int p = spec.n_basis;
  switch (spec.kind) {
    case BasisKind::Constant:
      return Eigen::MatrixXd::Identity(1, 1);
    case BasisKind::Spline: {
      // Squared first differences of adjacent coefficients; the periodic
      // variant also penalises the wrap-around difference beta_0 - beta_{p-1}.
      const int rows = spec.periodic_penalty ? p : p - 1;
      Eigen::MatrixXd diff = Eigen::MatrixXd::Zero(rows, p);
      for (int j = 0; j < rows; ++j) {
        diff(j, j) = -1.0;
        diff(j, (j + 1) % p) = 1.0;
      }
      return diff.transpose() * diff;
    }
    case BasisKind::Fourier: {
      // Fourth powers of the harmonic index: the curvature penalty of each
      // harmonic pair, with the intercept unpenalised.
      Eigen::VectorXd d(p);
      d[0] = 0.0;
      const int order = spec.fourier_order;
      for (int k = 1; k <= order; ++k) {
        const double k4 = std::pow(static_cast<double>(k), 4.0);
        d[k] = k4;
        d[order + k] = k4;
      }
      return d.asDiagonal();
    }
    case BasisKind::GaussianProcess: {
      // Inverse of the squared-exponential circular correlation among nodes.
      Eigen::MatrixXd c(p, p);
      const double inv_r2 = 2.0 / (spec.correlation_length * spec.correlation_length);
      for (int j = 0; j < p; ++j) {
        for (int k = 0; k <= j; ++k) {
          const double half =
              0.5 * (gp_node_angle(spec, j) - gp_node_angle(spec, k)) * kDegToRad;
          const double s = std::sin(half);
          c(j, k) = c(k, j) = std::exp(-inv_r2 * s * s);
        }
      }
      c.diagonal().array() += 1e-8;
      const Eigen::LLT<Eigen::MatrixXd> llt(c);
      if (llt.info() != Eigen::Success) {
        throw NumericError("gp roughness: correlation matrix is not positive definite");
      }
      Eigen::MatrixXd r = llt.solve(Eigen::MatrixXd::Identity(p, p));
      return 0.5 * (r + r.transpose());
    }
  }
  throw ContractError("roughness_matrix: unknown basis kind");
}

}  // namespace dirgp
