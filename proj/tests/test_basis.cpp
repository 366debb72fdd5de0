#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "dirgp/basis.hpp"
#include "dirgp/errors.hpp"
#include "dirgp/rng.hpp"

using namespace dirgp;

namespace {

// Reference cardinal B-spline N_d on [0, d+1], straight from the textbook
// recursion N_d(x) = (x/d) N_{d-1}(x) + ((d+1-x)/d) N_{d-1}(x-1). Slow and
// independent of the production evaluation.
double ref_cardinal(int d, double x) {
  if (d == 0) return (x >= 0.0 && x < 1.0) ? 1.0 : 0.0;
  return (x / d) * ref_cardinal(d - 1, x) +
         ((d + 1 - x) / d) * ref_cardinal(d - 1, x - 1.0);
}

double ref_spline_basis(const BasisSpec& spec, int j, double theta) {
  const int p = spec.n_basis;
  const double h = 360.0 / p;
  double a = std::fmod(theta, 360.0);
  if (a < 0.0) a += 360.0;
  double acc = 0.0;
  for (int m = -1; m <= 1; ++m) {
    acc += ref_cardinal(spec.spline_degree, (a + 360.0 * m) / h - j);
  }
  return acc;
}

int ref_gp_node(const BasisSpec& spec, double theta) {
  double a = std::fmod(theta, 360.0);
  if (a < 0.0) a += 360.0;
  int best = 0;
  double best_dist = 1e300;
  for (int j = 0; j < spec.n_basis; ++j) {
    double d = std::fabs(a - gp_node_angle(spec, j));
    d = std::min(d, 360.0 - d);
    if (d < best_dist - 1e-12) {
      best_dist = d;
      best = j;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("constant basis is the intercept") {
  const BasisSpec spec = constant_basis();
  const Eigen::VectorXd row = basis_row(spec, 123.4);
  REQUIRE(row.size() == 1);
  CHECK(row[0] == 1.0);
  const Eigen::MatrixXd r = roughness_matrix(spec);
  CHECK(r(0, 0) == 1.0);
}

TEST_CASE("spline rows match the reference recursion") {
  Rng rng(31);
  for (const auto& [p, d] : std::vector<std::pair<int, int>>{{50, 3}, {8, 3}, {5, 4}, {12, 1}}) {
    const BasisSpec spec = spline_basis(p, d);
    for (int t = 0; t < 40; ++t) {
      const double theta = 360.0 * rng.uniform();
      const Eigen::VectorXd row = basis_row(spec, theta);
      for (int j = 0; j < p; ++j) {
        CHECK(row[j] == doctest::Approx(ref_spline_basis(spec, j, theta)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("spline rows are a nonnegative partition of unity") {
  Rng rng(32);
  const BasisSpec spec = spline_basis(50, 3);
  for (int t = 0; t < 200; ++t) {
    const double theta = 360.0 * rng.uniform() - 30.0;  // includes negatives
    const Eigen::VectorXd row = basis_row(spec, theta);
    CHECK(row.minCoeff() >= 0.0);
    CHECK(row.sum() == doctest::Approx(1.0).epsilon(1e-12));
    // degree 3 leaves at most 4 active functions
    CHECK((row.array() > 0.0).count() <= 4);
  }
}

TEST_CASE("all bases are periodic in 360 degrees") {
  Rng rng(33);
  for (const BasisSpec& spec :
       {spline_basis(17, 3), fourier_basis(4), gp_basis(9, 0.5), constant_basis()}) {
    for (int t = 0; t < 30; ++t) {
      const double theta = 360.0 * rng.uniform();
      const Eigen::VectorXd a = basis_row(spec, theta);
      const Eigen::VectorXd b = basis_row(spec, theta + 360.0);
      const Eigen::VectorXd c = basis_row(spec, theta - 360.0);
      CHECK((a - b).cwiseAbs().maxCoeff() < 1e-9);
      CHECK((a - c).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("spline curves are continuous across the wrap") {
  Rng rng(34);
  const BasisSpec spec = spline_basis(20, 3);
  Eigen::VectorXd beta(20);
  for (int j = 0; j < 20; ++j) beta[j] = rng.normal();
  const double below = curve_value(spec, beta, 360.0 - 1e-9);
  const double above = curve_value(spec, beta, 0.0);
  CHECK(below == doctest::Approx(above).epsilon(1e-6));
}

TEST_CASE("fourier rows hold the exact harmonics") {
  Rng rng(35);
  const int order = 6;
  const BasisSpec spec = fourier_basis(order);
  REQUIRE(spec.n_basis == 13);
  for (int t = 0; t < 50; ++t) {
    const double theta = 720.0 * rng.uniform() - 360.0;
    const Eigen::VectorXd row = basis_row(spec, theta);
    const double rad = theta * M_PI / 180.0;
    CHECK(row[0] == 1.0);
    for (int k = 1; k <= order; ++k) {
      CHECK(row[k] == doctest::Approx(std::cos(k * rad)).epsilon(1e-10));
      CHECK(row[order + k] == doctest::Approx(std::sin(k * rad)).epsilon(1e-10));
    }
  }
}

TEST_CASE("gp rows are one-hot at the nearest node") {
  Rng rng(36);
  const BasisSpec spec = gp_basis(50, 0.6);
  for (int t = 0; t < 300; ++t) {
    const double theta = 360.0 * rng.uniform();
    const Eigen::VectorXd row = basis_row(spec, theta);
    CHECK(row.sum() == 1.0);
    CHECK(row.maxCoeff() == 1.0);
    CHECK(row[ref_gp_node(spec, theta)] == 1.0);
  }
}

TEST_CASE("gp node ties resolve to the lower index") {
  const BasisSpec spec = gp_basis(50, 0.6);
  // 0 degrees is equidistant from node 49 (centre 356.4) and node 0 (3.6)
  CHECK(gp_node_index(spec, 0.0) == 0);
  // the boundary between nodes 0 and 1 sits at one cell width
  CHECK(gp_node_index(spec, 360.0 / 50) == 0);
  CHECK(gp_node_index(spec, 360.0 / 50 + 1e-6) == 1);
}

TEST_CASE("evaluate_basis, basis_row, curve_value and param_curve agree") {
  Rng rng(37);
  for (const BasisSpec& spec :
       {spline_basis(30, 3), fourier_basis(25), gp_basis(50, 0.6), constant_basis()}) {
    Eigen::VectorXd beta(spec.n_basis);
    for (int j = 0; j < spec.n_basis; ++j) beta[j] = rng.normal();
    Eigen::VectorXd angles(25);
    for (int i = 0; i < 25; ++i) angles[i] = 360.0 * rng.uniform();
    const Eigen::MatrixXd b = evaluate_basis(spec, angles);
    const Eigen::VectorXd eta = param_curve(spec, beta, angles);
    for (int i = 0; i < 25; ++i) {
      const Eigen::VectorXd row = basis_row(spec, angles[i]);
      CHECK((b.row(i).transpose() - row).cwiseAbs().maxCoeff() == 0.0);
      CHECK(eta[i] == doctest::Approx(row.dot(beta)).epsilon(1e-12));
      CHECK(curve_value(spec, beta, angles[i]) == doctest::Approx(row.dot(beta)).epsilon(1e-12));
    }
  }
}

TEST_CASE("spline roughness is the difference penalty") {
  const BasisSpec periodic = spline_basis(10, 3, true);
  const Eigen::MatrixXd rp = roughness_matrix(periodic);
  CHECK((rp - rp.transpose()).cwiseAbs().maxCoeff() == 0.0);
  // constants are unpenalised
  CHECK((rp * Eigen::VectorXd::Ones(10)).cwiseAbs().maxCoeff() < 1e-12);
  // interior structure: 2 on the diagonal, -1 off, wrapping
  CHECK(rp(0, 0) == doctest::Approx(2.0));
  CHECK(rp(0, 1) == doctest::Approx(-1.0));
  CHECK(rp(0, 9) == doctest::Approx(-1.0));
  CHECK(rp(0, 2) == doctest::Approx(0.0));

  const BasisSpec open = spline_basis(10, 3, false);
  const Eigen::MatrixXd ro = roughness_matrix(open);
  CHECK((ro * Eigen::VectorXd::Ones(10)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(ro(0, 0) == doctest::Approx(1.0));  // end coefficient has one neighbour
  CHECK(ro(0, 9) == doctest::Approx(0.0));  // no wrap term

  // quadratic form equals the sum of squared first differences
  Rng rng(38);
  Eigen::VectorXd beta(10);
  for (int j = 0; j < 10; ++j) beta[j] = rng.normal();
  double ssd = 0.0;
  for (int j = 0; j < 10; ++j) {
    const double d = beta[(j + 1) % 10] - beta[j];
    ssd += d * d;
  }
  CHECK(beta.dot(rp * beta) == doctest::Approx(ssd).epsilon(1e-12));
}

TEST_CASE("fourier roughness penalises harmonics by the fourth power") {
  const BasisSpec spec = fourier_basis(5);
  const Eigen::MatrixXd r = roughness_matrix(spec);
  CHECK(r(0, 0) == 0.0);
  for (int k = 1; k <= 5; ++k) {
    CHECK(r(k, k) == doctest::Approx(std::pow(k, 4)));
    CHECK(r(5 + k, 5 + k) == doctest::Approx(std::pow(k, 4)));
  }
  CHECK(r.cwiseAbs().sum() ==
        doctest::Approx(2.0 * (1 + 16 + 81 + 256 + 625)));  // diagonal only
}

TEST_CASE("gp roughness inverts the node correlation") {
  const BasisSpec spec = gp_basis(20, 0.6);
  const Eigen::MatrixXd r = roughness_matrix(spec);
  CHECK((r - r.transpose()).cwiseAbs().maxCoeff() == 0.0);
  Eigen::MatrixXd c(20, 20);
  for (int j = 0; j < 20; ++j) {
    for (int k = 0; k < 20; ++k) {
      const double half = 0.5 * (gp_node_angle(spec, j) - gp_node_angle(spec, k)) * M_PI / 180.0;
      c(j, k) = std::exp(-2.0 * std::sin(half) * std::sin(half) / (0.6 * 0.6));
    }
  }
  c.diagonal().array() += 1e-8;
  const Eigen::MatrixXd prod = r * c;
  CHECK((prod - Eigen::MatrixXd::Identity(20, 20)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("roughness matrices are positive semidefinite") {
  for (const BasisSpec& spec :
       {spline_basis(15, 3), fourier_basis(7), gp_basis(15, 0.6), constant_basis()}) {
    const Eigen::MatrixXd r = roughness_matrix(spec);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r);
    CHECK(es.eigenvalues().minCoeff() > -1e-9);
  }
}

TEST_CASE("inconsistent specs are rejected") {
  CHECK_THROWS_AS(spline_basis(3, 3), ContractError);   // p < degree + 1
  CHECK_THROWS_AS(spline_basis(10, 0), ContractError);  // degree too low
  CHECK_THROWS_AS(fourier_basis(0), ContractError);
  CHECK_THROWS_AS(gp_basis(1, 0.6), ContractError);
  CHECK_THROWS_AS(gp_basis(10, 0.0), ContractError);
  BasisSpec bad = fourier_basis(3);
  bad.n_basis = 6;  // must be 2 * order + 1
  CHECK_THROWS_AS(bad.validate(), ContractError);
  BasisSpec c = constant_basis();
  c.n_basis = 2;
  CHECK_THROWS_AS(c.validate(), ContractError);
}
