#pragma once

#include <Eigen/Dense>

namespace dirgp {

enum class BasisKind { Constant, Spline, Fourier, GaussianProcess };

// Describes the basis for one parameter curve over direction. Angles are in
// degrees on [0, 360) and every basis is periodic with period 360.
struct BasisSpec {
  BasisKind kind = BasisKind::Constant;
  int n_basis = 1;      // p, the number of coefficients
  int spline_degree = 3;
  int fourier_order = 25;            // p = 2 * fourier_order + 1
  double correlation_length = 0.6;   // GP kernel length scale, in radians
  bool periodic_penalty = true;      // Spline: wrap the difference penalty

  void validate() const;  // throws ContractError on an inconsistent spec
};

BasisSpec constant_basis();
BasisSpec spline_basis(int p = 50, int degree = 3, bool periodic_penalty = true);
BasisSpec fourier_basis(int order = 25);
BasisSpec gp_basis(int p = 50, double correlation_length = 0.6);

// Centre (peak location) of GP node j, degrees.
double gp_node_angle(const BasisSpec& spec, int j);
// Index of the node nearest to angle_deg in circular distance; ties resolve
// to the lower index.
int gp_node_index(const BasisSpec& spec, double angle_deg);

// Dense design matrix: one row per angle, p columns.
Eigen::MatrixXd evaluate_basis(const BasisSpec& spec, const Eigen::VectorXd& angles_deg);

// Single row of the design matrix (identical values to evaluate_basis).
Eigen::VectorXd basis_row(const BasisSpec& spec, double angle_deg);

// row(angle) . beta without materialising the row; used in hot loops.
double curve_value(const BasisSpec& spec, const Eigen::VectorXd& beta, double angle_deg);

// eta(theta_i) = B(theta_i) beta for each requested angle.
Eigen::VectorXd param_curve(const BasisSpec& spec, const Eigen::VectorXd& beta,
                            const Eigen::VectorXd& angles_deg);

// Symmetric positive semi-definite p x p roughness penalty.
Eigen::MatrixXd roughness_matrix(const BasisSpec& spec);

}  // namespace dirgp
