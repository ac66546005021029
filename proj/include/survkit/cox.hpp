#pragma once

#include <Eigen/Core>

#include "survkit/dataset.hpp"

namespace survkit {

struct FitOptions {
  int max_iterations = 100;
  double gradient_tolerance = 1e-8;
  int step_halving_limit = 20;
  double ridge_epsilon = 0.0;
};

struct CoxFit {
  Eigen::VectorXd beta;
  double log_partial_likelihood = 0.0;
  int n_iterations = 0;
  bool converged = false;
  double final_gradient_norm = 0.0;
};

// Stratified Cox partial log-likelihood with Breslow handling of tied event
// times (every tied event uses the full risk set at that time). Risk-set
// sums are accumulated over events in decreasing time order with a running
// log-sum-exp rescale, so large linear predictors cannot overflow.
double partial_log_likelihood(const Dataset& data, const Eigen::VectorXd& beta);

// First derivative: sum over events of X_i minus the risk-set weighted
// covariate mean.
Eigen::VectorXd plk_gradient(const Dataset& data, const Eigen::VectorXd& beta);

// Second derivative: negated sum over events of risk-set weighted covariance
// matrices. Symmetric, negative semidefinite.
Eigen::MatrixXd plk_hessian(const Dataset& data, const Eigen::VectorXd& beta);

struct PlkDerivatives {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};
PlkDerivatives plk_with_hessian(const Dataset& data, const Eigen::VectorXd& beta);

// Value, gradient and the diagonal of the Hessian in one O(n d) sweep; the
// quadratic model used by the penalized coordinate-descent solver.
struct PlkQuadratic {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::VectorXd hessian_diag;
};
PlkQuadratic plk_with_hessian_diag(const Dataset& data, const Eigen::VectorXd& beta);

// Damped Newton maximization of the partial log-likelihood from beta = 0.
// Solves H delta = -g each step (ridge added to the diagonal if the solve
// fails), halves the step until the objective does not decrease. Coefficient
// magnitudes beyond 50 are treated as monotone-likelihood divergence and
// reported as non-convergence, not an error.
CoxFit fit_cox(const Dataset& data, const FitOptions& options = {});

}  // namespace survkit
