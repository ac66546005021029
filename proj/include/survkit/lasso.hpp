#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "survkit/cox.hpp"
#include "survkit/dataset.hpp"

namespace survkit {

// L1 proximal operator: sign(z) * max(|z| - gamma, 0).
double soft_threshold(double z, double gamma);

// Smallest penalty with an all-zero solution: the sup-norm of the partial
// log-likelihood gradient at beta = 0.
double lambda_max(const Dataset& data);

struct LassoFit {
  Eigen::VectorXd beta;
  double lambda = 0.0;
  std::vector<int> active_set;  // indices j with beta_j != 0
  bool converged = false;
  double kkt_violation = 0.0;
  double log_partial_likelihood = 0.0;
  int n_iterations = 0;  // outer quadratic refreshes
};

// Maximize log partial likelihood - lambda * ||beta||_1 by repeated
// quadratic expansion (gradient + Hessian diagonal) with cyclic coordinate
// soft-threshold updates; each aggregated step is halved until the penalized
// objective does not decrease. Converged means the KKT residual is within
// 1e-6 * (1 + lambda): |g_j| = lambda on the active set, <= lambda off it.
// Non-convergence returns the last iterate with the flag cleared.
LassoFit fit_lasso_cox(const Dataset& data, double lambda,
                       const std::optional<Eigen::VectorXd>& warm_start = {},
                       const FitOptions& options = {});

// Log-spaced penalty grid from lambda_max down to min_ratio * lambda_max,
// each fit warm-started from the previous.
struct LambdaPath {
  std::vector<double> lambdas;
  std::vector<LassoFit> fits;
};
LambdaPath lambda_path(const Dataset& data, int n_lambda = 50,
                       double min_ratio = 0.05, const FitOptions& options = {});

// Grid helper shared with cross-validation (same spacing as lambda_path).
std::vector<double> lambda_grid(double lambda_max_value, int n_lambda,
                                double min_ratio);

// Stationarity residual of the penalized objective at beta.
double kkt_residual(const Eigen::VectorXd& gradient, const Eigen::VectorXd& beta,
                    double lambda);

}  // namespace survkit
