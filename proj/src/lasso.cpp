#include "survkit/lasso.hpp"

#include <algorithm>
#include <cmath>

namespace survkit {

double soft_threshold(double z, double gamma) {
  if (gamma < 0.0) fail(ErrorCode::invalid_argument, "soft_threshold: gamma < 0");
  const double shrunk = std::abs(z) - gamma;
  if (shrunk <= 0.0) return 0.0;
  return z > 0.0 ? shrunk : -shrunk;
}

double lambda_max(const Dataset& data) {
  if (data.n_events() == 0)
    fail(ErrorCode::no_events, "lambda_max needs at least one event");
  return plk_gradient(data, Eigen::VectorXd::Zero(data.dim()))
      .lpNorm<Eigen::Infinity>();
}

double kkt_residual(const Eigen::VectorXd& gradient, const Eigen::VectorXd& beta,
                    double lambda) {
  double worst = 0.0;
  for (int j = 0; j < beta.size(); ++j) {
    double r;
    if (beta[j] > 0.0)
      r = std::abs(gradient[j] - lambda);
    else if (beta[j] < 0.0)
      r = std::abs(gradient[j] + lambda);
    else
      r = std::max(0.0, std::abs(gradient[j]) - lambda);
    worst = std::max(worst, r);
  }
  return worst;
}

namespace {

constexpr double kCoordinateTolerance = 1e-7;  // max change between sweeps

double penalized_objective(const Dataset& data, const Eigen::VectorXd& beta,
                           double lambda) {
  return partial_log_likelihood(data, beta) - lambda * beta.lpNorm<1>();
}

}  // namespace

LassoFit fit_lasso_cox(const Dataset& data, double lambda,
                       const std::optional<Eigen::VectorXd>& warm_start,
                       const FitOptions& options) {
  if (lambda < 0.0) fail(ErrorCode::invalid_argument, "lambda must be >= 0");
  if (data.n_events() == 0)
    fail(ErrorCode::no_events, "no uncensored observations");

  const int d = data.dim();
  Eigen::VectorXd beta;
  if (warm_start) {
    if (warm_start->size() != d)
      fail(ErrorCode::invalid_argument, "warm start dimension mismatch");
    beta = *warm_start;
  } else {
    beta = Eigen::VectorXd::Zero(d);
  }

  const double kkt_tolerance = 1e-6 * (1.0 + lambda);
  LassoFit fit;
  fit.lambda = lambda;

  PlkQuadratic model = plk_with_hessian_diag(data, beta);
  double kkt = kkt_residual(model.gradient, beta, lambda);

  for (int outer = 0; outer < options.max_iterations && kkt > kkt_tolerance;
       ++outer) {
    // The model is separable (diagonal curvature), so one cyclic pass of
    // exact coordinate maximizations solves it.
    Eigen::VectorXd target(d);
    for (int j = 0; j < d; ++j) {
      const double curvature = std::max(-model.hessian_diag[j], 1e-12);
      target[j] =
          soft_threshold(curvature * beta[j] + model.gradient[j], lambda) /
          curvature;
    }
    const Eigen::VectorXd direction = target - beta;

    // Halve the aggregated step until the penalized objective is not worse.
    const double current = model.value - lambda * beta.lpNorm<1>();
    double step = 1.0;
    Eigen::VectorXd candidate;
    bool accepted = false;
    for (int h = 0; h <= options.step_halving_limit; ++h) {
      candidate = beta + step * direction;
      const double value = penalized_objective(data, candidate, lambda);
      if (std::isfinite(value) && value >= current - 1e-12 * (1.0 + std::abs(current))) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // stalled

    const double max_change = (step * direction).lpNorm<Eigen::Infinity>();
    beta = candidate;
    ++fit.n_iterations;
    model = plk_with_hessian_diag(data, beta);
    kkt = kkt_residual(model.gradient, beta, lambda);
    if (max_change < kCoordinateTolerance) break;
  }

  fit.beta = beta;
  fit.kkt_violation = kkt;
  fit.converged = kkt <= kkt_tolerance;
  fit.log_partial_likelihood = model.value;
  for (int j = 0; j < d; ++j)
    if (beta[j] != 0.0) fit.active_set.push_back(j);
  return fit;
}

std::vector<double> lambda_grid(double lambda_max_value, int n_lambda,
                                double min_ratio) {
  if (n_lambda < 2) fail(ErrorCode::invalid_argument, "n_lambda must be >= 2");
  if (!(min_ratio > 0.0 && min_ratio < 1.0))
    fail(ErrorCode::invalid_argument, "min_ratio must be in (0, 1)");
  std::vector<double> grid(n_lambda);
  grid.front() = lambda_max_value;
  grid.back() = lambda_max_value * min_ratio;
  for (int i = 1; i + 1 < n_lambda; ++i)
    grid[i] = lambda_max_value *
              std::exp(std::log(min_ratio) * i / (n_lambda - 1));
  return grid;
}

LambdaPath lambda_path(const Dataset& data, int n_lambda, double min_ratio,
                       const FitOptions& options) {
  LambdaPath path;
  path.lambdas = lambda_grid(lambda_max(data), n_lambda, min_ratio);
  path.fits.reserve(n_lambda);
  std::optional<Eigen::VectorXd> warm;
  for (double lambda : path.lambdas) {
    path.fits.push_back(fit_lasso_cox(data, lambda, warm, options));
    warm = path.fits.back().beta;
  }
  return path;
}

}  // namespace survkit
