#include "survkit/cox.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>

namespace survkit {

namespace {

enum class SecondOrder { none, diag, full };

void check_beta(const Dataset& data, const Eigen::VectorXd& beta) {
  if (beta.size() != data.dim())
    fail(ErrorCode::invalid_argument,
         "beta has length " + std::to_string(beta.size()) + ", expected " +
             std::to_string(data.dim()));
}

// Shared sweep. Iterates each stratum in decreasing time order, growing the
// risk-set accumulators S0 = sum exp(eta), S1 = sum exp(eta) X and (optionally)
// S2 = sum exp(eta) X X^T, all kept relative to the running max of eta so the
// exponentials stay in [0, 1]. Tied times enter the accumulators as a group
// before any event term at that time is taken (Breslow).
void plk_sweep(const Dataset& data, const Eigen::VectorXd& beta,
               bool want_gradient, SecondOrder second, double* value_out,
               Eigen::VectorXd* grad_out, Eigen::VectorXd* hdiag_out,
               Eigen::MatrixXd* hess_out) {
  check_beta(data, beta);
  const int d = data.dim();
  const Eigen::MatrixXd& x = data.covariates();
  const Eigen::VectorXd& times = data.times();
  const std::vector<int>& events = data.events();
  const Eigen::VectorXd eta = x * beta;

  double value = 0.0;
  Eigen::VectorXd grad;
  Eigen::VectorXd hdiag;
  Eigen::MatrixXd hess;
  if (want_gradient) grad = Eigen::VectorXd::Zero(d);
  if (second == SecondOrder::diag) hdiag = Eigen::VectorXd::Zero(d);
  if (second == SecondOrder::full) hess = Eigen::MatrixXd::Zero(d, d);

  Eigen::VectorXd s1(d), xbar(d);
  Eigen::MatrixXd s2;
  if (second == SecondOrder::full) s2.resize(d, d);
  Eigen::VectorXd s2diag(d);

  for (int k = 0; k < data.n_strata(); ++k) {
    std::vector<int> order = data.stratum_members(k);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (times[a] != times[b]) return times[a] > times[b];
      return a < b;
    });

    double shift = -std::numeric_limits<double>::infinity();
    double s0 = 0.0;
    if (want_gradient) s1.setZero();
    if (second == SecondOrder::full) s2.setZero();
    if (second == SecondOrder::diag) s2diag.setZero();

    std::size_t pos = 0;
    while (pos < order.size()) {
      const double t = times[order[pos]];
      std::size_t end = pos;
      while (end < order.size() && times[order[end]] == t) ++end;

      // Admit the whole tied-time group to the risk set.
      for (std::size_t q = pos; q < end; ++q) {
        const int j = order[q];
        if (eta[j] > shift) {
          const double rescale = std::exp(shift - eta[j]);  // 0 on first entry
          s0 *= rescale;
          if (want_gradient) s1 *= rescale;
          if (second == SecondOrder::full) s2 *= rescale;
          if (second == SecondOrder::diag) s2diag *= rescale;
          shift = eta[j];
        }
        const double w = std::exp(eta[j] - shift);
        s0 += w;
        if (want_gradient) s1 += w * x.row(j).transpose();
        if (second == SecondOrder::full)
          s2 += w * (x.row(j).transpose() * x.row(j));
        if (second == SecondOrder::diag)
          s2diag += w * x.row(j).transpose().cwiseAbs2();
      }

      // Event terms at this time, each against the full risk set.
      for (std::size_t q = pos; q < end; ++q) {
        const int i = order[q];
        if (!events[i]) continue;
        value += (eta[i] - shift) - std::log(s0);
        if (want_gradient) {
          xbar = s1 / s0;
          grad += x.row(i).transpose() - xbar;
          if (second == SecondOrder::full)
            hess -= s2 / s0 - xbar * xbar.transpose();
          if (second == SecondOrder::diag)
            hdiag -= s2diag / s0 - xbar.cwiseAbs2();
        }
      }
      pos = end;
    }
  }

  if (value_out) *value_out = value;
  if (grad_out) *grad_out = std::move(grad);
  if (hdiag_out) *hdiag_out = std::move(hdiag);
  if (hess_out) *hess_out = std::move(hess);
}

}  // namespace

double partial_log_likelihood(const Dataset& data, const Eigen::VectorXd& beta) {
  double value = 0.0;
  plk_sweep(data, beta, false, SecondOrder::none, &value, nullptr, nullptr,
            nullptr);
  return value;
}

Eigen::VectorXd plk_gradient(const Dataset& data, const Eigen::VectorXd& beta) {
  Eigen::VectorXd grad;
  plk_sweep(data, beta, true, SecondOrder::none, nullptr, &grad, nullptr,
            nullptr);
  return grad;
}

Eigen::MatrixXd plk_hessian(const Dataset& data, const Eigen::VectorXd& beta) {
  Eigen::MatrixXd hess;
  plk_sweep(data, beta, true, SecondOrder::full, nullptr, nullptr, nullptr,
            &hess);
  return hess;
}

PlkDerivatives plk_with_hessian(const Dataset& data, const Eigen::VectorXd& beta) {
  PlkDerivatives out;
  plk_sweep(data, beta, true, SecondOrder::full, &out.value, &out.gradient,
            nullptr, &out.hessian);
  return out;
}

PlkQuadratic plk_with_hessian_diag(const Dataset& data,
                                   const Eigen::VectorXd& beta) {
  PlkQuadratic out;
  plk_sweep(data, beta, true, SecondOrder::diag, &out.value, &out.gradient,
            &out.hessian_diag, nullptr);
  return out;
}

namespace {

void check_options(const FitOptions& options) {
  if (options.max_iterations <= 0 || options.gradient_tolerance <= 0.0 ||
      options.step_halving_limit <= 0 || options.ridge_epsilon < 0.0)
    fail(ErrorCode::invalid_argument, "fit options out of domain");
}

// Solve (-H + ridge I) delta = g for the Newton direction, retrying with a
// stronger ridge when the factorization fails or returns non-finite values.
Eigen::VectorXd newton_direction(const Eigen::MatrixXd& hessian,
                                 const Eigen::VectorXd& gradient,
                                 double ridge_epsilon) {
  Eigen::MatrixXd a = -hessian;
  if (ridge_epsilon > 0.0) a.diagonal().array() += ridge_epsilon;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() == Eigen::Success) {
    Eigen::VectorXd delta = ldlt.solve(gradient);
    if (delta.allFinite()) return delta;
  }
  const double bump =
      std::max(ridge_epsilon, 1e-10 * (1.0 + a.diagonal().cwiseAbs().maxCoeff()));
  a.diagonal().array() += bump;
  Eigen::VectorXd delta = Eigen::LDLT<Eigen::MatrixXd>(a).solve(gradient);
  if (!delta.allFinite())
    fail(ErrorCode::internal, "Newton system could not be solved");
  return delta;
}

constexpr double kDivergenceGuard = 50.0;

}  // namespace

CoxFit fit_cox(const Dataset& data, const FitOptions& options) {
  check_options(options);
  if (data.n_events() == 0)
    fail(ErrorCode::no_events, "no uncensored observations");

  const int d = data.dim();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
  PlkDerivatives cur = plk_with_hessian(data, beta);

  CoxFit fit;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    const double gnorm = cur.gradient.norm();
    if (gnorm <= options.gradient_tolerance) break;
    if (beta.lpNorm<Eigen::Infinity>() > kDivergenceGuard) break;

    Eigen::VectorXd delta =
        newton_direction(cur.hessian, cur.gradient, options.ridge_epsilon);

    double step = 1.0;
    Eigen::VectorXd candidate;
    double candidate_value = 0.0;
    bool accepted = false;
    for (int h = 0; h <= options.step_halving_limit; ++h) {
      candidate = beta + step * delta;
      candidate_value = partial_log_likelihood(data, candidate);
      if (std::isfinite(candidate_value) && candidate_value >= cur.value) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no non-decreasing step found

    beta = candidate;
    cur = plk_with_hessian(data, beta);
    ++fit.n_iterations;
  }

  fit.beta = beta;
  fit.log_partial_likelihood = cur.value;
  fit.final_gradient_norm = cur.gradient.norm();
  fit.converged = fit.final_gradient_norm <= options.gradient_tolerance;
  return fit;
}

}  // namespace survkit
