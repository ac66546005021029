#pragma once

#include <Eigen/Core>
#include <map>
#include <optional>
#include <vector>

#include "survkit/dataset.hpp"

namespace survkit {

// Right-continuous nondecreasing step function: H(t) = value at the largest
// knot <= t, 0 before the first knot. A default-constructed instance is the
// identically-zero function (a stratum with no events).
class StepFunction {
 public:
  StepFunction() = default;
  StepFunction(std::vector<double> knots, std::vector<double> values);

  double operator()(double t) const;
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return values_; }
  bool empty() const { return knots_.empty(); }

 private:
  std::vector<double> knots_;   // strictly increasing, positive
  std::vector<double> values_;  // nondecreasing, nonnegative
};

// Per-stratum cumulative baseline hazard estimates, keyed by stratum label.
struct BaselineSet {
  std::map<int, StepFunction> per_stratum;

  const StepFunction* find(int stratum_label) const {
    auto it = per_stratum.find(stratum_label);
    return it == per_stratum.end() ? nullptr : &it->second;
  }
};

// Breslow estimator: for each stratum one knot per distinct event time, with
// increment (number of tied events) / sum_{risk set} exp(beta^T X). A stratum
// with no events yields the zero function.
BaselineSet breslow_cumhaz(const Dataset& data, const Eigen::VectorXd& beta);

// Expected survival time under cumulative hazard H and linear predictor lp:
// trapezoidal sum of exp(-e^lp H(t)) over the knots of H, starting from the
// pseudo-knot t = 0 and truncated at the last knot. Throws for an empty H
// (no events to anchor a prediction).
double expected_survival(const StepFunction& cumulative_hazard,
                         double linear_predictor);

// Expected survival time for each observation of `newdata`, using the
// baseline of its stratum. Fails on a stratum that is missing from
// `baselines` or has no events.
std::vector<double> predict_times(const Eigen::VectorXd& fit_beta,
                                  const BaselineSet& baselines,
                                  const Dataset& newdata);

// Same, but observations that cannot be predicted are dropped (nullopt) and
// counted instead of failing.
struct PredictionOutcome {
  std::vector<std::optional<double>> times;
  int n_dropped = 0;
};
PredictionOutcome predict_times_dropping(const Eigen::VectorXd& fit_beta,
                                         const BaselineSet& baselines,
                                         const Dataset& newdata);

}  // namespace survkit
