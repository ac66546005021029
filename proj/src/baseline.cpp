#include "survkit/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace survkit {

StepFunction::StepFunction(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
  if (knots_.size() != values_.size())
    fail(ErrorCode::invalid_argument, "step function knots/values length mismatch");
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    if (!(knots_[i] > 0.0) || !std::isfinite(knots_[i]))
      fail(ErrorCode::invalid_argument, "step function knots must be positive");
    if (i > 0 && !(knots_[i] > knots_[i - 1]))
      fail(ErrorCode::invalid_argument, "step function knots must be strictly increasing");
    if (values_[i] < 0.0 || (i > 0 && values_[i] < values_[i - 1]))
      fail(ErrorCode::invalid_argument, "step function values must be nondecreasing and nonnegative");
  }
}

double StepFunction::operator()(double t) const {
  // Largest knot <= t; 0 before the first knot.
  auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  if (it == knots_.begin()) return 0.0;
  return values_[static_cast<std::size_t>(it - knots_.begin()) - 1];
}

BaselineSet breslow_cumhaz(const Dataset& data, const Eigen::VectorXd& beta) {
  if (beta.size() != data.dim())
    fail(ErrorCode::invalid_argument, "beta dimension mismatch");
  const Eigen::VectorXd eta = data.covariates() * beta;
  const Eigen::VectorXd& times = data.times();
  const std::vector<int>& events = data.events();

  BaselineSet out;
  for (int k = 0; k < data.n_strata(); ++k) {
    std::vector<int> order = data.stratum_members(k);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (times[a] != times[b]) return times[a] > times[b];
      return a < b;
    });

    // Decreasing-time sweep with the same log-sum-exp shift as the
    // likelihood; increments are recovered on the absolute scale.
    double shift = -std::numeric_limits<double>::infinity();
    double s0 = 0.0;
    std::vector<double> knots_desc, increments_desc;
    std::size_t pos = 0;
    while (pos < order.size()) {
      const double t = times[order[pos]];
      std::size_t end = pos;
      int n_events_here = 0;
      while (end < order.size() && times[order[end]] == t) {
        if (events[order[end]]) ++n_events_here;
        ++end;
      }
      for (std::size_t q = pos; q < end; ++q) {
        const int j = order[q];
        if (eta[j] > shift) {
          s0 *= std::exp(shift - eta[j]);
          shift = eta[j];
        }
        s0 += std::exp(eta[j] - shift);
      }
      if (n_events_here > 0) {
        knots_desc.push_back(t);
        const double increment =
            std::abs(shift) < 500.0
                ? n_events_here / (std::exp(shift) * s0)
                : std::exp(std::log(static_cast<double>(n_events_here)) -
                           shift - std::log(s0));
        increments_desc.push_back(increment);
      }
      pos = end;
    }

    std::vector<double> knots(knots_desc.rbegin(), knots_desc.rend());
    std::vector<double> values(increments_desc.rbegin(), increments_desc.rend());
    double cum = 0.0;
    for (double& v : values) {
      cum += v;
      v = cum;
    }
    out.per_stratum.emplace(data.strata_labels()[k],
                            StepFunction(std::move(knots), std::move(values)));
  }
  return out;
}

double expected_survival(const StepFunction& cumulative_hazard,
                         double linear_predictor) {
  if (cumulative_hazard.empty())
    fail(ErrorCode::empty_baseline,
         "cumulative hazard has no knots; prediction impossible");
  const double risk = std::exp(linear_predictor);
  // exp(lp) may overflow to inf; survival at H = 0 is 1 regardless.
  auto survival = [&](double h) { return h == 0.0 ? 1.0 : std::exp(-risk * h); };

  const std::vector<double>& knots = cumulative_hazard.knots();
  const std::vector<double>& values = cumulative_hazard.values();
  double total = 0.0;
  double prev_t = 0.0;
  double prev_s = 1.0;
  for (std::size_t i = 0; i < knots.size(); ++i) {
    const double s = survival(values[i]);
    total += 0.5 * (knots[i] - prev_t) * (s + prev_s);
    prev_t = knots[i];
    prev_s = s;
  }
  return total;
}

namespace {

const StepFunction& baseline_for(const BaselineSet& baselines, int label) {
  const StepFunction* h = baselines.find(label);
  if (!h)
    fail(ErrorCode::unknown_stratum,
         "no baseline for stratum " + std::to_string(label));
  if (h->empty())
    fail(ErrorCode::empty_baseline,
         "stratum " + std::to_string(label) + " has no events in the fitting data");
  return *h;
}

}  // namespace

std::vector<double> predict_times(const Eigen::VectorXd& fit_beta,
                                  const BaselineSet& baselines,
                                  const Dataset& newdata) {
  if (fit_beta.size() != newdata.dim())
    fail(ErrorCode::invalid_argument, "beta dimension mismatch");
  const Eigen::VectorXd lp = newdata.covariates() * fit_beta;
  std::vector<double> out(newdata.n());
  for (int i = 0; i < newdata.n(); ++i) {
    out[i] = expected_survival(baseline_for(baselines, newdata.strata()[i]), lp[i]);
  }
  return out;
}

PredictionOutcome predict_times_dropping(const Eigen::VectorXd& fit_beta,
                                         const BaselineSet& baselines,
                                         const Dataset& newdata) {
  if (fit_beta.size() != newdata.dim())
    fail(ErrorCode::invalid_argument, "beta dimension mismatch");
  const Eigen::VectorXd lp = newdata.covariates() * fit_beta;
  PredictionOutcome out;
  out.times.resize(newdata.n());
  for (int i = 0; i < newdata.n(); ++i) {
    const StepFunction* h = baselines.find(newdata.strata()[i]);
    if (!h || h->empty()) {
      ++out.n_dropped;
      continue;
    }
    out.times[i] = expected_survival(*h, lp[i]);
  }
  return out;
}

}  // namespace survkit
