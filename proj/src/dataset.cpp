#include "survkit/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace survkit {

Dataset::Dataset(Eigen::MatrixXd covariates, Eigen::VectorXd times,
                 std::vector<int> events, std::vector<int> strata)
    : covariates_(std::move(covariates)),
      times_(std::move(times)),
      events_(std::move(events)),
      strata_(std::move(strata)) {
  const int n = static_cast<int>(times_.size());
  if (n == 0) fail(ErrorCode::data_error, "dataset has no observations");
  if (covariates_.rows() != n || static_cast<int>(events_.size()) != n ||
      static_cast<int>(strata_.size()) != n) {
    fail(ErrorCode::data_error, "dataset field lengths disagree");
  }
  for (int i = 0; i < n; ++i) {
    if (!(times_[i] > 0.0) || !std::isfinite(times_[i]))
      fail(ErrorCode::data_error,
           "row " + std::to_string(i + 1) + ": time must be positive and finite");
    if (events_[i] != 0 && events_[i] != 1)
      fail(ErrorCode::data_error,
           "row " + std::to_string(i + 1) + ": event must be 0 or 1");
    if (events_[i] == 1) ++n_events_;
  }
  if (!covariates_.allFinite())
    fail(ErrorCode::data_error, "covariates contain non-finite values");

  std::map<int, int> registry;  // label -> dense index, sorted by label
  for (int s : strata_) registry.emplace(s, 0);
  int next = 0;
  for (auto& [label, idx] : registry) {
    idx = next++;
    strata_labels_.push_back(label);
  }
  stratum_index_.resize(n);
  stratum_members_.resize(registry.size());
  for (int i = 0; i < n; ++i) {
    int k = registry[strata_[i]];
    stratum_index_[i] = k;
    stratum_members_[k].push_back(i);
  }
}

int Dataset::stratum_index_of_label(int label) const {
  auto it = std::lower_bound(strata_labels_.begin(), strata_labels_.end(), label);
  if (it == strata_labels_.end() || *it != label) return -1;
  return static_cast<int>(it - strata_labels_.begin());
}

Observation Dataset::observation(int i) const {
  return Observation{covariates_.row(i).transpose(), times_[i], events_[i],
                     strata_[i]};
}

Dataset Dataset::subset(const std::vector<int>& indices) const {
  const int m = static_cast<int>(indices.size());
  Eigen::MatrixXd x(m, dim());
  Eigen::VectorXd t(m);
  std::vector<int> ev(m), st(m);
  for (int r = 0; r < m; ++r) {
    int i = indices[r];
    if (i < 0 || i >= n()) fail(ErrorCode::invalid_argument, "subset index out of range");
    x.row(r) = covariates_.row(i);
    t[r] = times_[i];
    ev[r] = events_[i];
    st[r] = strata_[i];
  }
  return Dataset(std::move(x), std::move(t), std::move(ev), std::move(st));
}

Dataset validate_dataset(const std::vector<Observation>& rows) {
  if (rows.size() < 2)
    fail(ErrorCode::data_error, "dataset needs at least 2 rows, got " +
                                    std::to_string(rows.size()));
  const int n = static_cast<int>(rows.size());
  const int d = static_cast<int>(rows[0].covariates.size());
  for (int i = 0; i < n; ++i) {
    const Observation& o = rows[i];
    if (static_cast<int>(o.covariates.size()) != d)
      fail(ErrorCode::data_error,
           "row " + std::to_string(i + 1) + ": expected " + std::to_string(d) +
               " covariates, got " + std::to_string(o.covariates.size()));
    if (!(o.time > 0.0) || !std::isfinite(o.time))
      fail(ErrorCode::data_error,
           "row " + std::to_string(i + 1) + ": time must be positive and finite");
    if (o.event != 0 && o.event != 1)
      fail(ErrorCode::data_error,
           "row " + std::to_string(i + 1) + ": event must be 0 or 1");
    if (!o.covariates.allFinite())
      fail(ErrorCode::data_error,
           "row " + std::to_string(i + 1) + ": non-finite covariate value");
  }
  Eigen::MatrixXd x(n, d);
  Eigen::VectorXd t(n);
  std::vector<int> ev(n), st(n);
  for (int i = 0; i < n; ++i) {
    x.row(i) = rows[i].covariates.transpose();
    t[i] = rows[i].time;
    ev[i] = rows[i].event;
    st[i] = rows[i].stratum;
  }
  return Dataset(std::move(x), std::move(t), std::move(ev), std::move(st));
}

std::vector<int> risk_set(const Dataset& data, int stratum_label, double t) {
  int k = data.stratum_index_of_label(stratum_label);
  if (k < 0)
    fail(ErrorCode::unknown_stratum,
         "unknown stratum label " + std::to_string(stratum_label));
  std::vector<int> out;
  for (int i : data.stratum_members(k)) {
    if (data.times()[i] >= t) out.push_back(i);
  }
  return out;
}

std::vector<ComparablePair> comparable_pairs(const std::vector<double>& times,
                                             const std::vector<int>& events) {
  if (times.size() != events.size())
    fail(ErrorCode::invalid_argument, "times/events length mismatch");
  const int n = static_cast<int>(times.size());
  std::vector<ComparablePair> out;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (times[i] == times[j]) continue;  // exact ties are incomparable
      int a = times[i] < times[j] ? i : j;
      int b = a == i ? j : i;
      // Comparable iff the earlier time is an event: event/event always,
      // event/censored only when censoring happens strictly later.
      if (events[a] == 1) out.push_back({a, b});
    }
  }
  return out;
}

}  // namespace survkit
