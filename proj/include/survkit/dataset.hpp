#pragma once

#include <Eigen/Core>
#include <vector>

#include "survkit/errors.hpp"

namespace survkit {

// One subject: covariate values, observed time, event indicator, stratum.
struct Observation {
  Eigen::VectorXd covariates;
  double time = 0.0;
  int event = 0;  // 1 = event observed, 0 = right-censored
  int stratum = 1;
};

// Validated right-censored stratified survival data. Immutable after
// construction; stratum labels are arbitrary integers mapped to a dense
// 0-based registry internally.
class Dataset {
 public:
  Dataset(Eigen::MatrixXd covariates, Eigen::VectorXd times,
          std::vector<int> events, std::vector<int> strata);

  int n() const { return static_cast<int>(times_.size()); }
  int dim() const { return static_cast<int>(covariates_.cols()); }
  const Eigen::MatrixXd& covariates() const { return covariates_; }
  const Eigen::VectorXd& times() const { return times_; }
  const std::vector<int>& events() const { return events_; }
  const std::vector<int>& strata() const { return strata_; }

  // Sorted distinct stratum labels present in the data.
  const std::vector<int>& strata_labels() const { return strata_labels_; }
  int n_strata() const { return static_cast<int>(strata_labels_.size()); }
  // Dense stratum index of observation i.
  int stratum_index(int i) const { return stratum_index_[i]; }
  // Dense index for a label, or -1 if the label is absent.
  int stratum_index_of_label(int label) const;
  // Observation indices belonging to dense stratum k, ascending.
  const std::vector<int>& stratum_members(int k) const {
    return stratum_members_[k];
  }

  int n_events() const { return n_events_; }
  Observation observation(int i) const;
  Dataset subset(const std::vector<int>& indices) const;

  std::vector<double> times_vector() const {
    return std::vector<double>(times_.data(), times_.data() + times_.size());
  }

 private:
  Eigen::MatrixXd covariates_;  // n x d
  Eigen::VectorXd times_;
  std::vector<int> events_;
  std::vector<int> strata_;
  std::vector<int> strata_labels_;
  std::vector<int> stratum_index_;
  std::vector<std::vector<int>> stratum_members_;
  int n_events_ = 0;
};

// Gate for external input: checks every type invariant and reports the
// offending row (1-based) on failure. Requires n >= 2; internal subsets
// (folds, splits) may be smaller and bypass this entry point.
Dataset validate_dataset(const std::vector<Observation>& rows);

// Indices j with S_j = stratum and T_j >= t (censored and uncensored alike).
std::vector<int> risk_set(const Dataset& data, int stratum_label, double t);

// An unordered comparable pair, oriented so that `earlier` has the smaller
// effective time. Comparability rules: both events with distinct times, or a
// censoring time strictly after an event time; exact ties and
// censored/censored pairs are incomparable.
struct ComparablePair {
  int earlier = 0;
  int later = 0;
};

std::vector<ComparablePair> comparable_pairs(const std::vector<double>& times,
                                             const std::vector<int>& events);

}  // namespace survkit
