#pragma once

#include <Eigen/Core>
#include <optional>
#include <utility>
#include <vector>

#include "survkit/baseline.hpp"
#include "survkit/dataset.hpp"

namespace survkit {

// Pair-counting result of one concordance estimator. `index` is
// (concordant + 0.5 * score_ties) / comparable, or empty when no pair is
// comparable.
struct ConcordanceReport {
  long long concordant = 0;
  long long comparable = 0;
  long long score_ties = 0;
  std::optional<double> index;
};

// C-index of an arbitrary score (higher score = predicted longer survival):
// over all comparable pairs, the earlier observation should carry the
// smaller score. Exactly tied scores earn half credit.
ConcordanceReport cindex_from_scores(const std::vector<double>& scores,
                                     const std::vector<double>& times,
                                     const std::vector<int>& events);

// C-index of a fitted Cox model using -beta^T X as the score, all pairs
// compared regardless of stratum.
ConcordanceReport cindex_linear_predictor(const Eigen::VectorXd& beta,
                                          const Dataset& data);

// Within-stratum estimator: per-stratum C-indices from -beta^T X, averaged
// with equal weight over the strata that have at least one comparable pair.
// Strata without a comparable pair are excluded and counted.
struct StratifiedConcordance {
  std::optional<double> index;  // unweighted mean over included strata
  std::vector<std::pair<int, ConcordanceReport>> per_stratum;  // label, report
  int strata_included = 0;
  int strata_excluded = 0;
};
StratifiedConcordance cindex_within_strata(const Eigen::VectorXd& beta,
                                           const Dataset& data);

// Pair-weighted pooled variant of the within-stratum estimator (counts
// summed across strata). Kept separate from the unweighted average above.
ConcordanceReport cindex_within_strata_pooled(const Eigen::VectorXd& beta,
                                              const Dataset& data);

// Baseline-adjusted estimator: estimate per-stratum baselines on `train`,
// predict expected survival times for `test`, then score every comparable
// test pair (across strata) by predicted time. Fails if a test stratum is
// absent from train or has no training events.
ConcordanceReport cindex_baseline_adjusted(const Dataset& train,
                                           const Dataset& test,
                                           const Eigen::VectorXd& fit_beta);

}  // namespace survkit
