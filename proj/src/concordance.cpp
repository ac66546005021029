#include "survkit/concordance.hpp"

namespace survkit {

ConcordanceReport cindex_from_scores(const std::vector<double>& scores,
                                     const std::vector<double>& times,
                                     const std::vector<int>& events) {
  if (scores.size() != times.size())
    fail(ErrorCode::invalid_argument, "scores/times length mismatch");
  ConcordanceReport report;
  for (const ComparablePair& p : comparable_pairs(times, events)) {
    ++report.comparable;
    if (scores[p.earlier] < scores[p.later])
      ++report.concordant;
    else if (scores[p.earlier] == scores[p.later])
      ++report.score_ties;
  }
  if (report.comparable > 0)
    report.index = (report.concordant + 0.5 * report.score_ties) /
                   static_cast<double>(report.comparable);
  return report;
}

namespace {

std::vector<double> negated_linear_predictor(const Eigen::VectorXd& beta,
                                             const Dataset& data) {
  if (beta.size() != data.dim())
    fail(ErrorCode::invalid_argument, "beta dimension mismatch");
  const Eigen::VectorXd lp = data.covariates() * beta;
  std::vector<double> scores(data.n());
  for (int i = 0; i < data.n(); ++i) scores[i] = -lp[i];
  return scores;
}

}  // namespace

ConcordanceReport cindex_linear_predictor(const Eigen::VectorXd& beta,
                                          const Dataset& data) {
  return cindex_from_scores(negated_linear_predictor(beta, data),
                            data.times_vector(), data.events());
}

StratifiedConcordance cindex_within_strata(const Eigen::VectorXd& beta,
                                           const Dataset& data) {
  const std::vector<double> scores = negated_linear_predictor(beta, data);
  StratifiedConcordance out;
  double sum = 0.0;
  for (int k = 0; k < data.n_strata(); ++k) {
    const std::vector<int>& members = data.stratum_members(k);
    std::vector<double> s, t;
    std::vector<int> e;
    s.reserve(members.size());
    for (int i : members) {
      s.push_back(scores[i]);
      t.push_back(data.times()[i]);
      e.push_back(data.events()[i]);
    }
    ConcordanceReport r = cindex_from_scores(s, t, e);
    if (r.index) {
      sum += *r.index;
      ++out.strata_included;
    } else {
      ++out.strata_excluded;
    }
    out.per_stratum.emplace_back(data.strata_labels()[k], std::move(r));
  }
  if (out.strata_included > 0) out.index = sum / out.strata_included;
  return out;
}

ConcordanceReport cindex_within_strata_pooled(const Eigen::VectorXd& beta,
                                              const Dataset& data) {
  StratifiedConcordance parts = cindex_within_strata(beta, data);
  ConcordanceReport pooled;
  for (const auto& [label, r] : parts.per_stratum) {
    pooled.concordant += r.concordant;
    pooled.comparable += r.comparable;
    pooled.score_ties += r.score_ties;
  }
  if (pooled.comparable > 0)
    pooled.index = (pooled.concordant + 0.5 * pooled.score_ties) /
                   static_cast<double>(pooled.comparable);
  return pooled;
}

ConcordanceReport cindex_baseline_adjusted(const Dataset& train,
                                           const Dataset& test,
                                           const Eigen::VectorXd& fit_beta) {
  if (train.dim() != test.dim())
    fail(ErrorCode::invalid_argument, "train/test covariate dimension mismatch");
  const BaselineSet baselines = breslow_cumhaz(train, fit_beta);
  const std::vector<double> predicted =
      predict_times(fit_beta, baselines, test);
  return cindex_from_scores(predicted, test.times_vector(), test.events());
}

}  // namespace survkit
