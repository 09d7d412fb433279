#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "newsrec/encoders.hpp"

namespace newsrec {

struct MetricReport {
  double auc = 0.0;
  double mrr = 0.0;
  double ndcg5 = 0.0;
  double ndcg10 = 0.0;
  int64_t impressions = 0;  // scorable impressions that contributed
  int64_t skipped = 0;      // degenerate impressions (all-0 / all-1)
  std::string label;

  std::string tsv() const;       // header + one value row
  std::string kv_block() const;  // key=value lines
};

// Pairwise win fraction with ties counted 0.5. Needs at least one
// positive and one negative.
double metric_auc(std::span<const int8_t> labels, std::span<const double> scores);

// Mean over positives of 1/rank; rank by descending score, ties broken by
// original index.
double metric_mrr(std::span<const int8_t> labels, std::span<const double> scores);

// Binary-gain DCG@k over the score-sorted list divided by the ideal DCG@k.
double metric_ndcg(std::span<const int8_t> labels, std::span<const double> scores,
                   int k);

// Scores every impression with the model and averages per-impression
// metrics. Impressions without both classes are skipped and tallied.
// Candidates or history entries whose news id is unknown are dropped.
// Optionally collects one attention trace per distinct news id.
MetricReport evaluate(ModelParams& mp, const FeatureCache& features,
                      const std::vector<Impression>& impressions,
                      int history_max, int threads = 1,
                      const std::string& label = "",
                      std::vector<AttnTrace>* traces = nullptr);

}  // namespace newsrec
