#include "newsrec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "newsrec/error.hpp"

namespace newsrec {

namespace {

void check_lengths(std::span<const int8_t> labels, std::span<const double> scores,
                   const char* op) {
  if (labels.size() != scores.size()) {
    throw DimError(std::string(op) + ": labels and scores differ in length");
  }
  if (labels.empty()) throw DomainError(std::string(op) + ": empty impression");
}

// Indexes sorted by descending score, ties broken by original position.
std::vector<size_t> rank_order(std::span<const double> scores) {
  std::vector<size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
    return scores[a] > scores[b];
  });
  return idx;
}

}  // namespace

double metric_auc(std::span<const int8_t> labels,
                  std::span<const double> scores) {
  check_lengths(labels, scores, "auc");
  int64_t pos = 0, neg = 0;
  for (int8_t l : labels) (l ? pos : neg)++;
  if (pos == 0 || neg == 0) {
    throw DomainError("auc: needs at least one positive and one negative");
  }
  // Rank-sum form with average ranks for ties.
  std::vector<size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), size_t{0});
  std::sort(idx.begin(), idx.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });
  double pos_rank_sum = 0.0;
  size_t i = 0;
  while (i < idx.size()) {
    size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (size_t k = i; k < j; ++k) {
      if (labels[idx[k]]) pos_rank_sum += avg_rank;
    }
    i = j;
  }
  const double p = static_cast<double>(pos);
  const double n = static_cast<double>(neg);
  return (pos_rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

double metric_mrr(std::span<const int8_t> labels,
                  std::span<const double> scores) {
  check_lengths(labels, scores, "mrr");
  const auto order = rank_order(scores);
  double sum = 0.0;
  int64_t positives = 0;
  for (size_t rank = 0; rank < order.size(); ++rank) {
    if (labels[order[rank]]) {
      sum += 1.0 / static_cast<double>(rank + 1);
      ++positives;
    }
  }
  if (positives == 0) throw DomainError("mrr: no positive candidate");
  return sum / static_cast<double>(positives);
}

double metric_ndcg(std::span<const int8_t> labels,
                   std::span<const double> scores, int k) {
  check_lengths(labels, scores, "ndcg");
  if (k < 1) throw DomainError("ndcg: k must be >= 1");
  int64_t positives = 0;
  for (int8_t l : labels) positives += l;
  if (positives == 0) throw DomainError("ndcg: no positive candidate");
  const auto order = rank_order(scores);
  const size_t cutoff = std::min(static_cast<size_t>(k), order.size());
  double dcg = 0.0;
  for (size_t i = 0; i < cutoff; ++i) {
    if (labels[order[i]]) dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  }
  double ideal = 0.0;
  const size_t ideal_hits = std::min(static_cast<size_t>(positives),
                                     static_cast<size_t>(k));
  for (size_t i = 0; i < ideal_hits; ++i) {
    ideal += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  }
  return dcg / ideal;
}

std::string MetricReport::tsv() const {
  std::ostringstream os;
  os.precision(6);
  os << std::fixed;
  os << "variant\tauc\tmrr\tndcg5\tndcg10\timpressions\tskipped\n";
  os << (label.empty() ? "-" : label) << '\t' << auc << '\t' << mrr << '\t'
     << ndcg5 << '\t' << ndcg10 << '\t' << impressions << '\t' << skipped
     << '\n';
  return os.str();
}

std::string MetricReport::kv_block() const {
  std::ostringstream os;
  os.precision(17);
  os << "label=" << (label.empty() ? "-" : label) << '\n';
  os << "auc=" << auc << '\n';
  os << "mrr=" << mrr << '\n';
  os << "ndcg5=" << ndcg5 << '\n';
  os << "ndcg10=" << ndcg10 << '\n';
  os << "impressions=" << impressions << '\n';
  os << "skipped=" << skipped << '\n';
  return os.str();
}

namespace {

struct ImpressionMetrics {
  bool scorable = false;
  double auc = 0, mrr = 0, ndcg5 = 0, ndcg10 = 0;
};

}  // namespace

MetricReport evaluate(ModelParams& mp, const FeatureCache& features,
                      const std::vector<Impression>& impressions,
                      int history_max, int threads, const std::string& label,
                      std::vector<AttnTrace>* traces) {
  if (impressions.empty()) {
    throw ValidationError("evaluate: no impressions");
  }

  // Distinct news ids, in first-appearance order for determinism.
  std::vector<std::string> order;
  std::unordered_map<std::string, int32_t> news_index;
  auto note = [&](const std::string& id) {
    if (news_index.emplace(id, static_cast<int32_t>(order.size())).second) {
      order.push_back(id);
    }
  };
  for (const auto& imp : impressions) {
    for (const auto& h : imp.history) note(h);
    for (const auto& c : imp.candidates) note(c.news_id);
  }

  // Encode each distinct news once; representations are reused as
  // constants below. A negative slot marks an unresolvable id.
  std::vector<Tensor> reprs(order.size());
  std::vector<char> known(order.size(), 0);
  const int nthreads = std::max(1, threads);
  auto encode_range = [&](size_t begin, size_t end, std::vector<AttnTrace>* sink) {
    for (size_t i = begin; i < end; ++i) {
      const NewsFeatures* f = features.find(order[i]);
      if (!f) continue;
      Tape tape;
      AttnTrace trace;
      NewsRepr r = encode_news(tape, mp, *f, sink ? &trace : nullptr);
      reprs[i] = tape.value(r.full);
      known[i] = 1;
      if (sink) {
        trace.news_id = order[i];
        (*sink)[i] = std::move(trace);
      }
    }
  };
  std::vector<AttnTrace> all_traces;
  if (traces) all_traces.resize(order.size());
  if (nthreads == 1 || order.size() < 2) {
    encode_range(0, order.size(), traces ? &all_traces : nullptr);
  } else {
    std::vector<std::thread> workers;
    const size_t chunk = (order.size() + nthreads - 1) / nthreads;
    for (int w = 0; w < nthreads; ++w) {
      const size_t begin = std::min(order.size(), static_cast<size_t>(w) * chunk);
      const size_t end = std::min(order.size(), begin + chunk);
      if (begin >= end) break;
      workers.emplace_back(encode_range, begin, end,
                           traces ? &all_traces : nullptr);
    }
    for (auto& t : workers) t.join();
  }
  if (traces) {
    for (size_t i = 0; i < all_traces.size(); ++i) {
      if (known[i]) traces->push_back(std::move(all_traces[i]));
    }
  }

  std::vector<ImpressionMetrics> per(impressions.size());
  auto score_range = [&](size_t begin, size_t end) {
    for (size_t n = begin; n < end; ++n) {
      const Impression& imp = impressions[n];
      Tape tape;
      std::vector<Var> hist;
      const size_t zmax = static_cast<size_t>(history_max);
      const size_t start = imp.history.size() > zmax ? imp.history.size() - zmax : 0;
      for (size_t i = start; i < imp.history.size(); ++i) {
        auto it = news_index.find(imp.history[i]);
        if (it == news_index.end() || !known[static_cast<size_t>(it->second)]) continue;
        hist.push_back(tape.constant(reprs[static_cast<size_t>(it->second)]));
      }
      Var user = encode_user(tape, mp, hist);
      std::vector<int8_t> labels;
      std::vector<double> scores;
      for (const auto& c : imp.candidates) {
        auto it = news_index.find(c.news_id);
        if (it == news_index.end() || !known[static_cast<size_t>(it->second)]) continue;
        Var cand = tape.constant(reprs[static_cast<size_t>(it->second)]);
        scores.push_back(tape.scalar_value(tape.dot(cand, user)));
        labels.push_back(c.label);
      }
      int64_t pos = 0, neg = 0;
      for (int8_t l : labels) (l ? pos : neg)++;
      if (pos == 0 || neg == 0) continue;  // skipped, tallied by caller
      ImpressionMetrics& m = per[n];
      m.scorable = true;
      m.auc = metric_auc(labels, scores);
      m.mrr = metric_mrr(labels, scores);
      m.ndcg5 = metric_ndcg(labels, scores, 5);
      m.ndcg10 = metric_ndcg(labels, scores, 10);
    }
  };
  if (nthreads == 1 || impressions.size() < 2) {
    score_range(0, impressions.size());
  } else {
    std::vector<std::thread> workers;
    const size_t chunk = (impressions.size() + nthreads - 1) / nthreads;
    for (int w = 0; w < nthreads; ++w) {
      const size_t begin = std::min(impressions.size(), static_cast<size_t>(w) * chunk);
      const size_t end = std::min(impressions.size(), begin + chunk);
      if (begin >= end) break;
      workers.emplace_back(score_range, begin, end);
    }
    for (auto& t : workers) t.join();
  }

  MetricReport rep;
  rep.label = label;
  for (const auto& m : per) {
    if (!m.scorable) {
      ++rep.skipped;
      continue;
    }
    rep.auc += m.auc;
    rep.mrr += m.mrr;
    rep.ndcg5 += m.ndcg5;
    rep.ndcg10 += m.ndcg10;
    ++rep.impressions;
  }
  if (rep.impressions == 0) {
    throw ValidationError("evaluate: zero scorable impressions");
  }
  const double n = static_cast<double>(rep.impressions);
  rep.auc /= n;
  rep.mrr /= n;
  rep.ndcg5 /= n;
  rep.ndcg10 /= n;
  return rep;
}

}  // namespace newsrec
