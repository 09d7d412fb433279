#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "newsrec/mind.hpp"

namespace newsrec {

// Word -> id table. Id 0 is the shared unknown slot; real words get ids
// 1..n in sorted word order, which makes the table reproducible.
class Vocabulary {
 public:
  static constexpr int32_t kUnknown = 0;

  Vocabulary() = default;
  static Vocabulary build(const std::vector<const NewsRecord*>& news,
                          int min_freq = 2);

  int32_t id_of(std::string_view word) const;
  int32_t size() const { return static_cast<int32_t>(ids_.size()) + 1; }
  const std::map<std::string, int32_t>& words() const { return ids_; }

 private:
  std::map<std::string, int32_t> ids_;
};

struct DatasetStats {
  int64_t news_count = 0;
  int64_t train_impressions = 0;
  int64_t eval_impressions = 0;
  int64_t vocab_size = 0;
  int64_t news_with_entities = 0;
  double entity_coverage = 0.0;  // fraction of news with >= 1 linked entity
  int64_t unresolved_history_refs = 0;
  int64_t unresolved_candidate_refs = 0;
};

// The training click set, the evaluation click set and the news corpus
// they reference.
struct ClickDataset {
  std::map<std::string, NewsRecord> news;
  std::vector<Impression> train;
  std::vector<Impression> eval;
  Vocabulary vocab;

  // Builds the vocabulary from news referenced by training impressions,
  // assigns token ids to every record, and checks that train/eval are
  // disjoint by impression id.
  void finalize(int vocab_min_freq = 2);

  const NewsRecord* find_news(const std::string& id) const;
  DatasetStats stats() const;
};

// Line-oriented snapshot with a versioned header; writing twice gives
// byte-identical files.
void write_snapshot(const ClickDataset& ds, const std::string& path);
ClickDataset read_snapshot(const std::string& path, int vocab_min_freq = 2);

// One (history, clicked item, K sampled non-clicked items) training unit.
struct TrainSample {
  int32_t impression_index = -1;  // into ClickDataset::train
  std::string positive;
  std::vector<std::string> negatives;
};

// One sample per positive candidate. Negatives come uniformly from the
// same impression's non-clicked candidates, with replacement only when
// fewer than k are available. Impressions whose positives have no
// negatives at all are skipped and tallied.
std::vector<TrainSample> build_samples(const ClickDataset& ds, int k,
                                       uint64_t seed,
                                       int64_t* skipped_impressions = nullptr);

}  // namespace newsrec
