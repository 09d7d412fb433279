#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "newsrec/dataset.hpp"
#include "newsrec/encoders.hpp"
#include "newsrec/metrics.hpp"

namespace newsrec {

struct Stores {
  const TripleGraph* graph = nullptr;
  const LayerStore* embeds = nullptr;
};

struct TrainConfig {
  int32_t neg_k = 4;
  int32_t batch_size = 64;
  double lr = 1e-4;
  int32_t max_epochs = 10;
  int32_t patience = 3;
  uint64_t seed = 42;
  int32_t history_max = 50;
  int32_t threads = 1;
  int32_t vocab_min_freq = 2;
  std::string word_vec_path;  // optional pretrained word vectors
  ModelConfig model;

  void validate() const;
};

// Unnormalized user-news matching score (dot product).
Var score(Tape& t, Var news_repr, Var user_repr);

// Negative-sampling softmax loss for one training unit: the positive
// score sits at index 0, followed by the K negatives. Computed as
// logsumexp(scores) - scores[0], i.e. with max subtraction.
Var sample_loss(Tape& t, std::span<const Var> scores);

struct EpochLog {
  int32_t epoch = 0;
  double train_loss = 0.0;
  MetricReport val;
};

struct TrainResult {
  ModelParams params;  // best validation-AUC snapshot
  int32_t best_epoch = 0;
  MetricReport best_val;
  std::vector<EpochLog> log;
  int64_t dropped_samples = 0;  // samples referencing unknown news
};

// Mini-batch training with Adam, per-epoch validation and early stopping
// on validation AUC. One tab-separated log line per epoch goes to
// `progress` when given.
TrainResult train(const ClickDataset& ds, const Stores& stores,
                  const TrainConfig& cfg, std::ostream* progress = nullptr);

}  // namespace newsrec
