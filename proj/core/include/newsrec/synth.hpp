#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "newsrec/dataset.hpp"
#include "newsrec/mind.hpp"
#include "newsrec/tensor.hpp"

namespace newsrec {

// Which input carries the click signal. The other channels are generated
// as pure noise so ablations can show where information flows.
enum class SynthMode { kWord, kLlm, kKg, kMixed };

SynthMode parse_synth_mode(const std::string& name);
std::string synth_mode_name(SynthMode mode);

// Generator layout: users hold two preferred topics, news belong to one
// topic, histories come from preferred topics. Per topic a slice of news
// is held out for evaluation candidates, so scoring unseen news requires
// the signal channel to generalize rather than memorize.
//
// Labels: in kg mode a candidate is positive exactly when one of its
// entities shares a graph edge with an entity of the history; in the
// other modes a candidate is positive when its topic is preferred
// (flipped with probability `noise`).
struct SynthSpec {
  SynthMode mode = SynthMode::kMixed;
  int32_t users = 200;
  int32_t news = 500;
  int32_t topics = 8;
  int32_t entities_per_topic = 24;
  int32_t entities_per_news = 3;
  int32_t history_len = 8;
  int32_t train_per_user = 4;
  int32_t eval_per_user = 2;
  int32_t candidates = 6;
  int32_t positives = 2;
  int32_t title_len = 8;
  int32_t abstract_len = 16;
  int32_t word_pool = 400;
  int32_t llm_layers = 4;
  int32_t llm_dim = 16;
  int32_t entity_dim = 100;
  double noise = 0.0;      // label flips (word/llm/mixed) or cross-topic edges (kg)
  double edge_prob = 0.35; // intra-topic edge density

  void validate() const;
};

struct SynthOutput {
  ClickDataset dataset;  // finalized
  std::vector<Triple> triples;
  std::map<std::string, Tensor> entity_vecs;
  // Per-news layer matrices, sorted by id (LayerStore insertion order).
  std::vector<std::pair<std::string, Tensor>> news_embeds;
};

SynthOutput synth_dataset(const SynthSpec& spec, uint64_t seed);

}  // namespace newsrec
