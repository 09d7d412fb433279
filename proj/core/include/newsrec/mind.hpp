#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "newsrec/tensor.hpp"

namespace newsrec {

// One news item. Word tokens are kept both as lowercased strings (what
// the parser produced) and as vocabulary ids (filled in once a dataset is
// finalized).
struct NewsRecord {
  std::string id;
  std::string category;
  std::string subcategory;
  std::vector<std::string> title_words;
  std::vector<std::string> abstract_words;
  std::vector<std::string> entity_ids;  // deduplicated, first occurrence order
  std::vector<int32_t> title_tokens;
  std::vector<int32_t> abstract_tokens;
};

struct Candidate {
  std::string news_id;
  int8_t label = 0;  // 0 or 1
};

// One exposure event: a user with click history and a labeled candidate
// list. History is ordered, most recent last.
struct Impression {
  std::string id;
  std::string user_id;
  std::vector<std::string> history;
  std::vector<Candidate> candidates;
};

struct Triple {
  std::string head;
  std::string relation;
  std::string tail;
};

// Per-file parse diagnostics. Only the first few messages are stored;
// the counter keeps the full tally.
struct ParseLog {
  static constexpr size_t kMaxStored = 32;
  int64_t skipped = 0;
  std::vector<std::string> warnings;
  void warn(std::string msg);
};

// Lowercase and split on runs of non-alphanumeric bytes.
std::vector<std::string> tokenize(std::string_view text);

// MIND news.tsv: id, category, subcategory, title, abstract, url,
// title_entities, abstract_entities (the last two are JSON annotation
// arrays carrying "WikidataId" entries).
std::map<std::string, NewsRecord> parse_news_tsv(const std::string& path,
                                                 ParseLog* log = nullptr);

// MIND behaviors.tsv: impression_id, user_id, time, space-separated
// history, space-separated candidates suffixed -0/-1.
std::vector<Impression> parse_behaviors_tsv(const std::string& path,
                                            ParseLog* log = nullptr);

// entity_embedding.vec: entity id followed by `dim` reals, tab-separated.
std::map<std::string, Tensor> parse_entity_vec(const std::string& path,
                                               int dim = 100,
                                               ParseLog* log = nullptr);

// triples.tsv: head, relation, tail.
std::vector<Triple> parse_triples_tsv(const std::string& path,
                                      ParseLog* log = nullptr);

}  // namespace newsrec
