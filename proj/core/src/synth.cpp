#include "newsrec/synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

#include "newsrec/embed_store.hpp"
#include "newsrec/error.hpp"
#include "newsrec/rng.hpp"

namespace newsrec {

SynthMode parse_synth_mode(const std::string& name) {
  if (name == "word") return SynthMode::kWord;
  if (name == "llm") return SynthMode::kLlm;
  if (name == "kg") return SynthMode::kKg;
  if (name == "mixed") return SynthMode::kMixed;
  throw ConfigError("synth.mode must be word|llm|kg|mixed, got '" + name + "'");
}

std::string synth_mode_name(SynthMode mode) {
  switch (mode) {
    case SynthMode::kWord: return "word";
    case SynthMode::kLlm: return "llm";
    case SynthMode::kKg: return "kg";
    case SynthMode::kMixed: return "mixed";
  }
  return "?";
}

void SynthSpec::validate() const {
  if (users < 0) throw ValidationError("synth: users must be >= 0");
  if (users == 0) return;  // empty dataset is a valid request
  if (topics < 1) throw ValidationError("synth: topics must be >= 1");
  if (news < topics * 5) {
    throw ValidationError("synth: need at least 5 news per topic");
  }
  if (candidates < 2) throw ValidationError("synth: candidates must be >= 2");
  if (positives < 1 || positives >= candidates) {
    throw ValidationError("synth: positives must be in [1, candidates)");
  }
  if (history_len < 1) throw ValidationError("synth: history_len must be >= 1");
  if (train_per_user < 1 || eval_per_user < 1) {
    throw ValidationError("synth: impressions per user must be >= 1");
  }
  if (entities_per_news < 1) {
    throw ValidationError("synth: entities_per_news must be >= 1");
  }
  if (entities_per_topic < entities_per_news) {
    throw ValidationError("synth: entities_per_topic < entities_per_news");
  }
  if (title_len < 1 || abstract_len < 0) {
    throw ValidationError("synth: bad title/abstract length");
  }
  if (word_pool < 4 * topics) {
    throw ValidationError("synth: word_pool too small for topic slices");
  }
  if (llm_layers < 1 || llm_dim < 1 || entity_dim < 1) {
    throw ValidationError("synth: embedding dims must be >= 1");
  }
  if (noise < 0.0 || noise > 0.5) {
    throw ValidationError("synth: noise must be in [0, 0.5]");
  }
  if (edge_prob <= 0.0 || edge_prob > 1.0) {
    throw ValidationError("synth: edge_prob must be in (0, 1]");
  }
}

namespace {

std::string padded(const char* prefix, int64_t n, int width) {
  std::string digits = std::to_string(n);
  std::string out(prefix);
  for (int i = static_cast<int>(digits.size()); i < width; ++i) out.push_back('0');
  return out + digits;
}

Tensor unit_gaussian(Rng& rng, int32_t dim) {
  Tensor v({dim});
  double norm2 = 0.0;
  for (int32_t i = 0; i < dim; ++i) {
    v[i] = rng.normal();
    norm2 += v[i] * v[i];
  }
  const double inv = 1.0 / std::sqrt(std::max(norm2, 1e-300));
  for (int32_t i = 0; i < dim; ++i) v[i] *= inv;
  return v;
}

}  // namespace

SynthOutput synth_dataset(const SynthSpec& spec, uint64_t seed) {
  spec.validate();
  SynthOutput out;
  if (spec.users == 0) {
    out.dataset.finalize();
    return out;
  }

  Rng rng(hash_combine(seed, 0x2f8a11ULL));
  const int32_t T = spec.topics;
  const bool kg_signal =
      spec.mode == SynthMode::kKg || spec.mode == SynthMode::kMixed;
  const bool llm_signal =
      spec.mode == SynthMode::kLlm || spec.mode == SynthMode::kMixed;
  const bool word_signal =
      spec.mode == SynthMode::kWord || spec.mode == SynthMode::kMixed;

  // Word pool: first half sliced per topic, second half shared filler.
  std::vector<std::string> words;
  words.reserve(static_cast<size_t>(spec.word_pool));
  for (int32_t i = 0; i < spec.word_pool; ++i) words.push_back(padded("w", i, 4));
  const int32_t slice = (spec.word_pool / 2) / T;
  const int32_t shared_begin = spec.word_pool / 2;
  auto draw_word = [&](int32_t topic) -> const std::string& {
    if (word_signal && topic >= 0 && rng.uniform() < 0.7) {
      return words[static_cast<size_t>(topic * slice + rng.uniform_int(slice))];
    }
    const int32_t shared = spec.word_pool - shared_begin;
    return words[static_cast<size_t>(shared_begin + rng.uniform_int(shared))];
  };

  // Entities: one block per topic. Embeddings cluster around per-topic
  // centroids only when the kg channel carries signal.
  const int32_t n_entities = T * spec.entities_per_topic;
  std::vector<std::string> entities;
  entities.reserve(static_cast<size_t>(n_entities));
  for (int32_t i = 0; i < n_entities; ++i) entities.push_back(padded("E", i, 4));
  std::vector<Tensor> centroids;
  for (int32_t t = 0; t < T; ++t) centroids.push_back(unit_gaussian(rng, spec.entity_dim));
  for (int32_t i = 0; i < n_entities; ++i) {
    Tensor v = unit_gaussian(rng, spec.entity_dim);
    if (kg_signal) {
      const Tensor& c = centroids[static_cast<size_t>(i / spec.entities_per_topic)];
      double norm2 = 0.0;
      for (int32_t j = 0; j < spec.entity_dim; ++j) {
        v[j] = c[j] + 0.35 * v[j];
        norm2 += v[j] * v[j];
      }
      const double inv = 1.0 / std::sqrt(norm2);
      for (int32_t j = 0; j < spec.entity_dim; ++j) v[j] *= inv;
    }
    out.entity_vecs.emplace(entities[static_cast<size_t>(i)], std::move(v));
  }

  // Graph edges. With kg signal: dense intra-topic; otherwise uniform
  // random pairs of comparable count (pure noise).
  const char* relations[3] = {"P0", "P1", "P2"};
  std::set<std::pair<int32_t, int32_t>> edge_set;
  auto add_edge = [&](int32_t a, int32_t b) {
    if (a == b) return;
    const auto key = std::minmax(a, b);
    if (!edge_set.insert(key).second) return;
    out.triples.push_back(Triple{entities[static_cast<size_t>(key.first)],
                                 relations[(key.first + key.second) % 3],
                                 entities[static_cast<size_t>(key.second)]});
  };
  int64_t intra_count = 0;
  if (kg_signal) {
    for (int32_t t = 0; t < T; ++t) {
      const int32_t base = t * spec.entities_per_topic;
      for (int32_t i = 0; i < spec.entities_per_topic; ++i) {
        for (int32_t j = i + 1; j < spec.entities_per_topic; ++j) {
          if (rng.uniform() < spec.edge_prob) {
            add_edge(base + i, base + j);
            ++intra_count;
          }
        }
      }
    }
    const int64_t cross = static_cast<int64_t>(
        std::floor(spec.noise * static_cast<double>(intra_count)));
    for (int64_t e = 0; e < cross; ++e) {
      add_edge(static_cast<int32_t>(rng.uniform_int(static_cast<uint64_t>(n_entities))),
               static_cast<int32_t>(rng.uniform_int(static_cast<uint64_t>(n_entities))));
    }
  } else {
    const int64_t per_topic_pairs =
        static_cast<int64_t>(spec.entities_per_topic) * (spec.entities_per_topic - 1) / 2;
    const int64_t target = static_cast<int64_t>(
        std::floor(spec.edge_prob * static_cast<double>(T * per_topic_pairs)));
    for (int64_t e = 0; e < target; ++e) {
      add_edge(static_cast<int32_t>(rng.uniform_int(static_cast<uint64_t>(n_entities))),
               static_cast<int32_t>(rng.uniform_int(static_cast<uint64_t>(n_entities))));
    }
  }

  // News: topic = index mod T; the last fifth of each topic's news is
  // reserved for evaluation candidates.
  std::vector<Tensor> llm_dirs;
  for (int32_t t = 0; t < T; ++t) llm_dirs.push_back(unit_gaussian(rng, spec.llm_dim));
  std::vector<int32_t> news_topic(static_cast<size_t>(spec.news));
  std::vector<std::vector<int32_t>> entity_idx(static_cast<size_t>(spec.news));
  std::vector<std::vector<int32_t>> train_pool(static_cast<size_t>(T));
  std::vector<std::vector<int32_t>> eval_pool(static_cast<size_t>(T));
  std::vector<int32_t> per_topic_counter(static_cast<size_t>(T), 0);
  const int32_t per_topic_total = spec.news / T;  // floor; remainder stays train-side
  const int32_t eval_slice = std::max(1, per_topic_total / 5);

  for (int32_t i = 0; i < spec.news; ++i) {
    const int32_t topic = i % T;
    news_topic[static_cast<size_t>(i)] = topic;
    const std::string id = padded("N", i, 5);

    NewsRecord rec;
    rec.id = id;
    rec.category = "topic" + std::to_string(topic);
    rec.subcategory = "sub" + std::to_string(i % 4);
    for (int32_t w = 0; w < spec.title_len; ++w) {
      rec.title_words.push_back(draw_word(topic));
    }
    for (int32_t w = 0; w < spec.abstract_len; ++w) {
      rec.abstract_words.push_back(draw_word(topic));
    }

    // Entities: topic block when the kg channel matters, uniform otherwise.
    std::set<int32_t> chosen;
    while (static_cast<int32_t>(chosen.size()) < spec.entities_per_news) {
      int32_t e;
      if (kg_signal) {
        e = topic * spec.entities_per_topic +
            static_cast<int32_t>(rng.uniform_int(static_cast<uint64_t>(spec.entities_per_topic)));
      } else {
        e = static_cast<int32_t>(rng.uniform_int(static_cast<uint64_t>(n_entities)));
      }
      chosen.insert(e);
    }
    for (int32_t e : chosen) {
      entity_idx[static_cast<size_t>(i)].push_back(e);
      rec.entity_ids.push_back(entities[static_cast<size_t>(e)]);
    }

    const Tensor* planted = llm_signal ? &llm_dirs[static_cast<size_t>(topic)] : nullptr;
    out.news_embeds.emplace_back(
        id, synthetic_embeddings(id, spec.llm_layers, spec.llm_dim,
                                 hash_combine(seed, 0xe5ULL), planted, 0.75));

    const int32_t nth = per_topic_counter[static_cast<size_t>(topic)]++;
    if (nth >= per_topic_total - eval_slice) {
      eval_pool[static_cast<size_t>(topic)].push_back(i);
    } else {
      train_pool[static_cast<size_t>(topic)].push_back(i);
    }
    out.dataset.news.emplace(id, std::move(rec));
  }
  for (int32_t t = 0; t < T; ++t) {
    if (train_pool[static_cast<size_t>(t)].empty() ||
        eval_pool[static_cast<size_t>(t)].empty()) {
      throw ValidationError("synth: topic " + std::to_string(t) +
                            " has an empty news pool");
    }
  }

  // Fast adjacency test between a history entity set and a candidate.
  auto shares_edge = [&](const std::unordered_set<int32_t>& hist_entities,
                         int32_t cand_news) {
    for (int32_t ce : entity_idx[static_cast<size_t>(cand_news)]) {
      for (int32_t he : hist_entities) {
        if (edge_set.count(std::minmax(he, ce))) return true;
      }
    }
    return false;
  };

  int64_t imp_counter = 0;
  for (int32_t u = 0; u < spec.users; ++u) {
    const std::string user_id = padded("U", u, 4);
    const int32_t pref_a = static_cast<int32_t>(rng.uniform_int(static_cast<uint64_t>(T)));
    const int32_t pref_b =
        static_cast<int32_t>((pref_a + 1 + rng.uniform_int(static_cast<uint64_t>(T - 1))) % T);
    auto preferred = [&](int32_t topic) { return topic == pref_a || topic == pref_b; };

    std::vector<int32_t> pref_train_pool;
    for (int32_t t : {pref_a, pref_b}) {
      const auto& pool = train_pool[static_cast<size_t>(t)];
      pref_train_pool.insert(pref_train_pool.end(), pool.begin(), pool.end());
    }

    auto draw_history = [&]() {
      std::vector<int32_t> hist;
      if (pref_train_pool.size() >= static_cast<size_t>(spec.history_len)) {
        for (size_t j : rng.sample_without_replacement(
                 pref_train_pool.size(), static_cast<size_t>(spec.history_len))) {
          hist.push_back(pref_train_pool[j]);
        }
      } else {
        for (int32_t j = 0; j < spec.history_len; ++j) {
          hist.push_back(pref_train_pool[rng.uniform_int(pref_train_pool.size())]);
        }
      }
      return hist;
    };

    auto draw_candidates = [&](bool eval_side,
                               const std::unordered_set<int32_t>& hist_entities) {
      std::vector<Candidate> cands;
      for (int attempt = 0; attempt < 200; ++attempt) {
        cands.clear();
        std::vector<int32_t> picks;
        for (int32_t c = 0; c < spec.candidates; ++c) {
          int32_t topic;
          if (c < spec.positives) {
            topic = rng.uniform() < 0.5 ? pref_a : pref_b;
          } else {
            do {
              topic = static_cast<int32_t>(rng.uniform_int(static_cast<uint64_t>(T)));
            } while (preferred(topic));
          }
          const auto& pool = eval_side ? eval_pool[static_cast<size_t>(topic)]
                                       : train_pool[static_cast<size_t>(topic)];
          picks.push_back(pool[rng.uniform_int(pool.size())]);
        }
        int pos = 0, neg = 0;
        for (int32_t n : picks) {
          int8_t label;
          if (spec.mode == SynthMode::kKg) {
            label = shares_edge(hist_entities, n) ? 1 : 0;
          } else {
            label = preferred(news_topic[static_cast<size_t>(n)]) ? 1 : 0;
            if (spec.noise > 0.0 && rng.uniform() < spec.noise) label = 1 - label;
          }
          (label ? pos : neg)++;
          cands.push_back(
              Candidate{padded("N", n, 5), label});
        }
        if (pos >= 1 && neg >= 1) {
          rng.shuffle(cands);
          return cands;
        }
      }
      throw InvariantError("synth: could not draw a mixed candidate list");
    };

    const int32_t total = spec.train_per_user + spec.eval_per_user;
    for (int32_t j = 0; j < total; ++j) {
      const bool eval_side = j >= spec.train_per_user;
      Impression imp;
      imp.id = padded("I", imp_counter++, 6);
      imp.user_id = user_id;
      std::vector<int32_t> hist = draw_history();
      std::unordered_set<int32_t> hist_entities;
      for (int32_t h : hist) {
        imp.history.push_back(padded("N", h, 5));
        for (int32_t e : entity_idx[static_cast<size_t>(h)]) hist_entities.insert(e);
      }
      imp.candidates = draw_candidates(eval_side, hist_entities);
      (eval_side ? out.dataset.eval : out.dataset.train).push_back(std::move(imp));
    }
  }

  out.dataset.finalize();
  return out;
}

}  // namespace newsrec
