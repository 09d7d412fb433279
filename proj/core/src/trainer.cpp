#include "newsrec/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "newsrec/error.hpp"
#include "newsrec/rng.hpp"

namespace newsrec {

void TrainConfig::validate() const {
  if (neg_k < 1) throw ConfigError("train: neg_k must be >= 1");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (lr < 0.0) throw ConfigError("train: lr must be >= 0");
  if (max_epochs < 1) throw ConfigError("train: max_epochs must be >= 1");
  if (patience < 1) throw ConfigError("train: patience must be >= 1");
  if (history_max < 1) throw ConfigError("train: history_max must be >= 1");
  if (threads < 1) throw ConfigError("train: threads must be >= 1");
  if (vocab_min_freq < 1) throw ConfigError("train: vocab_min_freq must be >= 1");
}

Var score(Tape& t, Var news_repr, Var user_repr) {
  return t.dot(news_repr, user_repr);
}

Var sample_loss(Tape& t, std::span<const Var> scores) {
  if (scores.size() < 2) {
    throw DomainError("sample_loss: need a positive and at least one negative");
  }
  Var all = t.concat(scores);
  return t.sub(t.logsumexp(all), t.pick(all, 0));
}

namespace {

// Loads GloVe-style vectors (word then d space-separated values) into the
// embedding rows of words present in the vocabulary.
void load_pretrained_words(const std::string& path, const Vocabulary& vocab,
                           Parameter& word_emb, int32_t d_word) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open word vector file: " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    const int32_t id = vocab.id_of(word);
    if (id == Vocabulary::kUnknown) continue;
    std::vector<double> vals;
    vals.reserve(static_cast<size_t>(d_word));
    double v;
    while (ss >> v) vals.push_back(v);
    if (static_cast<int32_t>(vals.size()) != d_word) {
      throw ConfigError("word vector for '" + word + "' has " +
                        std::to_string(vals.size()) + " dims, expected " +
                        std::to_string(d_word));
    }
    double* row = word_emb.value.row(id);
    for (int32_t j = 0; j < d_word; ++j) row[j] = vals[static_cast<size_t>(j)];
  }
}

struct PreparedSample {
  const Impression* impression;
  const NewsFeatures* positive;
  std::vector<const NewsFeatures*> negatives;
};

}  // namespace

TrainResult train(const ClickDataset& ds, const Stores& stores,
                  const TrainConfig& cfg, std::ostream* progress) {
  cfg.validate();

  ModelConfig model_cfg = cfg.model;
  model_cfg.vocab_size = ds.vocab.size();
  model_cfg.validate();

  FeatureCache features(ds, stores.graph, stores.embeds, model_cfg, cfg.seed);
  if (model_cfg.use_llm && !features.missing_embeddings().empty()) {
    const auto& missing = features.missing_embeddings();
    std::ostringstream os;
    os << "embedding store is missing " << missing.size() << " news ids:";
    for (size_t i = 0; i < missing.size() && i < 20; ++i) os << ' ' << missing[i];
    if (missing.size() > 20) os << " ...";
    throw ValidationError(os.str());
  }

  int64_t skipped_impressions = 0;
  std::vector<TrainSample> raw_samples =
      build_samples(ds, cfg.neg_k, cfg.seed, &skipped_impressions);
  if (raw_samples.empty()) {
    throw ValidationError("empty training set: no usable (positive, negatives) samples");
  }

  // Resolve feature pointers once; drop samples touching unknown news.
  std::vector<PreparedSample> samples;
  samples.reserve(raw_samples.size());
  int64_t dropped = 0;
  for (const TrainSample& s : raw_samples) {
    PreparedSample ps;
    ps.impression = &ds.train[static_cast<size_t>(s.impression_index)];
    ps.positive = features.find(s.positive);
    for (const auto& neg : s.negatives) {
      ps.negatives.push_back(features.find(neg));
    }
    const bool resolvable =
        ps.positive && std::all_of(ps.negatives.begin(), ps.negatives.end(),
                                   [](const NewsFeatures* f) { return f; });
    if (!resolvable) {
      ++dropped;
      continue;
    }
    samples.push_back(std::move(ps));
  }
  if (samples.empty()) {
    throw ValidationError("empty training set after dropping unresolvable samples");
  }

  ModelParams mp = build_model(model_cfg, cfg.seed);
  if (!cfg.word_vec_path.empty()) {
    load_pretrained_words(cfg.word_vec_path, ds.vocab, *mp.word_emb,
                          model_cfg.d_word);
  }
  mp.registry.ensure_grads();
  AdamState adam(mp.registry);

  TrainResult result;
  result.dropped_samples = dropped;
  Rng shuffle_rng(hash_combine(cfg.seed, 0x7e1u));
  std::vector<size_t> order(samples.size());
  std::iota(order.begin(), order.end(), size_t{0});

  double best_auc = -1.0;
  int32_t stale = 0;
  for (int32_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    size_t done = 0;
    while (done < order.size()) {
      const size_t batch = std::min(static_cast<size_t>(cfg.batch_size),
                                    order.size() - done);
      const double inv = 1.0 / static_cast<double>(batch);
      for (size_t b = 0; b < batch; ++b) {
        Tape tape;
        const PreparedSample& s = samples[order[done + b]];
        std::vector<Var> hist;
        const auto& history = s.impression->history;
        const size_t zmax = static_cast<size_t>(cfg.history_max);
        const size_t start = history.size() > zmax ? history.size() - zmax : 0;
        for (size_t i = start; i < history.size(); ++i) {
          const NewsFeatures* f = features.find(history[i]);
          if (!f) continue;  // unresolved history reference, dropped
          hist.push_back(encode_news(tape, mp, *f).full);
        }
        Var user = encode_user(tape, mp, hist);
        std::vector<Var> scores;
        scores.reserve(s.negatives.size() + 1);
        scores.push_back(score(tape, encode_news(tape, mp, *s.positive).full, user));
        for (const NewsFeatures* neg : s.negatives) {
          scores.push_back(score(tape, encode_news(tape, mp, *neg).full, user));
        }
        Var loss = sample_loss(tape, scores);
        const double lv = tape.scalar_value(loss);
        if (!std::isfinite(lv)) {
          throw DomainError("training diverged: non-finite loss at epoch " +
                            std::to_string(epoch) + ", sample " +
                            std::to_string(done + b));
        }
        loss_sum += lv;
        tape.backward(loss, inv);
      }
      adam_step(mp.registry, adam, cfg.lr);
      done += batch;
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = loss_sum / static_cast<double>(order.size());
    entry.val = evaluate(mp, features, ds.eval, cfg.history_max, cfg.threads,
                         "val");
    if (progress) {
      std::ostringstream os;
      os.precision(6);
      os << std::fixed << epoch << '\t' << entry.train_loss << '\t'
         << entry.val.auc << '\t' << entry.val.mrr << '\t' << entry.val.ndcg5
         << '\t' << entry.val.ndcg10;
      (*progress) << os.str() << '\n';
      progress->flush();
    }
    result.log.push_back(entry);

    if (entry.val.auc > best_auc) {
      best_auc = entry.val.auc;
      result.params = mp.clone();
      result.best_epoch = epoch;
      result.best_val = entry.val;
      stale = 0;
    } else {
      ++stale;
      if (stale >= cfg.patience) break;
    }
  }
  return result;
}

}  // namespace newsrec
