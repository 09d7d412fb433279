#include <benchmark/benchmark.h>

#include "newsrec/embed_store.hpp"
#include "newsrec/encoders.hpp"
#include "newsrec/kg.hpp"
#include "newsrec/metrics.hpp"
#include "newsrec/rng.hpp"
#include "newsrec/synth.hpp"
#include "newsrec/trainer.hpp"

using namespace newsrec;

namespace {

ModelConfig bench_config() {
  ModelConfig cfg;
  cfg.vocab_size = 2000;
  cfg.d_word = 32;
  cfg.d_gen = 48;
  cfg.llm_layers = 4;
  cfg.llm_dim = 32;
  cfg.llm_proj = 32;
  cfg.entity_dim = 16;
  cfg.kg_hops = 2;
  cfg.kg_heads = 2;
  cfg.kg_out = 24;
  cfg.kg_max_neighbors = 20;
  return cfg;
}

NewsFeatures bench_features(const ModelConfig& cfg, uint64_t salt) {
  NewsFeatures f;
  Rng rng(salt);
  for (int i = 0; i < 24; ++i) {
    f.tokens.push_back(static_cast<int32_t>(rng.uniform_int(cfg.vocab_size)));
  }
  f.layer_rows = synthetic_embeddings("bench" + std::to_string(salt),
                                      cfg.llm_layers, cfg.llm_dim, salt);
  for (int k = 0; k < cfg.kg_hops; ++k) {
    Tensor rows = Tensor::matrix(cfg.kg_max_neighbors, cfg.entity_dim);
    for (int64_t i = 0; i < rows.numel(); ++i) rows[i] = rng.uniform(-1, 1);
    f.hop_embeds.push_back(std::move(rows));
    std::vector<std::string> names;
    for (int i = 0; i < cfg.kg_max_neighbors; ++i) {
      names.push_back("e" + std::to_string(i));
    }
    f.hop_entities.push_back(std::move(names));
  }
  return f;
}

void BM_EncodeNews(benchmark::State& state) {
  ModelConfig cfg = bench_config();
  ModelParams mp = build_model(cfg, 1);
  NewsFeatures f = bench_features(cfg, 2);
  for (auto _ : state) {
    Tape t;
    NewsRepr r = encode_news(t, mp, f);
    benchmark::DoNotOptimize(t.value(r.full).data());
  }
}
BENCHMARK(BM_EncodeNews);

void BM_SampleForwardBackward(benchmark::State& state) {
  ModelConfig cfg = bench_config();
  ModelParams mp = build_model(cfg, 3);
  mp.registry.ensure_grads();
  std::vector<NewsFeatures> history;
  for (int i = 0; i < 8; ++i) history.push_back(bench_features(cfg, 10 + i));
  std::vector<NewsFeatures> cands;
  for (int i = 0; i < 5; ++i) cands.push_back(bench_features(cfg, 50 + i));
  for (auto _ : state) {
    Tape t;
    std::vector<Var> hist;
    for (const auto& h : history) hist.push_back(encode_news(t, mp, h).full);
    Var user = encode_user(t, mp, hist);
    std::vector<Var> scores;
    for (const auto& c : cands) {
      scores.push_back(score(t, encode_news(t, mp, c).full, user));
    }
    Var loss = sample_loss(t, scores);
    t.backward(loss);
    benchmark::DoNotOptimize(t.scalar_value(loss));
    mp.registry.zero_grads();
  }
}
BENCHMARK(BM_SampleForwardBackward);

void BM_HopSets(benchmark::State& state) {
  Rng rng(7);
  std::vector<Triple> triples;
  const int n = 2000;
  for (int e = 0; e < 12000; ++e) {
    const int a = static_cast<int>(rng.uniform_int(n));
    const int b = static_cast<int>(rng.uniform_int(n));
    if (a != b) {
      triples.push_back({"v" + std::to_string(a), "r", "v" + std::to_string(b)});
    }
  }
  TripleGraph g = TripleGraph::build(triples);
  std::map<std::string, Tensor> vecs;
  for (int i = 0; i < n; ++i) vecs.emplace("v" + std::to_string(i), Tensor({16}));
  g.attach_embeddings(vecs, 16);
  uint64_t seed = 0;
  for (auto _ : state) {
    HopSets hs = g.hop_sets({"v17", "v42", "v99"}, 2, 20, seed++);
    benchmark::DoNotOptimize(hs.hops.size());
  }
}
BENCHMARK(BM_HopSets);

void BM_ImpressionMetrics(benchmark::State& state) {
  Rng rng(9);
  const int n = 30;
  std::vector<int8_t> labels(n);
  std::vector<double> scores(n);
  for (int i = 0; i < n; ++i) {
    labels[static_cast<size_t>(i)] = i % 5 == 0 ? 1 : 0;
    scores[static_cast<size_t>(i)] = rng.uniform();
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(metric_auc(labels, scores));
    benchmark::DoNotOptimize(metric_mrr(labels, scores));
    benchmark::DoNotOptimize(metric_ndcg(labels, scores, 5));
    benchmark::DoNotOptimize(metric_ndcg(labels, scores, 10));
  }
}
BENCHMARK(BM_ImpressionMetrics);

void BM_SynthDataset(benchmark::State& state) {
  SynthSpec spec;
  spec.users = 50;
  spec.news = 200;
  spec.llm_dim = 8;
  spec.entity_dim = 8;
  uint64_t seed = 0;
  for (auto _ : state) {
    SynthOutput out = synth_dataset(spec, seed++);
    benchmark::DoNotOptimize(out.dataset.train.size());
  }
}
BENCHMARK(BM_SynthDataset);

}  // namespace

BENCHMARK_MAIN();
