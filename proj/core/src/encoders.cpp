#include "newsrec/encoders.hpp"

#include <algorithm>

#include "newsrec/error.hpp"
#include "newsrec/rng.hpp"

namespace newsrec {

void ModelConfig::validate() const {
  if (vocab_size < 1) throw ConfigError("model: vocab_size must be >= 1");
  if (d_word < 1 || d_gen < 1) throw ConfigError("model: word dims must be >= 1");
  if (use_llm) {
    if (llm_layers < 1) throw ConfigError("model: llm_layers must be >= 1");
    if (llm_dim < 1) throw ConfigError("model: llm_dim unresolved");
    if (llm_proj < 1) throw ConfigError("model: llm_proj must be >= 1");
  }
  if (use_kg) {
    if (entity_dim < 1) throw ConfigError("model: entity_dim must be >= 1");
    if (kg_hops < 1) throw ConfigError("model: kg.hops must be >= 1");
    if (kg_heads < 1) throw ConfigError("model: kg.num_heads must be >= 1");
    if (kg_out < 1) throw ConfigError("model: kg.out_dim must be >= 1");
    if (kg_max_neighbors < 1) {
      throw ConfigError("model: kg.max_neighbors must be >= 1");
    }
    if (query_source == QuerySource::kLlm && !use_llm) {
      throw ConfigError(
          "model: kg.query_source=llm requires the llm branch; set "
          "kg.query_source=general or enable use_llm");
    }
  }
}

namespace {

Tensor uniform_init(Rng& rng, std::vector<int64_t> shape) {
  Tensor t(std::move(shape));
  for (int64_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(-0.1, 0.1);
  return t;
}

std::string hop_head_name(int32_t hop, int32_t head) {
  return "kg.attn.hop" + std::to_string(hop) + ".head" + std::to_string(head);
}

}  // namespace

void ModelParams::bind() {
  word_emb = registry.find("word_emb");
  gen_proj = registry.find("gen.proj");
  gen_query = registry.find("gen.query");
  layer_weights = registry.find("llm.layer_weights");
  fl_w = registry.find("llm.proj.weight");
  fl_b = registry.find("llm.proj.bias");
  fs_w = registry.find("kg.query.weight");
  fs_b = registry.find("kg.query.bias");
  kg_attn.clear();
  if (cfg.use_kg) {
    const int32_t first_hop = cfg.kg_include_source_hop ? 0 : 1;
    for (int32_t hop = first_hop; hop < first_hop + cfg.hop_slots(); ++hop) {
      for (int32_t head = 1; head <= cfg.kg_heads; ++head) {
        Parameter* p = registry.find(hop_head_name(hop, head));
        if (!p) throw InvariantError("missing parameter " + hop_head_name(hop, head));
        kg_attn.push_back(p);
      }
    }
  }
  kg_proj = registry.find("kg.proj");
  user_proj = registry.find("user.proj");
  user_query = registry.find("user.query");
}

ModelParams ModelParams::clone() const {
  ModelParams out;
  out.cfg = cfg;
  for (const auto& p : registry.entries()) {
    out.registry.create(p->name,
                        Tensor(p->value.shape(), p->value.values()));
  }
  out.bind();
  return out;
}

ModelParams build_model(const ModelConfig& cfg, uint64_t seed) {
  cfg.validate();
  ModelParams mp;
  mp.cfg = cfg;
  Rng rng(hash_combine(seed, 0x1b2e4d6fULL));

  mp.registry.create("word_emb", uniform_init(rng, {cfg.vocab_size, cfg.d_word}));
  mp.registry.create("gen.proj", uniform_init(rng, {cfg.d_word, cfg.d_gen}));
  mp.registry.create("gen.query", uniform_init(rng, {cfg.d_gen}));

  if (cfg.use_llm) {
    Tensor lw({cfg.llm_layers});
    for (int64_t i = 0; i < lw.numel(); ++i) {
      lw[i] = 1.0 / static_cast<double>(cfg.llm_layers);
    }
    mp.registry.create("llm.layer_weights", std::move(lw));
    mp.registry.create("llm.proj.weight",
                       uniform_init(rng, {cfg.llm_dim, cfg.llm_proj}));
    mp.registry.create("llm.proj.bias", Tensor({cfg.llm_proj}));
  }

  if (cfg.use_kg) {
    mp.registry.create("kg.query.weight",
                       uniform_init(rng, {cfg.query_input_dim(), cfg.entity_dim}));
    mp.registry.create("kg.query.bias", Tensor({cfg.entity_dim}));
    const int32_t first_hop = cfg.kg_include_source_hop ? 0 : 1;
    for (int32_t hop = first_hop; hop < first_hop + cfg.hop_slots(); ++hop) {
      for (int32_t head = 1; head <= cfg.kg_heads; ++head) {
        mp.registry.create(hop_head_name(hop, head),
                           uniform_init(rng, {3 * cfg.entity_dim}));
      }
    }
    mp.registry.create(
        "kg.proj",
        uniform_init(rng, {static_cast<int64_t>(cfg.hop_slots()) *
                               cfg.kg_heads * cfg.entity_dim,
                           cfg.kg_out}));
  }

  const int32_t repr = cfg.repr_dim();
  mp.registry.create("user.proj", uniform_init(rng, {repr, repr}));
  mp.registry.create("user.query", uniform_init(rng, {repr}));
  mp.bind();
  return mp;
}

std::vector<size_t> top_weight_indices(const AttnTrace::Entry& entry,
                                       size_t k) {
  std::vector<size_t> idx(entry.weights.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
    return entry.weights[a] > entry.weights[b];
  });
  idx.resize(std::min(k, idx.size()));
  return idx;
}

FeatureCache::FeatureCache(const ClickDataset& ds, const TripleGraph* graph,
                           const LayerStore* embeds, const ModelConfig& cfg,
                           uint64_t seed) {
  if (cfg.use_kg && !graph) {
    throw ValidationError("kg branch enabled but no triple graph loaded");
  }
  if (cfg.use_llm && !embeds) {
    throw ValidationError("llm branch enabled but no embedding store loaded");
  }
  for (const auto& [id, rec] : ds.news) {
    NewsFeatures f;
    f.tokens.reserve(rec.title_tokens.size() + rec.abstract_tokens.size());
    f.tokens.insert(f.tokens.end(), rec.title_tokens.begin(),
                    rec.title_tokens.end());
    f.tokens.insert(f.tokens.end(), rec.abstract_tokens.begin(),
                    rec.abstract_tokens.end());

    if (cfg.use_llm) {
      const Tensor* rows = embeds->find(id);
      if (rows) {
        f.layer_rows = *rows;
      } else {
        missing_.push_back(id);
      }
    }

    if (cfg.use_kg) {
      const uint64_t news_seed = hash_combine(seed, hash_str(id));
      HopSets hs = graph->hop_sets(rec.entity_ids, cfg.kg_hops,
                                   cfg.kg_max_neighbors, news_seed);
      if (cfg.kg_include_source_hop) {
        std::vector<std::string> src;
        for (const auto& e : rec.entity_ids) {
          if (graph->has_embedding(e)) src.push_back(e);
        }
        if (src.size() > static_cast<size_t>(cfg.kg_max_neighbors)) {
          Rng rng(hash_combine(news_seed, 0x9ull));
          auto chosen = rng.sample_without_replacement(
              src.size(), static_cast<size_t>(cfg.kg_max_neighbors));
          std::sort(chosen.begin(), chosen.end());
          std::vector<std::string> capped;
          for (size_t j : chosen) capped.push_back(src[j]);
          src = std::move(capped);
        }
        hs.hops.insert(hs.hops.begin(), std::move(src));
      }
      f.hop_entities = hs.hops;
      f.hop_embeds.reserve(hs.hops.size());
      for (const auto& hop : hs.hops) {
        f.hop_embeds.push_back(graph->gather_embeddings(hop));
      }
    }
    feats_.emplace(id, std::move(f));
  }
}

const NewsFeatures& FeatureCache::get(const std::string& news_id) const {
  const NewsFeatures* f = find(news_id);
  if (!f) throw ValidationError("news id not in feature cache: " + news_id);
  return *f;
}

const NewsFeatures* FeatureCache::find(const std::string& news_id) const {
  auto it = feats_.find(news_id);
  return it == feats_.end() ? nullptr : &it->second;
}

namespace {

// score_i = query . tanh(proj(x_i)); output = sum softmax(score)_i proj(x_i)
Var additive_attention(Tape& t, std::span<const Var> items, Parameter& proj,
                       Parameter& query) {
  Var pj = t.param(proj);
  Var q = t.param(query);
  std::vector<Var> projected;
  std::vector<Var> scores;
  projected.reserve(items.size());
  scores.reserve(items.size());
  for (Var item : items) {
    Var p = t.linear(item, pj);
    projected.push_back(p);
    scores.push_back(t.dot(q, t.tanh(p)));
  }
  Var alpha = t.softmax(t.concat(scores));
  std::vector<Var> weighted;
  weighted.reserve(items.size());
  for (size_t i = 0; i < items.size(); ++i) {
    weighted.push_back(t.smul(t.pick(alpha, static_cast<int64_t>(i)), projected[i]));
  }
  return t.sum(weighted);
}

}  // namespace

Var encode_general(Tape& t, ModelParams& mp, std::span<const int32_t> tokens) {
  if (tokens.empty()) return t.zeros({mp.cfg.d_gen});
  std::vector<Var> embedded;
  embedded.reserve(tokens.size());
  for (int32_t id : tokens) {
    embedded.push_back(t.embedding_row(*mp.word_emb, id));
  }
  return additive_attention(t, embedded, *mp.gen_proj, *mp.gen_query);
}

Var encode_llm(Tape& t, ModelParams& mp, const Tensor& layer_rows) {
  if (layer_rows.ndim() != 2 || layer_rows.rows() != mp.cfg.llm_layers ||
      layer_rows.cols() != mp.cfg.llm_dim) {
    throw DimError("encode_llm: layer matrix " + layer_rows.shape_str() +
                   " does not match configured [" +
                   std::to_string(mp.cfg.llm_layers) + "x" +
                   std::to_string(mp.cfg.llm_dim) + "]");
  }
  Var a = t.param(*mp.layer_weights);
  std::vector<Var> weighted;
  weighted.reserve(static_cast<size_t>(mp.cfg.llm_layers));
  for (int32_t i = 0; i < mp.cfg.llm_layers; ++i) {
    Var row = t.constant(layer_rows.row_copy(i));
    weighted.push_back(t.smul(t.pick(a, i), row));
  }
  Var mixed = t.sum(weighted);
  return t.tanh(t.linear(mixed, t.param(*mp.fl_w), t.param(*mp.fl_b)));
}

Var kg_query(Tape& t, ModelParams& mp, Var source) {
  return t.tanh(t.linear(source, t.param(*mp.fs_w), t.param(*mp.fs_b)));
}

std::pair<Var, Var> kg_attend(Tape& t, Var q, const Tensor& x_rows,
                              Parameter& w_attn) {
  const int64_t m = x_rows.rows();
  if (m < 1) throw DomainError("kg_attend: empty entity set");
  Var w = t.param(w_attn);
  std::vector<Var> scores;
  scores.reserve(static_cast<size_t>(m));
  for (int64_t i = 0; i < m; ++i) {
    Var xi = t.constant(x_rows.row_copy(i));
    Var qx = t.mul(q, xi);
    const Var parts[] = {q, xi, qx};
    scores.push_back(t.dot(w, t.concat(parts)));
  }
  Var alpha = t.softmax(t.concat(scores));
  Var xhat = t.linear(alpha, t.constant(x_rows));
  return {alpha, xhat};
}

Var encode_kg(Tape& t, ModelParams& mp, Var q, const NewsFeatures& feats,
              AttnTrace* trace) {
  const ModelConfig& cfg = mp.cfg;
  if (static_cast<int32_t>(feats.hop_embeds.size()) != cfg.hop_slots()) {
    throw InvariantError("encode_kg: feature hop count " +
                         std::to_string(feats.hop_embeds.size()) +
                         " != configured " + std::to_string(cfg.hop_slots()));
  }
  const int32_t first_hop = cfg.kg_include_source_hop ? 0 : 1;
  std::vector<Var> parts;
  parts.reserve(static_cast<size_t>(cfg.hop_slots()) * cfg.kg_heads);
  for (int32_t k = 0; k < cfg.hop_slots(); ++k) {
    const Tensor& x_rows = feats.hop_embeds[static_cast<size_t>(k)];
    for (int32_t h = 0; h < cfg.kg_heads; ++h) {
      if (x_rows.rows() == 0) {
        parts.push_back(t.zeros({cfg.entity_dim}));
        continue;
      }
      Parameter& w = *mp.kg_attn[static_cast<size_t>(k) * cfg.kg_heads + h];
      auto [alpha, xhat] = kg_attend(t, q, x_rows, w);
      parts.push_back(xhat);
      if (trace) {
        AttnTrace::Entry entry;
        entry.hop = first_hop + k;
        entry.head = h + 1;
        entry.entities = feats.hop_entities[static_cast<size_t>(k)];
        const Tensor& av = t.value(alpha);
        entry.weights.assign(av.values().begin(), av.values().end());
        trace->entries.push_back(std::move(entry));
      }
    }
  }
  return t.linear(t.concat(parts), t.param(*mp.kg_proj));
}

const GeneralEncoder& default_general_encoder() {
  static const AdditiveAttentionEncoder encoder;
  return encoder;
}

NewsRepr encode_news(Tape& t, ModelParams& mp, const NewsFeatures& feats,
                     AttnTrace* trace, const GeneralEncoder* general) {
  const ModelConfig& cfg = mp.cfg;
  if (!general) general = &default_general_encoder();
  NewsRepr r;
  r.gne = general->encode(t, mp, feats.tokens);
  if (cfg.use_llm) {
    r.llm = encode_llm(t, mp, feats.layer_rows);
  }
  if (cfg.use_kg) {
    const Var source = cfg.query_source == QuerySource::kLlm ? r.llm : r.gne;
    Var q = kg_query(t, mp, source);
    r.kg = encode_kg(t, mp, q, feats, trace);
  }
  std::vector<Var> segments;
  segments.push_back(r.gne);
  if (cfg.use_kg) segments.push_back(r.kg);
  if (cfg.use_llm) segments.push_back(r.llm);
  r.full = segments.size() == 1 ? segments[0] : t.concat(segments);
  return r;
}

Var encode_user(Tape& t, ModelParams& mp, std::span<const Var> history) {
  if (history.empty()) return t.zeros({mp.cfg.repr_dim()});
  return additive_attention(t, history, *mp.user_proj, *mp.user_query);
}

}  // namespace newsrec
