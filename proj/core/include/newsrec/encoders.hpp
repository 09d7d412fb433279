#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "newsrec/dataset.hpp"
#include "newsrec/embed_store.hpp"
#include "newsrec/kg.hpp"
#include "newsrec/tape.hpp"

namespace newsrec {

enum class QuerySource { kLlm, kGeneral };

// Model geometry and branch switches. Disabled branches are omitted from
// the news representation entirely, shrinking its dimension.
struct ModelConfig {
  bool use_kg = true;
  bool use_llm = true;
  int32_t vocab_size = 0;
  int32_t d_word = 300;
  int32_t d_gen = 400;
  int32_t llm_layers = 4;
  int32_t llm_dim = 0;  // D; resolved from the embedding store
  int32_t llm_proj = 500;
  int32_t entity_dim = 100;
  int32_t kg_hops = 2;
  int32_t kg_heads = 3;
  int32_t kg_out = 128;
  int32_t kg_max_neighbors = 20;
  bool kg_include_source_hop = false;
  QuerySource query_source = QuerySource::kLlm;

  int32_t repr_dim() const {
    return d_gen + (use_kg ? kg_out : 0) + (use_llm ? llm_proj : 0);
  }
  // Attention slots per head: real hops plus the optional source hop.
  int32_t hop_slots() const { return kg_hops + (kg_include_source_hop ? 1 : 0); }
  int32_t query_input_dim() const {
    return query_source == QuerySource::kLlm ? llm_proj : d_gen;
  }
  void validate() const;
};

// Every trainable tensor, held in a registry with stable order.
struct ModelParams {
  ModelConfig cfg;
  ParamRegistry registry;

  Parameter* word_emb = nullptr;       // vocab x d_word
  Parameter* gen_proj = nullptr;       // d_word x d_gen
  Parameter* gen_query = nullptr;      // d_gen
  Parameter* layer_weights = nullptr;  // L
  Parameter* fl_w = nullptr;           // D x llm_proj
  Parameter* fl_b = nullptr;           // llm_proj
  Parameter* fs_w = nullptr;           // query_input x entity_dim
  Parameter* fs_b = nullptr;           // entity_dim
  std::vector<Parameter*> kg_attn;     // hop-major, head-minor; 3*entity_dim
  Parameter* kg_proj = nullptr;        // (hop_slots*heads*entity_dim) x kg_out
  Parameter* user_proj = nullptr;      // repr x repr
  Parameter* user_query = nullptr;     // repr

  // Resolve the named handles above from the registry.
  void bind();
  ModelParams clone() const;
};

// Initialized parameters: uniform(-0.1, 0.1) matrices, zero biases, layer
// weights 1/L each.
ModelParams build_model(const ModelConfig& cfg, uint64_t seed);

// Attention weights recorded while encoding one news item.
struct AttnTrace {
  struct Entry {
    int32_t hop = 0;   // 1..n; 0 marks the optional source hop
    int32_t head = 0;  // 1..H
    std::vector<std::string> entities;
    std::vector<double> weights;
  };
  std::string news_id;
  std::vector<Entry> entries;
};

// Indexes of the k largest weights in an entry, ties broken by original
// position. Used by the explain command's top-5 listing.
std::vector<size_t> top_weight_indices(const AttnTrace::Entry& entry, size_t k);

// Constant per-news inputs resolved from the stores.
struct NewsFeatures {
  std::vector<int32_t> tokens;  // title then abstract
  Tensor layer_rows;            // L x D; empty when the llm branch is off
  std::vector<Tensor> hop_embeds;
  std::vector<std::vector<std::string>> hop_entities;
};

// Resolves features for every news record once; encoding then reuses the
// cached constants. Hop extraction is seeded per news id.
class FeatureCache {
 public:
  FeatureCache(const ClickDataset& ds, const TripleGraph* graph,
               const LayerStore* embeds, const ModelConfig& cfg,
               uint64_t seed);

  const NewsFeatures& get(const std::string& news_id) const;
  const NewsFeatures* find(const std::string& news_id) const;
  // News ids that the llm branch needs but the store lacks.
  const std::vector<std::string>& missing_embeddings() const {
    return missing_;
  }

 private:
  std::unordered_map<std::string, NewsFeatures> feats_;
  std::vector<std::string> missing_;
};

struct NewsRepr {
  Var gne;   // word-level representation
  Var kg;    // invalid when the kg branch is off
  Var llm;   // invalid when the llm branch is off
  Var full;  // [gne; kg; llm], disabled segments omitted
};

// Word-level additive attention over title+abstract tokens; empty token
// list yields a zero vector.
Var encode_general(Tape& t, ModelParams& mp, std::span<const int32_t> tokens);

// The word-level encoder is a swappable component; encode_news accepts
// any implementation and defaults to the additive-attention one above.
// Implementations must emit a d_gen vector.
class GeneralEncoder {
 public:
  virtual ~GeneralEncoder() = default;
  virtual Var encode(Tape& t, ModelParams& mp,
                     std::span<const int32_t> tokens) const = 0;
};

class AdditiveAttentionEncoder final : public GeneralEncoder {
 public:
  Var encode(Tape& t, ModelParams& mp,
             std::span<const int32_t> tokens) const override {
    return encode_general(t, mp, tokens);
  }
};

const GeneralEncoder& default_general_encoder();

// Learnable layer mix followed by tanh projection to llm_proj dims.
Var encode_llm(Tape& t, ModelParams& mp, const Tensor& layer_rows);

// Projects a news representation into entity space: tanh(f_s(source)).
Var kg_query(Tape& t, ModelParams& mp, Var source);

// Attention of q over the m rows of X with weight vector w_attn; returns
// (alpha, weighted sum). Requires m >= 1.
std::pair<Var, Var> kg_attend(Tape& t, Var q, const Tensor& x_rows,
                              Parameter& w_attn);

// Multi-hop, multi-head aggregation projected to kg_out dims; empty hops
// contribute zero vectors per head. Optionally records attention weights.
Var encode_kg(Tape& t, ModelParams& mp, Var q, const NewsFeatures& feats,
              AttnTrace* trace);

NewsRepr encode_news(Tape& t, ModelParams& mp, const NewsFeatures& feats,
                     AttnTrace* trace = nullptr,
                     const GeneralEncoder* general = nullptr);

// Additive attention over history representations (most recent last);
// empty history yields a zero vector.
Var encode_user(Tape& t, ModelParams& mp, std::span<const Var> history);

}  // namespace newsrec
