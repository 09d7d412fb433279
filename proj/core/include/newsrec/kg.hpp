#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "newsrec/mind.hpp"
#include "newsrec/tensor.hpp"

namespace newsrec {

// Per-hop neighbor sets around a news item's source entities. Hop sets
// are pairwise disjoint, exclude the sources, and each entity sits at its
// minimal hop.
struct HopSets {
  std::vector<std::vector<std::string>> hops;  // index k-1 holds hop k
};

// Undirected adjacency over interned entities plus an entity-embedding
// table. Immutable after build + attach.
class TripleGraph {
 public:
  TripleGraph() = default;

  // Symmetric adjacency; duplicate triples collapse to one edge entry.
  static TripleGraph build(const std::vector<Triple>& triples);

  // Embeddings must share `dim`; entities in the table but not in any
  // triple are added as isolated nodes.
  void attach_embeddings(const std::map<std::string, Tensor>& vecs, int dim);

  int64_t entity_count() const { return static_cast<int64_t>(names_.size()); }
  int64_t edge_count() const;
  int embedding_dim() const { return dim_; }
  bool has_entity(const std::string& id) const;
  bool has_embedding(const std::string& id) const;
  const Tensor* embedding(const std::string& id) const;
  std::vector<std::string> neighbors(const std::string& id) const;

  // Seeded multi-hop breadth-first expansion from the given sources.
  // Frontiers are discovered in deterministic order; entities without an
  // embedding are dropped from the output; frontiers larger than
  // max_per_hop are uniformly subsampled (discovery order kept) and only
  // the kept entities are expanded further.
  HopSets hop_sets(const std::vector<std::string>& sources, int n_hops,
                   int max_per_hop, uint64_t seed) const;

  // Row i holds the embedding of hop[i]; throws if any entity lacks one.
  Tensor gather_embeddings(const std::vector<std::string>& hop) const;

 private:
  int32_t intern(const std::string& id);

  std::unordered_map<std::string, int32_t> index_;
  std::vector<std::string> names_;
  // Sorted, deduplicated (neighbor, relation) pairs per entity.
  std::vector<std::vector<std::pair<int32_t, int32_t>>> adj_;
  std::vector<std::string> relations_;
  std::unordered_map<std::string, int32_t> relation_index_;
  std::vector<Tensor> embeds_;
  std::vector<char> has_embed_;
  int dim_ = 0;
};

}  // namespace newsrec
