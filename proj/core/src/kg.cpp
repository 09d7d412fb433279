#include "newsrec/kg.hpp"

#include <algorithm>

#include "newsrec/error.hpp"
#include "newsrec/rng.hpp"

namespace newsrec {

int32_t TripleGraph::intern(const std::string& id) {
  auto it = index_.find(id);
  if (it != index_.end()) return it->second;
  const int32_t idx = static_cast<int32_t>(names_.size());
  index_.emplace(id, idx);
  names_.push_back(id);
  adj_.emplace_back();
  embeds_.emplace_back();
  has_embed_.push_back(0);
  return idx;
}

TripleGraph TripleGraph::build(const std::vector<Triple>& triples) {
  TripleGraph g;
  for (const auto& t : triples) {
    const int32_t h = g.intern(t.head);
    const int32_t tl = g.intern(t.tail);
    int32_t rel;
    auto it = g.relation_index_.find(t.relation);
    if (it != g.relation_index_.end()) {
      rel = it->second;
    } else {
      rel = static_cast<int32_t>(g.relations_.size());
      g.relation_index_.emplace(t.relation, rel);
      g.relations_.push_back(t.relation);
    }
    if (h != tl) {
      g.adj_[static_cast<size_t>(h)].emplace_back(tl, rel);
      g.adj_[static_cast<size_t>(tl)].emplace_back(h, rel);
    } else {
      g.adj_[static_cast<size_t>(h)].emplace_back(tl, rel);
    }
  }
  for (auto& list : g.adj_) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return g;
}

void TripleGraph::attach_embeddings(const std::map<std::string, Tensor>& vecs,
                                    int dim) {
  if (dim < 1) throw DomainError("attach_embeddings: dim must be >= 1");
  dim_ = dim;
  for (const auto& [id, vec] : vecs) {
    if (vec.ndim() != 1 || vec.numel() != dim) {
      throw DimError("entity embedding " + id + " has shape " +
                     vec.shape_str() + ", expected [" + std::to_string(dim) +
                     "]");
    }
    const int32_t idx = intern(id);
    embeds_[static_cast<size_t>(idx)] = vec;
    has_embed_[static_cast<size_t>(idx)] = 1;
  }
}

int64_t TripleGraph::edge_count() const {
  int64_t twice = 0;
  for (const auto& list : adj_) twice += static_cast<int64_t>(list.size());
  return twice / 2;
}

bool TripleGraph::has_entity(const std::string& id) const {
  return index_.count(id) > 0;
}

bool TripleGraph::has_embedding(const std::string& id) const {
  auto it = index_.find(id);
  return it != index_.end() && has_embed_[static_cast<size_t>(it->second)];
}

const Tensor* TripleGraph::embedding(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end() || !has_embed_[static_cast<size_t>(it->second)]) {
    return nullptr;
  }
  return &embeds_[static_cast<size_t>(it->second)];
}

std::vector<std::string> TripleGraph::neighbors(const std::string& id) const {
  std::vector<std::string> out;
  auto it = index_.find(id);
  if (it == index_.end()) return out;
  int32_t last = -1;
  for (const auto& [nb, rel] : adj_[static_cast<size_t>(it->second)]) {
    if (nb == last) continue;  // same neighbor through another relation
    out.push_back(names_[static_cast<size_t>(nb)]);
    last = nb;
  }
  return out;
}

HopSets TripleGraph::hop_sets(const std::vector<std::string>& sources,
                              int n_hops, int max_per_hop,
                              uint64_t seed) const {
  if (n_hops < 1) throw DomainError("hop_sets: n_hops must be >= 1");
  if (max_per_hop < 1) throw DomainError("hop_sets: max_per_hop must be >= 1");

  HopSets result;
  result.hops.resize(static_cast<size_t>(n_hops));

  std::vector<char> visited(names_.size(), 0);
  std::vector<int32_t> frontier;
  for (const auto& src : sources) {
    auto it = index_.find(src);
    if (it == index_.end()) continue;
    if (!visited[static_cast<size_t>(it->second)]) {
      visited[static_cast<size_t>(it->second)] = 1;
      frontier.push_back(it->second);
    }
  }

  Rng rng(hash_combine(seed, 0x68d2c1a7ULL));
  for (int hop = 0; hop < n_hops; ++hop) {
    // Full minimal-hop frontier first, so dropped entities never reappear
    // at a deeper hop.
    std::vector<int32_t> discovered;
    for (int32_t u : frontier) {
      for (const auto& [nb, rel] : adj_[static_cast<size_t>(u)]) {
        if (visited[static_cast<size_t>(nb)]) continue;
        visited[static_cast<size_t>(nb)] = 1;
        discovered.push_back(nb);
      }
    }
    std::vector<int32_t> kept;
    kept.reserve(discovered.size());
    for (int32_t v : discovered) {
      if (has_embed_[static_cast<size_t>(v)]) kept.push_back(v);
    }
    if (kept.size() > static_cast<size_t>(max_per_hop)) {
      auto chosen = rng.sample_without_replacement(
          kept.size(), static_cast<size_t>(max_per_hop));
      std::sort(chosen.begin(), chosen.end());
      std::vector<int32_t> sampled;
      sampled.reserve(chosen.size());
      for (size_t j : chosen) sampled.push_back(kept[j]);
      kept = std::move(sampled);
    }
    auto& names_out = result.hops[static_cast<size_t>(hop)];
    names_out.reserve(kept.size());
    for (int32_t v : kept) names_out.push_back(names_[static_cast<size_t>(v)]);
    frontier = std::move(kept);
    if (frontier.empty()) break;
  }
  return result;
}

Tensor TripleGraph::gather_embeddings(const std::vector<std::string>& hop) const {
  if (dim_ == 0) {
    throw InvariantError("gather_embeddings: no embeddings attached");
  }
  Tensor out = Tensor::matrix(static_cast<int64_t>(hop.size()), dim_);
  for (size_t i = 0; i < hop.size(); ++i) {
    const Tensor* e = embedding(hop[i]);
    if (!e) {
      throw InvariantError("gather_embeddings: entity without embedding: " +
                           hop[i]);
    }
    double* r = out.row(static_cast<int64_t>(i));
    for (int j = 0; j < dim_; ++j) r[j] = (*e)[j];
  }
  return out;
}

}  // namespace newsrec
