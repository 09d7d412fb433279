#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "newsrec/tensor.hpp"

namespace newsrec {

// Per-news matrices of layer-pooled hidden states: L rows (one per decoder
// layer) by D columns. Values are carried as 64-bit in memory and 32-bit
// in the interchange file.
class LayerStore {
 public:
  LayerStore() = default;
  LayerStore(int32_t layers, int32_t dim);

  int32_t layers() const { return layers_; }
  int32_t dim() const { return dim_; }
  size_t size() const { return rows_.size(); }

  // Validates shape and finiteness; replaces an existing entry.
  void put(std::string news_id, Tensor rows);
  const Tensor* find(const std::string& news_id) const;

  // Entries iterate sorted by id.
  const std::map<std::string, Tensor>& entries() const { return rows_; }

  // Ids from `wanted` that the store lacks, in input order.
  std::vector<std::string> missing(const std::vector<std::string>& wanted) const;

 private:
  int32_t layers_ = 0;
  int32_t dim_ = 0;
  std::map<std::string, Tensor> rows_;
};

// LKEM binary interchange format:
//   magic "LKEM" | u32 version=1 | u32 L | u32 D | u32 N
//   then N records of [u16 id_len | id bytes (UTF-8) | L*D float32],
// all integers and floats little-endian, records sorted by id.
LayerStore read_store(const std::string& path);
void write_store(const LayerStore& store, const std::string& path);

// Deterministic stand-in for a real extractor: rows are unit-norm vectors
// derived from a seeded hash of (news_id, layer). When `planted` is given
// (a D-vector), planted_weight * planted is added to every row after
// normalization.
Tensor synthetic_embeddings(std::string_view news_id, int32_t layers,
                            int32_t dim, uint64_t seed,
                            const Tensor* planted = nullptr,
                            double planted_weight = 0.0);

}  // namespace newsrec
