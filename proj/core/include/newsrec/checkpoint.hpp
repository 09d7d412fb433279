#pragma once

#include <string>
#include <utility>
#include <vector>

#include "newsrec/encoders.hpp"
#include "newsrec/metrics.hpp"

namespace newsrec {

// Serialized model state: the effective run configuration, the epoch the
// snapshot was taken at, its validation metrics, and every named tensor.
//
// LKCK binary layout (little-endian):
//   magic "LKCK" | u32 version=1 | u32 config_len | config bytes
//   | u32 epoch | f64 auc | f64 mrr | f64 ndcg5 | f64 ndcg10
//   | u64 impressions | u64 skipped | u32 n_params
//   then per parameter: u16 name_len | name | u8 ndims | u32 dims... |
//   f64 values (row-major).
struct CheckpointData {
  std::string config_text;
  int32_t epoch = 0;
  MetricReport metrics;
  std::vector<std::pair<std::string, Tensor>> params;  // registry order
};

CheckpointData make_checkpoint(const ModelParams& mp, std::string config_text,
                               int32_t epoch, const MetricReport& metrics);

void write_checkpoint(const CheckpointData& ckpt, const std::string& path);
CheckpointData read_checkpoint(const std::string& path);

// Copies checkpoint tensors into an already-built model; every name must
// resolve and every shape must match.
void load_into(const CheckpointData& ckpt, ModelParams* mp);

}  // namespace newsrec
