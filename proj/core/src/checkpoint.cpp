#include "newsrec/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "binio.hpp"
#include "newsrec/error.hpp"

namespace newsrec {

namespace {
constexpr char kMagic[4] = {'L', 'K', 'C', 'K'};
constexpr uint32_t kVersion = 1;

void put_u64(std::ostream& out, uint64_t v) {
  binio::put_u32(out, static_cast<uint32_t>(v & 0xffffffffULL));
  binio::put_u32(out, static_cast<uint32_t>(v >> 32));
}

bool get_u64(std::istream& in, uint64_t* v) {
  uint32_t lo = 0, hi = 0;
  if (!binio::get_u32(in, &lo) || !binio::get_u32(in, &hi)) return false;
  *v = (static_cast<uint64_t>(hi) << 32) | lo;
  return true;
}
}  // namespace

CheckpointData make_checkpoint(const ModelParams& mp, std::string config_text,
                               int32_t epoch, const MetricReport& metrics) {
  CheckpointData ckpt;
  ckpt.config_text = std::move(config_text);
  ckpt.epoch = epoch;
  ckpt.metrics = metrics;
  for (const auto& p : mp.registry.entries()) {
    ckpt.params.emplace_back(p->name,
                             Tensor(p->value.shape(), p->value.values()));
  }
  return ckpt;
}

void write_checkpoint(const CheckpointData& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write checkpoint: " + path);
  out.write(kMagic, 4);
  binio::put_u32(out, kVersion);
  binio::put_u32(out, static_cast<uint32_t>(ckpt.config_text.size()));
  out.write(ckpt.config_text.data(),
            static_cast<std::streamsize>(ckpt.config_text.size()));
  binio::put_u32(out, static_cast<uint32_t>(ckpt.epoch));
  binio::put_f64(out, ckpt.metrics.auc);
  binio::put_f64(out, ckpt.metrics.mrr);
  binio::put_f64(out, ckpt.metrics.ndcg5);
  binio::put_f64(out, ckpt.metrics.ndcg10);
  put_u64(out, static_cast<uint64_t>(ckpt.metrics.impressions));
  put_u64(out, static_cast<uint64_t>(ckpt.metrics.skipped));
  binio::put_u32(out, static_cast<uint32_t>(ckpt.params.size()));
  for (const auto& [name, tensor] : ckpt.params) {
    if (name.size() > UINT16_MAX) {
      throw ValidationError("parameter name too long: " + name);
    }
    binio::put_u16(out, static_cast<uint16_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    const auto& shape = tensor.shape();
    out.put(static_cast<char>(shape.size()));
    for (int64_t d : shape) binio::put_u32(out, static_cast<uint32_t>(d));
    for (int64_t i = 0; i < tensor.numel(); ++i) binio::put_f64(out, tensor[i]);
  }
  if (!out) throw ValidationError("write failed: " + path);
}

CheckpointData read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint: " + path);
  char magic[4];
  if (!binio::get_bytes(in, magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError("bad magic, not an LKCK checkpoint: " + path);
  }
  uint32_t version = 0;
  if (!binio::get_u32(in, &version) || version != kVersion) {
    throw FormatError("unsupported checkpoint version: " + path);
  }
  CheckpointData ckpt;
  uint32_t config_len = 0;
  if (!binio::get_u32(in, &config_len)) {
    throw FormatError("truncated checkpoint header: " + path);
  }
  ckpt.config_text.resize(config_len);
  if (config_len > 0 && !binio::get_bytes(in, ckpt.config_text.data(), config_len)) {
    throw FormatError("truncated checkpoint config: " + path);
  }
  uint32_t epoch = 0;
  uint64_t impressions = 0, skipped = 0;
  if (!binio::get_u32(in, &epoch) || !binio::get_f64(in, &ckpt.metrics.auc) ||
      !binio::get_f64(in, &ckpt.metrics.mrr) ||
      !binio::get_f64(in, &ckpt.metrics.ndcg5) ||
      !binio::get_f64(in, &ckpt.metrics.ndcg10) ||
      !get_u64(in, &impressions) || !get_u64(in, &skipped)) {
    throw FormatError("truncated checkpoint metrics: " + path);
  }
  ckpt.epoch = static_cast<int32_t>(epoch);
  ckpt.metrics.impressions = static_cast<int64_t>(impressions);
  ckpt.metrics.skipped = static_cast<int64_t>(skipped);
  uint32_t n_params = 0;
  if (!binio::get_u32(in, &n_params)) {
    throw FormatError("truncated checkpoint: " + path);
  }
  for (uint32_t k = 0; k < n_params; ++k) {
    const std::string where = "parameter " + std::to_string(k);
    uint16_t name_len = 0;
    if (!binio::get_u16(in, &name_len)) {
      throw FormatError("truncated checkpoint at " + where + ": " + path);
    }
    std::string name(name_len, '\0');
    if (name_len > 0 && !binio::get_bytes(in, name.data(), name_len)) {
      throw FormatError("truncated checkpoint at " + where + ": " + path);
    }
    const int ndims = in.get();
    if (ndims < 0 || ndims > 8) {
      throw FormatError("bad tensor rank at " + where + ": " + path);
    }
    std::vector<int64_t> shape(static_cast<size_t>(ndims));
    for (auto& d : shape) {
      uint32_t dim = 0;
      if (!binio::get_u32(in, &dim)) {
        throw FormatError("truncated checkpoint at " + where + ": " + path);
      }
      d = static_cast<int64_t>(dim);
    }
    Tensor tensor(shape);
    for (int64_t i = 0; i < tensor.numel(); ++i) {
      if (!binio::get_f64(in, &tensor[i])) {
        throw FormatError("truncated checkpoint at " + where + ": " + path);
      }
    }
    ckpt.params.emplace_back(std::move(name), std::move(tensor));
  }
  return ckpt;
}

void load_into(const CheckpointData& ckpt, ModelParams* mp) {
  if (ckpt.params.size() != mp->registry.size()) {
    throw ConfigError("checkpoint has " + std::to_string(ckpt.params.size()) +
                      " parameters but the model expects " +
                      std::to_string(mp->registry.size()));
  }
  for (const auto& [name, tensor] : ckpt.params) {
    Parameter* p = mp->registry.find(name);
    if (!p) throw ConfigError("checkpoint parameter unknown to model: " + name);
    if (p->value.shape() != tensor.shape()) {
      throw ConfigError("checkpoint parameter " + name + " has shape " +
                        tensor.shape_str() + " but the model expects " +
                        p->value.shape_str());
    }
    p->value = Tensor(tensor.shape(), tensor.values());
  }
}

}  // namespace newsrec
