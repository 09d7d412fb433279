#include "newsrec/embed_store.hpp"

#include <cmath>
#include <fstream>

#include "binio.hpp"
#include "newsrec/error.hpp"
#include "newsrec/rng.hpp"

namespace newsrec {

namespace {
constexpr char kMagic[4] = {'L', 'K', 'E', 'M'};
constexpr uint32_t kVersion = 1;
}  // namespace

LayerStore::LayerStore(int32_t layers, int32_t dim)
    : layers_(layers), dim_(dim) {
  if (layers < 1 || dim < 1) {
    throw DomainError("LayerStore: layers and dim must be >= 1");
  }
}

void LayerStore::put(std::string news_id, Tensor rows) {
  if (layers_ == 0) {
    throw InvariantError("LayerStore: put on default-constructed store");
  }
  if (rows.ndim() != 2 || rows.rows() != layers_ || rows.cols() != dim_) {
    throw DimError("LayerStore: entry " + news_id + " has shape " +
                   rows.shape_str() + ", expected [" + std::to_string(layers_) +
                   "x" + std::to_string(dim_) + "]");
  }
  if (!rows.all_finite()) {
    throw ValidationError("LayerStore: non-finite value in entry " + news_id);
  }
  rows_[std::move(news_id)] = std::move(rows);
}

const Tensor* LayerStore::find(const std::string& news_id) const {
  auto it = rows_.find(news_id);
  return it == rows_.end() ? nullptr : &it->second;
}

std::vector<std::string> LayerStore::missing(
    const std::vector<std::string>& wanted) const {
  std::vector<std::string> out;
  for (const auto& id : wanted) {
    if (!rows_.count(id)) out.push_back(id);
  }
  return out;
}

LayerStore read_store(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open embedding store: " + path);

  char magic[4];
  if (!binio::get_bytes(in, magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError("bad magic, not an LKEM file: " + path);
  }
  uint32_t version = 0, layers = 0, dim = 0, count = 0;
  if (!binio::get_u32(in, &version) || !binio::get_u32(in, &layers) ||
      !binio::get_u32(in, &dim) || !binio::get_u32(in, &count)) {
    throw FormatError("truncated LKEM header: " + path);
  }
  if (version != kVersion) {
    throw FormatError("unsupported LKEM version " + std::to_string(version) +
                      ": " + path);
  }
  if (layers < 1 || dim < 1) {
    throw FormatError("LKEM header has zero layers or dim: " + path);
  }

  LayerStore store(static_cast<int32_t>(layers), static_cast<int32_t>(dim));
  for (uint32_t rec = 0; rec < count; ++rec) {
    const std::string where =
        "record " + std::to_string(rec) + " of " + std::to_string(count);
    uint16_t id_len = 0;
    if (!binio::get_u16(in, &id_len)) {
      throw FormatError("truncated LKEM file at " + where + ": " + path);
    }
    std::string id(id_len, '\0');
    if (id_len > 0 && !binio::get_bytes(in, id.data(), id_len)) {
      throw FormatError("truncated LKEM file at " + where + ": " + path);
    }
    Tensor rows = Tensor::matrix(layers, dim);
    for (int64_t i = 0; i < rows.numel(); ++i) {
      float v = 0.0f;
      if (!binio::get_f32(in, &v)) {
        throw FormatError("truncated LKEM file at " + where + ": " + path);
      }
      rows[i] = static_cast<double>(v);
    }
    store.put(std::move(id), std::move(rows));
  }
  return store;
}

void write_store(const LayerStore& store, const std::string& path) {
  if (store.layers() < 1 || store.dim() < 1) {
    throw ValidationError("write_store: store has no layer/dim geometry");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write embedding store: " + path);
  out.write(kMagic, 4);
  binio::put_u32(out, kVersion);
  binio::put_u32(out, static_cast<uint32_t>(store.layers()));
  binio::put_u32(out, static_cast<uint32_t>(store.dim()));
  binio::put_u32(out, static_cast<uint32_t>(store.size()));
  for (const auto& [id, rows] : store.entries()) {
    if (id.size() > UINT16_MAX) {
      throw ValidationError("write_store: id too long: " + id);
    }
    if (!rows.all_finite()) {
      throw ValidationError("write_store: non-finite value in entry " + id);
    }
    binio::put_u16(out, static_cast<uint16_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
    for (int64_t i = 0; i < rows.numel(); ++i) {
      binio::put_f32(out, static_cast<float>(rows[i]));
    }
  }
  if (!out) throw ValidationError("write failed: " + path);
}

Tensor synthetic_embeddings(std::string_view news_id, int32_t layers,
                            int32_t dim, uint64_t seed, const Tensor* planted,
                            double planted_weight) {
  if (layers < 1 || dim < 1) {
    throw DomainError("synthetic_embeddings: layers and dim must be >= 1");
  }
  if (planted && planted->numel() != dim) {
    throw DimError("synthetic_embeddings: planted direction has " +
                   std::to_string(planted->numel()) + " entries, expected " +
                   std::to_string(dim));
  }
  Tensor rows = Tensor::matrix(layers, dim);
  for (int32_t layer = 0; layer < layers; ++layer) {
    Rng rng(hash_combine(hash_str(news_id, seed),
                         static_cast<uint64_t>(layer) + 1));
    double* r = rows.row(layer);
    double norm2 = 0.0;
    for (int32_t j = 0; j < dim; ++j) {
      r[j] = rng.normal();
      norm2 += r[j] * r[j];
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (int32_t j = 0; j < dim; ++j) r[j] *= inv;
    if (planted && planted_weight != 0.0) {
      for (int32_t j = 0; j < dim; ++j) {
        r[j] += planted_weight * (*planted)[j];
      }
    }
  }
  return rows;
}

}  // namespace newsrec
