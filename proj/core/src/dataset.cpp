#include "newsrec/dataset.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "newsrec/error.hpp"
#include "newsrec/rng.hpp"

namespace newsrec {

Vocabulary Vocabulary::build(const std::vector<const NewsRecord*>& news,
                             int min_freq) {
  std::map<std::string, int64_t> freq;
  for (const NewsRecord* rec : news) {
    for (const auto& w : rec->title_words) ++freq[w];
    for (const auto& w : rec->abstract_words) ++freq[w];
  }
  Vocabulary vocab;
  int32_t next = 1;
  for (const auto& [word, count] : freq) {
    if (count >= min_freq) vocab.ids_.emplace(word, next++);
  }
  return vocab;
}

int32_t Vocabulary::id_of(std::string_view word) const {
  auto it = ids_.find(std::string(word));
  return it == ids_.end() ? kUnknown : it->second;
}

namespace {

void assign_tokens(const Vocabulary& vocab, NewsRecord* rec) {
  rec->title_tokens.clear();
  rec->abstract_tokens.clear();
  rec->title_tokens.reserve(rec->title_words.size());
  rec->abstract_tokens.reserve(rec->abstract_words.size());
  for (const auto& w : rec->title_words) rec->title_tokens.push_back(vocab.id_of(w));
  for (const auto& w : rec->abstract_words) rec->abstract_tokens.push_back(vocab.id_of(w));
}

}  // namespace

void ClickDataset::finalize(int vocab_min_freq) {
  std::unordered_set<std::string> ids;
  for (const auto& imp : train) {
    if (!ids.insert(imp.id).second) {
      throw ValidationError("duplicate impression id in train set: " + imp.id);
    }
  }
  for (const auto& imp : eval) {
    if (!ids.insert(imp.id).second) {
      throw ValidationError("impression id appears in both splits: " + imp.id);
    }
  }

  std::set<std::string> train_news_ids;
  for (const auto& imp : train) {
    for (const auto& h : imp.history) train_news_ids.insert(h);
    for (const auto& c : imp.candidates) train_news_ids.insert(c.news_id);
  }
  std::vector<const NewsRecord*> train_news;
  for (const auto& id : train_news_ids) {
    auto it = news.find(id);
    if (it != news.end()) train_news.push_back(&it->second);
  }
  vocab = Vocabulary::build(train_news, vocab_min_freq);
  for (auto& [id, rec] : news) assign_tokens(vocab, &rec);
}

const NewsRecord* ClickDataset::find_news(const std::string& id) const {
  auto it = news.find(id);
  return it == news.end() ? nullptr : &it->second;
}

DatasetStats ClickDataset::stats() const {
  DatasetStats st;
  st.news_count = static_cast<int64_t>(news.size());
  st.train_impressions = static_cast<int64_t>(train.size());
  st.eval_impressions = static_cast<int64_t>(eval.size());
  st.vocab_size = vocab.size();
  for (const auto& [id, rec] : news) {
    if (!rec.entity_ids.empty()) ++st.news_with_entities;
  }
  st.entity_coverage =
      news.empty() ? 0.0
                   : static_cast<double>(st.news_with_entities) /
                         static_cast<double>(news.size());
  auto count_refs = [&](const std::vector<Impression>& imps) {
    for (const auto& imp : imps) {
      for (const auto& h : imp.history) {
        if (!news.count(h)) ++st.unresolved_history_refs;
      }
      for (const auto& c : imp.candidates) {
        if (!news.count(c.news_id)) ++st.unresolved_candidate_refs;
      }
    }
  };
  count_refs(train);
  count_refs(eval);
  return st;
}

namespace {

constexpr char kSnapshotMagic[] = "newsrec-snapshot";
constexpr int kSnapshotVersion = 1;

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out.push_back(' ');
    out += parts[i];
  }
  return out;
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    size_t j = i;
    while (j < s.size() && s[j] != ' ') ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string> split_tabs(const std::string& s) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t pos = s.find('\t', start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

void write_impressions(std::ofstream& out, const std::vector<Impression>& imps) {
  for (const auto& imp : imps) {
    out << imp.id << '\t' << imp.user_id << '\t' << join(imp.history) << '\t';
    for (size_t i = 0; i < imp.candidates.size(); ++i) {
      if (i) out << ' ';
      out << imp.candidates[i].news_id << '-'
          << static_cast<int>(imp.candidates[i].label);
    }
    out << '\n';
  }
}

std::string expect_line(std::ifstream& in, const std::string& path) {
  std::string line;
  if (!std::getline(in, line)) {
    throw FormatError("snapshot truncated: " + path);
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

Impression parse_snapshot_impression(const std::string& line,
                                     const std::string& path) {
  const auto cols = split_tabs(line);
  if (cols.size() != 4) {
    throw FormatError("snapshot impression line needs 4 fields: " + path);
  }
  Impression imp;
  imp.id = cols[0];
  imp.user_id = cols[1];
  imp.history = split_ws(cols[2]);
  for (const auto& tok : split_ws(cols[3])) {
    const size_t dash = tok.rfind('-');
    if (dash == std::string::npos || dash + 2 != tok.size() ||
        (tok[dash + 1] != '0' && tok[dash + 1] != '1')) {
      throw FormatError("snapshot candidate '" + tok + "' malformed: " + path);
    }
    imp.candidates.push_back(
        Candidate{tok.substr(0, dash), static_cast<int8_t>(tok[dash + 1] - '0')});
  }
  return imp;
}

}  // namespace

void write_snapshot(const ClickDataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write snapshot: " + path);
  out << kSnapshotMagic << ' ' << kSnapshotVersion << '\n';
  out << "news " << ds.news.size() << '\n';
  for (const auto& [id, rec] : ds.news) {
    out << rec.id << '\t' << rec.category << '\t' << rec.subcategory << '\t'
        << join(rec.title_words) << '\t' << join(rec.abstract_words) << '\t'
        << join(rec.entity_ids) << '\n';
  }
  out << "train " << ds.train.size() << '\n';
  write_impressions(out, ds.train);
  out << "eval " << ds.eval.size() << '\n';
  write_impressions(out, ds.eval);
  out << "end\n";
  if (!out) throw ValidationError("write failed: " + path);
}

ClickDataset read_snapshot(const std::string& path, int vocab_min_freq) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open snapshot: " + path);
  ClickDataset ds;

  std::istringstream header(expect_line(in, path));
  std::string magic;
  int version = 0;
  header >> magic >> version;
  if (magic != kSnapshotMagic) {
    throw FormatError("not a snapshot file: " + path);
  }
  if (version != kSnapshotVersion) {
    throw FormatError("unsupported snapshot version " + std::to_string(version) +
                      ": " + path);
  }

  auto read_count = [&](const std::string& section) -> int64_t {
    std::istringstream ss(expect_line(in, path));
    std::string name;
    int64_t count = -1;
    ss >> name >> count;
    if (name != section || count < 0) {
      throw FormatError("expected '" + section + " <count>' in " + path);
    }
    return count;
  };

  const int64_t news_count = read_count("news");
  for (int64_t i = 0; i < news_count; ++i) {
    const auto cols = split_tabs(expect_line(in, path));
    if (cols.size() != 6) {
      throw FormatError("snapshot news line needs 6 fields: " + path);
    }
    NewsRecord rec;
    rec.id = cols[0];
    rec.category = cols[1];
    rec.subcategory = cols[2];
    rec.title_words = split_ws(cols[3]);
    rec.abstract_words = split_ws(cols[4]);
    rec.entity_ids = split_ws(cols[5]);
    if (rec.id.empty()) throw FormatError("snapshot news with empty id: " + path);
    ds.news[rec.id] = std::move(rec);
  }

  const int64_t train_count = read_count("train");
  ds.train.reserve(static_cast<size_t>(train_count));
  for (int64_t i = 0; i < train_count; ++i) {
    ds.train.push_back(parse_snapshot_impression(expect_line(in, path), path));
  }
  const int64_t eval_count = read_count("eval");
  ds.eval.reserve(static_cast<size_t>(eval_count));
  for (int64_t i = 0; i < eval_count; ++i) {
    ds.eval.push_back(parse_snapshot_impression(expect_line(in, path), path));
  }
  if (expect_line(in, path) != "end") {
    throw FormatError("snapshot missing end marker: " + path);
  }
  ds.finalize(vocab_min_freq);
  return ds;
}

std::vector<TrainSample> build_samples(const ClickDataset& ds, int k,
                                       uint64_t seed,
                                       int64_t* skipped_impressions) {
  if (k < 1) throw DomainError("build_samples: k must be >= 1");
  Rng rng(hash_combine(seed, 0x5a3c9d1fULL));
  std::vector<TrainSample> out;
  int64_t skipped = 0;
  for (size_t idx = 0; idx < ds.train.size(); ++idx) {
    const Impression& imp = ds.train[idx];
    bool had_positive = false;
    bool emitted = false;
    for (const auto& cand : imp.candidates) {
      if (cand.label != 1) continue;
      had_positive = true;
      std::vector<const std::string*> pool;
      for (const auto& other : imp.candidates) {
        if (other.label == 0 && other.news_id != cand.news_id) {
          pool.push_back(&other.news_id);
        }
      }
      if (pool.empty()) continue;
      TrainSample sample;
      sample.impression_index = static_cast<int32_t>(idx);
      sample.positive = cand.news_id;
      sample.negatives.reserve(static_cast<size_t>(k));
      if (pool.size() >= static_cast<size_t>(k)) {
        for (size_t j : rng.sample_without_replacement(pool.size(),
                                                       static_cast<size_t>(k))) {
          sample.negatives.push_back(*pool[j]);
        }
      } else {
        for (int j = 0; j < k; ++j) {
          sample.negatives.push_back(*pool[rng.uniform_int(pool.size())]);
        }
      }
      out.push_back(std::move(sample));
      emitted = true;
    }
    if (had_positive && !emitted) ++skipped;
  }
  if (skipped_impressions) *skipped_impressions = skipped;
  return out;
}

}  // namespace newsrec
