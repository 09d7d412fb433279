#include "newsrec/mind.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "newsrec/error.hpp"

namespace newsrec {

void ParseLog::warn(std::string msg) {
  ++skipped;
  if (warnings.size() < kMaxStored) warnings.push_back(std::move(msg));
}

namespace {

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      break;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
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

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file: " + path);
  return in;
}

// Pulls WikidataId strings out of a MIND entity annotation column.
// Returns false when the column is non-empty but not valid JSON.
bool extract_entities(const std::string& column, std::vector<std::string>* out) {
  if (column.empty()) return true;
  nlohmann::json parsed = nlohmann::json::parse(column, nullptr, false);
  if (parsed.is_discarded() || !parsed.is_array()) return false;
  for (const auto& item : parsed) {
    if (!item.is_object()) continue;
    auto it = item.find("WikidataId");
    if (it != item.end() && it->is_string()) {
      out->push_back(it->get<std::string>());
    }
  }
  return true;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::map<std::string, NewsRecord> parse_news_tsv(const std::string& path,
                                                 ParseLog* log) {
  ParseLog local;
  if (!log) log = &local;
  std::ifstream in = open_or_throw(path);
  std::map<std::string, NewsRecord> out;
  std::string line;
  int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cols = split(line, '\t');
    if (cols.size() < 8) {
      log->warn("news line " + std::to_string(lineno) + ": expected 8 columns, got " +
                std::to_string(cols.size()));
      continue;
    }
    NewsRecord rec;
    rec.id = cols[0];
    if (rec.id.empty()) {
      log->warn("news line " + std::to_string(lineno) + ": empty id");
      continue;
    }
    rec.category = cols[1];
    rec.subcategory = cols[2];
    rec.title_words = tokenize(cols[3]);
    rec.abstract_words = tokenize(cols[4]);
    std::vector<std::string> raw_entities;
    if (!extract_entities(cols[6], &raw_entities) ||
        !extract_entities(cols[7], &raw_entities)) {
      log->warn("news line " + std::to_string(lineno) + ": bad entity annotation");
      continue;
    }
    std::set<std::string> seen;
    for (auto& e : raw_entities) {
      if (seen.insert(e).second) rec.entity_ids.push_back(std::move(e));
    }
    out[rec.id] = std::move(rec);
  }
  return out;
}

std::vector<Impression> parse_behaviors_tsv(const std::string& path,
                                            ParseLog* log) {
  ParseLog local;
  if (!log) log = &local;
  std::ifstream in = open_or_throw(path);
  std::vector<Impression> out;
  std::string line;
  int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cols = split(line, '\t');
    if (cols.size() < 5) {
      log->warn("behaviors line " + std::to_string(lineno) +
                ": expected 5 columns, got " + std::to_string(cols.size()));
      continue;
    }
    Impression imp;
    imp.id = cols[0];
    imp.user_id = cols[1];
    imp.history = split_ws(cols[3]);
    bool ok = true;
    for (const auto& tok : split_ws(cols[4])) {
      const size_t dash = tok.rfind('-');
      if (dash == std::string::npos || dash + 2 != tok.size() ||
          (tok[dash + 1] != '0' && tok[dash + 1] != '1')) {
        log->warn("behaviors line " + std::to_string(lineno) +
                  ": candidate without -0/-1 suffix: " + tok);
        ok = false;
        break;
      }
      imp.candidates.push_back(
          Candidate{tok.substr(0, dash), static_cast<int8_t>(tok[dash + 1] - '0')});
    }
    if (!ok) continue;
    out.push_back(std::move(imp));
  }
  return out;
}

std::map<std::string, Tensor> parse_entity_vec(const std::string& path, int dim,
                                               ParseLog* log) {
  ParseLog local;
  if (!log) log = &local;
  std::ifstream in = open_or_throw(path);
  std::map<std::string, Tensor> out;
  std::string line;
  int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cols = split(line, '\t');
    // MIND emits a trailing tab; tolerate trailing empty fields.
    while (!cols.empty() && cols.back().empty()) cols.pop_back();
    if (static_cast<int>(cols.size()) != dim + 1) {
      log->warn("entity vec line " + std::to_string(lineno) + ": expected " +
                std::to_string(dim + 1) + " columns, got " +
                std::to_string(cols.size()));
      continue;
    }
    std::vector<double> vals(static_cast<size_t>(dim));
    bool ok = true;
    for (int i = 0; i < dim; ++i) {
      try {
        size_t used = 0;
        vals[static_cast<size_t>(i)] = std::stod(cols[static_cast<size_t>(i + 1)], &used);
        if (used != cols[static_cast<size_t>(i + 1)].size()) ok = false;
      } catch (const std::exception&) {
        ok = false;
      }
      if (!ok) break;
    }
    if (!ok) {
      log->warn("entity vec line " + std::to_string(lineno) + ": bad number");
      continue;
    }
    if (out.count(cols[0])) {
      log->warn("entity vec line " + std::to_string(lineno) + ": duplicate id " +
                cols[0] + ", last wins");
    }
    out[cols[0]] = Tensor::vec(std::move(vals));
  }
  return out;
}

std::vector<Triple> parse_triples_tsv(const std::string& path, ParseLog* log) {
  ParseLog local;
  if (!log) log = &local;
  std::ifstream in = open_or_throw(path);
  std::vector<Triple> out;
  std::string line;
  int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cols = split(line, '\t');
    if (cols.size() < 3 || cols[0].empty() || cols[2].empty()) {
      log->warn("triples line " + std::to_string(lineno) + ": malformed");
      continue;
    }
    out.push_back(Triple{cols[0], cols[1], cols[2]});
  }
  return out;
}

}  // namespace newsrec
