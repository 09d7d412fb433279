#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <doctest.h>

#include "newsrec/dataset.hpp"
#include "newsrec/error.hpp"

using namespace newsrec;
namespace fs = std::filesystem;

namespace {

NewsRecord make_news(const std::string& id,
                     std::vector<std::string> title,
                     std::vector<std::string> abstract = {},
                     std::vector<std::string> entities = {}) {
  NewsRecord r;
  r.id = id;
  r.category = "cat";
  r.subcategory = "sub";
  r.title_words = std::move(title);
  r.abstract_words = std::move(abstract);
  r.entity_ids = std::move(entities);
  return r;
}

Impression make_imp(const std::string& id, const std::string& user,
                    std::vector<std::string> history,
                    std::vector<Candidate> cands) {
  Impression imp;
  imp.id = id;
  imp.user_id = user;
  imp.history = std::move(history);
  imp.candidates = std::move(cands);
  return imp;
}

ClickDataset tiny_dataset() {
  ClickDataset ds;
  ds.news["N1"] = make_news("N1", {"alpha", "beta"}, {"beta", "gamma"}, {"Q1"});
  ds.news["N2"] = make_news("N2", {"alpha", "delta"});
  ds.news["N3"] = make_news("N3", {"rare"});
  ds.train.push_back(make_imp("I1", "U1", {"N1"},
                              {{"N2", 1}, {"N3", 0}, {"N1", 0}}));
  ds.eval.push_back(make_imp("I2", "U1", {"N2"}, {{"N1", 1}, {"N3", 0}}));
  ds.finalize();
  return ds;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("vocabulary keeps words with frequency >= 2, sorted ids") {
  ClickDataset ds = tiny_dataset();
  // alpha appears in N1+N2, beta twice in N1: both in vocab. rare: once.
  CHECK(ds.vocab.id_of("alpha") != Vocabulary::kUnknown);
  CHECK(ds.vocab.id_of("beta") != Vocabulary::kUnknown);
  CHECK(ds.vocab.id_of("rare") == Vocabulary::kUnknown);
  CHECK(ds.vocab.id_of("unseen") == Vocabulary::kUnknown);
  // sorted assignment: alpha < beta
  CHECK(ds.vocab.id_of("alpha") < ds.vocab.id_of("beta"));
  // token ids assigned to records
  CHECK(ds.news.at("N1").title_tokens.size() == 2);
  CHECK(ds.news.at("N3").title_tokens[0] == Vocabulary::kUnknown);
}

TEST_CASE("finalize rejects impression ids shared across splits") {
  ClickDataset ds = tiny_dataset();
  ds.eval.push_back(make_imp("I1", "U9", {}, {{"N1", 1}, {"N2", 0}}));
  CHECK_THROWS_AS(ds.finalize(), ValidationError);
}

TEST_CASE("stats count coverage and unresolved references") {
  ClickDataset ds = tiny_dataset();
  ds.train.push_back(make_imp("I3", "U2", {"NX"}, {{"NY", 1}, {"N1", 0}}));
  DatasetStats st = ds.stats();
  CHECK(st.news_count == 3);
  CHECK(st.news_with_entities == 1);
  CHECK(st.entity_coverage == doctest::Approx(1.0 / 3.0));
  CHECK(st.unresolved_history_refs == 1);
  CHECK(st.unresolved_candidate_refs == 1);
}

TEST_CASE("snapshot round trip is structurally equal and byte stable") {
  ClickDataset ds = tiny_dataset();
  const auto p1 = (fs::temp_directory_path() / "snap1.snap").string();
  const auto p2 = (fs::temp_directory_path() / "snap2.snap").string();
  write_snapshot(ds, p1);
  ClickDataset back = read_snapshot(p1);
  CHECK(back.news.size() == ds.news.size());
  CHECK(back.train.size() == ds.train.size());
  CHECK(back.eval.size() == ds.eval.size());
  CHECK(back.news.at("N1").title_words == ds.news.at("N1").title_words);
  CHECK(back.news.at("N1").entity_ids == ds.news.at("N1").entity_ids);
  CHECK(back.train[0].candidates[0].news_id == "N2");
  CHECK(back.train[0].candidates[0].label == 1);
  CHECK(back.vocab.id_of("alpha") == ds.vocab.id_of("alpha"));

  write_snapshot(back, p2);
  CHECK(slurp(p1) == slurp(p2));
}

TEST_CASE("snapshot loader rejects corrupt input") {
  const auto p = (fs::temp_directory_path() / "snap_bad.snap").string();
  {
    std::ofstream out(p, std::ios::binary);
    out << "newsrec-snapshot 1\nnews 2\nonly\tone\n";
  }
  CHECK_THROWS_AS(read_snapshot(p), FormatError);
  {
    std::ofstream out(p, std::ios::binary);
    out << "other-format 1\n";
  }
  CHECK_THROWS_AS(read_snapshot(p), FormatError);
}

TEST_CASE("build_samples uses the forced negative set when pool == k") {
  ClickDataset ds;
  ds.news["N1"] = make_news("N1", {"w"});
  for (int i = 2; i <= 6; ++i) {
    ds.news["N" + std::to_string(i)] = make_news("N" + std::to_string(i), {"w"});
  }
  ds.train.push_back(make_imp(
      "I1", "U1", {},
      {{"N1", 1}, {"N2", 0}, {"N3", 0}, {"N4", 0}, {"N5", 0}}));
  ds.finalize();
  auto samples = build_samples(ds, 4, 9);
  REQUIRE(samples.size() == 1);
  std::set<std::string> negs(samples[0].negatives.begin(),
                             samples[0].negatives.end());
  CHECK(negs == std::set<std::string>{"N2", "N3", "N4", "N5"});
}

TEST_CASE("build_samples emits one sample per positive") {
  ClickDataset ds;
  for (int i = 1; i <= 4; ++i) {
    ds.news["N" + std::to_string(i)] = make_news("N" + std::to_string(i), {"w"});
  }
  ds.train.push_back(make_imp("I1", "U1", {},
                              {{"N1", 1}, {"N2", 1}, {"N3", 0}, {"N4", 0}}));
  ds.finalize();
  auto samples = build_samples(ds, 3, 1);
  CHECK(samples.size() == 2);  // two positives; negatives drawn with replacement
  for (const auto& s : samples) CHECK(s.negatives.size() == 3);
}

TEST_CASE("build_samples never emits the positive as a negative") {
  ClickDataset ds;
  for (int i = 1; i <= 8; ++i) {
    ds.news["N" + std::to_string(i)] = make_news("N" + std::to_string(i), {"w"});
  }
  for (int imp = 0; imp < 30; ++imp) {
    std::vector<Candidate> cands;
    for (int i = 1; i <= 8; ++i) {
      cands.push_back({"N" + std::to_string(i), static_cast<int8_t>(i % 3 == 0)});
    }
    // Same id appearing with both labels must never leak in as a negative.
    cands.push_back({"N3", 0});
    ds.train.push_back(make_imp("I" + std::to_string(imp), "U1", {}, cands));
  }
  ds.finalize();
  auto samples = build_samples(ds, 5, 123);
  CHECK(!samples.empty());
  for (const auto& s : samples) {
    for (const auto& n : s.negatives) CHECK(n != s.positive);
  }
}

TEST_CASE("build_samples skips impressions whose positives lack negatives") {
  ClickDataset ds;
  ds.news["N1"] = make_news("N1", {"w"});
  ds.news["N2"] = make_news("N2", {"w"});
  ds.train.push_back(make_imp("I1", "U1", {}, {{"N1", 1}, {"N2", 1}}));
  ds.finalize();
  int64_t skipped = 0;
  auto samples = build_samples(ds, 2, 5, &skipped);
  CHECK(samples.empty());
  CHECK(skipped == 1);
}

TEST_CASE("build_samples replays identically for a fixed seed") {
  ClickDataset ds;
  for (int i = 1; i <= 12; ++i) {
    ds.news["N" + std::to_string(i)] = make_news("N" + std::to_string(i), {"w"});
  }
  for (int imp = 0; imp < 10; ++imp) {
    std::vector<Candidate> cands;
    for (int i = 1; i <= 12; ++i) {
      cands.push_back({"N" + std::to_string(i), static_cast<int8_t>(i <= 2)});
    }
    ds.train.push_back(make_imp("I" + std::to_string(imp), "U1", {}, cands));
  }
  ds.finalize();
  auto a = build_samples(ds, 4, 77);
  auto b = build_samples(ds, 4, 77);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].positive == b[i].positive);
    CHECK(a[i].negatives == b[i].negatives);
  }
  auto c = build_samples(ds, 4, 78);
  bool any_difference = false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].negatives != c[i].negatives) any_difference = true;
  }
  CHECK(any_difference);
}
