#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <doctest.h>

#include "newsrec/error.hpp"
#include "newsrec/metrics.hpp"
#include "newsrec/rng.hpp"

using namespace newsrec;

namespace {

// Independent O(n^2) references used as oracles.
double ref_auc(const std::vector<int8_t>& labels,
               const std::vector<double>& scores) {
  double wins = 0.0;
  int64_t pairs = 0;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (!labels[i]) continue;
    for (size_t j = 0; j < labels.size(); ++j) {
      if (labels[j]) continue;
      ++pairs;
      if (scores[i] > scores[j]) {
        wins += 1.0;
      } else if (scores[i] == scores[j]) {
        wins += 0.5;
      }
    }
  }
  return wins / static_cast<double>(pairs);
}

std::vector<size_t> ref_order(const std::vector<double>& scores) {
  std::vector<size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](size_t a, size_t b) { return scores[a] > scores[b]; });
  return idx;
}

double ref_mrr(const std::vector<int8_t>& labels,
               const std::vector<double>& scores) {
  auto idx = ref_order(scores);
  double sum = 0.0;
  int64_t pos = 0;
  for (size_t r = 0; r < idx.size(); ++r) {
    if (labels[idx[r]]) {
      sum += 1.0 / static_cast<double>(r + 1);
      ++pos;
    }
  }
  return sum / static_cast<double>(pos);
}

double ref_ndcg(const std::vector<int8_t>& labels,
                const std::vector<double>& scores, int k) {
  auto idx = ref_order(scores);
  double dcg = 0.0;
  for (size_t r = 0; r < idx.size() && r < static_cast<size_t>(k); ++r) {
    if (labels[idx[r]]) dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  }
  int64_t pos = 0;
  for (int8_t l : labels) pos += l;
  double ideal = 0.0;
  for (int64_t r = 0; r < std::min<int64_t>(pos, k); ++r) {
    ideal += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  }
  return dcg / ideal;
}

}  // namespace

TEST_CASE("auc worked examples") {
  std::vector<int8_t> l{1, 0, 0};
  CHECK(metric_auc(l, std::vector<double>{0.9, 0.2, 0.4}) == doctest::Approx(1.0));
  CHECK(metric_auc(l, std::vector<double>{0.3, 0.7, 0.1}) == doctest::Approx(0.5));
  std::vector<int8_t> l2{1, 0};
  CHECK(metric_auc(l2, std::vector<double>{0.5, 0.5}) == doctest::Approx(0.5));
  std::vector<int8_t> all_pos{1, 1};
  CHECK_THROWS_AS(metric_auc(all_pos, std::vector<double>{0.1, 0.2}), DomainError);
}

TEST_CASE("mrr worked examples") {
  std::vector<int8_t> l{1, 0, 0};
  CHECK(metric_mrr(l, std::vector<double>{0.9, 0.2, 0.4}) == doctest::Approx(1.0));
  CHECK(metric_mrr(l, std::vector<double>{0.1, 0.7, 0.4}) ==
        doctest::Approx(1.0 / 3.0));
  std::vector<int8_t> two{1, 0, 0, 1, 0};
  std::vector<double> s{5.0, 4.0, 3.0, 2.0, 1.0};
  CHECK(metric_mrr(two, s) == doctest::Approx(0.625));
  std::vector<int8_t> none{0, 0};
  CHECK_THROWS_AS(metric_mrr(none, std::vector<double>{0.1, 0.2}), DomainError);
}

TEST_CASE("ndcg worked examples") {
  std::vector<int8_t> first{1, 0, 0};
  CHECK(metric_ndcg(first, std::vector<double>{3, 2, 1}, 5) == doctest::Approx(1.0));

  std::vector<int8_t> second{0, 1, 0};
  CHECK(metric_ndcg(second, std::vector<double>{3, 2, 1}, 5) ==
        doctest::Approx(1.0 / std::log2(3.0)));

  std::vector<int8_t> sixth{0, 0, 0, 0, 0, 1, 0};
  CHECK(metric_ndcg(sixth, std::vector<double>{7, 6, 5, 4, 3, 2, 1}, 5) ==
        doctest::Approx(0.0));
}

TEST_CASE("metrics match the brute-force oracles on random impressions") {
  Rng rng(451);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_int(29));
    std::vector<int8_t> labels(static_cast<size_t>(n));
    std::vector<double> scores(static_cast<size_t>(n));
    int pos = 0;
    for (int i = 0; i < n; ++i) {
      labels[static_cast<size_t>(i)] = rng.uniform() < 0.3 ? 1 : 0;
      pos += labels[static_cast<size_t>(i)];
      // Quantized scores so ties actually occur.
      scores[static_cast<size_t>(i)] =
          std::floor(rng.uniform(-2, 2) * 8.0) / 8.0;
    }
    if (pos == 0 || pos == n) continue;
    CHECK(std::abs(metric_auc(labels, scores) - ref_auc(labels, scores)) <= 1e-9);
    CHECK(std::abs(metric_mrr(labels, scores) - ref_mrr(labels, scores)) <= 1e-9);
    CHECK(std::abs(metric_ndcg(labels, scores, 5) - ref_ndcg(labels, scores, 5)) <=
          1e-9);
    CHECK(std::abs(metric_ndcg(labels, scores, 10) -
                   ref_ndcg(labels, scores, 10)) <= 1e-9);
  }
}

TEST_CASE("metrics are invariant under strictly increasing transforms") {
  Rng rng(452);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 3 + static_cast<int>(rng.uniform_int(10));
    std::vector<int8_t> labels(static_cast<size_t>(n));
    std::vector<double> scores(static_cast<size_t>(n));
    int pos = 0;
    for (int i = 0; i < n; ++i) {
      labels[static_cast<size_t>(i)] = rng.uniform() < 0.4 ? 1 : 0;
      pos += labels[static_cast<size_t>(i)];
      scores[static_cast<size_t>(i)] = rng.uniform(-3, 3);
    }
    if (pos == 0 || pos == n) continue;
    std::vector<double> warped(scores.size());
    for (size_t i = 0; i < scores.size(); ++i) {
      warped[i] = std::exp(2.0 * scores[i] + 1.0);
    }
    CHECK(metric_auc(labels, scores) == doctest::Approx(metric_auc(labels, warped)));
    CHECK(metric_mrr(labels, scores) == doctest::Approx(metric_mrr(labels, warped)));
    CHECK(metric_ndcg(labels, scores, 5) ==
          doctest::Approx(metric_ndcg(labels, warped, 5)));
  }
}

TEST_CASE("auc of reversed scores complements and permutations are neutral") {
  Rng rng(453);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 4 + static_cast<int>(rng.uniform_int(10));
    std::vector<int8_t> labels(static_cast<size_t>(n));
    std::vector<double> scores(static_cast<size_t>(n));
    int pos = 0;
    for (int i = 0; i < n; ++i) {
      labels[static_cast<size_t>(i)] = i % 2 == 0 ? 1 : 0;
      pos += labels[static_cast<size_t>(i)];
      scores[static_cast<size_t>(i)] = rng.uniform(-1, 1) + i * 1e-6;  // distinct
    }
    std::vector<double> reversed(scores.size());
    for (size_t i = 0; i < scores.size(); ++i) reversed[i] = -scores[i];
    CHECK(metric_auc(labels, scores) ==
          doctest::Approx(1.0 - metric_auc(labels, reversed)));

    // Permute candidates; with distinct scores all metrics are unchanged.
    std::vector<size_t> perm(scores.size());
    std::iota(perm.begin(), perm.end(), size_t{0});
    rng.shuffle(perm);
    std::vector<int8_t> pl(labels.size());
    std::vector<double> ps(scores.size());
    for (size_t i = 0; i < perm.size(); ++i) {
      pl[i] = labels[perm[i]];
      ps[i] = scores[perm[i]];
    }
    CHECK(metric_auc(labels, scores) == doctest::Approx(metric_auc(pl, ps)));
    CHECK(metric_mrr(labels, scores) == doctest::Approx(metric_mrr(pl, ps)));
    CHECK(metric_ndcg(labels, scores, 5) == doctest::Approx(metric_ndcg(pl, ps, 5)));
    CHECK(metric_ndcg(labels, scores, 10) ==
          doctest::Approx(metric_ndcg(pl, ps, 10)));
  }
}

TEST_CASE("oracle scores give perfect metrics") {
  std::vector<int8_t> labels{0, 1, 0, 1, 0};
  std::vector<double> scores{0.0, 1.0, 0.0, 1.0, 0.0};
  CHECK(metric_auc(labels, scores) == doctest::Approx(1.0));
  CHECK(metric_mrr(labels, scores) == doctest::Approx((1.0 + 0.5) / 2.0));
  CHECK(metric_ndcg(labels, scores, 5) == doctest::Approx(1.0));
  CHECK(metric_ndcg(labels, scores, 10) == doctest::Approx(1.0));
}

TEST_CASE("random scores on balanced impressions give auc near half") {
  Rng rng(454);
  double sum = 0.0;
  const int trials = 2000;
  for (int trial = 0; trial < trials; ++trial) {
    const int n = 10;
    std::vector<int8_t> labels(n);
    std::vector<double> scores(n);
    for (int i = 0; i < n; ++i) {
      labels[static_cast<size_t>(i)] = i < n / 2 ? 1 : 0;
      scores[static_cast<size_t>(i)] = rng.uniform();
    }
    sum += metric_auc(labels, scores);
  }
  CHECK(std::abs(sum / trials - 0.5) <= 0.05);
}
