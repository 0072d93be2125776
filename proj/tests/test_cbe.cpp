#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "bloomemb/cbe.hpp"
#include "bloomemb/error.hpp"
#include "bloomemb/hashing.hpp"
#include "test_support.hpp"

using namespace bloomemb;

namespace {

std::vector<SparseInstance> instances(std::size_t d, const std::vector<std::vector<ItemId>>& rows) {
  std::vector<SparseInstance> out;
  for (const auto& r : rows) out.emplace_back(d, r);
  return out;
}

bool rows_share_bit(const HashMatrix& h, ItemId a, ItemId b) {
  for (auto x : h.row(a)) {
    for (auto y : h.row(b)) {
      if (x == y) return true;
    }
  }
  return false;
}

}  // namespace

TEST(Cooccurrence, HandCount) {
  // {1,2},{1,2},{1,3} in 1-based ids.
  const auto t = count_cooccurrences(instances(3, {{0, 1}, {0, 1}, {0, 2}}));
  EXPECT_EQ(t.count(1, 0), 2u);
  EXPECT_EQ(t.count(0, 1), 2u);
  EXPECT_EQ(t.count(2, 0), 1u);
  EXPECT_EQ(t.count(2, 1), 0u);
  EXPECT_EQ(t.diag, (std::vector<std::uint64_t>{3, 2, 1}));
  EXPECT_EQ(t.n, 3u);
  ASSERT_EQ(t.rows.size(), t.cols.size());
  ASSERT_EQ(t.rows.size(), t.values.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) EXPECT_GT(t.rows[i], t.cols[i]);
}

TEST(Cooccurrence, SingletonsHaveNoPairs) {
  const auto t = count_cooccurrences(instances(5, {{0}, {3}, {4}, {0}}));
  EXPECT_TRUE(t.values.empty());
  EXPECT_EQ(t.total_nonzeros(), 4u);
}

TEST(Cooccurrence, MatchesDenseProductOracle) {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 50, d = 20;
    std::vector<std::vector<int>> x(n, std::vector<int>(d, 0));
    std::vector<SparseInstance> xs;
    for (std::size_t r = 0; r < n; ++r) {
      std::vector<ItemId> items;
      for (std::size_t c = 0; c < d; ++c) {
        if (rng.uniform(4) == 0) {
          x[r][c] = 1;
          items.push_back(static_cast<ItemId>(c));
        }
      }
      xs.emplace_back(d, items);
    }
    const auto t = count_cooccurrences(xs);
    std::size_t nonzero_pairs = 0;
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = 0; b < d; ++b) {
        std::uint64_t dot = 0;
        for (std::size_t r = 0; r < n; ++r) dot += x[r][a] * x[r][b];
        ASSERT_EQ(t.count(static_cast<ItemId>(a), static_cast<ItemId>(b)), dot);
        if (a > b && dot > 0) ++nonzero_pairs;
      }
    }
    EXPECT_EQ(t.values.size(), nonzero_pairs);
  }
}

TEST(Cooccurrence, RejectsMixedDimensions) {
  std::vector<SparseInstance> xs{SparseInstance(4, {0, 1}), SparseInstance(5, {0, 1})};
  EXPECT_THROW(count_cooccurrences(xs), DataError);
}

TEST(Threshold, HandExample) {
  // {1,2} x3, {3}: avgfreq = 7/3, only (2,1) with count 3 survives.
  const auto t = count_cooccurrences(instances(3, {{0, 1}, {0, 1}, {0, 1}, {2}}));
  EXPECT_NEAR(average_item_frequency(t), 7.0 / 3.0, 1e-15);
  const auto pairs = threshold_and_order(t);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0], (ItemPair{1, 0, 3}));
}

TEST(Threshold, AllBelowGivesEmpty) {
  const auto t = count_cooccurrences(instances(4, {{0, 1}, {2, 3}}));
  EXPECT_TRUE(threshold_and_order(t).empty());
}

TEST(Threshold, SortedAscendingWithRowColTieBreak) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<SparseInstance> xs;
    for (int r = 0; r < 200; ++r) xs.push_back(testing_support::random_instance(rng, 15, 1 + rng.uniform(8)));
    const auto t = count_cooccurrences(xs);
    const auto pairs = threshold_and_order(t);
    const double avg = average_item_frequency(t);
    std::vector<ItemPair> oracle;
    for (ItemId a = 0; a < 15; ++a) {
      for (ItemId b = 0; b < a; ++b) {
        const auto c = t.count(a, b);
        if (static_cast<double>(c) > avg) oracle.push_back({a, b, c});
      }
    }
    std::sort(oracle.begin(), oracle.end(), [](const ItemPair& x, const ItemPair& y) {
      if (x.count != y.count) return x.count < y.count;
      if (x.row != y.row) return x.row < y.row;
      return x.col < y.col;
    });
    ASSERT_EQ(pairs, oracle);
  }
}

TEST(Rebuild, EmptyPairListIsIdentity) {
  const auto h = build_hash_matrix(50, 20, 3, 2);
  const auto r = rebuild_hash_matrix(h, {}, 9);
  EXPECT_EQ(r.matrix, h);
  EXPECT_EQ(r.applied, 0u);
}

TEST(Rebuild, HandExampleRowsIntersect) {
  const auto t = count_cooccurrences(instances(3, {{0, 1}, {0, 1}, {0, 1}, {2}}));
  const auto pairs = threshold_and_order(t);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto h = build_hash_matrix(3, 16, 2, seed);
    const auto r = rebuild_hash_matrix(h, pairs, seed + 100);
    EXPECT_TRUE(rows_share_bit(r.matrix, 0, 1));
    EXPECT_EQ(r.applied, 1u);
    EXPECT_EQ(r.matrix.row(2)[0], h.row(2)[0]);
  }
}

TEST(Rebuild, SharedBitIsFreshAndRowsStayValid) {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const auto h = build_hash_matrix(40, 12, 3, trial);
    const auto a = static_cast<ItemId>(1 + rng.uniform(39));
    const auto b = static_cast<ItemId>(rng.uniform(a));
    const std::vector<ItemPair> pairs{{a, b, 10}};
    const auto r = rebuild_hash_matrix(h, pairs, trial);
    std::set<BitIndex> before(h.row(a).begin(), h.row(a).end());
    before.insert(h.row(b).begin(), h.row(b).end());
    std::set<BitIndex> shared;
    for (auto x : r.matrix.row(a)) {
      for (auto y : r.matrix.row(b)) {
        if (x == y) shared.insert(x);
      }
    }
    bool fresh = false;
    for (auto s : shared) fresh = fresh || before.count(s) == 0;
    EXPECT_TRUE(fresh);
    // Exactly one slot changes in each row.
    std::size_t changed = 0;
    for (std::size_t j = 0; j < 3; ++j) changed += r.matrix.at(a, j) != h.at(a, j);
    EXPECT_EQ(changed, 1u);
  }
}

TEST(Rebuild, SkipsWhenNoFreeBit) {
  // m=4, k=2, rows {1,2} and {3,4} cover every bit.
  const auto h = HashMatrix::from_table(2, 4, 2, 0, {0, 1, 2, 3});
  const std::vector<ItemPair> pairs{{1, 0, 5}};
  const auto r = rebuild_hash_matrix(h, pairs, 1);
  EXPECT_EQ(r.matrix, h);
  EXPECT_EQ(r.applied, 0u);
  ASSERT_EQ(r.skipped.size(), 1u);
  EXPECT_EQ(r.skipped[0], pairs[0]);
}

TEST(Rebuild, Deterministic) {
  const auto h = build_hash_matrix(30, 10, 3, 4);
  const std::vector<ItemPair> pairs{{5, 1, 3}, {9, 2, 4}, {20, 5, 7}};
  EXPECT_EQ(rebuild_hash_matrix(h, pairs, 8).matrix, rebuild_hash_matrix(h, pairs, 8).matrix);
}

TEST(Rebuild, RejectsInvalidPairs) {
  const auto h = build_hash_matrix(5, 10, 2, 4);
  EXPECT_THROW(rebuild_hash_matrix(h, std::vector<ItemPair>{{5, 1, 3}}, 1), ConfigError);
  EXPECT_THROW(rebuild_hash_matrix(h, std::vector<ItemPair>{{2, 2, 3}}, 1), ConfigError);
}

TEST(Stats, HandExample) {
  // 3 items, one co-occurring pair with count 2, n = 4.
  const auto t = count_cooccurrences(instances(3, {{0, 1}, {0, 1}, {2}, {2}}));
  const auto s = cooccurrence_stats(t, 4);
  EXPECT_NEAR(s.percent_cooccurring_pairs, 100.0 / 3.0, 1e-12);
  EXPECT_NEAR(s.mean_ratio_rho, 0.5, 1e-15);
}

TEST(Stats, NoPairsIsZero) {
  const auto t = count_cooccurrences(instances(4, {{0}, {1}}));
  const auto s = cooccurrence_stats(t, 2);
  EXPECT_EQ(s.percent_cooccurring_pairs, 0.0);
  EXPECT_EQ(s.mean_ratio_rho, 0.0);
}

TEST(Stats, Bounds) {
  Rng rng(2);
  std::vector<SparseInstance> xs;
  for (int r = 0; r < 300; ++r) xs.push_back(testing_support::random_instance(rng, 10, 1 + rng.uniform(9)));
  const auto s = cooccurrence_stats(count_cooccurrences(xs), xs.size());
  EXPECT_LE(s.percent_cooccurring_pairs, 100.0);
  EXPECT_GE(s.mean_ratio_rho, 0.0);
  EXPECT_LE(s.mean_ratio_rho, 1.0);
  EXPECT_THROW(cooccurrence_stats(count_cooccurrences(instances(1, {{0}})), 1), ConfigError);
}
