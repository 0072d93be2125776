#include "bloomemb/cbe.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <unordered_map>

#include "bloomemb/error.hpp"
#include "bloomemb/rng.hpp"

namespace bloomemb {

namespace {
std::uint64_t pair_key(ItemId row, ItemId col) noexcept {
  return (static_cast<std::uint64_t>(row) << 32) | col;
}
}  // namespace

std::uint64_t CooccurrenceTable::total_nonzeros() const noexcept {
  return std::accumulate(diag.begin(), diag.end(), std::uint64_t{0});
}

std::uint64_t CooccurrenceTable::count(ItemId a, ItemId b) const noexcept {
  if (a == b) return a < diag.size() ? diag[a] : 0;
  const ItemId row = std::max(a, b);
  const ItemId col = std::min(a, b);
  // rows/cols are sorted lexicographically by (row, col).
  std::size_t lo = 0, hi = rows.size();
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (rows[mid] < row || (rows[mid] == row && cols[mid] < col)) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return (lo < rows.size() && rows[lo] == row && cols[lo] == col) ? values[lo] : 0;
}

CooccurrenceTable count_cooccurrences(std::span<const SparseInstance> instances) {
  if (instances.empty()) throw DataError("count_cooccurrences: no instances");
  CooccurrenceTable table;
  table.d = instances.front().d();
  table.n = instances.size();
  table.diag.assign(table.d, 0);
  std::unordered_map<std::uint64_t, std::uint64_t> counts;
  for (const auto& instance : instances) {
    if (instance.d() != table.d) throw DataError("count_cooccurrences: instances have mixed dimensionality");
    const auto p = instance.positions();
    for (std::size_t a = 0; a < p.size(); ++a) {
      ++table.diag[p[a]];
      // positions are sorted, so p[a] > p[b] for b < a.
      for (std::size_t b = 0; b < a; ++b) ++counts[pair_key(p[a], p[b])];
    }
  }
  std::vector<std::pair<std::uint64_t, std::uint64_t>> entries(counts.begin(), counts.end());
  std::sort(entries.begin(), entries.end());
  table.values.reserve(entries.size());
  table.rows.reserve(entries.size());
  table.cols.reserve(entries.size());
  for (const auto& [key, value] : entries) {
    table.rows.push_back(static_cast<ItemId>(key >> 32));
    table.cols.push_back(static_cast<ItemId>(key & 0xFFFFFFFFULL));
    table.values.push_back(value);
  }
  return table;
}

double average_item_frequency(const CooccurrenceTable& table) {
  if (table.d == 0) return 0.0;
  return static_cast<double>(table.total_nonzeros()) / static_cast<double>(table.d);
}

std::vector<ItemPair> threshold_and_order(const CooccurrenceTable& table) {
  const double threshold = average_item_frequency(table);
  std::vector<ItemPair> pairs;
  for (std::size_t i = 0; i < table.values.size(); ++i) {
    if (static_cast<double>(table.values[i]) > threshold) {
      pairs.push_back({table.rows[i], table.cols[i], table.values[i]});
    }
  }
  // Coordinates are already (row, col) sorted; a stable sort keeps that as the tie order.
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const ItemPair& a, const ItemPair& b) { return a.count < b.count; });
  return pairs;
}

CbeResult rebuild_hash_matrix(const HashMatrix& hash, std::span<const ItemPair> pairs, std::uint64_t seed) {
  const std::size_t m = hash.m();
  const std::size_t k = hash.k();
  std::vector<BitIndex> table(hash.table().begin(), hash.table().end());
  Rng rng(seed);
  CbeResult result{hash, 0, {}};
  std::vector<BitIndex> taken;
  taken.reserve(2 * k);

  for (const ItemPair& pair : pairs) {
    if (pair.row >= hash.d() || pair.col >= hash.d() || pair.row == pair.col) {
      throw ConfigError("rebuild_hash_matrix: invalid pair (" + std::to_string(pair.row + 1) + ", " +
                        std::to_string(pair.col + 1) + ")");
    }
    BitIndex* row_a = table.data() + static_cast<std::size_t>(pair.row) * k;
    BitIndex* row_b = table.data() + static_cast<std::size_t>(pair.col) * k;
    taken.assign(row_a, row_a + k);
    taken.insert(taken.end(), row_b, row_b + k);
    std::sort(taken.begin(), taken.end());
    taken.erase(std::unique(taken.begin(), taken.end()), taken.end());
    if (taken.size() >= m) {
      result.skipped.push_back(pair);
      continue;
    }
    // The t-th bit (0-based) of {0..m-1} that is not in `taken`.
    auto t = static_cast<BitIndex>(rng.uniform(m - taken.size()));
    BitIndex r = t;
    for (const BitIndex used : taken) {
      if (used <= r) {
        ++r;
      } else {
        break;
      }
    }
    const auto slot_a = static_cast<std::size_t>(rng.uniform(k));
    const auto slot_b = static_cast<std::size_t>(rng.uniform(k));
    row_a[slot_a] = r;
    row_b[slot_b] = r;
    ++result.applied;
  }
  result.matrix = HashMatrix::from_table(hash.d(), m, k, hash.seed(), std::move(table));
  return result;
}

CooccurrenceStats cooccurrence_stats(const CooccurrenceTable& table, std::size_t n) {
  if (table.d < 2) throw ConfigError("cooccurrence_stats: need d >= 2");
  if (n < 1) throw ConfigError("cooccurrence_stats: need n >= 1");
  CooccurrenceStats stats;
  std::size_t nonzero = 0;
  double ratio_sum = 0.0;
  for (const auto value : table.values) {
    if (value == 0) continue;
    ++nonzero;
    ratio_sum += static_cast<double>(value) / static_cast<double>(n);
  }
  const double all_pairs = static_cast<double>(table.d) * static_cast<double>(table.d - 1) / 2.0;
  stats.percent_cooccurring_pairs = 100.0 * static_cast<double>(nonzero) / all_pairs;
  stats.mean_ratio_rho = nonzero ? ratio_sum / static_cast<double>(nonzero) : 0.0;
  return stats;
}

}  // namespace bloomemb
