#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bloomemb/codec.hpp"
#include "bloomemb/hashing.hpp"

namespace bloomemb {

/// Pairwise co-occurrence counts C = X^T X of a set of instances, kept sparse.
/// Off-diagonal counts live in coordinate form over the strict lower triangle
/// (row > col), sorted by (row, col).
struct CooccurrenceTable {
  std::size_t d = 0;
  std::size_t n = 0;                  // instances counted
  std::vector<std::uint64_t> diag;    // per-item frequency
  std::vector<std::uint64_t> values;  // c_val
  std::vector<ItemId> rows;           // c_row
  std::vector<ItemId> cols;           // c_col

  std::uint64_t total_nonzeros() const noexcept;
  /// C[a][b] for any a, b (symmetric).
  std::uint64_t count(ItemId a, ItemId b) const noexcept;
};

struct ItemPair {
  ItemId row = 0;  // row > col
  ItemId col = 0;
  std::uint64_t count = 0;
  friend bool operator==(const ItemPair&, const ItemPair&) = default;
};

struct CooccurrenceStats {
  double percent_cooccurring_pairs = 0.0;
  double mean_ratio_rho = 0.0;
};

struct CbeResult {
  HashMatrix matrix;
  std::size_t applied = 0;
  std::vector<ItemPair> skipped;  // pairs whose rows already cover all m bits
};

/// Throws DataError when the instances disagree on d or the list is empty.
CooccurrenceTable count_cooccurrences(std::span<const SparseInstance> instances);

/// Mean item frequency: total non-zeros of X divided by d.
double average_item_frequency(const CooccurrenceTable& table);

/// Pairs whose count is strictly above the mean item frequency, ordered by
/// ascending count and then (row, col). The last pair is the strongest.
std::vector<ItemPair> threshold_and_order(const CooccurrenceTable& table);

/// Co-occurrence based rebuild of `hash`: for each pair in order draw a bit r
/// outside both rows, overwrite one random slot of each row with r. Later
/// (higher-count) pairs win when they touch the same slot.
CbeResult rebuild_hash_matrix(const HashMatrix& hash, std::span<const ItemPair> pairs, std::uint64_t seed);

/// Percent of the d(d-1)/2 pairs that co-occur at least once, and the mean
/// count/n over those pairs. Throws ConfigError when d < 2 or n < 1.
CooccurrenceStats cooccurrence_stats(const CooccurrenceTable& table, std::size_t n);

}  // namespace bloomemb
