#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace bloomemb {

// Items are numbered 0..d-1 and embedding bits 0..m-1 inside the library.
// Every file format and the CLI use 1-based numbering; conversion happens in
// the readers and writers only.
using ItemId = std::uint32_t;
using BitIndex = std::uint32_t;

/// Pre-computed d x k table of projections. Row i holds the k distinct
/// embedding bits item i is mapped to. Immutable once built.
class HashMatrix {
 public:
  /// Validating constructor. `table` is row-major d*k, 0-based bit indices.
  /// Throws DataError if an index is out of range or a row repeats an index.
  static HashMatrix from_table(std::size_t d, std::size_t m, std::size_t k, std::uint64_t seed,
                               std::vector<BitIndex> table);

  std::size_t d() const noexcept { return d_; }
  std::size_t m() const noexcept { return m_; }
  std::size_t k() const noexcept { return k_; }
  std::uint64_t seed() const noexcept { return seed_; }

  std::span<const BitIndex> row(ItemId item) const noexcept {
    return {table_.data() + static_cast<std::size_t>(item) * k_, k_};
  }
  BitIndex at(ItemId item, std::size_t j) const noexcept { return table_[item * k_ + j]; }
  std::span<const BitIndex> table() const noexcept { return table_; }

  friend bool operator==(const HashMatrix&, const HashMatrix&) = default;

 private:
  HashMatrix(std::size_t d, std::size_t m, std::size_t k, std::uint64_t seed,
             std::vector<BitIndex> table)
      : d_(d), m_(m), k_(k), seed_(seed), table_(std::move(table)) {}

  std::size_t d_;
  std::size_t m_;
  std::size_t k_;
  std::uint64_t seed_;
  std::vector<BitIndex> table_;
};

/// Draws every row as k distinct bits chosen uniformly from {0..m-1} with a
/// partial Fisher-Yates shuffle driven by `Rng(seed)`.
///
/// Throws ConfigError unless d >= 1, m >= 1 and 1 <= k <= m.
HashMatrix build_hash_matrix(std::size_t d, std::size_t m, std::size_t k, std::uint64_t seed);

/// Row i maps to bit i. Used for no-embedding baselines run through the codec.
HashMatrix identity_hash_matrix(std::size_t d);

enum class HashMode { kPrecomputed, kDoubleHashing };

/// A projection family: either a lookup into a HashMatrix or enhanced double
/// hashing evaluated on demand.
///
/// Double hashing (0-based j in 0..k-1):
///
///   a   = splitmix64(seed ^ splitmix64(item))
///   h1  = a mod m
///   h2  = (splitmix64(a) | 1) mod m
///   H_j = (h1 + j*h2 + (j^3 - j)/6) mod m
///
/// h2 is forced odd before reduction. That makes it coprime with m only when m
/// is a power of two; for other m the cubic term keeps successive probes from
/// cycling, but two projections of the same item may coincide. Unlike the
/// matrix mode, rows are therefore not guaranteed to be distinct.
class HashFamily {
 public:
  static HashFamily precomputed(HashMatrix matrix);
  static HashFamily double_hashing(std::size_t d, std::size_t m, std::size_t k, std::uint64_t seed);

  HashMode mode() const noexcept { return mode_; }
  std::size_t d() const noexcept { return d_; }
  std::size_t m() const noexcept { return m_; }
  std::size_t k() const noexcept { return k_; }
  std::uint64_t seed() const noexcept { return seed_; }

  /// Bit for projection j of `item`. Throws ConfigError on out-of-range input.
  BitIndex project(ItemId item, std::size_t j) const;

  /// Unchecked variant for inner loops.
  BitIndex project_unchecked(ItemId item, std::size_t j) const noexcept;

  const HashMatrix* matrix() const noexcept { return matrix_ ? &*matrix_ : nullptr; }

 private:
  HashMode mode_ = HashMode::kPrecomputed;
  std::size_t d_ = 0;
  std::size_t m_ = 0;
  std::size_t k_ = 0;
  std::uint64_t seed_ = 0;
  std::optional<HashMatrix> matrix_;
};

// Text format: header line `d m k seed`, then d lines of k space-separated
// 1-based indices.
//
// Binary format, little-endian throughout:
//   bytes  0..3   magic "BEHM"
//   bytes  4..5   format version (1)
//   bytes  6..7   k
//   bytes  8..11  d
//   bytes 12..15  m
//   bytes 16..23  seed
//   then d*k uint32 1-based indices, row-major.
enum class MatrixFormat { kText, kBinary };

void write_hash_matrix(std::ostream& out, const HashMatrix& matrix, MatrixFormat format);
HashMatrix read_hash_matrix(std::istream& in);  // detects the format from the magic

/// Writes to a temporary sibling and renames, so readers never see a partial file.
void save_hash_matrix(const HashMatrix& matrix, const std::filesystem::path& destination,
                      MatrixFormat format = MatrixFormat::kText);
HashMatrix load_hash_matrix(const std::filesystem::path& source);

}  // namespace bloomemb
