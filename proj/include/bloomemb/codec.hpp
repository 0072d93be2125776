#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bloomemb/hashing.hpp"

namespace bloomemb {

/// A sparse binary vector of dimensionality d, stored as its sorted set of
/// active positions.
class SparseInstance {
 public:
  SparseInstance() = default;
  /// Sorts and de-duplicates `positions`. Throws DataError if any is >= d.
  SparseInstance(std::size_t d, std::vector<ItemId> positions);

  std::size_t d() const noexcept { return d_; }
  std::size_t size() const noexcept { return positions_.size(); }
  bool empty() const noexcept { return positions_.empty(); }
  std::span<const ItemId> positions() const noexcept { return positions_; }
  bool contains(ItemId item) const noexcept;

  friend bool operator==(const SparseInstance&, const SparseInstance&) = default;

 private:
  std::size_t d_ = 0;
  std::vector<ItemId> positions_;
};

/// m-bit binary embedding.
class BloomVector {
 public:
  BloomVector() = default;
  explicit BloomVector(std::size_t m) : m_(m), words_((m + 63) / 64, 0) {}

  std::size_t m() const noexcept { return m_; }
  bool test(BitIndex bit) const noexcept { return (words_[bit >> 6] >> (bit & 63)) & 1ULL; }
  void set(BitIndex bit) noexcept { words_[bit >> 6] |= 1ULL << (bit & 63); }
  std::size_t popcount() const noexcept;
  /// Sorted indices of the set bits.
  std::vector<BitIndex> active() const;

  BloomVector& operator|=(const BloomVector& other);
  friend BloomVector operator|(BloomVector lhs, const BloomVector& rhs) { return lhs |= rhs; }
  friend bool operator==(const BloomVector&, const BloomVector&) = default;

 private:
  std::size_t m_ = 0;
  std::vector<std::uint64_t> words_;
};

enum class ScoreOrder { kDescendingLikelihood, kAscendingNll };

struct ItemScores {
  std::vector<double> scores;  // one per item, 0-based
  ScoreOrder order = ScoreOrder::kDescendingLikelihood;
};

inline constexpr double kDefaultNllEpsilon = 1e-12;

/// Sets bit H_j(p) for every active position p and projection j. O(c*k).
/// Throws ConfigError when instance.d() != hash d.
BloomVector encode(const SparseInstance& instance, const HashMatrix& hash);
BloomVector encode(const SparseInstance& instance, const HashFamily& hash);

/// Same as encode() but returns the sorted active bits directly, which is what
/// the trainer consumes.
std::vector<BitIndex> encode_active(const SparseInstance& instance, const HashMatrix& hash);

/// Likelihood of each item: product of the probabilities at its k projected
/// bits. An item with any zero-probability bit scores exactly 0.
///
/// `probs` must have length m with every entry finite and in [0, 1]; it need
/// not sum to one, so a BloomVector read as 0/1 reals is valid input.
ItemScores decode_likelihood(std::span<const double> probs, const HashMatrix& hash);
ItemScores decode_likelihood(std::span<const double> probs, const HashFamily& hash);

/// Negative log-likelihood: -sum_j log(max(p, epsilon)). Lower is better.
ItemScores decode_nll(std::span<const double> probs, const HashMatrix& hash,
                      double epsilon = kDefaultNllEpsilon);
ItemScores decode_nll(std::span<const double> probs, const HashFamily& hash,
                      double epsilon = kDefaultNllEpsilon);

/// Best `top_n` items under `scores.order`; ties go to the lower item index.
std::vector<ItemId> rank(const ItemScores& scores, std::size_t top_n);

/// Likelihood scores rescaled to sum to one. Throws DataError if all are zero.
std::vector<double> renormalize(const ItemScores& scores);

/// BloomVector as 0/1 reals, for feeding a binary embedding to the decoders.
std::vector<double> to_probabilities(const BloomVector& bits);

}  // namespace bloomemb
