#include "bloomemb/codec.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "bloomemb/error.hpp"

namespace bloomemb {

namespace {

void check_probabilities(std::span<const double> probs, std::size_t m) {
  if (probs.size() != m) {
    throw ConfigError("decode: probability vector has " + std::to_string(probs.size()) +
                      " entries, hash expects m=" + std::to_string(m));
  }
  for (const double p : probs) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) throw DataError("decode: probability outside [0, 1]");
  }
}

template <typename Hash>
void check_instance(const SparseInstance& instance, const Hash& hash) {
  if (instance.d() != hash.d()) {
    throw ConfigError("encode: instance has d=" + std::to_string(instance.d()) + ", hash has d=" +
                      std::to_string(hash.d()));
  }
}

// Projections in ascending bit order, so items hashed to the same bits get
// bit-identical scores whatever the order of their row.
template <typename Project>
void sorted_row(std::vector<BitIndex>& bits, ItemId item, Project& project) {
  for (std::size_t j = 0; j < bits.size(); ++j) bits[j] = project(item, j);
  std::sort(bits.begin(), bits.end());
}

template <typename Project>
ItemScores likelihood_scores(std::span<const double> probs, std::size_t d, std::size_t k,
                             Project project) {
  ItemScores out{std::vector<double>(d), ScoreOrder::kDescendingLikelihood};
  std::vector<BitIndex> bits(k);
  for (std::size_t i = 0; i < d; ++i) {
    sorted_row(bits, static_cast<ItemId>(i), project);
    double product = 1.0;
    for (const BitIndex b : bits) product *= probs[b];
    out.scores[i] = product;
  }
  return out;
}

template <typename Project>
ItemScores nll_scores(std::span<const double> probs, std::size_t d, std::size_t k, double epsilon,
                      Project project) {
  if (!(epsilon > 0.0)) throw ConfigError("decode_nll: epsilon must be positive");
  // One log per embedding bit, then d*k lookups.
  std::vector<double> neg_log(probs.size());
  for (std::size_t r = 0; r < probs.size(); ++r) neg_log[r] = -std::log(std::max(probs[r], epsilon));
  ItemScores out{std::vector<double>(d), ScoreOrder::kAscendingNll};
  std::vector<BitIndex> bits(k);
  for (std::size_t i = 0; i < d; ++i) {
    sorted_row(bits, static_cast<ItemId>(i), project);
    double sum = 0.0;
    for (const BitIndex b : bits) sum += neg_log[b];
    out.scores[i] = sum;
  }
  return out;
}

}  // namespace

SparseInstance::SparseInstance(std::size_t d, std::vector<ItemId> positions)
    : d_(d), positions_(std::move(positions)) {
  std::sort(positions_.begin(), positions_.end());
  positions_.erase(std::unique(positions_.begin(), positions_.end()), positions_.end());
  if (!positions_.empty() && positions_.back() >= d_) {
    throw DataError("instance: position " + std::to_string(positions_.back() + 1) + " outside [1, " +
                    std::to_string(d_) + "]");
  }
}

bool SparseInstance::contains(ItemId item) const noexcept {
  return std::binary_search(positions_.begin(), positions_.end(), item);
}

std::size_t BloomVector::popcount() const noexcept {
  std::size_t total = 0;
  for (const auto word : words_) total += static_cast<std::size_t>(std::popcount(word));
  return total;
}

std::vector<BitIndex> BloomVector::active() const {
  std::vector<BitIndex> bits;
  for (std::size_t w = 0; w < words_.size(); ++w) {
    std::uint64_t word = words_[w];
    while (word) {
      bits.push_back(static_cast<BitIndex>(w * 64 + static_cast<std::size_t>(std::countr_zero(word))));
      word &= word - 1;
    }
  }
  return bits;
}

BloomVector& BloomVector::operator|=(const BloomVector& other) {
  if (other.m_ != m_) throw ConfigError("BloomVector: OR of different dimensionalities");
  for (std::size_t w = 0; w < words_.size(); ++w) words_[w] |= other.words_[w];
  return *this;
}

BloomVector encode(const SparseInstance& instance, const HashMatrix& hash) {
  check_instance(instance, hash);
  BloomVector out(hash.m());
  for (const ItemId p : instance.positions()) {
    for (const BitIndex bit : hash.row(p)) out.set(bit);
  }
  return out;
}

BloomVector encode(const SparseInstance& instance, const HashFamily& hash) {
  check_instance(instance, hash);
  BloomVector out(hash.m());
  for (const ItemId p : instance.positions()) {
    for (std::size_t j = 0; j < hash.k(); ++j) out.set(hash.project_unchecked(p, j));
  }
  return out;
}

std::vector<BitIndex> encode_active(const SparseInstance& instance, const HashMatrix& hash) {
  check_instance(instance, hash);
  std::vector<BitIndex> bits;
  bits.reserve(instance.size() * hash.k());
  for (const ItemId p : instance.positions()) {
    const auto row = hash.row(p);
    bits.insert(bits.end(), row.begin(), row.end());
  }
  std::sort(bits.begin(), bits.end());
  bits.erase(std::unique(bits.begin(), bits.end()), bits.end());
  return bits;
}

ItemScores decode_likelihood(std::span<const double> probs, const HashMatrix& hash) {
  check_probabilities(probs, hash.m());
  return likelihood_scores(probs, hash.d(), hash.k(),
                           [&](ItemId i, std::size_t j) { return hash.at(i, j); });
}

ItemScores decode_likelihood(std::span<const double> probs, const HashFamily& hash) {
  check_probabilities(probs, hash.m());
  return likelihood_scores(probs, hash.d(), hash.k(),
                           [&](ItemId i, std::size_t j) { return hash.project_unchecked(i, j); });
}

ItemScores decode_nll(std::span<const double> probs, const HashMatrix& hash, double epsilon) {
  check_probabilities(probs, hash.m());
  return nll_scores(probs, hash.d(), hash.k(), epsilon,
                    [&](ItemId i, std::size_t j) { return hash.at(i, j); });
}

ItemScores decode_nll(std::span<const double> probs, const HashFamily& hash, double epsilon) {
  check_probabilities(probs, hash.m());
  return nll_scores(probs, hash.d(), hash.k(), epsilon,
                    [&](ItemId i, std::size_t j) { return hash.project_unchecked(i, j); });
}

std::vector<ItemId> rank(const ItemScores& scores, std::size_t top_n) {
  const std::size_t d = scores.scores.size();
  if (top_n < 1 || top_n > d) {
    throw ConfigError("rank: top_n=" + std::to_string(top_n) + " outside [1, " + std::to_string(d) + "]");
  }
  std::vector<ItemId> order(d);
  std::iota(order.begin(), order.end(), ItemId{0});
  const auto& s = scores.scores;
  auto better = [&](ItemId a, ItemId b) {
    if (s[a] != s[b]) {
      return scores.order == ScoreOrder::kDescendingLikelihood ? s[a] > s[b] : s[a] < s[b];
    }
    return a < b;
  };
  const auto middle = order.begin() + static_cast<std::ptrdiff_t>(top_n);
  if (top_n == d) {
    std::sort(order.begin(), order.end(), better);
  } else {
    std::partial_sort(order.begin(), middle, order.end(), better);
    order.erase(middle, order.end());
  }
  return order;
}

std::vector<double> renormalize(const ItemScores& scores) {
  if (scores.order != ScoreOrder::kDescendingLikelihood) {
    throw ConfigError("renormalize: requires likelihood scores");
  }
  double total = 0.0;
  for (const double s : scores.scores) {
    if (!std::isfinite(s) || s < 0.0) throw DataError("renormalize: scores must be finite and non-negative");
    total += s;
  }
  if (total <= 0.0) throw DataError("renormalize: all scores are zero");
  std::vector<double> out(scores.scores.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = scores.scores[i] / total;
  return out;
}

std::vector<double> to_probabilities(const BloomVector& bits) {
  std::vector<double> out(bits.m(), 0.0);
  for (const BitIndex bit : bits.active()) out[bit] = 1.0;
  return out;
}

}  // namespace bloomemb
