#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bloomemb/codec.hpp"
#include "bloomemb/rng.hpp"

namespace bloomemb {

/// A user profile split into network input (earlier items) and prediction
/// target (later items).
struct Profile {
  SparseInstance input;
  SparseInstance output;
};

/// Dense 0..d-1 item ids <-> the tokens used in the source file.
class ItemIndex {
 public:
  ItemId intern(const std::string& external);
  ItemId internal(const std::string& external) const;  // throws DataError if unknown
  const std::string& external(ItemId internal) const { return external_.at(internal); }
  std::size_t size() const noexcept { return external_.size(); }
  bool contains(const std::string& external) const { return lookup_.count(external) != 0; }

  /// Text file, one line per item: `<1-based internal id>\t<external token>`.
  void save(const std::filesystem::path& destination) const;
  static ItemIndex load(const std::filesystem::path& source);

 private:
  std::vector<std::string> external_;
  std::unordered_map<std::string, ItemId> lookup_;
};

struct ProfileDataset {
  std::size_t d = 0;
  std::vector<Profile> train;
  std::vector<Profile> test;
  ItemIndex items;

  std::size_t n() const noexcept { return train.size() + test.size(); }
};

enum class ProfileFormat {
  kAuto,           // triples if every non-comment line has 2-4 fields and a repeated user column
  kTriples,        // `user item [timestamp [rating]]` per line
  kProfilePerLine  // whitespace-separated item tokens, one profile per line
};

struct LoadOptions {
  ProfileFormat format = ProfileFormat::kAuto;
  std::size_t min_item_count = 1;    // items in fewer profiles are dropped
  std::size_t min_profile_size = 2;  // profiles shorter than this after item filtering are dropped
  double min_rating = 0.0;           // triples with a rating column below this are dropped
  std::size_t test_size = 0;         // profiles held out for evaluation
  std::uint64_t seed = 1;            // split points and test selection
};

/// Raw profiles as ordered external-token sequences, before any filtering.
std::vector<std::vector<std::string>> parse_profiles(std::istream& in, ProfileFormat format,
                                                     double min_rating = 0.0);

/// Filters items then profiles, re-indexes items densely in order of first
/// appearance, splits every profile at a uniform random point and samples the
/// test set uniformly. Throws DataError on malformed input or when nothing
/// survives filtering.
ProfileDataset build_dataset(const std::vector<std::vector<std::string>>& raw, const LoadOptions& options);
ProfileDataset load_profiles(const std::filesystem::path& source, const LoadOptions& options);
ProfileDataset load_profiles(std::istream& in, const LoadOptions& options);

/// Splits an ordered sequence of distinct items at a uniformly chosen point
/// s in [1, size-1]: the first s items become the input. Throws ConfigError for
/// fewer than two items.
Profile split_profile(std::span<const ItemId> ordered_items, std::size_t d, Rng& rng);

/// Same, also reporting the split point (number of input items).
std::pair<Profile, std::size_t> split_profile_at_random(std::span<const ItemId> ordered_items, std::size_t d,
                                                        Rng& rng);

struct SyntheticSpec {
  std::size_t d = 2000;
  std::size_t n = 20000;
  std::size_t clusters = 50;  // items are partitioned into contiguous equal-size clusters
  std::size_t min_items = 4;  // profile size drawn uniformly from [min_items, max_items]
  std::size_t max_items = 12;
  double noise = 0.1;         // chance that an item is drawn from the whole catalogue
  double zipf_exponent = 1.0; // popularity skew inside a cluster
  std::size_t test_size = 2000;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Profiles drawn from latent clusters: pick a cluster, then draw distinct
/// items from it by Zipf popularity, with occasional uniform noise items.
/// Each profile uses its own forked RNG stream.
ProfileDataset generate_synthetic(const SyntheticSpec& spec);

/// Cluster of an item under `spec`.
std::size_t cluster_of(const SyntheticSpec& spec, ItemId item) noexcept;

struct DatasetStats {
  std::size_t n = 0;
  std::size_t test_size = 0;
  std::size_t d = 0;
  double median_c = 0.0;  // items per profile (input + output)
  double median_c_over_d = 0.0;
};

DatasetStats dataset_stats(const ProfileDataset& dataset);
void write_dataset_stats(std::ostream& out, const DatasetStats& stats);

/// Input and output sides of every profile, e.g. for co-occurrence counting.
std::vector<SparseInstance> input_instances(std::span<const Profile> profiles);
std::vector<SparseInstance> output_instances(std::span<const Profile> profiles);

}  // namespace bloomemb
