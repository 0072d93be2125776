#include "bloomemb/data.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "bloomemb/error.hpp"
#include "bloomemb/io.hpp"

namespace bloomemb {

namespace {

bool is_blank_or_comment(const std::string& line) {
  const auto first = line.find_first_not_of(" \t\r");
  return first == std::string::npos || line[first] == '#';
}

std::vector<std::string> split_fields(const std::string& line) {
  std::istringstream fields(line);
  std::vector<std::string> out;
  std::string token;
  while (fields >> token) out.push_back(token);
  return out;
}

double parse_number(const std::string& token, std::size_t line_no, const char* what) {
  try {
    std::size_t used = 0;
    const double value = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return value;
  } catch (const std::exception&) {
    throw DataError("line " + std::to_string(line_no) + ": malformed " + what + " '" + token + "'");
  }
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace

ItemId ItemIndex::intern(const std::string& external) {
  const auto [it, inserted] = lookup_.try_emplace(external, static_cast<ItemId>(external_.size()));
  if (inserted) external_.push_back(external);
  return it->second;
}

ItemId ItemIndex::internal(const std::string& external) const {
  const auto it = lookup_.find(external);
  if (it == lookup_.end()) throw DataError("unknown item '" + external + "'");
  return it->second;
}

void ItemIndex::save(const std::filesystem::path& destination) const {
  write_atomically(destination, [&](std::ostream& out) {
    for (std::size_t i = 0; i < external_.size(); ++i) out << i + 1 << '\t' << external_[i] << '\n';
  });
}

ItemIndex ItemIndex::load(const std::filesystem::path& source) {
  auto in = open_input(source);
  ItemIndex index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank_or_comment(line)) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 2) throw DataError("item map line " + std::to_string(line_no) + ": expected 2 fields");
    const auto id = static_cast<std::size_t>(parse_number(fields[0], line_no, "item id"));
    if (id != index.size() + 1) throw DataError("item map line " + std::to_string(line_no) + ": ids must be 1..d in order");
    if (index.contains(fields[1])) throw DataError("item map: duplicate token '" + fields[1] + "'");
    index.intern(fields[1]);
  }
  return index;
}

std::vector<std::vector<std::string>> parse_profiles(std::istream& in, ProfileFormat format, double min_rating) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);

  if (format == ProfileFormat::kAuto) {
    // Triples repeat the user column on consecutive lines and never exceed 4 fields.
    bool all_small = true;
    std::size_t repeats = 0;
    std::string previous_user;
    for (const auto& l : lines) {
      if (is_blank_or_comment(l)) continue;
      const auto fields = split_fields(l);
      if (fields.size() < 2 || fields.size() > 4) {
        all_small = false;
        break;
      }
      if (fields[0] == previous_user) ++repeats;
      previous_user = fields[0];
    }
    format = all_small && repeats > 0 ? ProfileFormat::kTriples : ProfileFormat::kProfilePerLine;
  }

  std::vector<std::vector<std::string>> profiles;
  if (format == ProfileFormat::kProfilePerLine) {
    for (const auto& l : lines) {
      if (is_blank_or_comment(l)) continue;
      profiles.push_back(split_fields(l));
    }
    return profiles;
  }

  struct Event {
    std::string item;
    double timestamp;
    std::size_t order;
  };
  std::unordered_map<std::string, std::size_t> user_slot;
  std::vector<std::vector<Event>> events;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (is_blank_or_comment(lines[i])) continue;
    const auto fields = split_fields(lines[i]);
    if (fields.size() < 2 || fields.size() > 4) {
      throw DataError("line " + std::to_string(i + 1) + ": expected `user item [timestamp [rating]]`");
    }
    const double timestamp = fields.size() >= 3 ? parse_number(fields[2], i + 1, "timestamp") : 0.0;
    if (fields.size() == 4 && parse_number(fields[3], i + 1, "rating") < min_rating) continue;
    const auto [it, inserted] = user_slot.try_emplace(fields[0], events.size());
    if (inserted) events.emplace_back();
    events[it->second].push_back({fields[1], timestamp, i});
  }
  for (auto& user_events : events) {
    // Without timestamps every key is 0 and file order is kept.
    std::stable_sort(user_events.begin(), user_events.end(),
                     [](const Event& a, const Event& b) { return a.timestamp < b.timestamp; });
    std::vector<std::string> profile;
    profile.reserve(user_events.size());
    for (auto& e : user_events) profile.push_back(std::move(e.item));
    profiles.push_back(std::move(profile));
  }
  return profiles;
}

namespace {

ProfileDataset build_with_index(const std::vector<std::vector<std::string>>& raw, const LoadOptions& options,
                                ItemIndex items) {
  const std::size_t min_size = std::max<std::size_t>(2, options.min_profile_size);

  // De-duplicate within each profile, keeping the first occurrence.
  std::vector<std::vector<std::string>> profiles;
  profiles.reserve(raw.size());
  for (const auto& r : raw) {
    std::unordered_set<std::string> seen;
    std::vector<std::string> unique;
    for (const auto& token : r) {
      if (seen.insert(token).second) unique.push_back(token);
    }
    profiles.push_back(std::move(unique));
  }

  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& p : profiles) {
    for (const auto& token : p) ++counts[token];
  }

  ProfileDataset dataset;
  dataset.items = std::move(items);
  std::vector<std::vector<ItemId>> kept;
  for (const auto& p : profiles) {
    std::vector<std::string> filtered;
    for (const auto& token : p) {
      if (counts[token] >= options.min_item_count) filtered.push_back(token);
    }
    if (filtered.size() < min_size) continue;
    std::vector<ItemId> ids;
    ids.reserve(filtered.size());
    for (const auto& token : filtered) ids.push_back(dataset.items.intern(token));
    kept.push_back(std::move(ids));
  }
  if (kept.empty()) throw DataError("no profiles left after filtering");
  if (options.test_size >= kept.size()) {
    throw ConfigError("test size " + std::to_string(options.test_size) + " leaves no training profiles (" +
                      std::to_string(kept.size()) + " available)");
  }
  dataset.d = dataset.items.size();

  Rng rng(options.seed);
  Rng split_rng = rng.fork(1);
  std::vector<Profile> all;
  all.reserve(kept.size());
  for (const auto& ids : kept) all.push_back(split_profile(ids, dataset.d, split_rng));

  std::vector<std::size_t> order(all.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng test_rng = rng.fork(2);
  test_rng.shuffle(std::span<std::size_t>(order));
  std::vector<bool> is_test(all.size(), false);
  for (std::size_t i = 0; i < options.test_size; ++i) is_test[order[i]] = true;
  for (std::size_t i = 0; i < all.size(); ++i) (is_test[i] ? dataset.test : dataset.train).push_back(std::move(all[i]));
  return dataset;
}

}  // namespace

ProfileDataset build_dataset(const std::vector<std::vector<std::string>>& raw, const LoadOptions& options) {
  return build_with_index(raw, options, ItemIndex{});
}

ProfileDataset load_profiles(std::istream& in, const LoadOptions& options) {
  return build_dataset(parse_profiles(in, options.format, options.min_rating), options);
}

ProfileDataset load_profiles(const std::filesystem::path& source, const LoadOptions& options) {
  auto in = open_input(source);
  return load_profiles(in, options);
}

std::pair<Profile, std::size_t> split_profile_at_random(std::span<const ItemId> ordered_items, std::size_t d,
                                                        Rng& rng) {
  if (ordered_items.size() < 2) throw ConfigError("split_profile: need at least two items");
  const std::size_t point = 1 + static_cast<std::size_t>(rng.uniform(ordered_items.size() - 1));
  std::vector<ItemId> input(ordered_items.begin(), ordered_items.begin() + static_cast<std::ptrdiff_t>(point));
  std::vector<ItemId> output(ordered_items.begin() + static_cast<std::ptrdiff_t>(point), ordered_items.end());
  Profile profile{SparseInstance(d, std::move(input)), SparseInstance(d, std::move(output))};
  if (profile.input.size() + profile.output.size() != ordered_items.size()) {
    throw DataError("split_profile: profile contains repeated items");
  }
  return {std::move(profile), point};
}

Profile split_profile(std::span<const ItemId> ordered_items, std::size_t d, Rng& rng) {
  return split_profile_at_random(ordered_items, d, rng).first;
}

void SyntheticSpec::validate() const {
  if (d < 2) throw ConfigError("synthetic: d must be >= 2");
  if (n < 2) throw ConfigError("synthetic: n must be >= 2");
  if (clusters < 1 || clusters > d) throw ConfigError("synthetic: clusters must lie in [1, d]");
  if (min_items < 2 || min_items > max_items) throw ConfigError("synthetic: need 2 <= min_items <= max_items");
  if (max_items > d) throw ConfigError("synthetic: profile size exceeds d");
  if (!(noise >= 0.0 && noise <= 1.0)) throw ConfigError("synthetic: noise must lie in [0, 1]");
  if (!(zipf_exponent >= 0.0)) throw ConfigError("synthetic: zipf exponent must be non-negative");
  if (test_size >= n) throw ConfigError("synthetic: test size must be below n");
}

std::size_t cluster_of(const SyntheticSpec& spec, ItemId item) noexcept {
  // Cluster c owns items [floor(c*d/C), floor((c+1)*d/C)).
  return ((static_cast<std::size_t>(item) + 1) * spec.clusters - 1) / spec.d;
}

ProfileDataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const std::size_t d = spec.d;
  auto cluster_begin = [&](std::size_t c) { return c * d / spec.clusters; };

  // Per-cluster cumulative Zipf weights over the cluster's items in id order.
  std::vector<std::vector<double>> cumulative(spec.clusters);
  for (std::size_t c = 0; c < spec.clusters; ++c) {
    const std::size_t size = cluster_begin(c + 1) - cluster_begin(c);
    auto& cdf = cumulative[c];
    cdf.resize(size);
    double total = 0.0;
    for (std::size_t r = 0; r < size; ++r) {
      total += 1.0 / std::pow(static_cast<double>(r + 1), spec.zipf_exponent);
      cdf[r] = total;
    }
    for (auto& v : cdf) v /= total;
  }

  Rng root(spec.seed);
  std::vector<std::vector<std::string>> raw;
  raw.reserve(spec.n);
  std::vector<ItemId> items;
  std::unordered_set<ItemId> used;
  for (std::size_t p = 0; p < spec.n; ++p) {
    Rng rng = root.fork(p);
    const std::size_t cluster = static_cast<std::size_t>(rng.uniform(spec.clusters));
    const std::size_t begin = cluster_begin(cluster);
    const std::size_t cluster_size = cumulative[cluster].size();
    const std::size_t target =
        spec.min_items + static_cast<std::size_t>(rng.uniform(spec.max_items - spec.min_items + 1));
    items.clear();
    used.clear();
    while (items.size() < target) {
      ItemId item;
      const bool in_cluster_full = used.size() >= cluster_size;
      if (rng.uniform_real() < spec.noise || in_cluster_full) {
        item = static_cast<ItemId>(rng.uniform(d));
      } else {
        const auto& cdf = cumulative[cluster];
        const double u = rng.uniform_real();
        const auto pos = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        item = static_cast<ItemId>(begin + std::min(pos, cluster_size - 1));
      }
      if (used.insert(item).second) items.push_back(item);
    }
    rng.shuffle(std::span<ItemId>(items));
    std::vector<std::string> tokens;
    tokens.reserve(items.size());
    for (const ItemId item : items) tokens.push_back(std::to_string(item + 1));
    raw.push_back(std::move(tokens));
  }

  LoadOptions options;
  options.format = ProfileFormat::kProfilePerLine;
  options.min_item_count = 1;
  options.min_profile_size = 2;
  options.test_size = spec.test_size;
  options.seed = splitmix64(spec.seed ^ 0x5eedULL);
  // Pre-intern every item so internal ids equal generation ids and d == spec.d.
  ItemIndex index;
  for (std::size_t i = 0; i < d; ++i) index.intern(std::to_string(i + 1));
  return build_with_index(raw, options, std::move(index));
}

DatasetStats dataset_stats(const ProfileDataset& dataset) {
  DatasetStats stats;
  stats.n = dataset.n();
  stats.test_size = dataset.test.size();
  stats.d = dataset.d;
  std::vector<double> sizes;
  sizes.reserve(stats.n);
  for (const auto* part : {&dataset.train, &dataset.test}) {
    for (const auto& p : *part) sizes.push_back(static_cast<double>(p.input.size() + p.output.size()));
  }
  stats.median_c = median(std::move(sizes));
  stats.median_c_over_d = dataset.d ? stats.median_c / static_cast<double>(dataset.d) : 0.0;
  return stats;
}

void write_dataset_stats(std::ostream& out, const DatasetStats& stats) {
  out << "n\tsplit\td\tmedian_c\tmedian_c_over_d\n";
  out << stats.n << '\t' << stats.test_size << '\t' << stats.d << '\t' << stats.median_c << '\t'
      << stats.median_c_over_d << '\n';
}

std::vector<SparseInstance> input_instances(std::span<const Profile> profiles) {
  std::vector<SparseInstance> out;
  out.reserve(profiles.size());
  for (const auto& p : profiles) out.push_back(p.input);
  return out;
}

std::vector<SparseInstance> output_instances(std::span<const Profile> profiles) {
  std::vector<SparseInstance> out;
  out.reserve(profiles.size());
  for (const auto& p : profiles) out.push_back(p.output);
  return out;
}

}  // namespace bloomemb
