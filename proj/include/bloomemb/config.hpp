#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "bloomemb/data.hpp"
#include "bloomemb/metrics.hpp"
#include "bloomemb/network.hpp"
#include "bloomemb/trainer.hpp"

namespace bloomemb {

enum class DecodeMode { kLikelihood, kNll };

std::string_view to_string(DecodeMode mode) noexcept;
DecodeMode parse_decode_mode(std::string_view text);

/// Everything needed to reproduce an experiment. Serialises to `key=value`
/// lines; `#` starts a comment. Unknown keys are rejected.
struct ExperimentConfig {
  std::string data;  // profile file; empty selects the synthetic generator
  SyntheticSpec synthetic;
  LoadOptions load;

  std::size_t m_in = 0;  // 0: no input embedding
  std::size_t m_out = 0; // 0: no output embedding
  std::size_t k = 4;
  std::uint64_t seed = 1;

  std::vector<std::size_t> hidden = {150};
  OptimizerSpec optimizer;
  TrainOptions train;

  bool use_cbe = false;
  DecodeMode decode = DecodeMode::kLikelihood;
  std::size_t top_n = 10;  // rows written by score dumps
  std::size_t cutoff = 0;  // ranking depth for metrics, 0 = full depth
  Measure measure = Measure::kMap;

  std::vector<double> sweep_m_ratios = {0.1, 0.2, 0.4, 0.8};
  std::vector<std::size_t> sweep_k = {4};
  std::size_t repeats = 1;
  std::size_t parallel = 1;

  bool uses_synthetic() const noexcept { return data.empty(); }

  /// Applies one `key=value` assignment. Throws ConfigError on an unknown key
  /// or unparsable value.
  void set(std::string_view key, std::string_view value);
  void validate() const;

  std::string to_text() const;
  static ExperimentConfig from_text(std::string_view text);
  static ExperimentConfig from_file(const std::filesystem::path& source);
  void save(const std::filesystem::path& destination) const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&);
};

/// Derived seeds, so input and output hash matrices stay independent.
struct SeedSet {
  std::uint64_t hash_in;
  std::uint64_t hash_out;
  std::uint64_t init;
  std::uint64_t shuffle;
  std::uint64_t cbe;
};

SeedSet derive_seeds(std::uint64_t seed, std::size_t repeat) noexcept;

}  // namespace bloomemb
