#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "bloomemb/hashing.hpp"

namespace bloomemb {

enum class Measure { kMap, kRr, kAcc };

std::string_view to_string(Measure measure) noexcept;
Measure parse_measure(std::string_view text);

struct EvaluationResult {
  double score = 0.0;  // MAP and RR in [0, 1], Acc in [0, 100]
  Measure measure = Measure::kMap;
  std::size_t n_evaluated = 0;
  double wall_time = 0.0;  // seconds
};

struct RatioReport {
  double score_ratio = 0.0;  // S_i / S_0
  double dim_ratio = 0.0;    // m / d
  double time_ratio = 0.0;   // T_i / T_0
};

/// Average precision of a ranked list. `relevant` must be sorted and
/// non-empty; relevant items missing from `ranked` contribute zero.
double average_precision(std::span<const ItemId> ranked, std::span<const ItemId> relevant);

/// 1/rank of `correct`, 0 when it does not appear.
double reciprocal_rank(std::span<const ItemId> ranked, ItemId correct) noexcept;

/// Percentage of positions where the labels agree.
double accuracy(std::span<const std::int64_t> predicted, std::span<const std::int64_t> truth);

RatioReport ratio_report(const EvaluationResult& run, const EvaluationResult& baseline, std::size_t m,
                         std::size_t d);

struct MannWhitneyResult {
  double u = 0.0;        // U statistic of the first sample
  double z = 0.0;        // normal approximation with tie correction
  double p_value = 1.0;  // two-sided
};

/// Two-sided Mann-Whitney U test between repeated-run score samples.
MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b);

inline constexpr double kSignificanceLevel = 0.05;

}  // namespace bloomemb
