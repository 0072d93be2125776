#include "bloomemb/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "bloomemb/error.hpp"

namespace bloomemb {

std::string_view to_string(Measure measure) noexcept {
  switch (measure) {
    case Measure::kMap: return "MAP";
    case Measure::kRr: return "RR";
    case Measure::kAcc: return "Acc";
  }
  return "?";
}

Measure parse_measure(std::string_view text) {
  if (text == "MAP" || text == "map") return Measure::kMap;
  if (text == "RR" || text == "rr") return Measure::kRr;
  if (text == "Acc" || text == "acc") return Measure::kAcc;
  throw ConfigError("unknown measure '" + std::string(text) + "'");
}

double average_precision(std::span<const ItemId> ranked, std::span<const ItemId> relevant) {
  if (relevant.empty()) throw ConfigError("average_precision: empty relevant set");
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ranked.size() && hits < relevant.size(); ++i) {
    if (std::binary_search(relevant.begin(), relevant.end(), ranked[i])) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(relevant.size());
}

double reciprocal_rank(std::span<const ItemId> ranked, ItemId correct) noexcept {
  const auto it = std::find(ranked.begin(), ranked.end(), correct);
  if (it == ranked.end()) return 0.0;
  return 1.0 / static_cast<double>(it - ranked.begin() + 1);
}

double accuracy(std::span<const std::int64_t> predicted, std::span<const std::int64_t> truth) {
  if (predicted.size() != truth.size()) throw ConfigError("accuracy: length mismatch");
  if (truth.empty()) throw ConfigError("accuracy: empty input");
  std::size_t matches = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) matches += predicted[i] == truth[i];
  return 100.0 * static_cast<double>(matches) / static_cast<double>(truth.size());
}

RatioReport ratio_report(const EvaluationResult& run, const EvaluationResult& baseline, std::size_t m,
                         std::size_t d) {
  if (run.measure != baseline.measure) throw ConfigError("ratio_report: measure mismatch");
  if (!(baseline.score > 0.0)) throw ConfigError("ratio_report: baseline score must be positive");
  if (!(baseline.wall_time > 0.0)) throw ConfigError("ratio_report: baseline time must be positive");
  if (d == 0) throw ConfigError("ratio_report: d must be positive");
  return {run.score / baseline.score, static_cast<double>(m) / static_cast<double>(d),
          run.wall_time / baseline.wall_time};
}

MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ConfigError("mann_whitney_u: empty sample");
  struct Entry {
    double value;
    bool first;
  };
  std::vector<Entry> all;
  all.reserve(a.size() + b.size());
  for (const double v : a) all.push_back({v, true});
  for (const double v : b) all.push_back({v, false});
  std::sort(all.begin(), all.end(), [](const Entry& x, const Entry& y) { return x.value < y.value; });

  const double n1 = static_cast<double>(a.size());
  const double n2 = static_cast<double>(b.size());
  const double n = n1 + n2;
  double rank_sum_a = 0.0;
  double tie_term = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].value == all[i].value) ++j;
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    for (std::size_t q = i; q < j; ++q) {
      if (all[q].first) rank_sum_a += midrank;
    }
    i = j;
  }

  MannWhitneyResult result;
  result.u = rank_sum_a - n1 * (n1 + 1.0) / 2.0;
  const double mean = n1 * n2 / 2.0;
  const double variance = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (variance <= 0.0) {
    result.z = 0.0;
    result.p_value = 1.0;
    return result;
  }
  // Continuity correction towards the mean.
  const double diff = result.u - mean;
  const double corrected = diff == 0.0 ? 0.0 : diff - std::copysign(0.5, diff);
  result.z = corrected / std::sqrt(variance);
  result.p_value = std::min(1.0, std::erfc(std::fabs(result.z) / std::sqrt(2.0)));
  return result;
}

}  // namespace bloomemb
