#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "bloomemb/cbe.hpp"
#include "bloomemb/config.hpp"
#include "bloomemb/data.hpp"
#include "bloomemb/hashing.hpp"
#include "bloomemb/metrics.hpp"
#include "bloomemb/network.hpp"
#include "bloomemb/trainer.hpp"

namespace bloomemb {

/// Input/output hash matrices for one run. A missing side means that side is
/// not embedded.
struct Embedding {
  std::optional<HashMatrix> in;
  std::optional<HashMatrix> out;
};

/// Scores every test profile: forward pass, decode the output (if embedded),
/// rank, and compute the configured measure. MAP uses the output items as the
/// relevant set; RR uses the best-ranked output item; Acc counts a hit when the
/// top-ranked item belongs to the output. `wall_time` covers the whole loop.
EvaluationResult evaluate(const Network<float>& net, std::span<const Profile> test, const Embedding& embedding,
                          DecodeMode decode, std::size_t cutoff, Measure measure);

/// Item scores for one input instance, decoded if the output is embedded.
ItemScores predict_scores(const Network<float>& net, const SparseInstance& input, const Embedding& embedding,
                          DecodeMode decode);

struct CellSpec {
  std::size_t m_in = 0;  // 0 = no embedding on that side
  std::size_t m_out = 0;
  std::size_t k = 1;
  bool use_cbe = false;
  std::size_t repeat = 0;
};

struct CellResult {
  CellSpec spec;
  EvaluationResult eval;
  TrainReport train;
  bool diverged = false;
  std::size_t cbe_pairs_in = 0;
  std::size_t cbe_pairs_out = 0;
};

ProfileDataset load_dataset(const ExperimentConfig& config);

/// Builds (and optionally CBE-rebuilds) the hash matrices for a cell from the
/// repeat's derived seeds.
Embedding make_embedding(const ExperimentConfig& config, const ProfileDataset& dataset, const CellSpec& cell,
                         std::size_t* cbe_pairs_in = nullptr, std::size_t* cbe_pairs_out = nullptr);

/// Trains a fresh network for the cell and evaluates it on the test split
/// (skipped when the split is empty).
/// Divergence is reported through `diverged` with a NaN score.
CellResult run_cell(const ExperimentConfig& config, const ProfileDataset& dataset, const CellSpec& cell,
                    Network<float>* trained = nullptr);

struct SweepRow {
  std::size_t k = 0;  // 0 marks the no-embedding baseline row
  double m_ratio = 1.0;
  std::size_t m = 0;
  Measure measure = Measure::kMap;
  double score = 0.0;           // mean S_i over repeats
  double baseline_score = 0.0;  // mean S_0 over repeats
  double score_ratio = 0.0;     // mean over repeats of S_i / S_0
  double score_ratio_std = 0.0;
  double train_time_ratio = 0.0;
  double eval_time_ratio = 0.0;
  std::vector<double> repeat_scores;
};

/// Baseline plus every (k, m/d) cell, `config.repeats` times each. Rows come
/// back sorted by (k, m/d) with the baseline (k = 0) first.
std::vector<SweepRow> run_sweep(const ExperimentConfig& config, const ProfileDataset& dataset);

/// Columns: measure, S_i, S_0, S_i/S_0, m/d, k, T_train ratio, T_eval ratio.
void write_sweep_report(std::ostream& out, std::span<const SweepRow> rows);
/// Per-cell means and spreads for plotting.
void write_plot_data(std::ostream& out, std::span<const SweepRow> rows);

/// Co-occurrence statistics report for the input and output sides.
void write_cooccurrence_report(std::ostream& out, const CooccurrenceStats& input, const CooccurrenceStats& output);

}  // namespace bloomemb
