#include "bloomemb/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

#include "bloomemb/codec.hpp"
#include "bloomemb/error.hpp"
#include "bloomemb/rng.hpp"

namespace bloomemb {

namespace {

double mean(std::span<const double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0.0;
  for (const double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double stddev(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double mu = mean(values);
  double sum = 0.0;
  for (const double v : values) sum += (v - mu) * (v - mu);
  return std::sqrt(sum / static_cast<double>(values.size() - 1));
}

std::size_t embedding_dim(double ratio, std::size_t d, std::size_t k) {
  const auto m = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(d)));
  return std::clamp<std::size_t>(m, k, d);
}

std::vector<SparseInstance> train_side(const ProfileDataset& dataset, bool input) {
  return input ? input_instances(dataset.train) : output_instances(dataset.train);
}

HashMatrix apply_cbe(const HashMatrix& base, const std::vector<SparseInstance>& instances, std::uint64_t seed,
                     std::size_t* pairs_used) {
  const auto table = count_cooccurrences(instances);
  const auto pairs = threshold_and_order(table);
  auto result = rebuild_hash_matrix(base, pairs, seed);
  if (pairs_used) *pairs_used = result.applied;
  return std::move(result.matrix);
}

}  // namespace

ItemScores predict_scores(const Network<float>& net, const SparseInstance& input, const Embedding& embedding,
                          DecodeMode decode) {
  const auto active = embedding.in ? encode_active(input, *embedding.in)
                                   : std::vector<BitIndex>(input.positions().begin(), input.positions().end());
  const auto out = net.forward_sparse(active);
  std::vector<double> probs(out.begin(), out.end());
  if (!embedding.out) {
    if (decode == DecodeMode::kLikelihood) return {std::move(probs), ScoreOrder::kDescendingLikelihood};
    for (auto& p : probs) p = -std::log(std::max(p, kDefaultNllEpsilon));
    return {std::move(probs), ScoreOrder::kAscendingNll};
  }
  // Single-precision softmax can drift a few ulps above 1.
  for (auto& p : probs) p = std::min(p, 1.0);
  return decode == DecodeMode::kLikelihood ? decode_likelihood(probs, *embedding.out)
                                           : decode_nll(probs, *embedding.out);
}

EvaluationResult evaluate(const Network<float>& net, std::span<const Profile> test, const Embedding& embedding,
                          DecodeMode decode, std::size_t cutoff, Measure measure) {
  if (test.empty()) throw ConfigError("evaluate: empty test set");
  const auto start = std::chrono::steady_clock::now();
  double total = 0.0;
  for (const auto& profile : test) {
    const auto scores = predict_scores(net, profile.input, embedding, decode);
    const std::size_t d = scores.scores.size();
    const std::size_t depth = measure == Measure::kAcc ? 1 : (cutoff == 0 ? d : std::min(cutoff, d));
    const auto ranked = rank(scores, depth);
    const auto relevant = profile.output.positions();
    switch (measure) {
      case Measure::kMap:
        total += average_precision(ranked, relevant);
        break;
      case Measure::kRr: {
        double best = 0.0;
        for (const ItemId item : relevant) best = std::max(best, reciprocal_rank(ranked, item));
        total += best;
        break;
      }
      case Measure::kAcc:
        total += profile.output.contains(ranked.front()) ? 100.0 : 0.0;
        break;
    }
  }
  const auto stop = std::chrono::steady_clock::now();
  return {total / static_cast<double>(test.size()), measure, test.size(),
          std::chrono::duration<double>(stop - start).count()};
}

ProfileDataset load_dataset(const ExperimentConfig& config) {
  if (config.uses_synthetic()) return generate_synthetic(config.synthetic);
  return load_profiles(config.data, config.load);
}

Embedding make_embedding(const ExperimentConfig& config, const ProfileDataset& dataset, const CellSpec& cell,
                         std::size_t* cbe_pairs_in, std::size_t* cbe_pairs_out) {
  const auto seeds = derive_seeds(config.seed, cell.repeat);
  Embedding embedding;
  if (cell.m_in != 0) {
    auto base = build_hash_matrix(dataset.d, cell.m_in, cell.k, seeds.hash_in);
    embedding.in = cell.use_cbe ? apply_cbe(base, train_side(dataset, true), seeds.cbe, cbe_pairs_in) : std::move(base);
  }
  if (cell.m_out != 0) {
    auto base = build_hash_matrix(dataset.d, cell.m_out, cell.k, seeds.hash_out);
    embedding.out =
        cell.use_cbe ? apply_cbe(base, train_side(dataset, false), splitmix64(seeds.cbe), cbe_pairs_out) : std::move(base);
  }
  return embedding;
}

CellResult run_cell(const ExperimentConfig& config, const ProfileDataset& dataset, const CellSpec& cell,
                    Network<float>* trained) {
  CellResult result;
  result.spec = cell;
  const auto seeds = derive_seeds(config.seed, cell.repeat);
  const auto embedding = make_embedding(config, dataset, cell, &result.cbe_pairs_in, &result.cbe_pairs_out);

  NetworkSpec spec;
  spec.layer_sizes.push_back(embedding.in ? embedding.in->m() : dataset.d);
  spec.layer_sizes.insert(spec.layer_sizes.end(), config.hidden.begin(), config.hidden.end());
  spec.layer_sizes.push_back(embedding.out ? embedding.out->m() : dataset.d);
  spec.init_seed = seeds.init;
  Network<float> net(spec);

  TrainOptions options = config.train;
  options.shuffle_seed = seeds.shuffle;
  std::vector<SparseExample> examples;
  examples.reserve(dataset.train.size());
  for (const auto& p : dataset.train) {
    SparseExample ex;
    ex.input = embedding.in ? encode_active(p.input, *embedding.in)
                            : std::vector<BitIndex>(p.input.positions().begin(), p.input.positions().end());
    ex.target = embedding.out ? encode_active(p.output, *embedding.out)
                              : std::vector<BitIndex>(p.output.positions().begin(), p.output.positions().end());
    examples.push_back(std::move(ex));
  }
  try {
    Optimizer<float> optimizer(config.optimizer, net);
    result.train = train_encoded(net, std::span<const SparseExample>(examples), optimizer, options);
    if (!dataset.test.empty()) {
      result.eval = evaluate(net, dataset.test, embedding, config.decode, config.cutoff, config.measure);
    }
  } catch (const NumericError&) {
    result.diverged = true;
    result.eval = {std::numeric_limits<double>::quiet_NaN(), config.measure, 0, 0.0};
  }
  if (trained) *trained = std::move(net);
  return result;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& config, const ProfileDataset& dataset) {
  config.validate();
  std::vector<CellSpec> cells;
  for (std::size_t r = 0; r < config.repeats; ++r) cells.push_back({0, 0, 1, false, r});
  std::vector<std::size_t> ks = config.sweep_k;
  std::vector<double> ratios = config.sweep_m_ratios;
  std::sort(ks.begin(), ks.end());
  std::sort(ratios.begin(), ratios.end());
  for (const auto k : ks) {
    for (const double ratio : ratios) {
      const std::size_t m = embedding_dim(ratio, dataset.d, k);
      for (std::size_t r = 0; r < config.repeats; ++r) cells.push_back({m, m, k, config.use_cbe, r});
    }
  }

  std::vector<CellResult> results(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) results[i] = run_cell(config, dataset, cells[i]);
  };
  const std::size_t threads = std::min(config.parallel, cells.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  const std::size_t repeats = config.repeats;
  std::vector<SweepRow> rows;
  for (std::size_t start = 0; start < results.size(); start += repeats) {
    SweepRow row;
    const auto& first = results[start].spec;
    row.k = first.m_out == 0 ? 0 : first.k;
    row.m = first.m_out == 0 ? dataset.d : first.m_out;
    row.m_ratio = static_cast<double>(row.m) / static_cast<double>(dataset.d);
    row.measure = config.measure;
    std::vector<double> ratios_r, train_r, eval_r, baseline_r;
    for (std::size_t r = 0; r < repeats; ++r) {
      const auto& cell = results[start + r];
      const auto& base = results[r];
      row.repeat_scores.push_back(cell.eval.score);
      baseline_r.push_back(base.eval.score);
      ratios_r.push_back(cell.eval.score / base.eval.score);
      train_r.push_back(cell.train.mean_epoch_seconds() / base.train.mean_epoch_seconds());
      eval_r.push_back(cell.eval.wall_time / base.eval.wall_time);
    }
    row.score = mean(row.repeat_scores);
    row.baseline_score = mean(baseline_r);
    row.score_ratio = mean(ratios_r);
    row.score_ratio_std = stddev(ratios_r);
    row.train_time_ratio = mean(train_r);
    row.eval_time_ratio = mean(eval_r);
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return a.k != b.k ? a.k < b.k : a.m_ratio < b.m_ratio;
  });
  return rows;
}

void write_sweep_report(std::ostream& out, std::span<const SweepRow> rows) {
  out << "measure\tS_i\tS_0\tS_i/S_0\tm/d\tk\tT_train_ratio\tT_eval_ratio\n";
  for (const auto& row : rows) {
    out << to_string(row.measure) << '\t' << row.score << '\t' << row.baseline_score << '\t' << row.score_ratio
        << '\t' << row.m_ratio << '\t' << row.k << '\t' << row.train_time_ratio << '\t' << row.eval_time_ratio
        << '\n';
  }
}

void write_plot_data(std::ostream& out, std::span<const SweepRow> rows) {
  out << "k\tm\tm_over_d\tscore_ratio_mean\tscore_ratio_std\ttrain_time_ratio\teval_time_ratio\trepeats\n";
  for (const auto& row : rows) {
    out << row.k << '\t' << row.m << '\t' << row.m_ratio << '\t' << row.score_ratio << '\t' << row.score_ratio_std
        << '\t' << row.train_time_ratio << '\t' << row.eval_time_ratio << '\t' << row.repeat_scores.size() << '\n';
  }
}

void write_cooccurrence_report(std::ostream& out, const CooccurrenceStats& input, const CooccurrenceStats& output) {
  out << "side\tpercent_cooccurring_pairs\tmean_ratio_rho\n";
  out << "input\t" << input.percent_cooccurring_pairs << '\t' << input.mean_ratio_rho << '\n';
  out << "output\t" << output.percent_cooccurring_pairs << '\t' << output.mean_ratio_rho << '\n';
}

}  // namespace bloomemb
