// bloomemb: command-line driver for Bloom embeddings of sparse binary data.
//
// Exit codes: 0 success, 1 data fault, 2 configuration/usage fault.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "bloomemb/cbe.hpp"
#include "bloomemb/codec.hpp"
#include "bloomemb/config.hpp"
#include "bloomemb/error.hpp"
#include "bloomemb/experiment.hpp"
#include "bloomemb/formats.hpp"
#include "bloomemb/hashing.hpp"
#include "bloomemb/io.hpp"
#include "bloomemb/metrics.hpp"

namespace fs = std::filesystem;
using namespace bloomemb;

namespace {

constexpr int kExitData = 1;
constexpr int kExitConfig = 2;

// Flags shared by every command that resolves an ExperimentConfig.
struct ConfigFlags {
  std::string config_file;
  std::vector<std::string> assignments;
  std::optional<std::string> data;
  bool synthetic = false;
  std::optional<std::size_t> d;
  std::optional<std::size_t> m;
  std::optional<std::size_t> k;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::optional<std::string> optimizer;
  std::optional<double> lr;
  std::optional<bool> cbe;
  std::optional<std::string> decode;
  std::optional<std::size_t> top_n;
  std::optional<std::size_t> cutoff;
  std::optional<std::string> measure;

  void attach(CLI::App& app) {
    app.add_option("--config", config_file, "key=value config file")->check(CLI::ExistingFile);
    app.add_option("--set", assignments, "extra key=value assignment (repeatable)");
    app.add_option("--data", data, "profile file (triples or one profile per line)");
    app.add_flag("--synthetic", synthetic, "use the synthetic cluster generator");
    app.add_option("--d", d, "synthetic item count");
    app.add_option("--m", m, "embedding size for input and output (0 = none)");
    app.add_option("--k", k, "projections per item");
    app.add_option("--seed", seed, "master seed");
    app.add_option("--epochs", epochs, "training epochs");
    app.add_option("--optimizer", optimizer, "adam or sgd");
    app.add_option("--lr", lr, "learning rate");
    app.add_option("--cbe", cbe, "co-occurrence rebuild of the hash matrices (true/false)");
    app.add_option("--decode", decode, "likelihood or nll");
    app.add_option("--top-n", top_n, "items written per score dump");
    app.add_option("--cutoff", cutoff, "ranking depth for metrics, 0 = full");
    app.add_option("--measure", measure, "map, rr or acc");
  }

  ExperimentConfig resolve() const {
    ExperimentConfig config = config_file.empty() ? ExperimentConfig{} : ExperimentConfig::from_file(config_file);
    for (const auto& a : assignments) {
      const auto eq = a.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + a + "'");
      config.set(a.substr(0, eq), a.substr(eq + 1));
    }
    if (data) config.data = *data;
    if (synthetic) config.data.clear();
    if (d) config.synthetic.d = *d;
    if (m) config.m_in = config.m_out = *m;
    if (k) config.k = *k;
    if (seed) config.seed = *seed;
    if (epochs) config.train.epochs = *epochs;
    if (optimizer) config.optimizer.kind = parse_optimizer(*optimizer);
    if (lr) config.optimizer.learning_rate = *lr;
    if (cbe) config.use_cbe = *cbe;
    if (decode) config.decode = parse_decode_mode(*decode);
    if (top_n) config.top_n = *top_n;
    if (cutoff) config.cutoff = *cutoff;
    if (measure) config.measure = parse_measure(*measure);
    config.validate();
    return config;
  }
};

void log_config(const ExperimentConfig& config) {
  std::cerr << "# resolved config\n" << config.to_text() << std::flush;
}

void check_dataset(const ExperimentConfig& config, const ProfileDataset& dataset) {
  if (config.m_in > dataset.d || config.m_out > dataset.d) {
    throw ConfigError("m (" + std::to_string(std::max(config.m_in, config.m_out)) + ") exceeds d (" +
                      std::to_string(dataset.d) + ")");
  }
}

std::string format_double(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

int cmd_build_hash(std::size_t d, std::size_t m, std::size_t k, std::uint64_t seed, bool binary,
                   const std::string& out) {
  const auto matrix = build_hash_matrix(d, m, k, seed);
  save_hash_matrix(matrix, out, binary ? MatrixFormat::kBinary : MatrixFormat::kText);
  std::cerr << "wrote " << d << "x" << k << " hash matrix (m=" << m << ", seed=" << seed << ") to " << out << '\n';
  return 0;
}

int cmd_encode(const std::string& hash_path, const std::string& in_path, const std::string& out) {
  const auto hash = load_hash_matrix(hash_path);
  auto in = open_input(in_path);
  const auto instances = read_instances(in, hash.d());
  std::vector<BloomVector> vectors;
  vectors.reserve(instances.size());
  for (const auto& x : instances) vectors.push_back(encode(x, hash));
  write_atomically(out, [&](std::ostream& os) { write_bloom_vectors(os, vectors); });
  std::cerr << "encoded " << vectors.size() << " instances into " << hash.m() << " bits\n";
  return 0;
}

int cmd_decode(const std::string& hash_path, const std::string& in_path, const std::string& mode,
               std::size_t top_n, const std::string& out) {
  const auto decode_mode = parse_decode_mode(mode);
  const auto hash = load_hash_matrix(hash_path);
  if (top_n < 1 || top_n > hash.d()) throw ConfigError("--top-n must lie in [1, d]");
  auto in = open_input(in_path);
  const auto rows = read_probability_vectors(in);
  write_atomically(out, [&](std::ostream& os) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != hash.m()) {
        throw DataError("probability row " + std::to_string(i + 1) + " has " + std::to_string(rows[i].size()) +
                        " values, expected m=" + std::to_string(hash.m()));
      }
      const auto scores = decode_mode == DecodeMode::kLikelihood ? decode_likelihood(rows[i], hash)
                                                                 : decode_nll(rows[i], hash);
      if (i) os << '\n';
      write_score_dump(os, scores, top_n);
    }
  });
  std::cerr << "decoded " << rows.size() << " rows (" << to_string(decode_mode) << ")\n";
  return 0;
}

int cmd_cbe(const std::string& hash_path, const std::string& data_path, std::uint64_t seed, const std::string& out,
            const std::string& stats_path) {
  const auto hash = load_hash_matrix(hash_path);
  auto in = open_input(data_path);
  const auto instances = read_instances(in, hash.d());
  if (instances.empty()) throw DataError("no instances in " + data_path);
  const auto table = count_cooccurrences(instances);
  const auto pairs = threshold_and_order(table);
  const auto result = rebuild_hash_matrix(hash, pairs, seed);
  for (const auto& p : result.skipped) {
    std::cerr << "skipped pair (" << p.row + 1 << ", " << p.col + 1 << ") count " << p.count
              << ": no free bit left\n";
  }
  save_hash_matrix(result.matrix, out);
  if (!stats_path.empty()) {
    const auto stats = cooccurrence_stats(table, instances.size());
    write_atomically(stats_path, [&](std::ostream& os) {
      os << "n\td\tavg_frequency\tpairs_above\tapplied\tskipped\tpercent_cooccurring_pairs\tmean_ratio_rho\n";
      os << instances.size() << '\t' << hash.d() << '\t' << average_item_frequency(table) << '\t' << pairs.size()
         << '\t' << result.applied << '\t' << result.skipped.size() << '\t' << stats.percent_cooccurring_pairs
         << '\t' << stats.mean_ratio_rho << '\n';
    });
  }
  std::cerr << "rebuilt hash matrix: " << result.applied << " pairs applied, " << result.skipped.size()
            << " skipped\n";
  return 0;
}

int cmd_train(const ConfigFlags& flags, const std::string& out_dir) {
  const auto config = flags.resolve();
  log_config(config);
  const auto dataset = load_dataset(config);
  check_dataset(config, dataset);
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);

  const CellSpec cell{config.m_in, config.m_out, config.k, config.use_cbe, 0};
  Network<float> net(NetworkSpec{{1, 1}, 1});
  const bool has_test = !dataset.test.empty();
  const auto result = run_cell(config, dataset, cell, &net);
  if (result.diverged) throw NumericError("training diverged");

  const auto embedding = make_embedding(config, dataset, cell);
  if (embedding.in) save_hash_matrix(*embedding.in, dir / "hash_in.txt");
  if (embedding.out) save_hash_matrix(*embedding.out, dir / "hash_out.txt");
  write_atomically(dir / "model.ckpt", [&](std::ostream& os) { write_checkpoint(os, net); }, true);
  config.save(dir / "config.txt");
  if (!config.uses_synthetic()) dataset.items.save(dir / "items.tsv");
  write_atomically(dir / "train.tsv", [&](std::ostream& os) {
    os << "epoch\tloss\tseconds\n";
    for (std::size_t e = 0; e < result.train.epochs; ++e) {
      os << e + 1 << '\t' << format_double(result.train.epoch_loss[e]) << '\t' << result.train.epoch_seconds[e]
         << '\n';
    }
  });
  std::cerr << "trained " << result.train.epochs << " epochs, final loss " << result.train.final_loss << '\n';
  if (has_test) {
    std::cout << to_string(result.eval.measure) << '\t' << format_double(result.eval.score) << '\n';
  }
  return 0;
}

double score_dump_measure(const std::vector<std::vector<ItemId>>& ranked, const std::vector<SparseInstance>& truth,
                          Measure measure, std::size_t cutoff) {
  if (ranked.size() != truth.size()) {
    throw DataError("score dump has " + std::to_string(ranked.size()) + " blocks but truth has " +
                    std::to_string(truth.size()) + " instances");
  }
  if (truth.empty()) throw DataError("nothing to evaluate");
  double total = 0.0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    std::span<const ItemId> r = ranked[i];
    if (cutoff != 0 && r.size() > cutoff) r = r.first(cutoff);
    const auto relevant = truth[i].positions();
    if (relevant.empty()) throw DataError("truth instance " + std::to_string(i + 1) + " is empty");
    switch (measure) {
      case Measure::kMap:
        total += average_precision(r, relevant);
        break;
      case Measure::kRr: {
        double best = 0.0;
        for (const ItemId item : relevant) best = std::max(best, reciprocal_rank(r, item));
        total += best;
        break;
      }
      case Measure::kAcc:
        total += !r.empty() && truth[i].contains(r.front()) ? 100.0 : 0.0;
        break;
    }
  }
  return total / static_cast<double>(truth.size());
}

int cmd_evaluate(const ConfigFlags& flags, const std::string& scores_path, const std::string& truth_path,
                 const std::string& model_dir) {
  if (!scores_path.empty()) {
    if (truth_path.empty()) throw ConfigError("--scores requires --truth");
    const auto config = flags.resolve();
    auto scores_in = open_input(scores_path);
    auto truth_in = open_input(truth_path);
    const auto ranked = read_score_dump(scores_in);
    const auto truth = read_instances(truth_in);
    const double score = score_dump_measure(ranked, truth, config.measure, config.cutoff);
    std::cout << to_string(config.measure) << '\t' << format_double(score) << '\n';
    return 0;
  }
  if (model_dir.empty()) throw ConfigError("evaluate needs --scores/--truth or --model");
  const fs::path dir(model_dir);
  ConfigFlags model_flags = flags;
  if (model_flags.config_file.empty()) model_flags.config_file = (dir / "config.txt").string();
  const auto config = model_flags.resolve();
  log_config(config);
  const auto dataset = load_dataset(config);
  if (dataset.test.empty()) throw DataError("dataset has no test profiles");
  Embedding embedding;
  if (fs::exists(dir / "hash_in.txt")) embedding.in = load_hash_matrix(dir / "hash_in.txt");
  if (fs::exists(dir / "hash_out.txt")) embedding.out = load_hash_matrix(dir / "hash_out.txt");
  auto in = open_input(dir / "model.ckpt", true);
  const auto net = read_checkpoint<float>(in);
  const std::size_t want_in = embedding.in ? embedding.in->m() : dataset.d;
  const std::size_t want_out = embedding.out ? embedding.out->m() : dataset.d;
  if (net.input_size() != want_in || net.output_size() != want_out) {
    throw DataError("checkpoint layer sizes do not match the dataset and hash matrices");
  }
  const auto result = evaluate(net, dataset.test, embedding, config.decode, config.cutoff, config.measure);
  std::cout << to_string(result.measure) << '\t' << format_double(result.score) << '\n';
  std::cerr << "evaluated " << result.n_evaluated << " profiles in " << result.wall_time << " s\n";
  return 0;
}

int cmd_sweep(const ConfigFlags& flags, const std::vector<double>& ratios, const std::vector<std::size_t>& ks,
              std::optional<std::size_t> repeats, std::optional<std::size_t> parallel, const std::string& out_dir) {
  auto config = flags.resolve();
  if (!ratios.empty()) config.sweep_m_ratios = ratios;
  if (!ks.empty()) config.sweep_k = ks;
  if (repeats) config.repeats = *repeats;
  if (parallel) config.parallel = *parallel;
  config.validate();
  log_config(config);
  const auto dataset = load_dataset(config);
  if (dataset.test.empty()) throw DataError("dataset has no test profiles");
  const auto rows = run_sweep(config, dataset);
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  config.save(dir / "config.txt");
  write_atomically(dir / "sweep.tsv", [&](std::ostream& os) { write_sweep_report(os, rows); });
  write_atomically(dir / "plot.tsv", [&](std::ostream& os) { write_plot_data(os, rows); });
  write_sweep_report(std::cout, rows);
  for (const auto& row : rows) {
    if (std::isnan(row.score)) std::cerr << "cell k=" << row.k << " m=" << row.m << " diverged\n";
  }
  return 0;
}

int cmd_stats(const ConfigFlags& flags, const std::string& out) {
  const auto config = flags.resolve();
  log_config(config);
  const auto dataset = load_dataset(config);
  const auto stats = dataset_stats(dataset);
  std::vector<Profile> all = dataset.train;
  all.insert(all.end(), dataset.test.begin(), dataset.test.end());
  const auto inputs = input_instances(all);
  const auto outputs = output_instances(all);
  const auto in_stats = cooccurrence_stats(count_cooccurrences(inputs), inputs.size());
  const auto out_stats = cooccurrence_stats(count_cooccurrences(outputs), outputs.size());
  auto write = [&](std::ostream& os) {
    write_dataset_stats(os, stats);
    os << '\n';
    write_cooccurrence_report(os, in_stats, out_stats);
  };
  if (out.empty()) {
    write(std::cout);
  } else {
    write_atomically(out, write);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bloom embeddings for sparse binary input/output networks"};
  app.require_subcommand(1);

  auto* build = app.add_subcommand("build-hash", "build a random d x k hash matrix");
  std::size_t bh_d = 0, bh_m = 0, bh_k = 4;
  std::uint64_t bh_seed = 1;
  bool bh_binary = false;
  std::string bh_out;
  build->add_option("--d", bh_d, "item count")->required();
  build->add_option("--m", bh_m, "embedding size")->required();
  build->add_option("--k", bh_k, "projections per item");
  build->add_option("--seed", bh_seed, "seed");
  build->add_flag("--binary", bh_binary, "binary file format");
  build->add_option("--out", bh_out, "output file")->required();

  auto* enc = app.add_subcommand("encode", "encode sparse instances into Bloom vectors");
  std::string enc_hash, enc_in, enc_out;
  enc->add_option("--hash", enc_hash, "hash matrix file")->required();
  enc->add_option("--in", enc_in, "instance file (1-based item ids per line)")->required();
  enc->add_option("--out", enc_out, "output file of 0/1 strings")->required();

  auto* dec = app.add_subcommand("decode", "decode output probabilities into ranked items");
  std::string dec_hash, dec_in, dec_out, dec_mode = "likelihood";
  std::size_t dec_top = 10;
  dec->add_option("--hash", dec_hash, "hash matrix file")->required();
  dec->add_option("--in", dec_in, "probability rows (reals or 0/1 strings)")->required();
  dec->add_option("--decode", dec_mode, "likelihood or nll");
  dec->add_option("--top-n", dec_top, "items per row");
  dec->add_option("--out", dec_out, "score dump")->required();

  auto* cbe = app.add_subcommand("cbe", "rebuild a hash matrix from item co-occurrences");
  std::string cbe_hash, cbe_data, cbe_out, cbe_stats;
  std::uint64_t cbe_seed = 1;
  cbe->add_option("--hash", cbe_hash, "hash matrix file")->required();
  cbe->add_option("--data", cbe_data, "instance file")->required();
  cbe->add_option("--seed", cbe_seed, "seed");
  cbe->add_option("--out", cbe_out, "rebuilt hash matrix")->required();
  cbe->add_option("--stats", cbe_stats, "co-occurrence report (TSV)");

  auto* train = app.add_subcommand("train", "train one network and save it");
  ConfigFlags train_flags;
  std::string train_out;
  train_flags.attach(*train);
  train->add_option("--out", train_out, "output directory")->required();

  auto* eval = app.add_subcommand("evaluate", "score a dump against truth, or a trained model");
  ConfigFlags eval_flags;
  std::string eval_scores, eval_truth, eval_model;
  eval_flags.attach(*eval);
  eval->add_option("--scores", eval_scores, "score dump from decode");
  eval->add_option("--truth", eval_truth, "instance file with the relevant items");
  eval->add_option("--model", eval_model, "directory written by train")->check(CLI::ExistingDirectory);

  auto* sweep = app.add_subcommand("sweep", "score and time ratios over m/d and k");
  ConfigFlags sweep_flags;
  std::vector<double> sweep_ratios;
  std::vector<std::size_t> sweep_ks;
  std::optional<std::size_t> sweep_repeats, sweep_parallel;
  std::string sweep_out;
  sweep_flags.attach(*sweep);
  sweep->add_option("--m-ratios", sweep_ratios, "m/d values")->delimiter(',');
  sweep->add_option("--k-values", sweep_ks, "k values")->delimiter(',');
  sweep->add_option("--repeats", sweep_repeats, "seeds per cell");
  sweep->add_option("--parallel", sweep_parallel, "cells run concurrently");
  sweep->add_option("--out", sweep_out, "output directory")->required();

  auto* stats = app.add_subcommand("stats", "dataset statistics");
  ConfigFlags stats_flags;
  std::string stats_out;
  stats_flags.attach(*stats);
  stats->add_option("--out", stats_out, "output TSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*build) return cmd_build_hash(bh_d, bh_m, bh_k, bh_seed, bh_binary, bh_out);
    if (*enc) return cmd_encode(enc_hash, enc_in, enc_out);
    if (*dec) return cmd_decode(dec_hash, dec_in, dec_mode, dec_top, dec_out);
    if (*cbe) return cmd_cbe(cbe_hash, cbe_data, cbe_seed, cbe_out, cbe_stats);
    if (*train) return cmd_train(train_flags, train_out);
    if (*eval) return cmd_evaluate(eval_flags, eval_scores, eval_truth, eval_model);
    if (*sweep) return cmd_sweep(sweep_flags, sweep_ratios, sweep_ks, sweep_repeats, sweep_parallel, sweep_out);
    if (*stats) return cmd_stats(stats_flags, stats_out);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
