// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Usage: acceptance [properties|trends|all]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

#include "bloomemb/cbe.hpp"
#include "bloomemb/codec.hpp"
#include "bloomemb/data.hpp"
#include "bloomemb/experiment.hpp"
#include "bloomemb/hashing.hpp"
#include "bloomemb/metrics.hpp"
#include "bloomemb/network.hpp"
#include "bloomemb/rng.hpp"
#include "bloomemb/trainer.hpp"
#include "test_support.hpp"

using namespace bloomemb;
using testing_support::random_instance;

namespace {

// Tolerances and limits.
constexpr std::size_t kRecoveryCases = 10000;
constexpr double kRecoveryLimitSeconds = 60;
constexpr std::size_t kFprTrials = 10000;
constexpr std::size_t kFprNonMembers = 1000;
constexpr double kFprRelativeTolerance = 0.30;
constexpr double kSubOnePercent = 0.01;
constexpr double kFprLimitSeconds = 120;
constexpr std::size_t kAlgebraCases = 1000;
constexpr double kAlgebraLimitSeconds = 60;
constexpr std::size_t kHtCases = 1000;
constexpr std::size_t kCbeDatasets = 100;
constexpr double kCbeLimitSeconds = 60;
constexpr double kGradientTolerance = 1e-4;
constexpr double kGradientStep = 1e-6;
constexpr double kGradientLimitSeconds = 10;
constexpr double kTrajectoryTolerance = 1e-9;
constexpr double kTrajectoryLimitSeconds = 60;
constexpr double kMetricLimitSeconds = 1;
constexpr double kTrendLimitSeconds = 30 * 60;
constexpr std::size_t kSeeds = 5;
constexpr double kRatioAtHighM = 0.9;
constexpr double kKGain = 0.05;
constexpr double kKSpread = 0.10;
constexpr double kEvalOverhead = 2.0;
constexpr double kCbeMargin = 0.01;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

int failures = 0;

void run_criterion(int id, const char* name, double limit_seconds, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome outcome;
  try {
    outcome = body();
  } catch (const std::exception& e) {
    outcome = {false, std::string("exception: ") + e.what()};
  }
  const double elapsed = seconds_since(start);
  if (elapsed >= limit_seconds) {
    outcome.pass = false;
    outcome.detail += fmt("; runtime %.1fs exceeds %.0fs", elapsed, limit_seconds);
  }
  std::printf("criterion %d: %s  %s  [%s] (%.1fs)\n", id, outcome.pass ? "PASS" : "FAIL", name,
              outcome.detail.c_str(), elapsed);
  std::fflush(stdout);
  if (!outcome.pass) ++failures;
}

// ---------------------------------------------------------------------------
// Properties

Outcome no_false_negatives() {
  Rng rng(1001);
  const std::size_t dims[] = {100, 1000, 10000};
  std::size_t bad = 0;
  for (std::size_t t = 0; t < kRecoveryCases; ++t) {
    const std::size_t d = dims[t % 3];
    const std::size_t m = 8 + rng.uniform(d - 8);
    const std::size_t k = 1 + rng.uniform(std::min<std::size_t>(10, m));
    const std::size_t c = 1 + rng.uniform(std::min<std::size_t>(50, d));
    const auto h = build_hash_matrix(d, m, k, rng.next());
    const auto x = random_instance(rng, d, c);
    const auto bits = encode(x, h);
    const auto scores = decode_likelihood(to_probabilities(bits), h);
    for (ItemId i = 0; i < d; ++i) {
      bool all_set = true;
      for (auto b : h.row(i)) all_set = all_set && bits.test(b);
      const double want = all_set ? 1.0 : 0.0;
      if (scores.scores[i] != want || (x.contains(i) && scores.scores[i] != 1.0)) ++bad;
    }
  }
  return {bad == 0, fmt("%zu cases, %zu wrong item scores", kRecoveryCases, bad)};
}

// Empirical false-positive rate of a c-item filter with fresh random hashes per trial.
double empirical_fpr(std::size_t m, std::size_t k, std::size_t c, std::size_t trials, Rng& rng) {
  std::size_t hits = 0;
  std::vector<ItemId> members(c);
  std::iota(members.begin(), members.end(), ItemId{0});
  const SparseInstance x(c + kFprNonMembers, members);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto h = build_hash_matrix(c + kFprNonMembers, m, k, rng.next());
    const auto bits = encode(x, h);
    for (std::size_t i = c; i < c + kFprNonMembers; ++i) {
      bool all_set = true;
      for (auto b : h.row(static_cast<ItemId>(i))) all_set = all_set && bits.test(b);
      hits += all_set;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(trials * kFprNonMembers);
}

double theoretical_fpr(std::size_t m, std::size_t k, std::size_t c) {
  return std::pow(1.0 - std::exp(-static_cast<double>(k * c) / static_cast<double>(m)), static_cast<double>(k));
}

Outcome false_positive_rate() {
  Rng rng(2002);
  const double expected = theoretical_fpr(1000, 4, 50);
  const double observed = empirical_fpr(1000, 4, 50, kFprTrials, rng);
  const double rel = std::fabs(observed - expected) / expected;
  bool pass = rel <= kFprRelativeTolerance;
  std::string detail = fmt("m=1000 k=4 c=50: %.3e vs %.3e (rel %.3f)", observed, expected, rel);
  // At 20 bits per stored item every k in the usual range stays under 1%.
  double worst = 0.0;
  for (std::size_t m : {500, 1000, 2000}) {
    for (std::size_t k : {2, 3, 4, 6, 8, 10}) {
      const double fpr = empirical_fpr(m, k, m / 20, 500, rng);
      worst = std::max(worst, fpr);
      pass = pass && fpr < kSubOnePercent;
    }
  }
  detail += fmt("; grid m/c=20, k in 2..10: worst %.3e < %.2f", worst, kSubOnePercent);
  return {pass, detail};
}

Outcome codec_algebra() {
  Rng rng(3003);
  std::size_t union_bad = 0, mono_bad = 0, agree_bad = 0, det_bad = 0;
  for (std::size_t t = 0; t < kAlgebraCases; ++t) {
    const std::size_t d = 50 + rng.uniform(450);
    const std::size_t m = 10 + rng.uniform(d - 10);
    const std::size_t k = 1 + rng.uniform(std::min<std::size_t>(8, m));
    const auto h = build_hash_matrix(d, m, k, rng.next());
    const auto x = random_instance(rng, d, 1 + rng.uniform(20));
    const auto y = random_instance(rng, d, 1 + rng.uniform(20));
    std::vector<ItemId> both(x.positions().begin(), x.positions().end());
    both.insert(both.end(), y.positions().begin(), y.positions().end());
    const SparseInstance xy(d, both);
    const auto ex = encode(x, h), ey = encode(y, h), exy = encode(xy, h);
    union_bad += !(exy == (ex | ey));
    // x is a subset of x+y, so its bits must be too.
    mono_bad += !((ex | exy) == exy);

    std::vector<double> probs(m);
    for (auto& p : probs) p = 1e-3 + (1.0 - 1e-3) * rng.uniform_real();
    const auto like = decode_likelihood(probs, h);
    const auto nll = decode_nll(probs, h);
    agree_bad += rank(like, d) != rank(nll, d);

    // Rank is a stable descending sort: ties fall to the lower index.
    std::vector<double> coarse(d);
    for (auto& s : coarse) s = static_cast<double>(rng.uniform(5));
    const ItemScores scores{coarse, ScoreOrder::kDescendingLikelihood};
    std::vector<ItemId> oracle(d);
    std::iota(oracle.begin(), oracle.end(), ItemId{0});
    std::stable_sort(oracle.begin(), oracle.end(), [&](ItemId a, ItemId b) { return coarse[a] > coarse[b]; });
    const auto r1 = rank(scores, d);
    det_bad += r1 != rank(scores, d) || r1 != oracle;
  }
  return {union_bad + mono_bad + agree_bad + det_bad == 0,
          fmt("%zu cases each; failures union=%zu monotone=%zu agreement=%zu determinism=%zu", kAlgebraCases,
              union_bad, mono_bad, agree_bad, det_bad)};
}

// Hashing trick written directly against a k=1 hash function.
std::vector<std::uint8_t> ht_encode(const SparseInstance& x, const HashMatrix& h) {
  std::vector<std::uint8_t> v(h.m(), 0);
  for (auto i : x.positions()) v[h.table()[i]] = 1;
  return v;
}

std::vector<double> ht_decode(const std::vector<double>& probs, const HashMatrix& h) {
  std::vector<double> s(h.d());
  for (std::size_t i = 0; i < h.d(); ++i) s[i] = probs[h.table()[i]];
  return s;
}

Outcome hashing_trick_special_case() {
  Rng rng(4004);
  std::size_t bad = 0;
  for (std::size_t t = 0; t < kHtCases; ++t) {
    const std::size_t d = 20 + rng.uniform(980);
    const std::size_t m = 1 + rng.uniform(d);
    const auto h = build_hash_matrix(d, m, 1, rng.next());
    const auto x = random_instance(rng, d, 1 + rng.uniform(std::min<std::size_t>(30, d)));
    const auto be = encode(x, h);
    const auto ht = ht_encode(x, h);
    for (std::size_t b = 0; b < m; ++b) bad += be.test(static_cast<BitIndex>(b)) != (ht[b] == 1);
    std::vector<double> probs(m);
    for (auto& p : probs) p = rng.uniform_real();
    bad += decode_likelihood(probs, h).scores != ht_decode(probs, h);
  }
  return {bad == 0, fmt("%zu cases, %zu mismatches", kHtCases, bad)};
}

Outcome cbe_postconditions() {
  Rng rng(5005);
  std::size_t distinct_bad = 0, top_bad = 0, identity_bad = 0, with_pairs = 0;
  for (std::size_t t = 0; t < kCbeDatasets; ++t) {
    SyntheticSpec spec;
    spec.d = 60 + rng.uniform(240);
    spec.clusters = 1 + rng.uniform(6);
    spec.n = 300 + rng.uniform(700);
    spec.test_size = 10;
    spec.noise = 0.1 * rng.uniform_real();
    spec.zipf_exponent = 0.5 + 2.0 * rng.uniform_real();
    spec.seed = rng.next();
    const auto data = generate_synthetic(spec);
    const auto table = count_cooccurrences(input_instances(data.train));
    const auto pairs = threshold_and_order(table);
    const std::size_t m = std::max<std::size_t>(8, spec.d / (2 + rng.uniform(8)));
    const std::size_t k = 1 + rng.uniform(std::min<std::size_t>(6, m));
    const auto h = build_hash_matrix(spec.d, m, k, rng.next());
    const auto rebuilt = rebuild_hash_matrix(h, pairs, rng.next());
    for (ItemId i = 0; i < spec.d; ++i) {
      auto row = std::vector<BitIndex>(rebuilt.matrix.row(i).begin(), rebuilt.matrix.row(i).end());
      std::sort(row.begin(), row.end());
      distinct_bad += std::adjacent_find(row.begin(), row.end()) != row.end();
    }
    // Pairs are processed in ascending count order, so the last one that was
    // not skipped is the highest-count surviving pair.
    for (auto it = pairs.rbegin(); it != pairs.rend(); ++it) {
      if (std::find(rebuilt.skipped.begin(), rebuilt.skipped.end(), *it) != rebuilt.skipped.end()) continue;
      ++with_pairs;
      const auto a = rebuilt.matrix.row(it->row);
      const auto b = rebuilt.matrix.row(it->col);
      bool shared = false;
      for (auto x : a) shared = shared || std::find(b.begin(), b.end(), x) != b.end();
      top_bad += !shared;
      break;
    }
    identity_bad += !(rebuild_hash_matrix(h, {}, rng.next()).matrix == h);
  }
  return {distinct_bad + top_bad + identity_bad == 0 && with_pairs > 0,
          fmt("%zu datasets (%zu with surviving pairs); repeated indices=%zu, top pair unshared=%zu, "
              "identity broken=%zu",
              kCbeDatasets, with_pairs, distinct_bad, top_bad, identity_bad)};
}

Outcome gradient_check() {
  Rng rng(6006);
  Network<double> net(NetworkSpec{{5, 4, 3}, 17});
  for (auto& layer : net.layers()) {
    for (auto& b : layer.bias) b = 0.2 * rng.uniform_real() - 0.1;
  }
  std::vector<DenseExample<double>> batch(6);
  for (auto& ex : batch) {
    ex.input.resize(5);
    for (auto& v : ex.input) v = 2.0 * rng.uniform_real() - 1.0;
    ex.target.assign(3, 0.0);
    ex.target[rng.uniform(3)] = 1.0;
  }
  const std::span<const DenseExample<double>> view(batch);
  auto grads = Gradients<double>::zeros_like(net);
  compute_gradients(net, view, grads);
  double worst = 0.0;
  std::size_t checked = 0;
  auto probe = [&](std::vector<double>& params, const std::vector<double>& analytic) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double saved = params[i];
      params[i] = saved + kGradientStep;
      const double up = batch_loss(net, view);
      params[i] = saved - kGradientStep;
      const double down = batch_loss(net, view);
      params[i] = saved;
      const double numeric = (up - down) / (2 * kGradientStep);
      const double scale = std::max({std::fabs(numeric), std::fabs(analytic[i]), 1e-8});
      worst = std::max(worst, std::fabs(numeric - analytic[i]) / scale);
      ++checked;
    }
  };
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    probe(net.layers()[l].weights, grads.weights[l]);
    probe(net.layers()[l].bias, grads.bias[l]);
  }
  return {worst < kGradientTolerance, fmt("5-4-3 float64, %zu parameters, worst relative error %.2e", checked, worst)};
}

Outcome identity_equivalence() {
  SyntheticSpec spec;
  spec.d = 120;
  spec.n = 1200;
  spec.clusters = 6;
  spec.test_size = 100;
  spec.seed = 7;
  const auto data = generate_synthetic(spec);
  auto permutation = [&](std::uint64_t seed) {
    std::vector<BitIndex> perm(spec.d);
    std::iota(perm.begin(), perm.end(), BitIndex{0});
    Rng rng(seed);
    rng.shuffle(std::span<BitIndex>(perm));
    return HashMatrix::from_table(spec.d, spec.d, 1, seed, perm);
  };
  const auto h_in = permutation(31);
  const auto h_out = permutation(32);
  Network<double> plain(NetworkSpec{{spec.d, 24, spec.d}, 5});
  // Same parameters, rows and columns moved to the permuted bit positions.
  Network<double> embedded = plain;
  auto& first = embedded.layers().front();
  const auto& first_src = plain.layers().front();
  for (std::size_t i = 0; i < first.in; ++i) {
    for (std::size_t o = 0; o < first.out; ++o) {
      first.weights[h_in.at(static_cast<ItemId>(i), 0) * first.out + o] = first_src.weights[i * first.out + o];
    }
  }
  auto& last = embedded.layers().back();
  const auto& last_src = plain.layers().back();
  for (std::size_t j = 0; j < last.in; ++j) {
    for (std::size_t o = 0; o < last.out; ++o) {
      last.weights[j * last.out + h_out.at(static_cast<ItemId>(o), 0)] = last_src.weights[j * last.out + o];
    }
  }
  for (std::size_t o = 0; o < last.out; ++o) last.bias[h_out.at(static_cast<ItemId>(o), 0)] = last_src.bias[o];

  TrainOptions options;
  options.epochs = 3;
  options.batch_size = 32;
  options.shuffle_seed = 11;
  OptimizerSpec opt;
  opt.learning_rate = 0.01;
  const auto rp = train_plain(plain, data.train, opt, options);
  const auto re = train(embedded, data.train, h_in, h_out, opt, options);
  if (rp.step_loss.size() != re.step_loss.size()) return {false, "trajectories differ in length"};
  double worst = 0.0;
  for (std::size_t s = 0; s < rp.step_loss.size(); ++s) {
    worst = std::max(worst, std::fabs(rp.step_loss[s] - re.step_loss[s]));
  }
  return {worst <= kTrajectoryTolerance,
          fmt("%zu steps, worst per-step loss difference %.2e", rp.step_loss.size(), worst)};
}

Outcome metric_values() {
  bool pass = true;
  // ranked [a, x, b, y] with relevant {a, b}.
  const std::vector<ItemId> ranked{0, 7, 1, 8};
  const std::vector<ItemId> relevant{0, 1};
  const double ap = average_precision(ranked, relevant);
  pass = pass && std::fabs(ap - 0.8333) < 5e-5;
  const std::vector<ItemId> order{5, 6, 7, 8};
  const double rr1 = reciprocal_rank(order, 5), rr4 = reciprocal_rank(order, 8), rr0 = reciprocal_rank(order, 9);
  pass = pass && rr1 == 1.0 && rr4 == 0.25 && rr0 == 0.0;
  const std::vector<std::int64_t> truth{1, 2, 3, 4};
  const double acc_all = accuracy(truth, truth);
  const double acc_none = accuracy(std::vector<std::int64_t>{5, 6, 7, 8}, truth);
  const double acc_half = accuracy(std::vector<std::int64_t>{1, 2, 0, 0}, truth);
  pass = pass && acc_all == 100.0 && acc_none == 0.0 && acc_half == 50.0;
  return {pass, fmt("AP %.4f; RR %.2f %.2f %.2f; Acc %.0f %.0f %.0f", ap, rr1, rr4, rr0, acc_all, acc_none,
                    acc_half)};
}

// ---------------------------------------------------------------------------
// Trends on the synthetic cluster task

ExperimentConfig trend_config() {
  ExperimentConfig c;
  c.synthetic.d = 2000;
  c.synthetic.n = 20000;
  c.synthetic.clusters = 50;
  c.synthetic.noise = 0.05;
  c.synthetic.zipf_exponent = 2.5;
  c.synthetic.test_size = 2000;
  c.hidden = {64};
  c.optimizer.kind = OptimizerKind::kAdam;
  c.optimizer.learning_rate = 0.002;
  c.train.batch_size = 128;
  c.train.epochs = 6;
  c.measure = Measure::kMap;
  c.decode = DecodeMode::kLikelihood;
  return c;
}

class TrendRunner {
 public:
  TrendRunner() : config_(trend_config()), data_(load_dataset(config_)) {}

  std::size_t d() const { return data_.d; }
  std::size_t m_for(double ratio) const { return static_cast<std::size_t>(std::llround(ratio * double(d()))); }

  // Score of one cell; m = 0 is the no-embedding baseline.
  double score(std::size_t m, std::size_t k, bool cbe, std::size_t repeat) {
    const auto key = std::make_tuple(m, k, cbe, repeat);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    const auto r = run_cell(config_, data_, CellSpec{m, m, m == 0 ? 1 : k, cbe, repeat});
    return cache_[key] = r.eval.score;
  }

  std::vector<double> scores(std::size_t m, std::size_t k, bool cbe) {
    std::vector<double> s;
    for (std::size_t r = 0; r < kSeeds; ++r) s.push_back(score(m, k, cbe, r));
    return s;
  }

  const ExperimentConfig& config() const { return config_; }
  const ProfileDataset& data() const { return data_; }

 private:
  ExperimentConfig config_;
  ProfileDataset data_;
  std::map<std::tuple<std::size_t, std::size_t, bool, std::size_t>, double> cache_;
};

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size()); }

double stderr_of(const std::vector<double>& v) {
  const double mu = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / double(v.size() - 1) / double(v.size()));
}

Outcome score_ratio_curve(TrendRunner& runner) {
  const double s0 = mean(runner.scores(0, 1, false));
  const double ratios[] = {0.1, 0.2, 0.4, 0.8};
  std::vector<double> means, errs;
  std::string detail = fmt("S_0=%.4f; S_i/S_0:", s0);
  for (double r : ratios) {
    const auto s = runner.scores(runner.m_for(r), 4, false);
    means.push_back(mean(s) / s0);
    errs.push_back(stderr_of(s) / s0);
    detail += fmt(" %.2f->%.4f", r, means.back());
  }
  std::size_t inversions = 0;
  bool within_noise = true;
  for (std::size_t i = 1; i < means.size(); ++i) {
    if (means[i] < means[i - 1]) {
      ++inversions;
      const double noise = 2.0 * std::hypot(errs[i], errs[i - 1]);
      within_noise = within_noise && means[i - 1] - means[i] <= noise;
    }
  }
  detail += fmt("; inversions %zu", inversions);
  const bool pass = means.back() >= kRatioAtHighM && (inversions == 0 || (inversions == 1 && within_noise));
  return {pass, detail};
}

Outcome k_sweep(TrendRunner& runner) {
  const std::size_t m = runner.m_for(0.3);
  std::vector<double> by_k;
  std::string detail = "m/d=0.3 mean MAP:";
  for (std::size_t k = 1; k <= 4; ++k) {
    by_k.push_back(mean(runner.scores(m, k, false)));
    detail += fmt(" k=%zu->%.4f", k, by_k.back());
  }
  const double gain = by_k[1] / by_k[0] - 1.0;
  const double hi = *std::max_element(by_k.begin() + 1, by_k.end());
  const double lo = *std::min_element(by_k.begin() + 1, by_k.end());
  const double spread = (hi - lo) / hi;
  detail += fmt("; k2 vs k1 %+.1f%%, spread k2..4 %.1f%%", 100 * gain, 100 * spread);
  return {gain >= kKGain && spread <= kKSpread, detail};
}

Outcome timing(TrendRunner& runner) {
  auto config = runner.config();
  config.train.epochs = 3;
  struct Timing {
    double epoch = 0.0;
    double eval = 0.0;
  };
  auto measure = [&](std::size_t m) {
    Network<float> net(NetworkSpec{{1, 1}, 1});
    const CellSpec cell{m, m, m == 0 ? std::size_t{1} : std::size_t{4}, false, 0};
    const auto r = run_cell(config, runner.data(), cell, &net);
    const auto embedding = make_embedding(config, runner.data(), cell);
    double eval = r.eval.wall_time;
    for (int rep = 0; rep < 2; ++rep) {
      eval = std::min(eval, evaluate(net, runner.data().test, embedding, config.decode, config.cutoff,
                                     config.measure).wall_time);
    }
    return Timing{r.train.min_epoch_seconds(), eval};
  };
  const auto base = measure(0);
  const auto full = measure(runner.m_for(1.0));
  const auto half = measure(runner.m_for(0.5));
  const auto fifth = measure(runner.m_for(0.2));
  const bool decreasing = full.epoch > half.epoch && half.epoch > fifth.epoch;
  const double eval_half = half.eval / base.eval;
  const double eval_fifth = fifth.eval / base.eval;
  const bool eval_ok = eval_half < kEvalOverhead && eval_fifth < kEvalOverhead;
  return {decreasing && eval_ok,
          fmt("epoch s at m/d 1.0/0.5/0.2: %.3f/%.3f/%.3f (baseline %.3f); eval ratio 0.5->%.2f 0.2->%.2f",
              full.epoch, half.epoch, fifth.epoch, base.epoch, eval_half, eval_fifth)};
}

Outcome cbe_vs_be(TrendRunner& runner) {
  const std::size_t m = runner.m_for(0.2);
  const auto be = runner.scores(m, 4, false);
  const auto cbe = runner.scores(m, 4, true);
  const double mb = mean(be), mc = mean(cbe);
  return {mc >= mb * (1.0 - kCbeMargin),
          fmt("m/d=0.2 k=4 mean MAP BE %.4f, CBE %.4f (%+.2f%%)", mb, mc, 100 * (mc / mb - 1.0))};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "all";
  if (mode != "all" && mode != "properties" && mode != "trends") {
    std::fprintf(stderr, "usage: acceptance [properties|trends|all]\n");
    return 2;
  }
  if (mode != "trends") {
    run_criterion(1, "no false negatives", kRecoveryLimitSeconds, no_false_negatives);
    run_criterion(2, "false positive rate", kFprLimitSeconds, false_positive_rate);
    run_criterion(3, "codec algebra", kAlgebraLimitSeconds, codec_algebra);
    run_criterion(4, "hashing trick is k=1", kAlgebraLimitSeconds, hashing_trick_special_case);
    run_criterion(5, "co-occurrence rebuild", kCbeLimitSeconds, cbe_postconditions);
    run_criterion(6, "gradient check", kGradientLimitSeconds, gradient_check);
    run_criterion(7, "permutation equivalence", kTrajectoryLimitSeconds, identity_equivalence);
  }
  if (mode != "properties") {
    TrendRunner runner;
    run_criterion(8, "score ratio vs m/d", kTrendLimitSeconds, [&] { return score_ratio_curve(runner); });
    run_criterion(9, "score vs k", kTrendLimitSeconds, [&] { return k_sweep(runner); });
    run_criterion(10, "training time vs m/d", kTrendLimitSeconds, [&] { return timing(runner); });
    run_criterion(11, "co-occurrence embedding vs plain", kTrendLimitSeconds, [&] { return cbe_vs_be(runner); });
  }
  if (mode != "trends") run_criterion(12, "metric values", kMetricLimitSeconds, metric_values);
  return failures == 0 ? 0 : 1;
}
