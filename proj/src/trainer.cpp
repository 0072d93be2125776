#include "bloomemb/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "bloomemb/codec.hpp"
#include "bloomemb/error.hpp"
#include "bloomemb/rng.hpp"

namespace bloomemb {

double TrainReport::mean_epoch_seconds() const noexcept {
  if (epoch_seconds.empty()) return 0.0;
  return std::accumulate(epoch_seconds.begin(), epoch_seconds.end(), 0.0) /
         static_cast<double>(epoch_seconds.size());
}

double TrainReport::min_epoch_seconds() const noexcept {
  if (epoch_seconds.empty()) return 0.0;
  return *std::min_element(epoch_seconds.begin(), epoch_seconds.end());
}

template <typename T>
TrainReport train_encoded(Network<T>& net, std::span<const SparseExample> examples, Optimizer<T>& optimizer,
                          const TrainOptions& options) {
  if (options.batch_size < 1) throw ConfigError("train: batch size must be >= 1");
  TrainReport report;
  if (options.epochs == 0) return report;
  if (examples.empty()) throw ConfigError("train: no training examples");

  Rng rng(options.shuffle_seed);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<SparseExample> batch;
  auto grads = Gradients<T>::zeros_like(net);

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    std::size_t steps = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += options.batch_size) {
      const std::size_t end = std::min(order.size(), begin + options.batch_size);
      batch.clear();
      for (std::size_t i = begin; i < end; ++i) batch.push_back(examples[order[i]]);
      const double loss = compute_gradients(net, std::span<const SparseExample>(batch), grads);
      optimizer.step(net, grads);
      report.step_loss.push_back(loss);
      loss_sum += loss;
      ++steps;
    }
    const auto stop = std::chrono::steady_clock::now();
    report.epoch_seconds.push_back(std::chrono::duration<double>(stop - start).count());
    report.epoch_loss.push_back(loss_sum / static_cast<double>(steps));
    ++report.epochs;
  }
  report.final_loss = report.epoch_loss.back();
  return report;
}

std::vector<SparseExample> encode_examples(std::span<const Profile> profiles, const HashMatrix& hash_in,
                                           const HashMatrix& hash_out) {
  std::vector<SparseExample> out;
  out.reserve(profiles.size());
  for (const auto& p : profiles) out.push_back({encode_active(p.input, hash_in), encode_active(p.output, hash_out)});
  return out;
}

std::vector<SparseExample> plain_examples(std::span<const Profile> profiles) {
  std::vector<SparseExample> out;
  out.reserve(profiles.size());
  for (const auto& p : profiles) {
    out.push_back({{p.input.positions().begin(), p.input.positions().end()},
                   {p.output.positions().begin(), p.output.positions().end()}});
  }
  return out;
}

template <typename T>
TrainReport train(Network<T>& net, std::span<const Profile> profiles, const HashMatrix& hash_in,
                  const HashMatrix& hash_out, const OptimizerSpec& optimizer, const TrainOptions& options) {
  if (net.input_size() != hash_in.m() || net.output_size() != hash_out.m()) {
    throw ConfigError("train: network sizes do not match the hash matrices");
  }
  const auto examples = encode_examples(profiles, hash_in, hash_out);
  Optimizer<T> opt(optimizer, net);
  return train_encoded(net, std::span<const SparseExample>(examples), opt, options);
}

template <typename T>
TrainReport train_plain(Network<T>& net, std::span<const Profile> profiles, const OptimizerSpec& optimizer,
                        const TrainOptions& options) {
  if (!profiles.empty() &&
      (net.input_size() != profiles.front().input.d() || net.output_size() != profiles.front().output.d())) {
    throw ConfigError("train: network sizes do not match the dataset dimensionality");
  }
  const auto examples = plain_examples(profiles);
  Optimizer<T> opt(optimizer, net);
  return train_encoded(net, std::span<const SparseExample>(examples), opt, options);
}

#define BLOOMEMB_INSTANTIATE_TRAIN(T)                                                                         \
  template TrainReport train_encoded<T>(Network<T>&, std::span<const SparseExample>, Optimizer<T>&,           \
                                        const TrainOptions&);                                                 \
  template TrainReport train<T>(Network<T>&, std::span<const Profile>, const HashMatrix&, const HashMatrix&,  \
                                const OptimizerSpec&, const TrainOptions&);                                   \
  template TrainReport train_plain<T>(Network<T>&, std::span<const Profile>, const OptimizerSpec&,            \
                                      const TrainOptions&);

BLOOMEMB_INSTANTIATE_TRAIN(float)
BLOOMEMB_INSTANTIATE_TRAIN(double)

}  // namespace bloomemb
