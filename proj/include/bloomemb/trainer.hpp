#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bloomemb/data.hpp"
#include "bloomemb/hashing.hpp"
#include "bloomemb/network.hpp"

namespace bloomemb {

struct TrainOptions {
  std::size_t epochs = 10;
  std::size_t batch_size = 128;
  std::uint64_t shuffle_seed = 1;
};

struct TrainReport {
  std::size_t epochs = 0;
  std::vector<double> epoch_loss;     // mean batch loss per epoch
  std::vector<double> step_loss;      // every optimizer step, in order
  std::vector<double> epoch_seconds;  // wall time of each epoch
  double final_loss = 0.0;

  double mean_epoch_seconds() const noexcept;
  double min_epoch_seconds() const noexcept;
};

/// Trains on pre-encoded examples. Batches are consecutive slices of a
/// per-epoch shuffle drawn from Rng(shuffle_seed); the whole run is
/// deterministic for a fixed build. Throws NumericError on divergence.
template <typename T>
TrainReport train_encoded(Network<T>& net, std::span<const SparseExample> examples, Optimizer<T>& optimizer,
                          const TrainOptions& options);

/// Encodes profile inputs with `hash_in` and targets with `hash_out`, then
/// trains in the embedding space.
template <typename T>
TrainReport train(Network<T>& net, std::span<const Profile> profiles, const HashMatrix& hash_in,
                  const HashMatrix& hash_out, const OptimizerSpec& optimizer, const TrainOptions& options);

/// Trains directly on the original d-dimensional instances.
template <typename T>
TrainReport train_plain(Network<T>& net, std::span<const Profile> profiles, const OptimizerSpec& optimizer,
                        const TrainOptions& options);

std::vector<SparseExample> encode_examples(std::span<const Profile> profiles, const HashMatrix& hash_in,
                                           const HashMatrix& hash_out);
std::vector<SparseExample> plain_examples(std::span<const Profile> profiles);

}  // namespace bloomemb
