#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "bloomemb/hashing.hpp"

namespace bloomemb {

/// Layer sizes from input to output. Hidden layers use ReLU, the output layer
/// softmax.
struct NetworkSpec {
  std::vector<std::size_t> layer_sizes;
  std::uint64_t init_seed = 1;
};

/// Fully connected layer. Weights are stored input-major: the `out` weights
/// leaving input unit i are contiguous at weights[i*out .. i*out+out), which
/// makes a sparse multi-hot input a sum of rows.
template <typename T>
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<T> weights;
  std::vector<T> bias;

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// One training example with multi-hot input and target, both as sorted
/// active indices. The target is normalised to a distribution (1/|target| per
/// active bit) for the cross-entropy.
struct SparseExample {
  std::vector<BitIndex> input;
  std::vector<BitIndex> target;
};

/// Dense example, used by gradient checks and tiny networks. `target` is used
/// as given and should sum to one.
template <typename T>
struct DenseExample {
  std::vector<T> input;
  std::vector<T> target;
};

template <typename T>
class Network {
 public:
  /// Initialises weights from U(-a, a) with a = sqrt(6 / fan_in) and zero biases,
  /// drawing from Rng(spec.init_seed). Throws ConfigError for fewer than two
  /// layers or a zero size.
  explicit Network(const NetworkSpec& spec);

  /// All-zero parameters.
  static Network zeros(std::span<const std::size_t> layer_sizes);

  const std::vector<std::size_t>& layer_sizes() const noexcept { return sizes_; }
  std::size_t input_size() const noexcept { return sizes_.front(); }
  std::size_t output_size() const noexcept { return sizes_.back(); }
  std::size_t parameter_count() const noexcept;

  std::vector<DenseLayer<T>>& layers() noexcept { return layers_; }
  const std::vector<DenseLayer<T>>& layers() const noexcept { return layers_; }

  /// Softmax output for a dense input. Throws ConfigError on a size mismatch
  /// and NumericError if a non-finite value appears.
  std::vector<T> forward(std::span<const T> input) const;

  /// Softmax output for a multi-hot input given by its active indices.
  std::vector<T> forward_sparse(std::span<const BitIndex> active) const;

  friend bool operator==(const Network&, const Network&) = default;

 private:
  Network() = default;
  std::vector<std::size_t> sizes_;
  std::vector<DenseLayer<T>> layers_;
};

/// Gradient buffers shaped like a network's parameters.
template <typename T>
struct Gradients {
  std::vector<std::vector<T>> weights;
  std::vector<std::vector<T>> bias;

  static Gradients zeros_like(const Network<T>& net);
  void zero() noexcept;
  double squared_norm() const noexcept;
  void scale(T factor) noexcept;
};

inline constexpr double kCrossEntropyEpsilon = 1e-12;

/// -sum_r t_r log(max(p_r, eps)) for a multi-hot target normalised to sum 1.
/// Throws ConfigError on length mismatch or an all-zero target.
double loss_cross_entropy(std::span<const double> probs, std::span<const std::uint8_t> target_bits);

/// Mean loss over the batch; `grads` receives the mean gradient (overwritten).
template <typename T>
double compute_gradients(const Network<T>& net, std::span<const SparseExample> batch, Gradients<T>& grads);
template <typename T>
double compute_gradients(const Network<T>& net, std::span<const DenseExample<T>> batch, Gradients<T>& grads);

/// Mean cross-entropy without gradients.
template <typename T>
double batch_loss(const Network<T>& net, std::span<const DenseExample<T>> batch);

enum class OptimizerKind { kSgdMomentum, kAdam };

std::string_view to_string(OptimizerKind kind) noexcept;
OptimizerKind parse_optimizer(std::string_view text);

struct OptimizerSpec {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 0.001;
  double momentum = 0.9;  // SGD only
  double beta1 = 0.9;     // Adam only
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 0.0;  // global gradient-norm clip, 0 disables

  void validate() const;
};

template <typename T>
class Optimizer {
 public:
  Optimizer(const OptimizerSpec& spec, const Network<T>& net);

  const OptimizerSpec& spec() const noexcept { return spec_; }
  /// Applies one update. Clips `grads` in place when clip_norm > 0.
  void step(Network<T>& net, Gradients<T>& grads);

 private:
  OptimizerSpec spec_;
  std::size_t steps_ = 0;
  Gradients<T> first_;   // velocity (SGD) or first moment (Adam)
  Gradients<T> second_;  // Adam second moment
};

/// Gradient computation plus one optimizer step. Returns the batch loss.
template <typename T>
double backward_and_step(Network<T>& net, std::span<const SparseExample> batch, Optimizer<T>& optimizer);
template <typename T>
double backward_and_step(Network<T>& net, std::span<const DenseExample<T>> batch, Optimizer<T>& optimizer);

// Checkpoint layout, little-endian:
//   "BENN", uint32 version (1), uint32 layer-size count L, L x uint32 sizes,
//   then for each of the L-1 layers: in*out float32 weights (input-major)
//   followed by out float32 biases.
template <typename T>
void write_checkpoint(std::ostream& out, const Network<T>& net);
template <typename T>
Network<T> read_checkpoint(std::istream& in);

}  // namespace bloomemb
