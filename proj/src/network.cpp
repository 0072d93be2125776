#include "bloomemb/network.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "bloomemb/error.hpp"
#include "bloomemb/rng.hpp"

namespace bloomemb {

namespace {

template <typename T>
struct Workspace {
  std::vector<std::vector<T>> pre;   // pre-activations per layer
  std::vector<std::vector<T>> post;  // ReLU outputs for hidden layers, softmax for the last
  std::vector<T> delta;
  std::vector<T> delta_in;

  explicit Workspace(const Network<T>& net) {
    const auto& layers = net.layers();
    pre.resize(layers.size());
    post.resize(layers.size());
    for (std::size_t l = 0; l < layers.size(); ++l) {
      pre[l].resize(layers[l].out);
      post[l].resize(layers[l].out);
    }
  }
};

template <typename T>
inline void axpy(T alpha, const T* x, T* y, std::size_t n) noexcept {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <typename T>
inline void add_row(const T* x, T* y, std::size_t n) noexcept {
  for (std::size_t i = 0; i < n; ++i) y[i] += x[i];
}

template <typename T>
inline T dot(const T* x, const T* y, std::size_t n) noexcept {
  T sum = 0;
  for (std::size_t i = 0; i < n; ++i) sum += x[i] * y[i];
  return sum;
}

template <typename T>
void first_layer_forward(const DenseLayer<T>& layer, std::span<const BitIndex> active, std::vector<T>& out) {
  std::copy(layer.bias.begin(), layer.bias.end(), out.begin());
  for (const BitIndex i : active) {
    if (i >= layer.in) throw ConfigError("forward: active input index out of range");
    add_row(layer.weights.data() + static_cast<std::size_t>(i) * layer.out, out.data(), layer.out);
  }
}

template <typename T>
void dense_layer_forward(const DenseLayer<T>& layer, std::span<const T> input, std::vector<T>& out) {
  std::copy(layer.bias.begin(), layer.bias.end(), out.begin());
  for (std::size_t i = 0; i < layer.in; ++i) {
    const T a = input[i];
    if (a != T(0)) axpy(a, layer.weights.data() + i * layer.out, out.data(), layer.out);
  }
}

template <typename T>
void first_layer_forward(const DenseLayer<T>& layer, std::span<const T> input, std::vector<T>& out) {
  if (input.size() != layer.in) {
    throw ConfigError("forward: input has " + std::to_string(input.size()) + " entries, network expects " +
                      std::to_string(layer.in));
  }
  dense_layer_forward(layer, input, out);
}

// Runs the forward pass and returns log-sum-exp of the output logits.
template <typename T, typename Input>
T forward_pass(const Network<T>& net, Input input, Workspace<T>& ws) {
  const auto& layers = net.layers();
  const std::size_t last = layers.size() - 1;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (l == 0) {
      first_layer_forward(layers[0], input, ws.pre[0]);
    } else {
      dense_layer_forward(layers[l], std::span<const T>(ws.post[l - 1]), ws.pre[l]);
    }
    if (l != last) {
      for (std::size_t o = 0; o < layers[l].out; ++o) ws.post[l][o] = std::max(ws.pre[l][o], T(0));
    }
  }
  const auto& logits = ws.pre[last];
  auto& probs = ws.post[last];
  const T peak = *std::max_element(logits.begin(), logits.end());
  if (!std::isfinite(peak)) throw NumericError("forward: non-finite logit");
  T sum = 0;
  for (std::size_t o = 0; o < logits.size(); ++o) {
    probs[o] = std::exp(logits[o] - peak);
    sum += probs[o];
  }
  for (auto& p : probs) p /= sum;
  return peak + std::log(sum);
}

template <typename T>
void first_layer_backward(const DenseLayer<T>&, std::span<const BitIndex> active, const std::vector<T>& delta,
                          std::vector<T>& grad_w) {
  const std::size_t out = delta.size();
  for (const BitIndex i : active) add_row(delta.data(), grad_w.data() + static_cast<std::size_t>(i) * out, out);
}

template <typename T>
void first_layer_backward(const DenseLayer<T>& layer, std::span<const T> input, const std::vector<T>& delta,
                          std::vector<T>& grad_w) {
  for (std::size_t i = 0; i < layer.in; ++i) {
    if (input[i] != T(0)) axpy(input[i], delta.data(), grad_w.data() + i * layer.out, layer.out);
  }
}

// Accumulates the gradient of the example's loss scaled by `weight` into
// `grads`. `subtract_target` turns delta from probs into probs - target.
template <typename T, typename Input, typename SubtractTarget>
void backward_pass(const Network<T>& net, Input input, Workspace<T>& ws, SubtractTarget subtract_target,
                   T weight, Gradients<T>& grads) {
  const auto& layers = net.layers();
  const std::size_t last = layers.size() - 1;
  ws.delta = ws.post[last];
  subtract_target(ws.delta);
  for (auto& v : ws.delta) v *= weight;

  for (std::size_t l = last + 1; l-- > 0;) {
    const auto& layer = layers[l];
    auto& gb = grads.bias[l];
    add_row(ws.delta.data(), gb.data(), layer.out);
    if (l == 0) {
      first_layer_backward(layer, input, ws.delta, grads.weights[0]);
      break;
    }
    const auto& a_in = ws.post[l - 1];
    const auto& pre_in = ws.pre[l - 1];
    auto& gw = grads.weights[l];
    ws.delta_in.assign(layer.in, T(0));
    for (std::size_t i = 0; i < layer.in; ++i) {
      if (pre_in[i] <= T(0)) continue;  // ReLU gate; also means a_in[i] == 0
      const T* w_row = layer.weights.data() + i * layer.out;
      axpy(a_in[i], ws.delta.data(), gw.data() + i * layer.out, layer.out);
      ws.delta_in[i] = dot(w_row, ws.delta.data(), layer.out);
    }
    std::swap(ws.delta, ws.delta_in);
  }
}

template <typename T>
T log_prob(const Workspace<T>& ws, std::size_t last, std::size_t bit, T lse) {
  const T lp = ws.pre[last][bit] - lse;
  return std::max(lp, static_cast<T>(std::log(kCrossEntropyEpsilon)));
}

template <typename T>
void check_finite_loss(double loss) {
  if (!std::isfinite(loss)) throw NumericError("non-finite loss");
}

}  // namespace

template <typename T>
Network<T>::Network(const NetworkSpec& spec) : sizes_(spec.layer_sizes) {
  if (sizes_.size() < 2) throw ConfigError("network: need at least an input and an output layer");
  for (const auto size : sizes_) {
    if (size < 1) throw ConfigError("network: layer sizes must be >= 1");
  }
  Rng rng(spec.init_seed);
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    DenseLayer<T> layer;
    layer.in = sizes_[l];
    layer.out = sizes_[l + 1];
    layer.weights.resize(layer.in * layer.out);
    layer.bias.assign(layer.out, T(0));
    const double bound = std::sqrt(6.0 / static_cast<double>(layer.in));
    for (auto& w : layer.weights) w = static_cast<T>((2.0 * rng.uniform_real() - 1.0) * bound);
    layers_.push_back(std::move(layer));
  }
}

template <typename T>
Network<T> Network<T>::zeros(std::span<const std::size_t> layer_sizes) {
  Network net;
  net.sizes_.assign(layer_sizes.begin(), layer_sizes.end());
  if (net.sizes_.size() < 2) throw ConfigError("network: need at least an input and an output layer");
  for (std::size_t l = 0; l + 1 < net.sizes_.size(); ++l) {
    if (net.sizes_[l] < 1 || net.sizes_[l + 1] < 1) throw ConfigError("network: layer sizes must be >= 1");
    net.layers_.push_back({net.sizes_[l], net.sizes_[l + 1],
                           std::vector<T>(net.sizes_[l] * net.sizes_[l + 1], T(0)),
                           std::vector<T>(net.sizes_[l + 1], T(0))});
  }
  return net;
}

template <typename T>
std::size_t Network<T>::parameter_count() const noexcept {
  std::size_t total = 0;
  for (const auto& layer : layers_) total += layer.weights.size() + layer.bias.size();
  return total;
}

template <typename T>
std::vector<T> Network<T>::forward(std::span<const T> input) const {
  Workspace<T> ws(*this);
  forward_pass(*this, input, ws);
  return std::move(ws.post.back());
}

template <typename T>
std::vector<T> Network<T>::forward_sparse(std::span<const BitIndex> active) const {
  Workspace<T> ws(*this);
  forward_pass(*this, active, ws);
  return std::move(ws.post.back());
}

template <typename T>
Gradients<T> Gradients<T>::zeros_like(const Network<T>& net) {
  Gradients g;
  for (const auto& layer : net.layers()) {
    g.weights.emplace_back(layer.weights.size(), T(0));
    g.bias.emplace_back(layer.bias.size(), T(0));
  }
  return g;
}

template <typename T>
void Gradients<T>::zero() noexcept {
  for (auto& w : weights) std::fill(w.begin(), w.end(), T(0));
  for (auto& b : bias) std::fill(b.begin(), b.end(), T(0));
}

template <typename T>
double Gradients<T>::squared_norm() const noexcept {
  double total = 0.0;
  for (const auto& w : weights) {
    for (const T v : w) total += static_cast<double>(v) * static_cast<double>(v);
  }
  for (const auto& b : bias) {
    for (const T v : b) total += static_cast<double>(v) * static_cast<double>(v);
  }
  return total;
}

template <typename T>
void Gradients<T>::scale(T factor) noexcept {
  for (auto& w : weights) {
    for (auto& v : w) v *= factor;
  }
  for (auto& b : bias) {
    for (auto& v : b) v *= factor;
  }
}

double loss_cross_entropy(std::span<const double> probs, std::span<const std::uint8_t> target_bits) {
  if (probs.size() != target_bits.size()) throw ConfigError("loss_cross_entropy: length mismatch");
  std::size_t active = 0;
  for (const auto bit : target_bits) active += bit != 0;
  if (active == 0) throw ConfigError("loss_cross_entropy: target has no set bit");
  const double weight = 1.0 / static_cast<double>(active);
  double loss = 0.0;
  for (std::size_t r = 0; r < probs.size(); ++r) {
    if (target_bits[r]) loss -= weight * std::log(std::max(probs[r], kCrossEntropyEpsilon));
  }
  return std::max(loss, 0.0);
}

template <typename T>
double compute_gradients(const Network<T>& net, std::span<const SparseExample> batch, Gradients<T>& grads) {
  if (batch.empty()) throw ConfigError("compute_gradients: empty batch");
  grads.zero();
  Workspace<T> ws(net);
  const std::size_t last = net.layers().size() - 1;
  const T weight = T(1) / static_cast<T>(batch.size());
  double total = 0.0;
  for (const auto& example : batch) {
    if (example.target.empty()) throw ConfigError("compute_gradients: example without target bits");
    if (example.target.back() >= net.output_size()) throw ConfigError("compute_gradients: target index out of range");
    const T lse = forward_pass(net, std::span<const BitIndex>(example.input), ws);
    const T t = T(1) / static_cast<T>(example.target.size());
    double loss = 0.0;
    for (const BitIndex bit : example.target) loss -= static_cast<double>(t) * log_prob(ws, last, bit, lse);
    total += loss;
    backward_pass(
        net, std::span<const BitIndex>(example.input), ws,
        [&](std::vector<T>& delta) {
          for (const BitIndex bit : example.target) delta[bit] -= t;
        },
        weight, grads);
  }
  const double mean = total / static_cast<double>(batch.size());
  check_finite_loss<T>(mean);
  return mean;
}

template <typename T>
double compute_gradients(const Network<T>& net, std::span<const DenseExample<T>> batch, Gradients<T>& grads) {
  if (batch.empty()) throw ConfigError("compute_gradients: empty batch");
  grads.zero();
  Workspace<T> ws(net);
  const std::size_t last = net.layers().size() - 1;
  const T weight = T(1) / static_cast<T>(batch.size());
  double total = 0.0;
  for (const auto& example : batch) {
    if (example.target.size() != net.output_size()) throw ConfigError("compute_gradients: target size mismatch");
    const T lse = forward_pass(net, std::span<const T>(example.input), ws);
    double loss = 0.0;
    for (std::size_t r = 0; r < example.target.size(); ++r) {
      if (example.target[r] != T(0)) loss -= static_cast<double>(example.target[r] * log_prob(ws, last, r, lse));
    }
    total += loss;
    backward_pass(
        net, std::span<const T>(example.input), ws,
        [&](std::vector<T>& delta) {
          for (std::size_t r = 0; r < delta.size(); ++r) delta[r] -= example.target[r];
        },
        weight, grads);
  }
  const double mean = total / static_cast<double>(batch.size());
  check_finite_loss<T>(mean);
  return mean;
}

template <typename T>
double batch_loss(const Network<T>& net, std::span<const DenseExample<T>> batch) {
  if (batch.empty()) throw ConfigError("batch_loss: empty batch");
  Workspace<T> ws(net);
  const std::size_t last = net.layers().size() - 1;
  double total = 0.0;
  for (const auto& example : batch) {
    const T lse = forward_pass(net, std::span<const T>(example.input), ws);
    for (std::size_t r = 0; r < example.target.size(); ++r) {
      if (example.target[r] != T(0)) total -= static_cast<double>(example.target[r] * log_prob(ws, last, r, lse));
    }
  }
  return total / static_cast<double>(batch.size());
}

std::string_view to_string(OptimizerKind kind) noexcept {
  return kind == OptimizerKind::kAdam ? "adam" : "sgd";
}

OptimizerKind parse_optimizer(std::string_view text) {
  if (text == "adam") return OptimizerKind::kAdam;
  if (text == "sgd") return OptimizerKind::kSgdMomentum;
  throw ConfigError("unknown optimizer '" + std::string(text) + "' (expected adam or sgd)");
}

void OptimizerSpec::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("optimizer: learning rate must be finite and non-negative");
  }
  if (kind == OptimizerKind::kAdam) {
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
      throw ConfigError("optimizer: Adam betas must lie in (0, 1)");
    }
    if (!(epsilon > 0.0)) throw ConfigError("optimizer: epsilon must be positive");
  } else if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw ConfigError("optimizer: momentum must lie in [0, 1)");
  }
  if (!(clip_norm >= 0.0)) throw ConfigError("optimizer: clip norm must be non-negative");
}

template <typename T>
Optimizer<T>::Optimizer(const OptimizerSpec& spec, const Network<T>& net)
    : spec_(spec), first_(Gradients<T>::zeros_like(net)) {
  spec_.validate();
  if (spec_.kind == OptimizerKind::kAdam) second_ = Gradients<T>::zeros_like(net);
}

template <typename T>
void Optimizer<T>::step(Network<T>& net, Gradients<T>& grads) {
  if (spec_.clip_norm > 0.0) {
    const double norm = std::sqrt(grads.squared_norm());
    if (!std::isfinite(norm)) throw NumericError("optimizer: non-finite gradient");
    if (norm > spec_.clip_norm) grads.scale(static_cast<T>(spec_.clip_norm / norm));
  }
  ++steps_;
  auto& layers = net.layers();
  const T lr = static_cast<T>(spec_.learning_rate);
  auto update = [&](std::vector<T>& params, const std::vector<T>& g, std::vector<T>& m1, std::vector<T>* m2) {
    if (spec_.kind == OptimizerKind::kSgdMomentum) {
      const T mu = static_cast<T>(spec_.momentum);
      for (std::size_t i = 0; i < params.size(); ++i) {
        m1[i] = mu * m1[i] - lr * g[i];
        params[i] += m1[i];
      }
      return;
    }
    const T b1 = static_cast<T>(spec_.beta1);
    const T b2 = static_cast<T>(spec_.beta2);
    const T eps = static_cast<T>(spec_.epsilon);
    const double t = static_cast<double>(steps_);
    const T c1 = static_cast<T>(1.0 / (1.0 - std::pow(spec_.beta1, t)));
    const T c2 = static_cast<T>(1.0 / (1.0 - std::pow(spec_.beta2, t)));
    auto& v = *m2;
    for (std::size_t i = 0; i < params.size(); ++i) {
      m1[i] = b1 * m1[i] + (T(1) - b1) * g[i];
      v[i] = b2 * v[i] + (T(1) - b2) * g[i] * g[i];
      params[i] -= lr * (m1[i] * c1) / (std::sqrt(v[i] * c2) + eps);
    }
  };
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const bool adam = spec_.kind == OptimizerKind::kAdam;
    update(layers[l].weights, grads.weights[l], first_.weights[l], adam ? &second_.weights[l] : nullptr);
    update(layers[l].bias, grads.bias[l], first_.bias[l], adam ? &second_.bias[l] : nullptr);
  }
}

template <typename T>
double backward_and_step(Network<T>& net, std::span<const SparseExample> batch, Optimizer<T>& optimizer) {
  auto grads = Gradients<T>::zeros_like(net);
  const double loss = compute_gradients(net, batch, grads);
  optimizer.step(net, grads);
  return loss;
}

template <typename T>
double backward_and_step(Network<T>& net, std::span<const DenseExample<T>> batch, Optimizer<T>& optimizer) {
  auto grads = Gradients<T>::zeros_like(net);
  const double loss = compute_gradients(net, batch, grads);
  optimizer.step(net, grads);
  return loss;
}

namespace {

constexpr std::array<char, 4> kCheckpointMagic = {'B', 'E', 'N', 'N'};

void put_u32(std::ostream& out, std::uint32_t value) {
  const unsigned char bytes[4] = {static_cast<unsigned char>(value), static_cast<unsigned char>(value >> 8),
                                  static_cast<unsigned char>(value >> 16), static_cast<unsigned char>(value >> 24)};
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4)) throw DataError("checkpoint: truncated file");
  return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
         (static_cast<std::uint32_t>(bytes[2]) << 16) | (static_cast<std::uint32_t>(bytes[3]) << 24);
}

void put_f32(std::ostream& out, float value) { put_u32(out, std::bit_cast<std::uint32_t>(value)); }
float get_f32(std::istream& in) { return std::bit_cast<float>(get_u32(in)); }

}  // namespace

template <typename T>
void write_checkpoint(std::ostream& out, const Network<T>& net) {
  out.write(kCheckpointMagic.data(), kCheckpointMagic.size());
  put_u32(out, 1);
  put_u32(out, static_cast<std::uint32_t>(net.layer_sizes().size()));
  for (const auto size : net.layer_sizes()) put_u32(out, static_cast<std::uint32_t>(size));
  for (const auto& layer : net.layers()) {
    for (const T w : layer.weights) put_f32(out, static_cast<float>(w));
    for (const T b : layer.bias) put_f32(out, static_cast<float>(b));
  }
}

template <typename T>
Network<T> read_checkpoint(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kCheckpointMagic) throw DataError("checkpoint: bad magic");
  if (get_u32(in) != 1) throw DataError("checkpoint: unsupported version");
  const std::uint32_t count = get_u32(in);
  if (count < 2 || count > 64) throw DataError("checkpoint: implausible layer count");
  std::vector<std::size_t> sizes(count);
  for (auto& size : sizes) {
    size = get_u32(in);
    if (size < 1) throw DataError("checkpoint: zero layer size");
  }
  auto net = Network<T>::zeros(sizes);
  for (auto& layer : net.layers()) {
    for (auto& w : layer.weights) w = static_cast<T>(get_f32(in));
    for (auto& b : layer.bias) b = static_cast<T>(get_f32(in));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw DataError("checkpoint: trailing bytes");
  return net;
}

#define BLOOMEMB_INSTANTIATE(T)                                                                          \
  template class Network<T>;                                                                             \
  template struct Gradients<T>;                                                                          \
  template class Optimizer<T>;                                                                           \
  template double compute_gradients<T>(const Network<T>&, std::span<const SparseExample>, Gradients<T>&); \
  template double compute_gradients<T>(const Network<T>&, std::span<const DenseExample<T>>, Gradients<T>&); \
  template double batch_loss<T>(const Network<T>&, std::span<const DenseExample<T>>);                      \
  template double backward_and_step<T>(Network<T>&, std::span<const SparseExample>, Optimizer<T>&);       \
  template double backward_and_step<T>(Network<T>&, std::span<const DenseExample<T>>, Optimizer<T>&);     \
  template void write_checkpoint<T>(std::ostream&, const Network<T>&);                                   \
  template Network<T> read_checkpoint<T>(std::istream&);

BLOOMEMB_INSTANTIATE(float)
BLOOMEMB_INSTANTIATE(double)

}  // namespace bloomemb
