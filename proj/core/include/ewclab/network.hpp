#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

#include "ewclab/errors.hpp"
#include "ewclab/matrix.hpp"

namespace ewclab {

inline constexpr double kLeakySlope = 0.01;

// Layer widths of the reference network: 784 inputs, hidden layers of 300
// and 150 units, 10 softmax outputs.
inline const std::vector<std::size_t> kDefaultArchitecture{784, 300, 150, 10};

double leaky_relu(double x, double slope = kLeakySlope) noexcept;
double leaky_relu_derivative(double x, double slope = kLeakySlope) noexcept;

// Max-subtracted softmax.
std::vector<double> softmax(std::span<const double> logits);
std::vector<double> log_softmax(std::span<const double> logits);
double cross_entropy(std::span<const double> probabilities, std::size_t label);

struct Layer {
  Matrix weights;             // fan_in x fan_out
  std::vector<double> bias;   // fan_out

  bool operator==(const Layer&) const = default;
};

// Weights and biases of a fully connected network. The same shape is reused
// for gradients, importance values and optimizer state, so every elementwise
// operation in the library is phrased over NetworkParams.
class NetworkParams {
 public:
  NetworkParams() = default;
  explicit NetworkParams(std::vector<Layer> layers);

  static NetworkParams zeros(std::span<const std::size_t> architecture);
  static NetworkParams zeros(std::initializer_list<std::size_t> architecture) {
    return zeros(std::span<const std::size_t>(architecture.begin(), architecture.size()));
  }

  std::vector<std::size_t> architecture() const;
  std::size_t num_layers() const noexcept { return layers_.size(); }
  std::size_t parameter_count() const noexcept;

  Layer& layer(std::size_t i) { return layers_.at(i); }
  const Layer& layer(std::size_t i) const { return layers_.at(i); }
  std::span<Layer> layers() noexcept { return layers_; }
  std::span<const Layer> layers() const noexcept { return layers_; }

  // Contiguous blocks in canonical order: layer 0 weights, layer 0 bias,
  // layer 1 weights, ...
  std::vector<std::span<double>> blocks();
  std::vector<std::span<const double>> blocks() const;

  bool same_shape(const NetworkParams& other) const noexcept;

  bool operator==(const NetworkParams&) const = default;

 private:
  std::vector<Layer> layers_;
};

void require_same_shape(const NetworkParams& a, const NetworkParams& b,
                        std::string_view context);

// out[i] = f(p[i])
template <typename F>
NetworkParams transformed(const NetworkParams& p, F&& f) {
  NetworkParams out = p;
  for (auto block : out.blocks()) {
    for (double& v : block) v = f(v);
  }
  return out;
}

// out[i] = f(a[i], b[i])
template <typename F>
NetworkParams combined(const NetworkParams& a, const NetworkParams& b, F&& f) {
  require_same_shape(a, b, "combined");
  NetworkParams out = a;
  auto out_blocks = out.blocks();
  auto b_blocks = b.blocks();
  for (std::size_t k = 0; k < out_blocks.size(); ++k) {
    auto dst = out_blocks[k];
    auto rhs = b_blocks[k];
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = f(dst[i], rhs[i]);
  }
  return out;
}

// y += alpha * x
void axpy(double alpha, const NetworkParams& x, NetworkParams& y);

double squared_norm(const NetworkParams& p) noexcept;
bool all_finite(const NetworkParams& p) noexcept;
std::vector<double> flatten(const NetworkParams& p);

// Uniform(-sqrt(6/fan_in), +sqrt(6/fan_in)) weights, zero biases.
NetworkParams init_params(std::span<const std::size_t> architecture,
                          std::uint64_t seed);

struct ForwardTrace {
  // inputs[l] is the matrix fed into layer l; inputs[0] is the batch itself,
  // inputs[l + 1] is the leakyReLU output of hidden layer l.
  std::vector<Matrix> inputs;
  std::vector<Matrix> pre_activations;
  Matrix probabilities;
  Matrix log_probabilities;

  std::size_t batch_size() const noexcept { return probabilities.rows(); }
};

ForwardTrace forward(const NetworkParams& params, const Matrix& batch);

// Scalar objectives that the library differentiates. Each is summed over the
// samples of a batch.
enum class Objective {
  kCrossEntropy,       // -log p[label]
  kLogLabeledProb,     // +log p[label]
  kSquaredOutputNorm,  // sum_j p_j^2
};

Objective parse_objective(std::string_view name);
std::string_view objective_name(Objective objective);

double objective_value(const ForwardTrace& trace, Objective objective,
                       std::span<const std::uint8_t> labels);

// Per-sample derivative of the objective with respect to the output logits.
Matrix output_delta(const ForwardTrace& trace, Objective objective,
                    std::span<const std::uint8_t> labels);

// Propagates per-sample output-logit derivatives back through the network.
// Entry l is the derivative with respect to pre_activations[l].
std::vector<Matrix> backpropagate(const NetworkParams& params,
                                  const ForwardTrace& trace,
                                  Matrix output_delta);

// Gradient of the batch-summed objective with respect to every parameter.
NetworkParams backward(const NetworkParams& params, const ForwardTrace& trace,
                       Objective objective,
                       std::span<const std::uint8_t> labels);

// Index of the largest entry; ties resolve to the lowest index.
std::size_t argmax(std::span<const double> values);

double accuracy(const NetworkParams& params, const Matrix& inputs,
                std::span<const std::uint8_t> labels);

}  // namespace ewclab
