#include "ewclab/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ewclab/rng.hpp"

namespace ewclab {
namespace {

constexpr std::size_t kEvalChunk = 1000;

void check_labels(const ForwardTrace& trace,
                  std::span<const std::uint8_t> labels) {
  if (labels.size() != trace.batch_size()) {
    throw DimensionError("labels: got " + std::to_string(labels.size()) +
                         " labels for a batch of " +
                         std::to_string(trace.batch_size()));
  }
  const std::size_t classes = trace.probabilities.cols();
  for (std::uint8_t y : labels) {
    if (y >= classes) {
      throw UsageError("label " + std::to_string(y) + " outside 0.." +
                       std::to_string(classes - 1));
    }
  }
}

[[noreturn]] void unknown_objective() {
  throw UsageError("unknown objective");
}

}  // namespace

double leaky_relu(double x, double slope) noexcept {
  return x >= 0.0 ? x : slope * x;
}

double leaky_relu_derivative(double x, double slope) noexcept {
  return x >= 0.0 ? 1.0 : slope;
}

std::vector<double> log_softmax(std::span<const double> logits) {
  std::vector<double> out(logits.begin(), logits.end());
  if (out.empty()) return out;
  const double top = *std::max_element(out.begin(), out.end());
  double sum = 0.0;
  for (double v : out) sum += std::exp(v - top);
  const double log_sum = std::log(sum);
  for (double& v : out) v = v - top - log_sum;
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.begin(), logits.end());
  if (out.empty()) return out;
  const double top = *std::max_element(out.begin(), out.end());
  double sum = 0.0;
  for (double& v : out) {
    v = std::exp(v - top);
    sum += v;
  }
  for (double& v : out) v /= sum;
  return out;
}

double cross_entropy(std::span<const double> probabilities, std::size_t label) {
  if (label >= probabilities.size()) {
    throw UsageError("cross_entropy: label out of range");
  }
  return -std::log(probabilities[label]);
}

NetworkParams::NetworkParams(std::vector<Layer> layers)
    : layers_(std::move(layers)) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& l = layers_[i];
    if (l.bias.size() != l.weights.cols()) {
      throw DimensionError("layer " + std::to_string(i + 1) + ": bias has " +
                           std::to_string(l.bias.size()) + " entries for " +
                           std::to_string(l.weights.cols()) + " outputs");
    }
    if (i + 1 < layers_.size() &&
        l.weights.cols() != layers_[i + 1].weights.rows()) {
      throw DimensionError("layer " + std::to_string(i + 2) + ": expects " +
                           std::to_string(layers_[i + 1].weights.rows()) +
                           " inputs but layer " + std::to_string(i + 1) +
                           " produces " + std::to_string(l.weights.cols()));
    }
  }
}

NetworkParams NetworkParams::zeros(std::span<const std::size_t> architecture) {
  if (architecture.size() < 2) {
    throw DimensionError("architecture needs at least two widths");
  }
  std::vector<Layer> layers;
  for (std::size_t i = 0; i + 1 < architecture.size(); ++i) {
    layers.push_back(Layer{Matrix(architecture[i], architecture[i + 1]),
                           std::vector<double>(architecture[i + 1], 0.0)});
  }
  return NetworkParams(std::move(layers));
}

std::vector<std::size_t> NetworkParams::architecture() const {
  std::vector<std::size_t> widths;
  if (layers_.empty()) return widths;
  widths.push_back(layers_.front().weights.rows());
  for (const Layer& l : layers_) widths.push_back(l.weights.cols());
  return widths;
}

std::size_t NetworkParams::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const Layer& l : layers_) n += l.weights.size() + l.bias.size();
  return n;
}

std::vector<std::span<double>> NetworkParams::blocks() {
  std::vector<std::span<double>> out;
  out.reserve(2 * layers_.size());
  for (Layer& l : layers_) {
    out.push_back(l.weights.values());
    out.push_back(l.bias);
  }
  return out;
}

std::vector<std::span<const double>> NetworkParams::blocks() const {
  std::vector<std::span<const double>> out;
  out.reserve(2 * layers_.size());
  for (const Layer& l : layers_) {
    out.push_back(l.weights.values());
    out.push_back(l.bias);
  }
  return out;
}

bool NetworkParams::same_shape(const NetworkParams& other) const noexcept {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].weights.rows() != other.layers_[i].weights.rows() ||
        layers_[i].weights.cols() != other.layers_[i].weights.cols() ||
        layers_[i].bias.size() != other.layers_[i].bias.size()) {
      return false;
    }
  }
  return true;
}

void require_same_shape(const NetworkParams& a, const NetworkParams& b,
                        std::string_view context) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(context) +
                         ": parameter sets have different shapes");
  }
}

void axpy(double alpha, const NetworkParams& x, NetworkParams& y) {
  require_same_shape(x, y, "axpy");
  auto xs = x.blocks();
  auto ys = y.blocks();
  for (std::size_t k = 0; k < xs.size(); ++k) {
    for (std::size_t i = 0; i < xs[k].size(); ++i) ys[k][i] += alpha * xs[k][i];
  }
}

double squared_norm(const NetworkParams& p) noexcept {
  double s = 0.0;
  for (auto block : p.blocks()) {
    for (double v : block) s += v * v;
  }
  return s;
}

bool all_finite(const NetworkParams& p) noexcept {
  for (auto block : p.blocks()) {
    if (!all_finite(block)) return false;
  }
  return true;
}

std::vector<double> flatten(const NetworkParams& p) {
  std::vector<double> out;
  out.reserve(p.parameter_count());
  for (auto block : p.blocks()) out.insert(out.end(), block.begin(), block.end());
  return out;
}

NetworkParams init_params(std::span<const std::size_t> architecture,
                          std::uint64_t seed) {
  NetworkParams params = NetworkParams::zeros(architecture);
  Rng rng(seed);
  for (Layer& l : params.layers()) {
    const double limit = std::sqrt(6.0 / static_cast<double>(l.weights.rows()));
    for (double& w : l.weights.values()) w = rng.uniform(-limit, limit);
  }
  return params;
}

ForwardTrace forward(const NetworkParams& params, const Matrix& batch) {
  if (params.num_layers() == 0) throw DimensionError("forward: empty network");
  const std::size_t last = params.num_layers() - 1;

  ForwardTrace trace;
  trace.inputs.reserve(params.num_layers());
  trace.pre_activations.reserve(params.num_layers());
  trace.inputs.push_back(batch);

  for (std::size_t l = 0; l <= last; ++l) {
    const Layer& layer = params.layer(l);
    if (trace.inputs[l].cols() != layer.weights.rows()) {
      throw DimensionError("forward: layer " + std::to_string(l + 1) +
                           " expects " + std::to_string(layer.weights.rows()) +
                           " inputs, got " +
                           std::to_string(trace.inputs[l].cols()));
    }
    Matrix z = matmul(trace.inputs[l], layer.weights);
    for (std::size_t r = 0; r < z.rows(); ++r) {
      auto row = z.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) row[c] += layer.bias[c];
    }
    if (l < last) {
      Matrix a = z;
      for (double& v : a.values()) v = leaky_relu(v);
      trace.pre_activations.push_back(std::move(z));
      trace.inputs.push_back(std::move(a));
    } else {
      trace.pre_activations.push_back(std::move(z));
    }
  }

  const Matrix& logits = trace.pre_activations.back();
  trace.probabilities = Matrix(logits.rows(), logits.cols());
  trace.log_probabilities = Matrix(logits.rows(), logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto p = softmax(logits.row(r));
    const auto lp = log_softmax(logits.row(r));
    std::copy(p.begin(), p.end(), trace.probabilities.row(r).begin());
    std::copy(lp.begin(), lp.end(), trace.log_probabilities.row(r).begin());
  }
  return trace;
}

Objective parse_objective(std::string_view name) {
  if (name == "cross_entropy") return Objective::kCrossEntropy;
  if (name == "log_labeled_prob") return Objective::kLogLabeledProb;
  if (name == "squared_output_norm") return Objective::kSquaredOutputNorm;
  throw UsageError("unknown objective '" + std::string(name) + "'");
}

std::string_view objective_name(Objective objective) {
  switch (objective) {
    case Objective::kCrossEntropy:
      return "cross_entropy";
    case Objective::kLogLabeledProb:
      return "log_labeled_prob";
    case Objective::kSquaredOutputNorm:
      return "squared_output_norm";
  }
  unknown_objective();
}

double objective_value(const ForwardTrace& trace, Objective objective,
                       std::span<const std::uint8_t> labels) {
  const Matrix& p = trace.probabilities;
  const Matrix& lp = trace.log_probabilities;
  double total = 0.0;
  switch (objective) {
    case Objective::kCrossEntropy:
      check_labels(trace, labels);
      for (std::size_t k = 0; k < p.rows(); ++k) total -= lp(k, labels[k]);
      return total;
    case Objective::kLogLabeledProb:
      check_labels(trace, labels);
      for (std::size_t k = 0; k < p.rows(); ++k) total += lp(k, labels[k]);
      return total;
    case Objective::kSquaredOutputNorm:
      for (double v : p.values()) total += v * v;
      return total;
  }
  unknown_objective();
}

Matrix output_delta(const ForwardTrace& trace, Objective objective,
                    std::span<const std::uint8_t> labels) {
  const Matrix& p = trace.probabilities;
  Matrix delta(p.rows(), p.cols());
  switch (objective) {
    case Objective::kCrossEntropy:
    case Objective::kLogLabeledProb: {
      check_labels(trace, labels);
      const double sign = objective == Objective::kCrossEntropy ? 1.0 : -1.0;
      for (std::size_t k = 0; k < p.rows(); ++k) {
        for (std::size_t j = 0; j < p.cols(); ++j) {
          const double onehot = j == labels[k] ? 1.0 : 0.0;
          delta(k, j) = sign * (p(k, j) - onehot);
        }
      }
      return delta;
    }
    case Objective::kSquaredOutputNorm: {
      // d/dz_m sum_j p_j^2 = 2 p_m (p_m - sum_j p_j^2)
      for (std::size_t k = 0; k < p.rows(); ++k) {
        double norm = 0.0;
        for (double v : p.row(k)) norm += v * v;
        for (std::size_t j = 0; j < p.cols(); ++j) {
          delta(k, j) = 2.0 * p(k, j) * (p(k, j) - norm);
        }
      }
      return delta;
    }
  }
  unknown_objective();
}

std::vector<Matrix> backpropagate(const NetworkParams& params,
                                  const ForwardTrace& trace,
                                  Matrix output_delta) {
  const std::size_t n_layers = params.num_layers();
  if (trace.pre_activations.size() != n_layers ||
      trace.inputs.size() != n_layers) {
    throw DimensionError("backpropagate: trace does not match network depth");
  }
  if (output_delta.rows() != trace.batch_size() ||
      output_delta.cols() != trace.probabilities.cols()) {
    throw DimensionError("backpropagate: output delta shape mismatch");
  }
  std::vector<Matrix> deltas(n_layers);
  deltas[n_layers - 1] = std::move(output_delta);
  for (std::size_t l = n_layers - 1; l > 0; --l) {
    Matrix d = matmul_a_bt(deltas[l], params.layer(l).weights);
    const Matrix& z = trace.pre_activations[l - 1];
    auto dv = d.values();
    auto zv = z.values();
    for (std::size_t i = 0; i < dv.size(); ++i) dv[i] *= leaky_relu_derivative(zv[i]);
    deltas[l - 1] = std::move(d);
  }
  return deltas;
}

NetworkParams backward(const NetworkParams& params, const ForwardTrace& trace,
                       Objective objective,
                       std::span<const std::uint8_t> labels) {
  const auto deltas =
      backpropagate(params, trace, output_delta(trace, objective, labels));
  std::vector<Layer> grads;
  grads.reserve(params.num_layers());
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    const Matrix& d = deltas[l];
    std::vector<double> bias(d.cols(), 0.0);
    for (std::size_t k = 0; k < d.rows(); ++k) {
      auto row = d.row(k);
      for (std::size_t j = 0; j < row.size(); ++j) bias[j] += row[j];
    }
    grads.push_back(Layer{matmul_at_b(trace.inputs[l], d), std::move(bias)});
  }
  return NetworkParams(std::move(grads));
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

double accuracy(const NetworkParams& params, const Matrix& inputs,
                std::span<const std::uint8_t> labels) {
  if (inputs.rows() == 0) throw UsageError("accuracy: empty dataset");
  if (labels.size() != inputs.rows()) {
    throw DimensionError("accuracy: " + std::to_string(labels.size()) +
                         " labels for " + std::to_string(inputs.rows()) +
                         " samples");
  }
  std::size_t correct = 0;
  for (std::size_t first = 0; first < inputs.rows(); first += kEvalChunk) {
    const std::size_t count = std::min(kEvalChunk, inputs.rows() - first);
    const ForwardTrace trace = forward(params, slice_rows(inputs, first, count));
    for (std::size_t k = 0; k < count; ++k) {
      if (argmax(trace.probabilities.row(k)) == labels[first + k]) {
        ++correct;
      }
    }
  }
  return static_cast<double>(correct) / static_cast<double>(inputs.rows());
}

}  // namespace ewclab
