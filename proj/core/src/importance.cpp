#include "ewclab/importance.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "ewclab/errors.hpp"

namespace ewclab {
namespace {

constexpr std::size_t kChunk = 500;

void require_samples(std::size_t n, std::string_view who) {
  if (n == 0) throw UsageError(std::string(who) + ": empty dataset");
}

// Shared driver for the gradient-based estimators. Per-sample weight
// gradients are outer products a_k d_k^T, so sums of their elementwise
// squares or magnitudes reduce to f(A)^T f(D) with f applied elementwise.
template <typename Elementwise>
ImportanceMap per_sample_gradient_stat(Method method, const NetworkParams& params,
                                       const Matrix& inputs,
                                       std::span<const std::uint8_t> labels,
                                       Objective objective, Elementwise f,
                                       std::size_t task_index) {
  ImportanceMap out = zero_map(method, params, task_index);
  const std::size_t n = inputs.rows();
  for (std::size_t first = 0; first < n; first += kChunk) {
    const std::size_t count = std::min(kChunk, n - first);
    const ForwardTrace trace = forward(params, slice_rows(inputs, first, count));
    const auto chunk_labels =
        labels.empty() ? labels : labels.subspan(first, count);
    auto deltas = backpropagate(params, trace,
                                output_delta(trace, objective, chunk_labels));
    for (std::size_t l = 0; l < params.num_layers(); ++l) {
      Matrix a = trace.inputs[l];
      for (double& v : a.values()) v = f(v);
      Matrix& d = deltas[l];
      for (double& v : d.values()) v = f(v);
      Layer& dst = out.values.layer(l);
      const Matrix w = matmul_at_b(a, d);
      auto wv = dst.weights.values();
      auto src = w.values();
      for (std::size_t i = 0; i < wv.size(); ++i) wv[i] += src[i];
      for (std::size_t k = 0; k < d.rows(); ++k) {
        auto row = d.row(k);
        for (std::size_t j = 0; j < row.size(); ++j) dst.bias[j] += row[j];
      }
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (auto block : out.values.blocks()) {
    for (double& v : block) v *= inv_n;
  }
  return out;
}

}  // namespace

std::string_view method_name(Method method) {
  switch (method) {
    case Method::kFis:
      return "FIS";
    case Method::kMas:
      return "MAS";
    case Method::kSi:
      return "SI";
    case Method::kSig:
      return "SIG";
  }
  throw UsageError("unknown importance method");
}

Method parse_method(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (Method m : kAllMethods) {
    if (method_name(m) == upper) return m;
  }
  throw UsageError("unknown importance method '" + std::string(name) + "'");
}

std::string ImportanceMap::label() const {
  std::string s(method_name(method));
  if (squared) s += "^2";
  return s;
}

ImportanceMap zero_map(Method method, const NetworkParams& like,
                       std::size_t task_index) {
  return ImportanceMap{method, false, task_index,
                       transformed(like, [](double) { return 0.0; })};
}

ImportanceMap compute_fis(const NetworkParams& params, const Matrix& inputs,
                          std::span<const std::uint8_t> labels,
                          std::size_t task_index) {
  require_samples(inputs.rows(), "compute_fis");
  if (labels.size() != inputs.rows()) {
    throw DimensionError("compute_fis: label count does not match samples");
  }
  return per_sample_gradient_stat(
      Method::kFis, params, inputs, labels, Objective::kLogLabeledProb,
      [](double v) { return v * v; }, task_index);
}

ImportanceMap compute_fis(const NetworkParams& params, const TaskDataset& dataset) {
  return compute_fis(params, dataset.inputs, dataset.labels, dataset.task_index);
}

ImportanceMap compute_mas(const NetworkParams& params, const Matrix& inputs,
                          std::size_t task_index) {
  require_samples(inputs.rows(), "compute_mas");
  return per_sample_gradient_stat(
      Method::kMas, params, inputs, {}, Objective::kSquaredOutputNorm,
      [](double v) { return std::abs(v); }, task_index);
}

ImportanceMap compute_mas(const NetworkParams& params, const TaskDataset& dataset) {
  return compute_mas(params, dataset.inputs, dataset.task_index);
}

ImportanceMap compute_sig(const NetworkParams& params, const Matrix& inputs,
                          std::size_t task_index) {
  require_samples(inputs.rows(), "compute_sig");
  const std::size_t n = inputs.rows();
  // Column sums of |activation| feeding each layer.
  std::vector<std::vector<double>> signal(params.num_layers());
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    signal[l].assign(params.layer(l).weights.rows(), 0.0);
  }
  for (std::size_t first = 0; first < n; first += kChunk) {
    const std::size_t count = std::min(kChunk, n - first);
    const ForwardTrace trace = forward(params, slice_rows(inputs, first, count));
    for (std::size_t l = 0; l < params.num_layers(); ++l) {
      const Matrix& a = trace.inputs[l];
      for (std::size_t k = 0; k < a.rows(); ++k) {
        auto row = a.row(k);
        for (std::size_t i = 0; i < row.size(); ++i) signal[l][i] += std::abs(row[i]);
      }
    }
  }
  ImportanceMap out = zero_map(Method::kSig, params, task_index);
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    const Layer& src = params.layer(l);
    Layer& dst = out.values.layer(l);
    for (std::size_t i = 0; i < src.weights.rows(); ++i) {
      for (std::size_t j = 0; j < src.weights.cols(); ++j) {
        dst.weights(i, j) = std::abs(src.weights(i, j)) * signal[l][i];
      }
    }
    for (std::size_t j = 0; j < src.bias.size(); ++j) {
      dst.bias[j] = static_cast<double>(n) * std::abs(src.bias[j]);
    }
  }
  return out;
}

ImportanceMap compute_sig(const NetworkParams& params, const TaskDataset& dataset) {
  return compute_sig(params, dataset.inputs, dataset.task_index);
}

SiAccumulator::SiAccumulator(const NetworkParams& start) { reset(start); }

void SiAccumulator::reset(const NetworkParams& start) {
  start_ = start;
  omega_ = transformed(start, [](double) { return 0.0; });
}

void SiAccumulator::step(const NetworkParams& grad, const NetworkParams& delta) {
  require_same_shape(omega_, grad, "SiAccumulator::step (gradient)");
  require_same_shape(omega_, delta, "SiAccumulator::step (update)");
  auto om = omega_.blocks();
  auto gs = grad.blocks();
  auto ds = delta.blocks();
  for (std::size_t b = 0; b < om.size(); ++b) {
    for (std::size_t i = 0; i < om[b].size(); ++i) om[b][i] -= gs[b][i] * ds[b][i];
  }
}

ImportanceMap SiAccumulator::finalize(const NetworkParams& end, double damping,
                                      std::size_t task_index) {
  require_same_shape(omega_, end, "SiAccumulator::finalize");
  if (!(damping > 0.0)) throw UsageError("SI damping must be positive");
  const NetworkParams displacement =
      combined(end, start_, [](double e, double s) { return e - s; });
  ImportanceMap out{Method::kSi, false, task_index,
                    combined(omega_, displacement, [damping](double w, double d) {
                      return w / (d * d + damping);
                    })};
  reset(end);
  return out;
}

ImportanceMap accumulate(const ImportanceMap& prior, const ImportanceMap& next) {
  if (prior.method != next.method || prior.squared != next.squared) {
    throw UsageError("accumulate: cannot add " + next.label() + " to " +
                     prior.label());
  }
  return ImportanceMap{
      next.method, next.squared, next.task_index,
      combined(prior.values, next.values, [](double a, double b) { return a + b; })};
}

ImportanceMap square_map(const ImportanceMap& map) {
  return ImportanceMap{map.method, true, map.task_index,
                       transformed(map.values, [](double v) { return v * v; })};
}

}  // namespace ewclab
