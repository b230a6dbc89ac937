#include "ewclab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ewclab/errors.hpp"

namespace ewclab {
namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

const ImportanceMap& pick(const ExperimentRecord& record, Method method,
                          MapSource source, std::size_t task) {
  return source == MapSource::kAccumulated ? record.accumulated_map(method, task)
                                           : record.raw_map(method, task);
}

}  // namespace

Correlation pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw UsageError("pearson: lengths differ (" + std::to_string(x.size()) +
                     " vs " + std::to_string(y.size()) + ")");
  }
  if (x.size() < 2) throw UsageError("pearson: need at least two samples");
  const double n = static_cast<double>(x.size());
  double sx = 0.0;
  double sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

Correlation spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw UsageError("spearman: lengths differ");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

Correlation layer_correlation(const ImportanceMap& a, const ImportanceMap& b,
                              std::size_t layer, CorrelationKind kind) {
  require_same_shape(a.values, b.values, "layer_correlation");
  if (layer >= a.values.num_layers()) {
    throw UsageError("layer_correlation: layer " + std::to_string(layer) +
                     " out of range (network has " +
                     std::to_string(a.values.num_layers()) + " layers)");
  }
  const auto xa = a.values.layer(layer).weights.values();
  const auto xb = b.values.layer(layer).weights.values();
  return kind == CorrelationKind::kPearson ? pearson(xa, xb) : spearman(xa, xb);
}

std::string MethodRef::label() const {
  std::string s(method_name(method));
  if (squared) s += "^2";
  return s;
}

std::vector<MethodPair> standard_pairs() {
  const MethodRef fis{Method::kFis};
  const MethodRef mas{Method::kMas};
  const MethodRef si{Method::kSi};
  const MethodRef sig{Method::kSig};
  return {
      {mas, fis}, {mas, si},  {mas, sig}, {fis, si},
      {fis, sig}, {si, sig},  {fis, MethodRef{Method::kMas, true}},
  };
}

CorrelationSurface build_surface(const ExperimentRecord& record,
                                 const MethodPair& pair, MapSource source,
                                 CorrelationKind kind) {
  for (const MethodRef& m : {pair.a, pair.b}) {
    if (!record.has(m.method)) {
      throw UsageError("experiment record is missing method " +
                       std::string(method_name(m.method)));
    }
  }
  CorrelationSurface s;
  s.pair = pair;
  s.kind = kind;
  s.task_count = record.task_count();
  const std::size_t layers = record.final_params.num_layers();
  for (std::size_t l = 0; l < layers; ++l) {
    s.layer_names.push_back("layer " + std::to_string(l + 1));
  }
  s.cells.assign(layers, std::vector<Correlation>(s.task_count));
  for (std::size_t t = 0; t < s.task_count; ++t) {
    const ImportanceMap& a0 = pick(record, pair.a.method, source, t);
    const ImportanceMap& b0 = pick(record, pair.b.method, source, t);
    const ImportanceMap a = pair.a.squared ? square_map(a0) : a0;
    const ImportanceMap b = pair.b.squared ? square_map(b0) : b0;
    for (std::size_t l = 0; l < layers; ++l) {
      s.cells[l][t] = layer_correlation(a, b, l, kind);
    }
  }
  return s;
}

std::optional<double> mean_defined(const CorrelationSurface& surface) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& row : surface.cells) {
    for (const auto& c : row) {
      if (c) {
        sum += *c;
        ++n;
      }
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::optional<double> layer_mean(const CorrelationSurface& surface,
                                 std::size_t layer) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& c : surface.cells.at(layer)) {
    if (c) {
      sum += *c;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

double fraction_above(const CorrelationSurface& surface, double threshold) {
  std::size_t above = 0;
  std::size_t total = 0;
  for (const auto& row : surface.cells) {
    for (const auto& c : row) {
      ++total;
      if (c && *c > threshold) ++above;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(above) / static_cast<double>(total);
}

}  // namespace ewclab
