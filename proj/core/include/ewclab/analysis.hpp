#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ewclab/continual.hpp"
#include "ewclab/importance.hpp"

namespace ewclab {

// A correlation coefficient, or nullopt when either input has zero variance.
using Correlation = std::optional<double>;

// Two-pass Pearson product-moment coefficient. Throws UsageError when the
// lengths differ or are below 2.
Correlation pearson(std::span<const double> x, std::span<const double> y);

// Pearson over average ranks (ties share their mean rank).
Correlation spearman(std::span<const double> x, std::span<const double> y);

enum class CorrelationKind { kPearson, kSpearman };

// Correlation between the weight matrices (biases excluded) of one layer.
Correlation layer_correlation(const ImportanceMap& a, const ImportanceMap& b,
                              std::size_t layer,
                              CorrelationKind kind = CorrelationKind::kPearson);

struct MethodRef {
  Method method = Method::kFis;
  bool squared = false;

  std::string label() const;
  bool operator==(const MethodRef&) const = default;
};

struct MethodPair {
  MethodRef a;
  MethodRef b;

  bool operator==(const MethodPair&) const = default;
};

// The six unordered pairs over {FIS, MAS, SI, SIG}, followed by FIS against
// squared MAS.
std::vector<MethodPair> standard_pairs();

enum class MapSource { kAccumulated, kRaw };

struct CorrelationSurface {
  MethodPair pair;
  CorrelationKind kind = CorrelationKind::kPearson;
  std::vector<std::string> layer_names;
  std::size_t task_count = 0;
  // cells[layer][task]
  std::vector<std::vector<Correlation>> cells;

  std::size_t layer_count() const noexcept { return cells.size(); }
  const Correlation& at(std::size_t layer, std::size_t task) const {
    return cells.at(layer).at(task);
  }
};

CorrelationSurface build_surface(const ExperimentRecord& record,
                                 const MethodPair& pair,
                                 MapSource source = MapSource::kAccumulated,
                                 CorrelationKind kind = CorrelationKind::kPearson);

// Summaries over defined cells. Empty when no cell is defined.
std::optional<double> mean_defined(const CorrelationSurface& surface);
std::optional<double> layer_mean(const CorrelationSurface& surface,
                                 std::size_t layer);
// Fraction of all cells (undefined cells count as failures) strictly above
// `threshold`.
double fraction_above(const CorrelationSurface& surface, double threshold);

}  // namespace ewclab
