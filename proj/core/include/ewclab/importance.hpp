#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "ewclab/matrix.hpp"
#include "ewclab/network.hpp"
#include "ewclab/tasks.hpp"

namespace ewclab {

enum class Method { kFis, kMas, kSi, kSig };

inline constexpr std::array<Method, 4> kAllMethods{Method::kFis, Method::kMas,
                                                   Method::kSi, Method::kSig};

// "FIS", "MAS", "SI", "SIG"
std::string_view method_name(Method method);
// Case-insensitive inverse of method_name.
Method parse_method(std::string_view name);

// Per-parameter importance values, shaped like the network they describe.
struct ImportanceMap {
  Method method = Method::kFis;
  bool squared = false;
  std::size_t task_index = 0;
  NetworkParams values;

  std::string label() const;  // e.g. "MAS" or "MAS^2"

  bool operator==(const ImportanceMap&) const = default;
};

ImportanceMap zero_map(Method method, const NetworkParams& like,
                       std::size_t task_index = 0);

// Empirical Fisher diagonal: mean over samples of the squared gradient of
// log p(label | x).
ImportanceMap compute_fis(const NetworkParams& params, const Matrix& inputs,
                          std::span<const std::uint8_t> labels,
                          std::size_t task_index = 0);
ImportanceMap compute_fis(const NetworkParams& params, const TaskDataset& dataset);

// Mean over samples of |d/dtheta sum_j p_j^2|.
ImportanceMap compute_mas(const NetworkParams& params, const Matrix& inputs,
                          std::size_t task_index = 0);
ImportanceMap compute_mas(const NetworkParams& params, const TaskDataset& dataset);

// Total absolute signal through each connection: sum_k |a_i^(k) w_ij| for a
// weight fed by activation a_i, N |b_j| for a bias.
ImportanceMap compute_sig(const NetworkParams& params, const Matrix& inputs,
                          std::size_t task_index = 0);
ImportanceMap compute_sig(const NetworkParams& params, const TaskDataset& dataset);

inline constexpr double kSiDamping = 1e-3;

// Online path integral for synaptic-intelligence importance. Owned by one
// training loop; reset at every task boundary.
class SiAccumulator {
 public:
  explicit SiAccumulator(const NetworkParams& start);

  void reset(const NetworkParams& start);

  // omega -= grad * delta, elementwise. `grad` is the task-loss gradient at
  // the pre-step parameters and `delta` the update that was applied.
  void step(const NetworkParams& grad, const NetworkParams& delta);

  // omega / ((end - start)^2 + damping); then resets with start = end.
  ImportanceMap finalize(const NetworkParams& end, double damping = kSiDamping,
                         std::size_t task_index = 0);

  const NetworkParams& omega() const noexcept { return omega_; }
  const NetworkParams& start() const noexcept { return start_; }

 private:
  NetworkParams start_;
  NetworkParams omega_;
};

// Elementwise sum; the result carries next.task_index.
ImportanceMap accumulate(const ImportanceMap& prior, const ImportanceMap& next);

ImportanceMap square_map(const ImportanceMap& map);

}  // namespace ewclab
