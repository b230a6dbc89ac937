#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "ewclab/matrix.hpp"
#include "ewclab/mnist.hpp"
#include "ewclab/network.hpp"

namespace ewclab {

inline constexpr std::size_t kMnistPixels = 784;

using Permutation = std::vector<std::uint32_t>;

// Fisher-Yates shuffle of 0..size-1 driven by Rng(seed).
Permutation make_permutation(std::uint64_t seed, std::size_t size = kMnistPixels);

bool is_bijection(std::span<const std::uint32_t> permutation);
Permutation invert_permutation(std::span<const std::uint32_t> permutation);

// out(k, i) = inputs(k, permutation[i])
Matrix apply_permutation(const Matrix& inputs,
                         std::span<const std::uint32_t> permutation);

// One permuted-MNIST split.
struct TaskDataset {
  Matrix inputs;
  std::vector<std::uint8_t> labels;
  std::size_t task_index = 0;
  Permutation permutation;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return labels.size(); }
};

double accuracy(const NetworkParams& params, const TaskDataset& dataset);

struct TaskSpec {
  std::size_t index = 0;
  std::uint64_t seed = 0;  // seed actually used for the permutation
  Permutation permutation;
};

// An ordered list of permuted-MNIST tasks over a shared base dataset. Task
// splits are materialized on request so that only the base images stay
// resident.
class TaskSequence {
 public:
  TaskSequence(std::shared_ptr<const MnistData> base, std::vector<TaskSpec> tasks,
               std::uint64_t master_seed);

  std::size_t size() const noexcept { return tasks_.size(); }
  std::uint64_t master_seed() const noexcept { return master_seed_; }
  const TaskSpec& spec(std::size_t i) const { return tasks_.at(i); }
  const MnistData& base() const noexcept { return *base_; }

  TaskDataset train(std::size_t i) const;
  TaskDataset test(std::size_t i) const;

 private:
  TaskDataset materialize(const LabeledImages& split, std::size_t i) const;

  std::shared_ptr<const MnistData> base_;
  std::vector<TaskSpec> tasks_;
  std::uint64_t master_seed_;
};

// Task i is permuted with the permutation seeded by master_seed ^ i. Should two
// tasks draw the same permutation, the later seed is re-derived until the
// permutations differ.
TaskSequence build_task_sequence(std::shared_ptr<const MnistData> mnist,
                                 std::size_t num_tasks, std::uint64_t master_seed);

}  // namespace ewclab
