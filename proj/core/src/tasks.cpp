#include "ewclab/tasks.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "ewclab/errors.hpp"
#include "ewclab/rng.hpp"

namespace ewclab {

Permutation make_permutation(std::uint64_t seed, std::size_t size) {
  Permutation perm(size);
  std::iota(perm.begin(), perm.end(), 0u);
  Rng rng(seed);
  shuffle(std::span<std::uint32_t>(perm), rng);
  return perm;
}

bool is_bijection(std::span<const std::uint32_t> permutation) {
  std::vector<bool> seen(permutation.size(), false);
  for (std::uint32_t p : permutation) {
    if (p >= permutation.size() || seen[p]) return false;
    seen[p] = true;
  }
  return true;
}

Permutation invert_permutation(std::span<const std::uint32_t> permutation) {
  if (!is_bijection(permutation)) {
    throw UsageError("invert_permutation: not a bijection");
  }
  Permutation inverse(permutation.size());
  for (std::size_t i = 0; i < permutation.size(); ++i) {
    inverse[permutation[i]] = static_cast<std::uint32_t>(i);
  }
  return inverse;
}

Matrix apply_permutation(const Matrix& inputs,
                         std::span<const std::uint32_t> permutation) {
  if (permutation.size() != inputs.cols()) {
    throw DimensionError("apply_permutation: permutation of length " +
                         std::to_string(permutation.size()) + " for " +
                         std::to_string(inputs.cols()) + " columns");
  }
  if (!is_bijection(permutation)) {
    throw UsageError("apply_permutation: not a bijection");
  }
  Matrix out(inputs.rows(), inputs.cols());
  for (std::size_t k = 0; k < inputs.rows(); ++k) {
    auto src = inputs.row(k);
    auto dst = out.row(k);
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = src[permutation[i]];
  }
  return out;
}

double accuracy(const NetworkParams& params, const TaskDataset& dataset) {
  return accuracy(params, dataset.inputs, dataset.labels);
}

TaskSequence::TaskSequence(std::shared_ptr<const MnistData> base,
                           std::vector<TaskSpec> tasks, std::uint64_t master_seed)
    : base_(std::move(base)), tasks_(std::move(tasks)), master_seed_(master_seed) {
  if (!base_) throw UsageError("TaskSequence: no base dataset");
  for (const TaskSpec& t : tasks_) {
    if (t.permutation.size() != base_->train.inputs.cols() ||
        t.permutation.size() != base_->test.inputs.cols()) {
      throw DimensionError("TaskSequence: permutation length does not match "
                           "image size");
    }
  }
}

TaskDataset TaskSequence::materialize(const LabeledImages& split,
                                      std::size_t i) const {
  const TaskSpec& t = tasks_.at(i);
  TaskDataset d;
  d.inputs = apply_permutation(split.inputs, t.permutation);
  d.labels = split.labels;
  d.task_index = t.index;
  d.permutation = t.permutation;
  d.seed = t.seed;
  return d;
}

TaskDataset TaskSequence::train(std::size_t i) const {
  return materialize(base_->train, i);
}

TaskDataset TaskSequence::test(std::size_t i) const {
  return materialize(base_->test, i);
}

TaskSequence build_task_sequence(std::shared_ptr<const MnistData> mnist,
                                 std::size_t num_tasks, std::uint64_t master_seed) {
  if (num_tasks < 1) throw UsageError("build_task_sequence: num_tasks must be >= 1");
  if (!mnist) throw UsageError("build_task_sequence: no dataset");
  const std::size_t pixels = mnist->train.inputs.cols();

  std::vector<TaskSpec> tasks;
  tasks.reserve(num_tasks);
  for (std::size_t i = 0; i < num_tasks; ++i) {
    std::uint64_t seed = master_seed ^ static_cast<std::uint64_t>(i);
    Permutation perm = make_permutation(seed, pixels);
    auto collides = [&](const Permutation& p) {
      return std::any_of(tasks.begin(), tasks.end(),
                         [&](const TaskSpec& t) { return t.permutation == p; });
    };
    while (collides(perm)) {
      seed = splitmix64(seed);
      perm = make_permutation(seed, pixels);
    }
    tasks.push_back(TaskSpec{i, seed, std::move(perm)});
  }
  return TaskSequence(std::move(mnist), std::move(tasks), master_seed);
}

}  // namespace ewclab
