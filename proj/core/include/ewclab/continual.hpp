#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ewclab/importance.hpp"
#include "ewclab/network.hpp"
#include "ewclab/tasks.hpp"

namespace ewclab {

// Penalty strength selected by grid search over ten full permuted-MNIST tasks.
inline constexpr double kDefaultLambda = 3.0;

struct TrainConfig {
  std::size_t epochs = 6;
  std::size_t batch_size = 100;
  double learning_rate = 0.05;
  double lambda = kDefaultLambda;
  double si_damping = kSiDamping;
  std::uint64_t master_seed = 1;
  std::vector<Method> methods{kAllMethods.begin(), kAllMethods.end()};
  std::vector<std::size_t> architecture = kDefaultArchitecture;

  // Throws UsageError.
  void validate() const;
  bool records(Method method) const;
};

// Center and stiffness of the EWC penalty. Empty until the first task ends.
struct AnchorState {
  std::optional<NetworkParams> theta_star;
  std::optional<ImportanceMap> omega;

  bool active() const noexcept { return theta_star && omega; }
};

struct PenaltyResult {
  double value = 0.0;
  NetworkParams gradient;
};

// value = lambda/2 * sum omega (theta - theta*)^2, gradient = lambda omega
// (theta - theta*). Inactive anchor gives zero value and gradient.
PenaltyResult ewc_penalty(const NetworkParams& params, const AnchorState& anchor,
                          double lambda);

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // mean cross-entropy over the epoch
  double penalty = 0.0;     // mean penalty value over the epoch
  std::optional<double> test_accuracy;
};

struct TaskLog {
  std::size_t task_index = 0;
  std::vector<EpochLog> epochs;
};

// Minibatch order for one epoch: a shuffle of 0..n-1 seeded by
// (master_seed, task, epoch).
std::vector<std::size_t> epoch_order(std::uint64_t master_seed,
                                     std::size_t task_index, std::size_t epoch,
                                     std::size_t n);

// Minibatch SGD on mean cross-entropy plus the EWC penalty. With an active
// penalty each step is theta - lr (g + lambda omega (theta - theta*)) divided
// elementwise by 1 + lr lambda omega (implicit in the penalty); with lambda = 0
// it is plain SGD. Each step's task-loss gradient and applied update are fed
// to `si`. Throws DivergenceError on a non-finite loss.
TaskLog train_task(NetworkParams& params, const TaskDataset& train,
                   const TaskDataset* test, const AnchorState& anchor,
                   const TrainConfig& config, SiAccumulator& si);

struct ExperimentRecord {
  TrainConfig config;
  // accuracy[i][j]: test accuracy on task j after training task i.
  std::vector<std::vector<double>> accuracy;
  std::vector<TaskLog> logs;
  std::map<Method, std::vector<ImportanceMap>> raw;
  std::map<Method, std::vector<ImportanceMap>> accumulated;
  NetworkParams final_params;

  std::size_t task_count() const noexcept { return accuracy.size(); }
  bool has(Method method) const;
  // Throws UsageError when the method was not recorded.
  const ImportanceMap& accumulated_map(Method method, std::size_t task) const;
  const ImportanceMap& raw_map(Method method, std::size_t task) const;
  double mean_final_accuracy() const;
};

using ProgressFn = std::function<void(std::string_view)>;

ExperimentRecord run_sequence(const TaskSequence& tasks, const TrainConfig& config,
                              const ProgressFn& progress = {});

struct LambdaTrial {
  double lambda = 0.0;
  double mean_accuracy = 0.0;
};

struct GridSearchResult {
  double best_lambda = 0.0;
  std::vector<LambdaTrial> table;
  bool at_endpoint = false;  // best lambda is the smallest or largest grid value
};

// Picks the lambda with the highest mean final accuracy; ties go to the
// smaller lambda.
GridSearchResult select_lambda(std::vector<LambdaTrial> table);

GridSearchResult grid_search_lambda(const TaskSequence& tasks, TrainConfig config,
                                    std::span<const double> grid,
                                    const ProgressFn& progress = {});

std::vector<double> default_lambda_grid();

}  // namespace ewclab
