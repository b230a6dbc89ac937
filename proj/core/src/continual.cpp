#include "ewclab/continual.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ewclab/errors.hpp"
#include "ewclab/rng.hpp"

namespace ewclab {
namespace {

constexpr std::uint64_t kInitStream = 0x696e6974;     // "init"
constexpr std::uint64_t kShuffleStream = 0x73687566;  // "shuf"

std::string format_lambda(double lambda) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", lambda);
  return buf;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw UsageError("epochs must be >= 1");
  if (batch_size < 1) throw UsageError("batch size must be >= 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw UsageError("lambda must be a finite value >= 0");
  }
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw UsageError("learning rate must be a finite value >= 0");
  }
  if (!(si_damping > 0.0)) throw UsageError("SI damping must be > 0");
  if (architecture.size() < 2) throw UsageError("architecture needs >= 2 widths");
}

bool TrainConfig::records(Method method) const {
  return std::find(methods.begin(), methods.end(), method) != methods.end();
}

PenaltyResult ewc_penalty(const NetworkParams& params, const AnchorState& anchor,
                          double lambda) {
  PenaltyResult out{0.0, transformed(params, [](double) { return 0.0; })};
  if (!anchor.active()) return out;
  require_same_shape(params, *anchor.theta_star, "ewc_penalty (anchor)");
  require_same_shape(params, anchor.omega->values, "ewc_penalty (importance)");

  auto theta = params.blocks();
  auto star = anchor.theta_star->blocks();
  auto omega = anchor.omega->values.blocks();
  auto grad = out.gradient.blocks();
  double sum = 0.0;
  for (std::size_t b = 0; b < theta.size(); ++b) {
    for (std::size_t i = 0; i < theta[b].size(); ++i) {
      const double d = theta[b][i] - star[b][i];
      sum += omega[b][i] * d * d;
      grad[b][i] = lambda * omega[b][i] * d;
    }
  }
  out.value = 0.5 * lambda * sum;
  return out;
}

std::vector<std::size_t> epoch_order(std::uint64_t master_seed,
                                     std::size_t task_index, std::size_t epoch,
                                     std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::uint64_t seed = mix_seed(
      mix_seed(mix_seed(master_seed, kShuffleStream), task_index), epoch);
  Rng rng(seed);
  shuffle(std::span<std::size_t>(order), rng);
  return order;
}

TaskLog train_task(NetworkParams& params, const TaskDataset& train,
                   const TaskDataset* test, const AnchorState& anchor,
                   const TrainConfig& config, SiAccumulator& si) {
  config.validate();
  const std::size_t n = train.size();
  if (n == 0) throw UsageError("train_task: empty dataset");
  if (train.inputs.rows() != n) {
    throw DimensionError("train_task: label count does not match samples");
  }
  const bool penalized = config.lambda > 0.0 && anchor.active();

  TaskLog log{train.task_index, {}};
  std::size_t step = 0;
  std::vector<std::uint8_t> batch_labels;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto order = epoch_order(config.master_seed, train.task_index, epoch, n);
    double loss_sum = 0.0;
    double penalty_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t first = 0; first < n; first += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, n - first);
      const std::span<const std::size_t> rows(order.data() + first, count);
      batch_labels.resize(count);
      for (std::size_t k = 0; k < count; ++k) batch_labels[k] = train.labels[rows[k]];

      const ForwardTrace trace = forward(params, gather_rows(train.inputs, rows));
      const double scale = 1.0 / static_cast<double>(count);
      const double loss =
          objective_value(trace, Objective::kCrossEntropy, batch_labels) * scale;
      NetworkParams task_grad =
          backward(params, trace, Objective::kCrossEntropy, batch_labels);
      for (auto block : task_grad.blocks()) {
        for (double& g : block) g *= scale;
      }

      const double lr = config.learning_rate;
      NetworkParams update = transformed(task_grad, [lr](double g) { return -lr * g; });
      double penalty = 0.0;
      if (penalized) {
        // Implicit step on the quadratic penalty: the gradient step is divided
        // by 1 + lr * lambda * omega, which stays stable for any lambda.
        const PenaltyResult p = ewc_penalty(params, anchor, config.lambda);
        penalty = p.value;
        axpy(-lr, p.gradient, update);
        update = combined(update, anchor.omega->values,
                          [scale = lr * config.lambda](double u, double w) {
                            return u / (1.0 + scale * w);
                          });
      }
      if (!std::isfinite(loss + penalty)) {
        throw DivergenceError(step, "loss became non-finite at step " +
                                        std::to_string(step) + " of task " +
                                        std::to_string(train.task_index));
      }
      si.step(task_grad, update);
      axpy(1.0, update, params);

      loss_sum += loss;
      penalty_sum += penalty;
      ++batches;
      ++step;
    }
    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = loss_sum / static_cast<double>(batches);
    entry.penalty = penalty_sum / static_cast<double>(batches);
    if (test != nullptr) entry.test_accuracy = accuracy(params, *test);
    log.epochs.push_back(entry);
  }
  return log;
}

bool ExperimentRecord::has(Method method) const {
  return accumulated.contains(method) && raw.contains(method);
}

const ImportanceMap& ExperimentRecord::accumulated_map(Method method,
                                                      std::size_t task) const {
  const auto it = accumulated.find(method);
  if (it == accumulated.end() || task >= it->second.size()) {
    throw UsageError("experiment record has no accumulated " +
                     std::string(method_name(method)) + " map for task " +
                     std::to_string(task));
  }
  return it->second[task];
}

const ImportanceMap& ExperimentRecord::raw_map(Method method,
                                              std::size_t task) const {
  const auto it = raw.find(method);
  if (it == raw.end() || task >= it->second.size()) {
    throw UsageError("experiment record has no raw " +
                     std::string(method_name(method)) + " map for task " +
                     std::to_string(task));
  }
  return it->second[task];
}

double ExperimentRecord::mean_final_accuracy() const {
  if (accuracy.empty()) throw UsageError("experiment record is empty");
  const auto& last = accuracy.back();
  return std::accumulate(last.begin(), last.end(), 0.0) /
         static_cast<double>(last.size());
}

ExperimentRecord run_sequence(const TaskSequence& tasks, const TrainConfig& config,
                              const ProgressFn& progress) {
  config.validate();
  auto say = [&](const std::string& msg) {
    if (progress) progress(msg);
  };

  ExperimentRecord record;
  record.config = config;
  NetworkParams params =
      init_params(config.architecture, mix_seed(config.master_seed, kInitStream));

  std::vector<TaskDataset> tests;
  tests.reserve(tasks.size());
  for (std::size_t j = 0; j < tasks.size(); ++j) tests.push_back(tasks.test(j));

  AnchorState anchor;
  SiAccumulator si(params);
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const TaskDataset train = tasks.train(i);
    say("task " + std::to_string(i + 1) + "/" + std::to_string(tasks.size()) +
        ": training");
    si.reset(params);
    record.logs.push_back(train_task(params, train, &tests[i], anchor, config, si));

    say("task " + std::to_string(i + 1) + "/" + std::to_string(tasks.size()) +
        ": importances");
    std::map<Method, ImportanceMap> fresh;
    fresh.emplace(Method::kMas, compute_mas(params, train));
    fresh.emplace(Method::kSi, si.finalize(params, config.si_damping, i));
    if (config.records(Method::kFis)) {
      fresh.emplace(Method::kFis, compute_fis(params, train));
    }
    if (config.records(Method::kSig)) {
      fresh.emplace(Method::kSig, compute_sig(params, train));
    }

    for (const auto& [method, map] : fresh) {
      if (!config.records(method)) continue;
      auto& acc = record.accumulated[method];
      acc.push_back(acc.empty() ? map : accumulate(acc.back(), map));
      record.raw[method].push_back(map);
    }

    const ImportanceMap& mas = fresh.at(Method::kMas);
    anchor.omega = anchor.omega ? accumulate(*anchor.omega, mas) : mas;
    anchor.theta_star = params;

    std::vector<double> row;
    row.reserve(tests.size());
    for (const TaskDataset& t : tests) row.push_back(accuracy(params, t));
    record.accuracy.push_back(std::move(row));
  }
  record.final_params = std::move(params);
  return record;
}

GridSearchResult select_lambda(std::vector<LambdaTrial> table) {
  if (table.empty()) throw UsageError("lambda grid is empty");
  std::size_t best = 0;
  for (std::size_t i = 1; i < table.size(); ++i) {
    const auto& c = table[i];
    const auto& b = table[best];
    if (c.mean_accuracy > b.mean_accuracy ||
        (c.mean_accuracy == b.mean_accuracy && c.lambda < b.lambda)) {
      best = i;
    }
  }
  GridSearchResult out;
  out.best_lambda = table[best].lambda;
  const auto [lo, hi] = std::minmax_element(
      table.begin(), table.end(),
      [](const LambdaTrial& a, const LambdaTrial& b) { return a.lambda < b.lambda; });
  out.at_endpoint =
      table.size() > 1 && (out.best_lambda == lo->lambda || out.best_lambda == hi->lambda);
  out.table = std::move(table);
  return out;
}

GridSearchResult grid_search_lambda(const TaskSequence& tasks, TrainConfig config,
                                    std::span<const double> grid,
                                    const ProgressFn& progress) {
  if (grid.empty()) throw UsageError("lambda grid is empty");
  // Only the penalty-driving estimator is needed to score a lambda.
  config.methods = {Method::kMas};
  std::vector<LambdaTrial> table;
  for (double lambda : grid) {
    config.lambda = lambda;
    if (progress) progress("lambda " + format_lambda(lambda));
    const ExperimentRecord r = run_sequence(tasks, config, progress);
    table.push_back({lambda, r.mean_final_accuracy()});
  }
  return select_lambda(std::move(table));
}

std::vector<double> default_lambda_grid() {
  return {0.1, 1, 3, 10, 30, 100, 300, 1000};
}

}  // namespace ewclab
