#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "mvi/estimator.hpp"
#include "mvi/synthetic.hpp"

namespace mvi {

enum class Method { kOurs, kBaseline1, kBaseline2 };
const char* method_name(Method m);
Method method_from_name(const std::string& name);

// One (method, dataset) cell of the partition-accuracy table: the pooled
// rate of satisfied operation constraints over every scored operation in
// the dataset.
struct AccuracyReport {
  std::string method;
  std::string dataset;
  double rate = 0;
  int models = 0;
  long long scored = 0;
  long long correct = 0;
  std::uint64_t seed = 0;
  EstimatorConfig config;
};

// The partition of model.a a method proposes. kOurs hardens the max-direction
// optimizer's boundary probabilities at 0.5; kBaseline1 draws uniform random
// boundary bits; kBaseline2 merges adjacent members whose exact pairwise
// interaction is positive and closes transitively. cfg.seed is used as-is.
Partition method_partition(const SyntheticModel& model, Method method, const Game& g,
                           const EstimatorConfig& config);

AccuracyReport eval_method_accuracy(const std::vector<SyntheticModel>& dataset, Method method,
                                    const EstimatorConfig& config);

struct ErrorPoint {
  int game = 0;
  int epoch = 0;
  double t_truth = 0;
  double t_hat = 0;
  double abs_err = 0;
  double rel_err = 0;  // abs_err / max(|t_truth|, 1)
};

struct ErrorCurve {
  std::vector<int> epochs;  // checkpoint axis, strictly increasing
  std::vector<ErrorPoint> points;
  std::vector<double> median_abs;  // per checkpoint
  std::vector<double> median_rel;
  EstimatorConfig config;
};

// Trains the estimator on each game, then replays its per-epoch p snapshots
// at the requested checkpoints with fresh value samples and compares against
// the exact oracle under the same semantics.
ErrorCurve error_vs_exact(const std::vector<SyntheticModel>& games, const EstimatorConfig& config,
                          const std::vector<int>& checkpoints);

struct InstabilityPoint {
  int budget = 0;      // nominal per-epoch samples; K3 = budget / K2
  double median = 0;   // over non-degenerate games
  int degenerate = 0;  // games whose repeated T estimates were all zero
  std::vector<double> per_game;
};

struct InstabilitySweep {
  std::vector<InstabilityPoint> points;
  int repeats = 0;
  EstimatorConfig config;
};

InstabilitySweep instability_sweep(const std::vector<SyntheticModel>& games,
                                   const std::vector<int>& budgets, int repeats,
                                   const EstimatorConfig& config);

struct ConvergenceTrace {
  InteractionEstimate estimate;
  std::vector<int> flagged_max;  // boundaries whose final p stayed in (0.25, 0.75)
  std::vector<int> flagged_min;
  EstimatorConfig config;
};

ConvergenceTrace convergence_trace(const SyntheticModel& model, const EstimatorConfig& config);

double median(std::vector<double> xs);

// CSV writers start with '#' comment lines carrying the config JSON, so
// every artifact can be regenerated bit-identically.
void write_accuracy_csv(std::ostream& out, const std::vector<AccuracyReport>& cells);
nlohmann::json accuracy_to_json(const std::vector<AccuracyReport>& cells);
void write_error_csv(std::ostream& out, const ErrorCurve& curve);
nlohmann::json error_to_json(const ErrorCurve& curve);
void write_instability_csv(std::ostream& out, const InstabilitySweep& sweep);
nlohmann::json instability_to_json(const InstabilitySweep& sweep);
void write_convergence_csv(std::ostream& out, const ConvergenceTrace& trace);
nlohmann::json convergence_to_json(const ConvergenceTrace& trace);

}  // namespace mvi
