#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "json.hpp"
#include "mvi/exact.hpp"
#include "mvi/game.hpp"
#include "mvi/partition.hpp"
#include "mvi/rng.hpp"

namespace mvi {

struct SampledShapley {
  std::vector<double> phi;
  std::vector<double> stderr_;  // per-player standard error of the mean
  std::uint64_t permutations = 0;
};

// Permutation-sampling Shapley estimate. Permutation k draws its order from
// a stream derived from (seed, k) and fixed-size chunks are reduced in index
// order, so the result is bit-identical for any worker count; the serial
// variant runs the same reduction without threads as a cross-check.
SampledShapley shapley_sampled(const Game& g, std::uint64_t permutations, std::uint64_t seed);
SampledShapley shapley_sampled_serial(const Game& g, std::uint64_t permutations,
                                      std::uint64_t seed);

enum class Direction { kMax, kMin };

struct EstimatorConfig {
  int epochs = 100;           // K1: boundary-probability updates
  int partition_samples = 8;  // K2: clamp pairs per update, round-robin over boundaries
  int subset_samples = 256;   // K3: context sweeps per sampled partition
  double learning_rate = 0.1;
  std::uint64_t seed = 0;
  Semantics semantics = Semantics::kUnit;
  double clamp_eps = 1e-3;  // p kept inside [eps, 1-eps]
  int exact_fallback_m = 2;  // |A| <= this: enumerate instead of sampling
};

// Bernoulli draw per boundary; bit b set merges A's members b and b+1.
std::uint64_t sample_partition(const std::vector<double>& p, Rng& rng);

// Monte-Carlo estimate of the partition value of the coalition structure
// encoded by merge_bits, averaged over k3 context sweeps.
double estimate_l(const Game& g, PlayerSet a, std::uint64_t merge_bits, int k3,
                  Semantics semantics, std::uint64_t seed);

// Per-boundary clamp-difference gradient: E[L | g_b=1] - E[L | g_b=0],
// estimated with k2 partition draws per boundary and shared randomness
// across the two clamps.
std::vector<double> grad_p(const Game& g, PlayerSet a, const std::vector<double>& p, int k2,
                           int k3, Semantics semantics, std::uint64_t seed);

struct EstimateTrace {
  std::vector<double> l_per_epoch;              // diagnostic mean of clamped samples
  std::vector<std::vector<double>> p_per_epoch;  // index 0 = initial p, then after each epoch
  double final_value = 0;
  std::uint64_t eval_count = 0;  // game evaluations made by this run
  bool exact_path = false;
};

struct OptimizeResult {
  std::vector<double> p;
  double value = 0;  // fresh-sample estimate of E_g L at the final p
  EstimateTrace trace;
};

// Stochastic ascent (kMax) or descent (kMin) on the boundary probabilities,
// started at 0.5. Each epoch spends K2 clamp pairs, assigned round-robin
// across boundaries, and K3 sweeps per clamp; afterwards the value is
// re-estimated with K2*K3 fresh samples so the optimum of the noise is not
// reported. Falls back to exact enumeration for tiny |A|.
OptimizeResult optimize(const Game& g, PlayerSet a, Direction dir, const EstimatorConfig& cfg);

// Fresh-sample estimate of E_{g~p} L at a fixed distribution p.
double soft_value(const Game& g, PlayerSet a, const std::vector<double>& p, int num_samples,
                  Semantics semantics, std::uint64_t seed, std::uint64_t* eval_count = nullptr);

struct InteractionEstimate {
  std::uint64_t a_mask = 0;
  int n = 0;
  Semantics semantics = Semantics::kUnit;
  double t = 0;  // l_max - l_min
  double l_max = 0, l_min = 0;
  std::vector<double> p_max, p_min;
  Partition omega_max, omega_min;  // p thresholded at 0.5
  EstimateTrace trace_max, trace_min;
  bool exact_path = false;
};

// T estimate: optimize for max and for min from seeds derived independently
// from cfg.seed, then difference the two fresh values.
InteractionEstimate estimate_t(const Game& g, PlayerSet a, const EstimatorConfig& cfg);

// E_{u!=v} |T_u - T_v| / E_w |T_w| over `repeats` reruns with distinct
// derived seeds. All-zero T estimates raise DegenerateError.
double instability(const Game& g, PlayerSet a, const EstimatorConfig& cfg, int repeats);

// Mean of per-game instability over several (game, A) inputs.
double instability_many(const std::vector<std::pair<Game, PlayerSet>>& inputs,
                        const EstimatorConfig& cfg, int repeats);

nlohmann::json estimator_config_to_json(const EstimatorConfig& cfg);
nlohmann::json estimate_to_json(const InteractionEstimate& e);

// CSV rows "epoch,L,p_1..p_{m-1}" (p as updated after that epoch).
void trace_to_csv(std::ostream& out, const EstimateTrace& trace);

}  // namespace mvi
