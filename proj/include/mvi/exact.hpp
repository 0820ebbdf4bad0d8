#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "json.hpp"
#include "mvi/game.hpp"
#include "mvi/partition.hpp"

namespace mvi {

// Enumeration limits. Player counts above these raise CapacityError.
struct Caps {
  int shapley_n = 20;     // full 2^n subset enumeration
  int components_m = 16;  // elementary-component lattice over A
  int contiguous_m = 12;  // 2^(m-1) contiguous partitions of A
  int general_m = 10;     // Bell(m) unrestricted partitions of A
};

// Context handed to each coalition C of a partition when its Shapley value
// is taken:
//   kExclusive: N\A plus [C] alone — sibling coalitions are absent.
//   kUnit:      N\A plus every coalition of the partition as one unit.
enum class Semantics { kExclusive, kUnit };

const char* semantics_name(Semantics s);
Semantics semantics_from_name(const std::string& name);

// Dense v(S) over all 2^n subsets, indexed by member mask.
std::vector<double> value_table(const Game& g, const Caps& caps = {});

// Exact Shapley values by full enumeration (factorial weights via the
// recurrence w(0)=1/n, w(s)=w(s-1)*s/(n-s)). `shapley` splits the subset
// space into fixed-size chunks reduced in order, so results are
// bit-identical for any worker count; `shapley_serial` is the plain
// textbook loop kept as a cross-check.
std::vector<double> shapley(const Game& g, const Caps& caps = {});
std::vector<double> shapley_serial(const Game& g, const Caps& caps = {});

// B(S_ij) = phi([ij] | N') - phi(i|N\{j}) - phi(j|N\{i}).
double pairwise_interaction(const Game& g, int i, int j, const Caps& caps = {});

// B([A]) = phi([A] | N\A ∪ {[A]}) - Σ_{i∈A} phi(i | N\A ∪ {i}).
double coalition_interaction(const Game& g, PlayerSet a, const Caps& caps = {});

// I(A') for all A' ⊆ A with |A'| > 1, by Möbius inversion of B over the
// subset lattice (singletons count as B = 0). Keys are member masks.
// Σ I(A') over the map equals coalition_interaction(g, A).
std::map<std::uint64_t, double> elementary_components(const Game& g, PlayerSet a,
                                                      const Caps& caps = {});

// Σ_{C∈Ω} phi(C | context(semantics)).
double partition_value(const Game& g, PlayerSet a, const Partition& omega,
                       Semantics semantics, const Caps& caps = {});

struct ExactReport {
  std::uint64_t a_mask = 0;
  int n = 0;
  Semantics semantics = Semantics::kExclusive;
  bool contiguous_only = true;
  double b = 0;      // grand-coalition partition value minus base
  double b_max = 0;  // max over partitions, minus base
  double b_min = 0;
  double t = 0;  // b_max - b_min
  double base = 0;  // singleton-partition value under the same semantics
  Partition omega_max;
  Partition omega_min;
  std::optional<std::map<std::uint64_t, double>> components;
};

// Enumerates every admissible partition of A and extremizes the partition
// value. Ties go to fewer blocks, then the lexicographically smallest
// boundary vector (general enumeration keeps the earliest in
// restricted-growth order among remaining ties).
ExactReport exact_t(const Game& g, PlayerSet a, Semantics semantics, bool contiguous_only,
                    const Caps& caps = {}, bool with_components = false);

struct SalienceMap {
  std::vector<double> weight;  // per player, nonnegative
  double pair_b = 0;           // B(S_ij) used for the sign filter
  bool empty = false;          // set when B(S_ij) == 0: nothing to attribute
};

// Weighted context map for the pair (i, j): contexts S ⊆ N\{i,j} with
// Δv(i,j,S)·B(S_ij) > 0 contribute |Δv| to every member of S. Enumerates
// when 2^(n-2) <= budget, otherwise samples `budget` contexts uniformly.
SalienceMap context_salience(const Game& g, int i, int j, std::uint64_t budget,
                             std::uint64_t seed, const Caps& caps = {});

nlohmann::json report_to_json(const ExactReport& r);

}  // namespace mvi
