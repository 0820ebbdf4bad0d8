#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "mvi/expression.hpp"
#include "mvi/playerset.hpp"

namespace mvi {

enum class Cache { kAuto, kOn, kOff };  // kAuto: on iff n <= 24

// A cooperative game v : 2^N -> R with v(empty) == 0 exactly, enforced by
// subtracting the raw value of the empty set once at construction. Games are
// cheap shared handles: copies alias the same state, cache, and counters.
// Immutable after construction; eval is safe to call from many threads.
class Game {
 public:
  using EvalFn = std::function<double(std::uint64_t)>;  // raw member-mask -> value

  Game() = default;
  Game(int n, EvalFn raw, Cache cache = Cache::kAuto);

  int n() const { return s_->n; }
  bool valid() const { return s_ != nullptr; }
  bool cache_enabled() const { return s_->cache_on; }

  double eval(PlayerSet set) const;
  double eval_mask(std::uint64_t member_mask) const;

  // queries: eval calls answered (including cache hits).
  // raw_evals: invocations of the underlying function (cache misses).
  std::uint64_t queries() const { return s_->queries.load(std::memory_order_relaxed); }
  std::uint64_t raw_evals() const { return s_->raw.load(std::memory_order_relaxed); }
  void reset_counters() const;

 private:
  static constexpr int kShards = 16;
  struct Shard {
    std::mutex mu;
    std::unordered_map<std::uint64_t, double> map;
  };
  struct State {
    int n = 0;
    EvalFn fn;
    double offset = 0;
    bool cache_on = false;
    std::array<Shard, kShards> shards;
    std::atomic<std::uint64_t> queries{0};
    std::atomic<std::uint64_t> raw{0};
  };
  std::shared_ptr<State> s_;
};

// Game backed by an exhaustive table indexed by subset bit pattern.
// Infers n from the length; the table already being random-access, the
// memo cache defaults off.
Game make_table_game(std::vector<double> values, Cache cache = Cache::kOff);

Game make_expression_game(ExpressionModel model, Cache cache = Cache::kAuto);

// A set function with vector output; becomes a scalar game via projection
// onto the full-set feature direction: v(S) = <f_N, f_S> / ||f_N||_2.
struct VectorGame {
  int n = 0;
  std::function<std::vector<double>(std::uint64_t)> eval_vec;
};

Game project_vector(const VectorGame& vg, Cache cache = Cache::kAuto);

// Validates units (non-empty, within n, pairwise disjoint) and sorts them
// by lowest member, which fixes the player order of every derived game.
std::vector<PlayerSet> normalize_units(int n, std::vector<PlayerSet> units);

// Game whose players are the given unit coalitions: player k present expands
// to all members of the k-th sorted unit; original players covered by no
// unit are permanently absent. This one constructor subsumes contraction
// (units = outside singletons + one coalition) and restriction (units = the
// surviving singletons).
Game with_units(const Game& g, std::vector<PlayerSet> units, Cache cache = Cache::kAuto);

// Merge coalition C into one player, keep everyone else. The new player
// sits at the position of C's lowest index (see contract_index).
Game contract(const Game& g, PlayerSet c, Cache cache = Cache::kAuto);

// Index of the merged player [C] in contract(g, C): everything below
// C's lowest index survives unchanged, so [C] lands at that index.
int contract_index(PlayerSet c);

// Game over |alive| players (re-indexed by rank); everyone else is
// permanently masked to baseline.
Game restrict_to(const Game& g, PlayerSet alive, Cache cache = Cache::kAuto);

Game sum_game(const Game& a, const Game& b, Cache cache = Cache::kOff);
Game scaled_game(double factor, const Game& g, Cache cache = Cache::kOff);

// Model files: { "n": int, "type": "expression" | "table" | "vector_table",
//   "ast": {...}, "presence": [...], "baseline": [...]   (expression)
//   "values": [2^n reals]                                (table)
//   "values": [2^n arrays of d reals]                    (vector_table) }
Game game_from_model_json(const nlohmann::json& j);
ExpressionModel expression_model_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const ExpressionModel& m);

}  // namespace mvi
