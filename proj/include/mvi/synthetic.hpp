#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "mvi/expression.hpp"
#include "mvi/game.hpp"
#include "mvi/partition.hpp"
#include "mvi/playerset.hpp"

namespace mvi {

enum class Family { kAddMul, kAndOr, kExponential };

const char* family_name(Family f);
Family family_from_name(const std::string& name);

enum class OpKind { kAdd, kMul, kAnd, kOr, kPow };
const char* op_kind_name(OpKind k);
OpKind op_kind_from_name(const std::string& name);

// merge: the operation's variables must share one coalition.
// split: they must land in different coalitions.
// ignore: addition creates no interaction; never scored.
enum class Constraint { kMerge, kSplit, kIgnore };
Constraint constraint_of(OpKind k);

struct LabeledOp {
  OpKind kind = OpKind::kAdd;
  std::vector<int> vars;  // consecutive indices for non-add operations
};

// One generated model: a chain of operation groups and singleton variables
// combined by the family connective (+ for addmul/exponential, | for
// andor), with ground-truth labels per operation and a target span A
// covering two adjacent groups.
struct SyntheticModel {
  Family family = Family::kAddMul;
  int n = 0;
  ExpressionModel expression;
  std::vector<LabeledOp> ops;  // group operations plus junction operations
  PlayerSet a;
  std::uint64_t seed = 0;
};

struct GenConfig {
  int n_min = 6, n_max = 10;
  int ops_min = 2, ops_max = 4;  // operation groups per model
  double triple_prob = 0.0;      // chance a mul/and group takes 3 variables
  int max_span = 8;              // |A| cap
};

SyntheticModel generate(Family family, std::uint64_t seed, const GenConfig& cfg = {});
std::vector<SyntheticModel> generate_dataset(Family family, int count, std::uint64_t seed,
                                             const GenConfig& cfg = {});

struct OpResult {
  LabeledOp op;
  bool scored = false;  // false for ignore-labeled or not fully inside A
  bool correct = false;
};

// Applies each operation's constraint to a partition of model.a. Only
// operations whose variables all lie inside A are scored; their rule is
// merge = one shared block, split = pairwise different blocks.
std::vector<OpResult> ground_truth_check(const SyntheticModel& model, const Partition& omega);

// Blocks = merge-labeled groups inside A, singletons elsewhere.
Partition ground_truth_partition(const SyntheticModel& model);

Game model_game(const SyntheticModel& model);
// Same game backed by a dense 2^n table; evaluation loops prefer this.
Game model_table_game(const SyntheticModel& model);

nlohmann::json model_to_manifest_json(const SyntheticModel& model);
SyntheticModel model_from_manifest_json(const nlohmann::json& j);

// JSON-lines, one model per line.
void write_manifest(std::ostream& out, const std::vector<SyntheticModel>& models);
std::vector<SyntheticModel> read_manifest(std::istream& in);

}  // namespace mvi
