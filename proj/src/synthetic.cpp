#include "mvi/synthetic.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <string>
#include <utility>

#include "mvi/errors.hpp"
#include "mvi/exact.hpp"
#include "mvi/rng.hpp"

namespace mvi {

const char* family_name(Family f) {
  switch (f) {
    case Family::kAddMul: return "addmul";
    case Family::kAndOr: return "andor";
    case Family::kExponential: return "exponential";
  }
  return "?";
}

Family family_from_name(const std::string& name) {
  if (name == "addmul") return Family::kAddMul;
  if (name == "andor") return Family::kAndOr;
  if (name == "exponential" || name == "exp") return Family::kExponential;
  throw FormatError("unknown model family: " + name);
}

const char* op_kind_name(OpKind k) {
  switch (k) {
    case OpKind::kAdd: return "add";
    case OpKind::kMul: return "mul";
    case OpKind::kAnd: return "and";
    case OpKind::kOr: return "or";
    case OpKind::kPow: return "pow";
  }
  return "?";
}

OpKind op_kind_from_name(const std::string& name) {
  if (name == "add") return OpKind::kAdd;
  if (name == "mul") return OpKind::kMul;
  if (name == "and") return OpKind::kAnd;
  if (name == "or") return OpKind::kOr;
  if (name == "pow") return OpKind::kPow;
  throw FormatError("unknown operation kind: " + name);
}

Constraint constraint_of(OpKind k) {
  switch (k) {
    case OpKind::kMul:
    case OpKind::kAnd:
    case OpKind::kPow: return Constraint::kMerge;
    case OpKind::kOr: return Constraint::kSplit;
    case OpKind::kAdd: return Constraint::kIgnore;
  }
  return Constraint::kIgnore;
}

namespace {

void check_gen_config(const GenConfig& cfg) {
  if (cfg.n_min < 2 || cfg.n_max < cfg.n_min || cfg.n_max > kMaxPlayers)
    throw DomainError("bad player-count range");
  if (cfg.ops_min < 1 || cfg.ops_max < cfg.ops_min)
    throw DomainError("bad operation-count range");
  if (cfg.triple_prob < 0 || cfg.triple_prob > 1)
    throw DomainError("triple probability must be in [0, 1]");
  if (cfg.max_span < 2) throw DomainError("span cap must be at least 2");
}

OpKind group_kind(Family family) {
  switch (family) {
    case Family::kAddMul: return OpKind::kMul;
    case Family::kAndOr: return OpKind::kAnd;
    case Family::kExponential: return OpKind::kPow;
  }
  return OpKind::kMul;
}

ExprPtr group_expr(Family family, int lo, int size) {
  if (size == 1) return make_var(lo);
  std::vector<ExprPtr> vars;
  vars.reserve(static_cast<std::size_t>(size));
  for (int v = lo; v < lo + size; ++v) vars.push_back(make_var(v));
  switch (family) {
    case Family::kAddMul: return make_op(ExprNode::Op::kMul, std::move(vars));
    case Family::kAndOr: return make_op(ExprNode::Op::kAnd, std::move(vars));
    case Family::kExponential: return make_op(ExprNode::Op::kPow, std::move(vars));
  }
  throw DomainError("unknown family");
}

}  // namespace

SyntheticModel generate(Family family, std::uint64_t seed, const GenConfig& cfg) {
  check_gen_config(cfg);
  Rng rng(derive_seed(seed, 0xFA00 + static_cast<std::uint64_t>(family)));
  int n = cfg.n_min + static_cast<int>(rng.next_below(
                          static_cast<std::uint32_t>(cfg.n_max - cfg.n_min + 1)));
  int t = cfg.ops_min + static_cast<int>(rng.next_below(
                            static_cast<std::uint32_t>(cfg.ops_max - cfg.ops_min + 1)));
  t = std::max(1, std::min(t, n / 2));

  std::vector<int> sizes(static_cast<std::size_t>(t), 2);
  if (family != Family::kExponential && cfg.triple_prob > 0)
    for (int& s : sizes)
      if (rng.bernoulli(cfg.triple_prob)) s = 3;
  int used = 0;
  for (int s : sizes) used += s;
  for (int k = t - 1; used > n && k >= 0; --k)
    if (sizes[static_cast<std::size_t>(k)] == 3) {
      sizes[static_cast<std::size_t>(k)] = 2;
      --used;
    }
  for (int k = 0; k < n - used; ++k) sizes.push_back(1);
  // Shuffle group order so operations and singletons interleave randomly.
  for (int i = static_cast<int>(sizes.size()) - 1; i > 0; --i) {
    auto j = static_cast<int>(rng.next_below(static_cast<std::uint32_t>(i + 1)));
    std::swap(sizes[static_cast<std::size_t>(i)], sizes[static_cast<std::size_t>(j)]);
  }
  auto num_groups = static_cast<int>(sizes.size());
  if (num_groups < 2) throw DomainError("configuration cannot produce a two-group span");

  std::vector<int> group_lo(sizes.size());
  int next = 0;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    group_lo[k] = next;
    next += sizes[k];
  }

  SyntheticModel model;
  model.family = family;
  model.n = n;
  model.seed = seed;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    if (sizes[k] < 2) continue;
    LabeledOp op;
    op.kind = group_kind(family);
    for (int v = group_lo[k]; v < group_lo[k] + sizes[k]; ++v) op.vars.push_back(v);
    model.ops.push_back(std::move(op));
  }
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
    LabeledOp junction;
    junction.kind = family == Family::kAndOr ? OpKind::kOr : OpKind::kAdd;
    junction.vars = {group_lo[k] + sizes[k] - 1, group_lo[k + 1]};
    model.ops.push_back(std::move(junction));
  }

  // Target span: two adjacent whole groups; addmul/exponential need a real
  // operation inside the span so at least one constraint gets scored.
  std::vector<std::size_t> candidates;
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
    if (sizes[k] + sizes[k + 1] > cfg.max_span) continue;
    if (family != Family::kAndOr && sizes[k] < 2 && sizes[k + 1] < 2) continue;
    candidates.push_back(k);
  }
  if (candidates.empty()) throw DomainError("no admissible target span for this configuration");
  std::size_t pick =
      candidates[rng.next_below(static_cast<std::uint32_t>(candidates.size()))];
  model.a = PlayerSet::span(n, group_lo[pick], group_lo[pick + 1] + sizes[pick + 1] - 1);

  std::vector<ExprPtr> args;
  args.reserve(sizes.size());
  for (std::size_t k = 0; k < sizes.size(); ++k)
    args.push_back(group_expr(family, group_lo[k], sizes[k]));
  ExprPtr top = make_op(
      family == Family::kAndOr ? ExprNode::Op::kOr : ExprNode::Op::kAdd, std::move(args));
  model.expression = ExpressionModel::make(n, std::move(top));
  return model;
}

std::vector<SyntheticModel> generate_dataset(Family family, int count, std::uint64_t seed,
                                             const GenConfig& cfg) {
  if (count < 0) throw DomainError("model count must be non-negative");
  std::vector<SyntheticModel> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k)
    out.push_back(generate(family, derive_seed(seed, static_cast<std::uint64_t>(k)), cfg));
  return out;
}

std::vector<OpResult> ground_truth_check(const SyntheticModel& model, const Partition& omega) {
  if (!is_partition_of(model.a, omega)) throw DomainError("not a partition of the target span");
  std::vector<OpResult> out;
  out.reserve(model.ops.size());
  for (const LabeledOp& op : model.ops) {
    OpResult res;
    res.op = op;
    bool inside = true;
    for (int v : op.vars)
      if (!model.a.contains(v)) inside = false;
    Constraint c = constraint_of(op.kind);
    if (inside && c != Constraint::kIgnore) {
      res.scored = true;
      if (c == Constraint::kMerge) {
        int b0 = block_of(omega, op.vars.front());
        res.correct = true;
        for (int v : op.vars)
          if (block_of(omega, v) != b0) res.correct = false;
      } else {  // split: pairwise different blocks
        res.correct = true;
        for (std::size_t x = 0; x < op.vars.size(); ++x)
          for (std::size_t y = x + 1; y < op.vars.size(); ++y)
            if (block_of(omega, op.vars[x]) == block_of(omega, op.vars[y]))
              res.correct = false;
      }
    }
    out.push_back(std::move(res));
  }
  return out;
}

Partition ground_truth_partition(const SyntheticModel& model) {
  int lo = model.a.lowest();
  std::uint64_t bits = 0;
  for (const LabeledOp& op : model.ops) {
    if (constraint_of(op.kind) != Constraint::kMerge) continue;
    bool inside = true;
    for (int v : op.vars)
      if (!model.a.contains(v)) inside = false;
    if (!inside) continue;
    for (std::size_t q = 0; q + 1 < op.vars.size(); ++q)
      bits |= std::uint64_t{1} << (op.vars[q] - lo);
  }
  return partition_from_bits(model.a, bits);
}

Game model_game(const SyntheticModel& model) { return make_expression_game(model.expression); }

Game model_table_game(const SyntheticModel& model) {
  Game expr = make_expression_game(model.expression, Cache::kOff);
  return make_table_game(value_table(expr), Cache::kOff);
}

nlohmann::json model_to_manifest_json(const SyntheticModel& model) {
  nlohmann::json ops = nlohmann::json::array();
  for (const LabeledOp& op : model.ops)
    ops.push_back({{"kind", op_kind_name(op.kind)}, {"vars", op.vars}});
  return nlohmann::json{{"family", family_name(model.family)},
                        {"seed", model.seed},
                        {"n", model.n},
                        {"model", model_to_json(model.expression)},
                        {"ops", std::move(ops)},
                        {"A", model.a.members()}};
}

SyntheticModel model_from_manifest_json(const nlohmann::json& j) {
  if (!j.is_object()) throw FormatError("manifest line must be a JSON object");
  SyntheticModel model;
  model.family = family_from_name(j.at("family").get<std::string>());
  model.seed = j.value("seed", std::uint64_t{0});
  model.expression = expression_model_from_json(j.at("model"));
  model.n = model.expression.n;
  if (j.contains("n") && j.at("n").get<int>() != model.n)
    throw FormatError("manifest n does not match the model");
  std::uint64_t a_mask = 0;
  for (const auto& v : j.at("A")) {
    int p = v.get<int>();
    if (p < 0 || p >= model.n) throw FormatError("target span member out of range");
    a_mask |= std::uint64_t{1} << p;
  }
  model.a = PlayerSet::from_mask(model.n, a_mask);
  if (model.a.empty()) throw FormatError("target span must be non-empty");
  for (const auto& oj : j.at("ops")) {
    LabeledOp op;
    op.kind = op_kind_from_name(oj.at("kind").get<std::string>());
    for (const auto& v : oj.at("vars")) {
      int p = v.get<int>();
      if (p < 0 || p >= model.n) throw FormatError("operation variable out of range");
      op.vars.push_back(p);
    }
    if (op.vars.empty()) throw FormatError("operation needs at least one variable");
    model.ops.push_back(std::move(op));
  }
  return model;
}

void write_manifest(std::ostream& out, const std::vector<SyntheticModel>& models) {
  for (const SyntheticModel& m : models) out << model_to_manifest_json(m).dump() << "\n";
}

std::vector<SyntheticModel> read_manifest(std::istream& in) {
  std::vector<SyntheticModel> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(model_from_manifest_json(nlohmann::json::parse(line)));
  }
  return out;
}

}  // namespace mvi
