#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mvi/errors.hpp"

namespace mvi {

// Operator tree over variables x_0..x_{n-1}. Semantics on reals:
//   add: sum of args          mul: product of args
//   and: min of args          or:  max of args
//   pow: base ^ exponent, with 0^0 = 1 (exactly std::pow semantics)
// and/or coincide with boolean logic on {0,1} inputs and stay total on reals.
struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  enum class Op { kVar, kAdd, kMul, kAnd, kOr, kPow };
  Op op = Op::kVar;
  int var = -1;               // kVar only
  std::vector<ExprPtr> args;  // operators only
};

ExprPtr make_var(int index);
ExprPtr make_op(ExprNode::Op op, std::vector<ExprPtr> args);

double eval_expr(const ExprNode& node, std::span<const double> x);
int max_var_index(const ExprNode& node);

// JSON form: {"op": "add"|"mul"|"and"|"or"|"pow", "args": [...]} or {"var": i}.
// Rejects unknown ops, pow arity != 2, empty arg lists, bad var indices.
ExprPtr expr_from_json(const nlohmann::json& j, int n);
nlohmann::json expr_to_json(const ExprNode& node);

// A game body: ast plus the per-variable value used when a player is present
// or absent. Defaults: presence 1, baseline 0.
struct ExpressionModel {
  int n = 0;
  ExprPtr ast;
  std::vector<double> presence;
  std::vector<double> baseline;

  static ExpressionModel make(int n, ExprPtr ast);
  double eval_subset(std::uint64_t member_mask) const;
};

}  // namespace mvi
