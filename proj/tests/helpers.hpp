#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "mvi/expression.hpp"
#include "mvi/game.hpp"
#include "mvi/rng.hpp"

namespace th {

inline mvi::ExprPtr V(int i) { return mvi::make_var(i); }

inline mvi::ExprPtr op(mvi::ExprNode::Op o, std::vector<mvi::ExprPtr> args) {
  return mvi::make_op(o, std::move(args));
}

inline mvi::ExprPtr add(std::vector<mvi::ExprPtr> a) { return op(mvi::ExprNode::Op::kAdd, std::move(a)); }
inline mvi::ExprPtr mul(std::vector<mvi::ExprPtr> a) { return op(mvi::ExprNode::Op::kMul, std::move(a)); }
inline mvi::ExprPtr band(std::vector<mvi::ExprPtr> a) { return op(mvi::ExprNode::Op::kAnd, std::move(a)); }
inline mvi::ExprPtr bor(std::vector<mvi::ExprPtr> a) { return op(mvi::ExprNode::Op::kOr, std::move(a)); }
inline mvi::ExprPtr pw(mvi::ExprPtr base, mvi::ExprPtr exp) {
  std::vector<mvi::ExprPtr> a;
  a.push_back(std::move(base));
  a.push_back(std::move(exp));
  return op(mvi::ExprNode::Op::kPow, std::move(a));
}

inline mvi::Game expr_game(int n, mvi::ExprPtr ast, mvi::Cache cache = mvi::Cache::kOff) {
  return mvi::make_expression_game(mvi::ExpressionModel::make(n, std::move(ast)), cache);
}

// Random dense game with values in [-1, 1).
inline mvi::Game random_table_game(int n, std::uint64_t seed) {
  mvi::Rng rng(seed);
  std::vector<double> values(std::size_t{1} << n);
  for (double& v : values) v = 2 * rng.next_double() - 1;
  values[0] = 0;
  return mvi::make_table_game(std::move(values));
}

inline bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace th
