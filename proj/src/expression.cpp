#include "mvi/expression.hpp"

#include <algorithm>
#include <cmath>

#include "mvi/playerset.hpp"

namespace mvi {

ExprPtr make_var(int index) {
  if (index < 0) throw DomainError("variable index must be non-negative");
  auto node = std::make_shared<ExprNode>();
  node->op = ExprNode::Op::kVar;
  node->var = index;
  return node;
}

ExprPtr make_op(ExprNode::Op op, std::vector<ExprPtr> args) {
  if (op == ExprNode::Op::kVar) throw DomainError("kVar is not an operator");
  if (args.empty()) throw FormatError("operator node needs at least one argument");
  if (op == ExprNode::Op::kPow && args.size() != 2)
    throw FormatError("pow takes exactly two arguments");
  auto node = std::make_shared<ExprNode>();
  node->op = op;
  node->args = std::move(args);
  return node;
}

double eval_expr(const ExprNode& node, std::span<const double> x) {
  switch (node.op) {
    case ExprNode::Op::kVar:
      return x[static_cast<std::size_t>(node.var)];
    case ExprNode::Op::kAdd: {
      double s = 0;
      for (const auto& a : node.args) s += eval_expr(*a, x);
      return s;
    }
    case ExprNode::Op::kMul: {
      double s = 1;
      for (const auto& a : node.args) s *= eval_expr(*a, x);
      return s;
    }
    case ExprNode::Op::kAnd: {
      double s = eval_expr(*node.args[0], x);
      for (std::size_t i = 1; i < node.args.size(); ++i)
        s = std::min(s, eval_expr(*node.args[i], x));
      return s;
    }
    case ExprNode::Op::kOr: {
      double s = eval_expr(*node.args[0], x);
      for (std::size_t i = 1; i < node.args.size(); ++i)
        s = std::max(s, eval_expr(*node.args[i], x));
      return s;
    }
    case ExprNode::Op::kPow:
      return std::pow(eval_expr(*node.args[0], x), eval_expr(*node.args[1], x));
  }
  return 0;  // unreachable
}

int max_var_index(const ExprNode& node) {
  if (node.op == ExprNode::Op::kVar) return node.var;
  int m = -1;
  for (const auto& a : node.args) m = std::max(m, max_var_index(*a));
  return m;
}

namespace {

ExprNode::Op op_from_name(const std::string& name) {
  if (name == "add") return ExprNode::Op::kAdd;
  if (name == "mul") return ExprNode::Op::kMul;
  if (name == "and") return ExprNode::Op::kAnd;
  if (name == "or") return ExprNode::Op::kOr;
  if (name == "pow") return ExprNode::Op::kPow;
  throw FormatError("unknown expression op: " + name);
}

std::string op_name(ExprNode::Op op) {
  switch (op) {
    case ExprNode::Op::kAdd: return "add";
    case ExprNode::Op::kMul: return "mul";
    case ExprNode::Op::kAnd: return "and";
    case ExprNode::Op::kOr: return "or";
    case ExprNode::Op::kPow: return "pow";
    case ExprNode::Op::kVar: break;
  }
  throw DomainError("kVar has no op name");
}

}  // namespace

ExprPtr expr_from_json(const nlohmann::json& j, int n) {
  if (!j.is_object()) throw FormatError("expression node must be a JSON object");
  if (j.contains("var")) {
    if (!j["var"].is_number_integer()) throw FormatError("\"var\" must be an integer");
    int v = j["var"].get<int>();
    if (v < 0 || v >= n) throw FormatError("variable index out of range for n");
    return make_var(v);
  }
  if (!j.contains("op") || !j.contains("args"))
    throw FormatError("expression node needs \"op\"+\"args\" or \"var\"");
  ExprNode::Op op = op_from_name(j["op"].get<std::string>());
  if (!j["args"].is_array() || j["args"].empty())
    throw FormatError("\"args\" must be a non-empty array");
  std::vector<ExprPtr> args;
  args.reserve(j["args"].size());
  for (const auto& a : j["args"]) args.push_back(expr_from_json(a, n));
  return make_op(op, std::move(args));
}

nlohmann::json expr_to_json(const ExprNode& node) {
  if (node.op == ExprNode::Op::kVar) return nlohmann::json{{"var", node.var}};
  nlohmann::json args = nlohmann::json::array();
  for (const auto& a : node.args) args.push_back(expr_to_json(*a));
  return nlohmann::json{{"op", op_name(node.op)}, {"args", std::move(args)}};
}

ExpressionModel ExpressionModel::make(int n, ExprPtr ast) {
  if (!ast) throw DomainError("null expression");
  if (n <= 0 || n > kMaxPlayers) throw DomainError("bad player count");
  if (max_var_index(*ast) >= n) throw DomainError("expression references variable >= n");
  ExpressionModel m;
  m.n = n;
  m.ast = std::move(ast);
  m.presence.assign(static_cast<std::size_t>(n), 1.0);
  m.baseline.assign(static_cast<std::size_t>(n), 0.0);
  return m;
}

double ExpressionModel::eval_subset(std::uint64_t member_mask) const {
  thread_local std::vector<double> x;
  x.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    x[static_cast<std::size_t>(i)] =
        ((member_mask >> i) & 1) ? presence[static_cast<std::size_t>(i)]
                                 : baseline[static_cast<std::size_t>(i)];
  return eval_expr(*ast, x);
}

}  // namespace mvi
