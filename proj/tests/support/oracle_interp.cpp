#include "oracle_interp.hpp"

#include <limits>
#include <optional>

namespace oracle {

using namespace spectra::minic;

namespace {

struct Interp {
  const Program& program;
  OracleResult out;
  int depth = 0;

  struct Env {
    std::map<std::string, std::int64_t> locals;
  };

  std::int64_t eval(const Expr& e, Env& env) {
    return std::visit(
        [&](const auto& node) -> std::int64_t {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, IntLit>) {
            return node.value;
          } else if constexpr (std::is_same_v<T, VarRef>) {
            auto it = env.locals.find(node.name);
            if (it == env.locals.end()) throw OracleError("unknown variable " + node.name);
            return it->second;
          } else if constexpr (std::is_same_v<T, BinaryExpr>) {
            if (node.op == BinOp::And) {
              return eval(*node.lhs, env) != 0 ? (eval(*node.rhs, env) != 0 ? 1 : 0) : 0;
            }
            if (node.op == BinOp::Or) {
              return eval(*node.lhs, env) != 0 ? 1 : (eval(*node.rhs, env) != 0 ? 1 : 0);
            }
            std::int64_t a = eval(*node.lhs, env);
            std::int64_t b = eval(*node.rhs, env);
            std::int64_t r = 0;
            switch (node.op) {
              case BinOp::Add:
                if (__builtin_add_overflow(a, b, &r)) throw OracleError("overflow");
                return r;
              case BinOp::Sub:
                if (__builtin_sub_overflow(a, b, &r)) throw OracleError("overflow");
                return r;
              case BinOp::Mul:
                if (__builtin_mul_overflow(a, b, &r)) throw OracleError("overflow");
                return r;
              case BinOp::Div:
                if (b == 0) throw OracleError("division by zero");
                if (a == std::numeric_limits<std::int64_t>::min() && b == -1) {
                  throw OracleError("overflow");
                }
                return a / b;
              case BinOp::Lt: return a < b;
              case BinOp::Le: return a <= b;
              case BinOp::Eq: return a == b;
              case BinOp::Ne: return a != b;
              case BinOp::Gt: return a > b;
              case BinOp::Ge: return a >= b;
              default: throw OracleError("unreachable");
            }
          } else if constexpr (std::is_same_v<T, CallExpr>) {
            std::vector<std::int64_t> args;
            args.reserve(node.args.size());
            for (const auto& a : node.args) args.push_back(eval(*a, env));
            ++out.call_counts[node.callee];
            if (node.callee == "__probe" || node.callee == "post_message") return 0;
            if (node.callee == "print_int") {
              out.printed.push_back(args.at(0));
              return 0;
            }
            return call(node.callee, std::move(args));
          } else {
            eval(*node.first, env);
            return eval(*node.second, env);
          }
        },
        e.node);
  }

  // Runs a block; a set optional means "returned".
  std::optional<std::int64_t> exec_block(const Block& b, Env& env) {
    for (const auto& s : b.stmts) {
      auto r = exec_stmt(s, env);
      if (r) return r;
    }
    return std::nullopt;
  }

  std::optional<std::int64_t> exec_stmt(const Stmt& s, Env& env) {
    return std::visit(
        [&](const auto& node) -> std::optional<std::int64_t> {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, ExprStmt>) {
            eval(*node.expr, env);
            return std::nullopt;
          } else if constexpr (std::is_same_v<T, DeclStmt>) {
            env.locals[node.name] = eval(*node.init, env);
            return std::nullopt;
          } else if constexpr (std::is_same_v<T, AssignStmt>) {
            auto it = env.locals.find(node.name);
            if (it == env.locals.end()) throw OracleError("unknown variable " + node.name);
            it->second = eval(*node.value, env);
            return std::nullopt;
          } else if constexpr (std::is_same_v<T, IfStmt>) {
            if (eval(*node.cond, env) != 0) return exec_block(node.then_block, env);
            if (node.else_block) return exec_block(*node.else_block, env);
            return std::nullopt;
          } else if constexpr (std::is_same_v<T, WhileStmt>) {
            while (eval(*node.cond, env) != 0) {
              auto r = exec_block(node.body, env);
              if (r) return r;
            }
            return std::nullopt;
          } else {
            return eval(*node.value, env);
          }
        },
        s.node);
  }

  std::int64_t call(const std::string& name, std::vector<std::int64_t> args) {
    const FunDef* f = program.find_function(name);
    if (f == nullptr) throw OracleError("unknown function " + name);
    if (f->params.size() != args.size()) throw OracleError("bad arity for " + name);
    if (++depth > 4096) throw OracleError("oracle stack exhausted");
    Env env;
    for (std::size_t i = 0; i < args.size(); ++i) env.locals[f->params[i]] = args[i];
    auto r = exec_block(f->body, env);
    --depth;
    return r.value_or(0);
  }
};

}  // namespace

OracleResult run(const Program& program, const std::string& function,
                 std::vector<std::int64_t> args) {
  Interp interp{program, {}, 0};
  interp.out.return_value = interp.call(function, std::move(args));
  return interp.out;
}

}  // namespace oracle
