#include "spectra/minic/traverse.hpp"

#include <unordered_set>

namespace spectra::minic {

namespace {

class Walker {
 public:
  explicit Walker(const TraverseTable& table) : table_(table) {}

  Program run(Program program) {
    for (const auto& f : program.functions) collect_block(f.body);
    for (auto& f : program.functions) walk_block(f.body);
    return program;
  }

 private:
  void collect_expr(const Expr& e) {
    input_uids_.insert(e.uid);
    std::visit(
        [&](const auto& node) {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, BinaryExpr>) {
            collect_expr(*node.lhs);
            collect_expr(*node.rhs);
          } else if constexpr (std::is_same_v<T, CallExpr>) {
            for (const auto& a : node.args) collect_expr(*a);
          } else if constexpr (std::is_same_v<T, CommaExpr>) {
            collect_expr(*node.first);
            collect_expr(*node.second);
          }
        },
        e.node);
  }

  void collect_stmt(const Stmt& s) {
    input_uids_.insert(s.uid);
    std::visit(
        [&](const auto& node) {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, ExprStmt>) {
            collect_expr(*node.expr);
          } else if constexpr (std::is_same_v<T, DeclStmt>) {
            collect_expr(*node.init);
          } else if constexpr (std::is_same_v<T, AssignStmt>) {
            collect_expr(*node.value);
          } else if constexpr (std::is_same_v<T, IfStmt>) {
            collect_expr(*node.cond);
            collect_block(node.then_block);
            if (node.else_block) collect_block(*node.else_block);
          } else if constexpr (std::is_same_v<T, WhileStmt>) {
            collect_expr(*node.cond);
            collect_block(node.body);
          } else {
            collect_expr(*node.value);
          }
        },
        s.node);
  }

  void collect_block(const Block& b) {
    for (const auto& s : b.stmts) collect_stmt(s);
  }

  ExprPtr walk_expr(ExprPtr e) {
    const bool dispatch = input_uids_.erase(e->uid) > 0;
    const auto k = static_cast<std::size_t>(kind(*e));
    if (dispatch && table_.expr_pre[k]) e = table_.expr_pre[k](std::move(e));
    walk_expr_children(*e);
    if (dispatch && table_.expr_post[k]) e = table_.expr_post[k](std::move(e));
    return e;
  }

  void walk_expr_children(Expr& e) {
    std::visit(
        [&](auto& node) {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, BinaryExpr>) {
            node.lhs = walk_expr(std::move(node.lhs));
            node.rhs = walk_expr(std::move(node.rhs));
          } else if constexpr (std::is_same_v<T, CallExpr>) {
            for (auto& a : node.args) a = walk_expr(std::move(a));
          } else if constexpr (std::is_same_v<T, CommaExpr>) {
            node.first = walk_expr(std::move(node.first));
            node.second = walk_expr(std::move(node.second));
          }
        },
        e.node);
  }

  Stmt walk_stmt(Stmt s) {
    const bool dispatch = input_uids_.erase(s.uid) > 0;
    const auto k = static_cast<std::size_t>(kind(s));
    if (dispatch && table_.stmt_pre[k]) s = table_.stmt_pre[k](std::move(s));
    walk_stmt_children(s);
    if (dispatch && table_.stmt_post[k]) s = table_.stmt_post[k](std::move(s));
    return s;
  }

  void walk_stmt_children(Stmt& s) {
    std::visit(
        [&](auto& node) {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, ExprStmt>) {
            node.expr = walk_expr(std::move(node.expr));
          } else if constexpr (std::is_same_v<T, DeclStmt>) {
            node.init = walk_expr(std::move(node.init));
          } else if constexpr (std::is_same_v<T, AssignStmt>) {
            node.value = walk_expr(std::move(node.value));
          } else if constexpr (std::is_same_v<T, IfStmt>) {
            node.cond = walk_expr(std::move(node.cond));
            walk_block(node.then_block);
            if (node.else_block) walk_block(*node.else_block);
          } else if constexpr (std::is_same_v<T, WhileStmt>) {
            node.cond = walk_expr(std::move(node.cond));
            walk_block(node.body);
          } else if constexpr (std::is_same_v<T, ReturnStmt>) {
            node.value = walk_expr(std::move(node.value));
          }
        },
        s.node);
  }

  void walk_block(Block& b) {
    for (auto& s : b.stmts) s = walk_stmt(std::move(s));
  }

  const TraverseTable& table_;
  std::unordered_set<std::uint64_t> input_uids_;
};

}  // namespace

Program traverse(Program program, const TraverseTable& table) {
  return Walker(table).run(std::move(program));
}

}  // namespace spectra::minic
