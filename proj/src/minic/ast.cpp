#include "spectra/minic/ast.hpp"

#include <atomic>

namespace spectra::minic {

namespace {

std::uint64_t next_uid() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

}  // namespace

const char* to_string(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::And: return "&&";
    case BinOp::Or: return "||";
  }
  return "?";
}

Expr::Expr(SourcePos p, ExprNode n) : pos(p), uid(next_uid()), node(std::move(n)) {}

Stmt::Stmt(SourcePos p, StmtNode n) : pos(p), uid(next_uid()), node(std::move(n)) {}

ExprPtr make_expr(SourcePos pos, ExprNode node) {
  return std::make_unique<Expr>(pos, std::move(node));
}

const FunDef* Program::find_function(const std::string& name) const {
  for (const auto& f : functions) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

ExprPtr clone(const Expr& e) {
  ExprNode node = std::visit(
      [](const auto& n) -> ExprNode {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, IntLit>) {
          return IntLit{n.value};
        } else if constexpr (std::is_same_v<T, VarRef>) {
          return VarRef{n.name};
        } else if constexpr (std::is_same_v<T, BinaryExpr>) {
          return BinaryExpr{n.op, clone(*n.lhs), clone(*n.rhs)};
        } else if constexpr (std::is_same_v<T, CallExpr>) {
          CallExpr c{n.callee, {}};
          c.args.reserve(n.args.size());
          for (const auto& a : n.args) c.args.push_back(clone(*a));
          return c;
        } else {
          return CommaExpr{clone(*n.first), clone(*n.second)};
        }
      },
      e.node);
  return make_expr(e.pos, std::move(node));
}

namespace {

Stmt clone_stmt(const Stmt& s) {
  StmtNode node = std::visit(
      [](const auto& n) -> StmtNode {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ExprStmt>) {
          return ExprStmt{clone(*n.expr)};
        } else if constexpr (std::is_same_v<T, DeclStmt>) {
          return DeclStmt{n.name, clone(*n.init)};
        } else if constexpr (std::is_same_v<T, AssignStmt>) {
          return AssignStmt{n.name, clone(*n.value)};
        } else if constexpr (std::is_same_v<T, IfStmt>) {
          IfStmt out{clone(*n.cond), clone(n.then_block), std::nullopt};
          if (n.else_block) out.else_block = clone(*n.else_block);
          return out;
        } else if constexpr (std::is_same_v<T, WhileStmt>) {
          return WhileStmt{clone(*n.cond), clone(n.body)};
        } else {
          return ReturnStmt{clone(*n.value)};
        }
      },
      s.node);
  return Stmt(s.pos, std::move(node));
}

}  // namespace

Block clone(const Block& b) {
  Block out;
  out.stmts.reserve(b.stmts.size());
  for (const auto& s : b.stmts) out.stmts.push_back(clone_stmt(s));
  return out;
}

FunDef clone(const FunDef& f) {
  return FunDef{f.name, f.params, clone(f.body), f.pos};
}

Program clone(const Program& p) {
  Program out;
  out.functions.reserve(p.functions.size());
  for (const auto& f : p.functions) out.functions.push_back(clone(f));
  return out;
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  switch (kind(a)) {
    case ExprKind::IntLit:
      return std::get<IntLit>(a.node).value == std::get<IntLit>(b.node).value;
    case ExprKind::Var:
      return std::get<VarRef>(a.node).name == std::get<VarRef>(b.node).name;
    case ExprKind::Binary: {
      const auto& x = std::get<BinaryExpr>(a.node);
      const auto& y = std::get<BinaryExpr>(b.node);
      return x.op == y.op && structurally_equal(*x.lhs, *y.lhs) &&
             structurally_equal(*x.rhs, *y.rhs);
    }
    case ExprKind::Call: {
      const auto& x = std::get<CallExpr>(a.node);
      const auto& y = std::get<CallExpr>(b.node);
      if (x.callee != y.callee || x.args.size() != y.args.size()) return false;
      for (std::size_t i = 0; i < x.args.size(); ++i) {
        if (!structurally_equal(*x.args[i], *y.args[i])) return false;
      }
      return true;
    }
    case ExprKind::Comma: {
      const auto& x = std::get<CommaExpr>(a.node);
      const auto& y = std::get<CommaExpr>(b.node);
      return structurally_equal(*x.first, *y.first) &&
             structurally_equal(*x.second, *y.second);
    }
  }
  return false;
}

namespace {

bool stmt_equal(const Stmt& a, const Stmt& b) {
  if (a.node.index() != b.node.index()) return false;
  switch (kind(a)) {
    case StmtKind::Expr:
      return structurally_equal(*std::get<ExprStmt>(a.node).expr,
                                *std::get<ExprStmt>(b.node).expr);
    case StmtKind::Decl: {
      const auto& x = std::get<DeclStmt>(a.node);
      const auto& y = std::get<DeclStmt>(b.node);
      return x.name == y.name && structurally_equal(*x.init, *y.init);
    }
    case StmtKind::Assign: {
      const auto& x = std::get<AssignStmt>(a.node);
      const auto& y = std::get<AssignStmt>(b.node);
      return x.name == y.name && structurally_equal(*x.value, *y.value);
    }
    case StmtKind::If: {
      const auto& x = std::get<IfStmt>(a.node);
      const auto& y = std::get<IfStmt>(b.node);
      if (!structurally_equal(*x.cond, *y.cond)) return false;
      if (!structurally_equal(x.then_block, y.then_block)) return false;
      if (x.else_block.has_value() != y.else_block.has_value()) return false;
      return !x.else_block || structurally_equal(*x.else_block, *y.else_block);
    }
    case StmtKind::While: {
      const auto& x = std::get<WhileStmt>(a.node);
      const auto& y = std::get<WhileStmt>(b.node);
      return structurally_equal(*x.cond, *y.cond) && structurally_equal(x.body, y.body);
    }
    case StmtKind::Return:
      return structurally_equal(*std::get<ReturnStmt>(a.node).value,
                                *std::get<ReturnStmt>(b.node).value);
  }
  return false;
}

}  // namespace

bool structurally_equal(const Block& a, const Block& b) {
  if (a.stmts.size() != b.stmts.size()) return false;
  for (std::size_t i = 0; i < a.stmts.size(); ++i) {
    if (!stmt_equal(a.stmts[i], b.stmts[i])) return false;
  }
  return true;
}

bool structurally_equal(const Program& a, const Program& b) {
  if (a.functions.size() != b.functions.size()) return false;
  for (std::size_t i = 0; i < a.functions.size(); ++i) {
    const auto& x = a.functions[i];
    const auto& y = b.functions[i];
    if (x.name != y.name || x.params != y.params) return false;
    if (!structurally_equal(x.body, y.body)) return false;
  }
  return true;
}

namespace {

std::size_t count_expr(const Expr& e) {
  std::size_t n = 1;
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, BinaryExpr>) {
          n += count_expr(*node.lhs) + count_expr(*node.rhs);
        } else if constexpr (std::is_same_v<T, CallExpr>) {
          for (const auto& a : node.args) n += count_expr(*a);
        } else if constexpr (std::is_same_v<T, CommaExpr>) {
          n += count_expr(*node.first) + count_expr(*node.second);
        }
      },
      e.node);
  return n;
}

std::size_t count_block(const Block& b);

std::size_t count_stmt(const Stmt& s) {
  std::size_t n = 1;
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, ExprStmt>) {
          n += count_expr(*node.expr);
        } else if constexpr (std::is_same_v<T, DeclStmt>) {
          n += count_expr(*node.init);
        } else if constexpr (std::is_same_v<T, AssignStmt>) {
          n += count_expr(*node.value);
        } else if constexpr (std::is_same_v<T, IfStmt>) {
          n += count_expr(*node.cond) + count_block(node.then_block);
          if (node.else_block) n += count_block(*node.else_block);
        } else if constexpr (std::is_same_v<T, WhileStmt>) {
          n += count_expr(*node.cond) + count_block(node.body);
        } else {
          n += count_expr(*node.value);
        }
      },
      s.node);
  return n;
}

std::size_t count_block(const Block& b) {
  std::size_t n = 0;
  for (const auto& s : b.stmts) n += count_stmt(s);
  return n;
}

}  // namespace

std::size_t node_count(const Program& p) {
  std::size_t n = 0;
  for (const auto& f : p.functions) n += count_block(f.body);
  return n;
}

}  // namespace spectra::minic
