#include "spectra/minic/printer.hpp"

#include <string>

namespace spectra::minic {

namespace {

int precedence(BinOp op) {
  switch (op) {
    case BinOp::Or: return 1;
    case BinOp::And: return 2;
    case BinOp::Eq:
    case BinOp::Ne: return 3;
    case BinOp::Lt:
    case BinOp::Le:
    case BinOp::Gt:
    case BinOp::Ge: return 4;
    case BinOp::Add:
    case BinOp::Sub: return 5;
    case BinOp::Mul:
    case BinOp::Div: return 6;
  }
  return 0;
}

constexpr int kPrimaryPrec = 7;

void render_expr(const Expr& e, int min_prec, std::string& out) {
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, IntLit>) {
          out += std::to_string(node.value);
        } else if constexpr (std::is_same_v<T, VarRef>) {
          out += node.name;
        } else if constexpr (std::is_same_v<T, BinaryExpr>) {
          int prec = precedence(node.op);
          bool parens = prec < min_prec;
          if (parens) out += '(';
          render_expr(*node.lhs, prec, out);
          out += ' ';
          out += to_string(node.op);
          out += ' ';
          // Left associative: the right operand needs strictly higher precedence.
          render_expr(*node.rhs, prec + 1, out);
          if (parens) out += ')';
        } else if constexpr (std::is_same_v<T, CallExpr>) {
          out += node.callee;
          out += '(';
          for (std::size_t i = 0; i < node.args.size(); ++i) {
            if (i) out += ", ";
            render_expr(*node.args[i], 0, out);
          }
          out += ')';
        } else {
          out += '(';
          render_expr(*node.first, 0, out);
          out += ", ";
          render_expr(*node.second, 0, out);
          out += ')';
        }
      },
      e.node);
}

void indent(int depth, std::string& out) { out.append(static_cast<std::size_t>(depth) * 2, ' '); }

void render_block(const Block& b, int depth, std::string& out);

void render_stmt(const Stmt& s, int depth, std::string& out) {
  indent(depth, out);
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, ExprStmt>) {
          render_expr(*node.expr, 0, out);
          out += ";\n";
        } else if constexpr (std::is_same_v<T, DeclStmt>) {
          out += "int " + node.name + " = ";
          render_expr(*node.init, 0, out);
          out += ";\n";
        } else if constexpr (std::is_same_v<T, AssignStmt>) {
          out += node.name + " = ";
          render_expr(*node.value, 0, out);
          out += ";\n";
        } else if constexpr (std::is_same_v<T, IfStmt>) {
          out += "if (";
          render_expr(*node.cond, 0, out);
          out += ") {\n";
          render_block(node.then_block, depth + 1, out);
          indent(depth, out);
          out += '}';
          if (node.else_block) {
            out += " else {\n";
            render_block(*node.else_block, depth + 1, out);
            indent(depth, out);
            out += '}';
          }
          out += '\n';
        } else if constexpr (std::is_same_v<T, WhileStmt>) {
          out += "while (";
          render_expr(*node.cond, 0, out);
          out += ") {\n";
          render_block(node.body, depth + 1, out);
          indent(depth, out);
          out += "}\n";
        } else {
          out += "return ";
          render_expr(*node.value, 0, out);
          out += ";\n";
        }
      },
      s.node);
}

void render_block(const Block& b, int depth, std::string& out) {
  for (const auto& s : b.stmts) render_stmt(s, depth, out);
}

}  // namespace

std::string print(const Expr& e) {
  std::string out;
  render_expr(e, 0, out);
  return out;
}

std::string print(const Program& p) {
  std::string out;
  bool first = true;
  for (const auto& f : p.functions) {
    if (!first) out += '\n';
    first = false;
    out += "int " + f.name + "(";
    for (std::size_t i = 0; i < f.params.size(); ++i) {
      if (i) out += ", ";
      out += "int " + f.params[i];
    }
    out += ") {\n";
    render_block(f.body, 1, out);
    out += "}\n";
  }
  return out;
}

}  // namespace spectra::minic
