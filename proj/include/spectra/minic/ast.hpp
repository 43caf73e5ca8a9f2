#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace spectra::minic {

struct SourcePos {
  int line = 0;
  int column = 0;
};

enum class BinOp {
  Add,
  Sub,
  Mul,
  Div,
  Lt,
  Le,
  Eq,
  Ne,
  Gt,
  Ge,
  And,
  Or,
};

const char* to_string(BinOp op);

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct IntLit {
  std::int64_t value = 0;
};

struct VarRef {
  std::string name;
};

struct BinaryExpr {
  BinOp op;
  ExprPtr lhs;
  ExprPtr rhs;
};

struct CallExpr {
  std::string callee;
  std::vector<ExprPtr> args;
};

// C comma semantics: first evaluated, value discarded, result is second's value.
struct CommaExpr {
  ExprPtr first;
  ExprPtr second;
};

// Order must match ExprKind.
using ExprNode = std::variant<IntLit, VarRef, BinaryExpr, CallExpr, CommaExpr>;

enum class ExprKind : std::size_t {
  IntLit = 0,
  Var = 1,
  Binary = 2,
  Call = 3,
  Comma = 4,
};
inline constexpr std::size_t kExprKindCount = 5;

struct Expr {
  SourcePos pos;
  // Node identity used by traverse() to dispatch actions exactly once per
  // input-tree node. Fresh per construction; preserved across moves.
  std::uint64_t uid;
  ExprNode node;

  Expr(SourcePos p, ExprNode n);
  Expr(Expr&&) = default;
  Expr& operator=(Expr&&) = default;
  Expr(const Expr&) = delete;
  Expr& operator=(const Expr&) = delete;
};

ExprPtr make_expr(SourcePos pos, ExprNode node);

inline ExprKind kind(const Expr& e) { return static_cast<ExprKind>(e.node.index()); }

struct Stmt;

struct Block {
  std::vector<Stmt> stmts;
};

struct ExprStmt {
  ExprPtr expr;
};

struct DeclStmt {
  std::string name;
  ExprPtr init;
};

struct AssignStmt {
  std::string name;
  ExprPtr value;
};

struct IfStmt {
  ExprPtr cond;
  Block then_block;
  std::optional<Block> else_block;
};

struct WhileStmt {
  ExprPtr cond;
  Block body;
};

struct ReturnStmt {
  ExprPtr value;
};

// Order must match StmtKind.
using StmtNode = std::variant<ExprStmt, DeclStmt, AssignStmt, IfStmt, WhileStmt, ReturnStmt>;

enum class StmtKind : std::size_t {
  Expr = 0,
  Decl = 1,
  Assign = 2,
  If = 3,
  While = 4,
  Return = 5,
};
inline constexpr std::size_t kStmtKindCount = 6;

struct Stmt {
  SourcePos pos;
  std::uint64_t uid;
  StmtNode node;

  Stmt(SourcePos p, StmtNode n);
  Stmt(Stmt&&) = default;
  Stmt& operator=(Stmt&&) = default;
  Stmt(const Stmt&) = delete;
  Stmt& operator=(const Stmt&) = delete;
};

inline StmtKind kind(const Stmt& s) { return static_cast<StmtKind>(s.node.index()); }

struct FunDef {
  std::string name;
  std::vector<std::string> params;
  Block body;
  SourcePos pos;
};

struct Program {
  std::vector<FunDef> functions;

  const FunDef* find_function(const std::string& name) const;
};

// Deep copies; copies get fresh node uids.
ExprPtr clone(const Expr& e);
Block clone(const Block& b);
FunDef clone(const FunDef& f);
Program clone(const Program& p);

// Structural equality, ignoring positions and uids.
bool structurally_equal(const Expr& a, const Expr& b);
bool structurally_equal(const Block& a, const Block& b);
bool structurally_equal(const Program& a, const Program& b);

// Total node count (exprs + stmts), by plain recursive walk.
std::size_t node_count(const Program& p);

}  // namespace spectra::minic
