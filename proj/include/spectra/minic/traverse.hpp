#pragma once

#include <array>
#include <functional>
#include <stdexcept>

#include "spectra/minic/ast.hpp"

namespace spectra::minic {

class TransformError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Per-production action table. Each Expr/Stmt variant has a pre slot (fires
// before the node's children are traversed) and a post slot (fires after).
// Actions take ownership of the node and return what should sit at that
// position; returning a different node rewrites the tree in place.
//
// Dispatch is keyed on node identity: each node of the input tree is
// dispatched exactly once, and nodes constructed by actions are walked for
// children but never dispatched themselves. A pre action may therefore wrap
// the node it was given (e.g. every Call into a Comma) without the wrapper or
// the wrapped original being re-dispatched, while original nodes nested in
// the wrapper's subtree still get their turn.
struct TraverseTable {
  using ExprAction = std::function<ExprPtr(ExprPtr)>;
  using StmtAction = std::function<Stmt(Stmt)>;

  std::array<ExprAction, kExprKindCount> expr_pre{};
  std::array<ExprAction, kExprKindCount> expr_post{};
  std::array<StmtAction, kStmtKindCount> stmt_pre{};
  std::array<StmtAction, kStmtKindCount> stmt_post{};

  ExprAction& expr_pre_action(ExprKind k) { return expr_pre[static_cast<std::size_t>(k)]; }
  ExprAction& expr_post_action(ExprKind k) { return expr_post[static_cast<std::size_t>(k)]; }
  StmtAction& stmt_pre_action(StmtKind k) { return stmt_pre[static_cast<std::size_t>(k)]; }
  StmtAction& stmt_post_action(StmtKind k) { return stmt_post[static_cast<std::size_t>(k)]; }
};

// Rewrites the program through the table. An all-empty table returns a
// structurally equal tree. Actions may abort by throwing TransformError.
Program traverse(Program program, const TraverseTable& table);

}  // namespace spectra::minic
