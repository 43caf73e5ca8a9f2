#include "spectra/instrument.hpp"

#include <map>
#include <set>
#include <sstream>

#include "spectra/minic/traverse.hpp"

namespace spectra {

using namespace minic;

Manifest::Manifest(std::vector<std::string> names) : names_(std::move(names)) {
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty() || !seen.insert(n).second) {
      throw std::invalid_argument("manifest names must be unique and nonempty");
    }
  }
}

std::optional<std::size_t> Manifest::id_of(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  return std::nullopt;
}

std::string Manifest::to_text() const {
  std::string out;
  for (std::size_t i = 0; i < names_.size(); ++i) {
    out += std::to_string(i);
    out += '\t';
    out += names_[i];
    out += '\n';
  }
  return out;
}

Manifest Manifest::from_text(const std::string& text) {
  std::vector<std::string> names;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw std::invalid_argument("manifest line " + std::to_string(lineno) +
                                  ": expected <id>\\t<name>");
    }
    std::size_t id = 0;
    try {
      id = static_cast<std::size_t>(std::stoull(line.substr(0, tab)));
    } catch (const std::exception&) {
      throw std::invalid_argument("manifest line " + std::to_string(lineno) + ": bad id");
    }
    if (id != names.size()) {
      throw std::invalid_argument("manifest line " + std::to_string(lineno) +
                                  ": ids must be dense and ascending");
    }
    names.push_back(line.substr(tab + 1));
  }
  return Manifest(std::move(names));
}

namespace {

void visit_calls_preorder(const Expr& e, const std::function<void(const CallExpr&)>& fn) {
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, BinaryExpr>) {
          visit_calls_preorder(*node.lhs, fn);
          visit_calls_preorder(*node.rhs, fn);
        } else if constexpr (std::is_same_v<T, CallExpr>) {
          fn(node);
          for (const auto& a : node.args) visit_calls_preorder(*a, fn);
        } else if constexpr (std::is_same_v<T, CommaExpr>) {
          visit_calls_preorder(*node.first, fn);
          visit_calls_preorder(*node.second, fn);
        }
      },
      e.node);
}

void visit_calls_preorder(const Block& b, const std::function<void(const CallExpr&)>& fn);

void visit_calls_preorder(const Stmt& s, const std::function<void(const CallExpr&)>& fn) {
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, ExprStmt>) {
          visit_calls_preorder(*node.expr, fn);
        } else if constexpr (std::is_same_v<T, DeclStmt>) {
          visit_calls_preorder(*node.init, fn);
        } else if constexpr (std::is_same_v<T, AssignStmt>) {
          visit_calls_preorder(*node.value, fn);
        } else if constexpr (std::is_same_v<T, IfStmt>) {
          visit_calls_preorder(*node.cond, fn);
          visit_calls_preorder(node.then_block, fn);
          if (node.else_block) visit_calls_preorder(*node.else_block, fn);
        } else if constexpr (std::is_same_v<T, WhileStmt>) {
          visit_calls_preorder(*node.cond, fn);
          visit_calls_preorder(node.body, fn);
        } else {
          visit_calls_preorder(*node.value, fn);
        }
      },
      s.node);
}

void visit_calls_preorder(const Block& b, const std::function<void(const CallExpr&)>& fn) {
  for (const auto& s : b.stmts) visit_calls_preorder(s, fn);
}

}  // namespace

bool has_probes(const Program& program) {
  bool found = false;
  for (const auto& f : program.functions) {
    visit_calls_preorder(f.body, [&](const CallExpr& c) {
      if (c.callee == kProbeFunction) found = true;
    });
  }
  return found;
}

Manifest assign_probe_ids(const Program& program, InstrumentationScope scope,
                          const std::vector<std::string>* handlers) {
  if (scope == InstrumentationScope::DispatchEntryOnly) {
    if (handlers == nullptr) {
      throw std::invalid_argument("dispatch-entry scope needs the handler registration order");
    }
    for (const auto& h : *handlers) {
      if (program.find_function(h) == nullptr) throw UnknownHandler(h);
    }
    return Manifest(*handlers);
  }

  std::vector<std::string> names;
  std::set<std::string> seen;
  for (const auto& f : program.functions) {
    visit_calls_preorder(f.body, [&](const CallExpr& c) {
      if (c.callee == kProbeFunction) return;
      if (seen.insert(c.callee).second) names.push_back(c.callee);
    });
  }
  return Manifest(std::move(names));
}

ExprPtr make_probe_call(std::size_t id) {
  std::vector<ExprPtr> args;
  args.push_back(make_expr({}, IntLit{static_cast<std::int64_t>(id)}));
  return make_expr({}, CallExpr{kProbeFunction, std::move(args)});
}

ExprPtr wrap_call(ExprPtr call, std::size_t id) {
  const auto* c = std::get_if<CallExpr>(&call->node);
  if (c == nullptr || c->callee == kProbeFunction) {
    throw std::invalid_argument("wrap_call needs a non-probe call expression");
  }
  SourcePos pos = call->pos;
  return make_expr(pos, CommaExpr{make_probe_call(id), std::move(call)});
}

std::pair<Program, Manifest> instrument(Program program, InstrumentationScope scope,
                                        const std::vector<std::string>* handlers) {
  if (has_probes(program)) throw AlreadyInstrumented();
  Manifest manifest = assign_probe_ids(program, scope, handlers);
  if (scope == InstrumentationScope::DispatchEntryOnly) {
    return {std::move(program), std::move(manifest)};
  }

  TraverseTable table;
  table.expr_pre_action(ExprKind::Call) = [&manifest](ExprPtr e) {
    const auto& call = std::get<CallExpr>(e->node);
    auto id = manifest.id_of(call.callee);
    if (!id) throw TransformError("call to " + call.callee + " missing from manifest");
    return wrap_call(std::move(e), *id);
  };
  return {traverse(std::move(program), table), std::move(manifest)};
}

}  // namespace spectra
