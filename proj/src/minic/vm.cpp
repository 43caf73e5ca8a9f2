#include "spectra/minic/vm.hpp"

#include <cassert>
#include <limits>
#include <unordered_map>

namespace spectra::minic {

const char* to_string(RuntimeFault f) {
  switch (f) {
    case RuntimeFault::DivByZero: return "DivByZero";
    case RuntimeFault::Overflow: return "Overflow";
    case RuntimeFault::UnknownFunction: return "UnknownFunction";
    case RuntimeFault::UnknownVariable: return "UnknownVariable";
    case RuntimeFault::BadArity: return "BadArity";
    case RuntimeFault::StackDepthExceeded: return "StackDepthExceeded";
  }
  return "?";
}

RuntimeError::RuntimeError(RuntimeFault f, SourcePos p, std::int64_t consumed,
                           const std::string& detail)
    : std::runtime_error(std::string(to_string(f)) + " at " + std::to_string(p.line) +
                         ":" + std::to_string(p.column) +
                         (detail.empty() ? "" : ": " + detail)),
      fault(f),
      pos(p),
      consumed_ms(consumed) {}

namespace {

bool is_builtin(const std::string& name) {
  return name == "__probe" || name == "post_message" || name == "print_int";
}

}  // namespace

// Explicit task/value stack machine, so an activation can be suspended at any
// statement boundary and resumed later.
struct Execution::Impl {
  enum class Op {
    ExecStmt,       // node = Stmt; the only task that costs time
    BlockStep,      // node = Block, index = next stmt
    EvalExpr,       // node = Expr
    ApplyBinary,    // node = Expr (Binary); pops rhs, lhs
    ShortCircuit,   // node = Expr (Binary &&/||); pops lhs
    Invoke,         // node = Expr (Call); pops args
    DropValue,      // comma: discard first value
    StoreDecl,      // node = Stmt (Decl); pops value
    StoreAssign,    // node = Stmt (Assign); pops value
    IfDecide,       // node = Stmt (If); pops cond
    WhileDecide,    // node = Stmt (While); pops cond
    ReturnNow,      // pops value, unwinds current frame
    FrameExit,      // fell off the end of a body: return 0
  };

  struct Task {
    Op op;
    const void* node = nullptr;
    std::size_t index = 0;
  };

  struct Frame {
    std::unordered_map<std::string, std::int64_t> locals;
    std::size_t exit_task_index = 0;  // position of this frame's FrameExit
    SourcePos call_pos;
  };

  const Program& program;
  CostModel cost;
  VmHost& host;
  std::size_t max_depth;

  std::vector<Task> tasks;
  std::vector<std::int64_t> values;
  std::vector<Frame> frames;
  std::int64_t consumed = 0;
  bool finished = false;
  std::int64_t result = 0;

  Impl(const Program& p, const std::string& function, std::vector<std::int64_t> args,
       const CostModel& c, VmHost& h, std::size_t depth)
      : program(p), cost(c), host(h), max_depth(depth) {
    const FunDef* f = p.find_function(function);
    if (f == nullptr) {
      throw RuntimeError(RuntimeFault::UnknownFunction, {}, 0, function);
    }
    if (f->params.size() != args.size()) {
      throw RuntimeError(RuntimeFault::BadArity, f->pos, 0,
                         function + " expects " + std::to_string(f->params.size()) +
                             " args, got " + std::to_string(args.size()));
    }
    push_frame(*f, std::move(args), f->pos);
    settle();
  }

  void push_frame(const FunDef& f, std::vector<std::int64_t> args, SourcePos call_pos) {
    if (frames.size() >= max_depth) {
      throw RuntimeError(RuntimeFault::StackDepthExceeded, call_pos, consumed, f.name);
    }
    Frame frame;
    frame.call_pos = call_pos;
    for (std::size_t i = 0; i < f.params.size(); ++i) frame.locals[f.params[i]] = args[i];
    frame.exit_task_index = tasks.size();
    frames.push_back(std::move(frame));
    tasks.push_back({Op::FrameExit, nullptr, 0});
    tasks.push_back({Op::BlockStep, &f.body, 0});
  }

  // Runs zero-cost tasks until the next task is a statement or we are done.
  void settle() {
    while (!tasks.empty() && tasks.back().op != Op::ExecStmt) {
      Task t = tasks.back();
      tasks.pop_back();
      run_task(t);
    }
    if (tasks.empty()) {
      assert(values.size() == 1);
      finished = true;
      result = values.back();
      values.pop_back();
    }
  }

  std::int64_t next_statement_cost() const { return cost.cost_per_statement; }

  std::int64_t step_one() {
    assert(!finished && !tasks.empty() && tasks.back().op == Op::ExecStmt);
    Task t = tasks.back();
    tasks.pop_back();
    std::int64_t before = consumed;
    consumed += cost.cost_per_statement;
    exec_stmt(*static_cast<const Stmt*>(t.node));
    settle();
    return consumed - before;
  }

  void exec_stmt(const Stmt& s) {
    std::visit(
        [&](const auto& node) {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, ExprStmt>) {
            tasks.push_back({Op::DropValue, nullptr, 0});
            tasks.push_back({Op::EvalExpr, node.expr.get(), 0});
          } else if constexpr (std::is_same_v<T, DeclStmt>) {
            tasks.push_back({Op::StoreDecl, &s, 0});
            tasks.push_back({Op::EvalExpr, node.init.get(), 0});
          } else if constexpr (std::is_same_v<T, AssignStmt>) {
            tasks.push_back({Op::StoreAssign, &s, 0});
            tasks.push_back({Op::EvalExpr, node.value.get(), 0});
          } else if constexpr (std::is_same_v<T, IfStmt>) {
            tasks.push_back({Op::IfDecide, &s, 0});
            tasks.push_back({Op::EvalExpr, node.cond.get(), 0});
          } else if constexpr (std::is_same_v<T, WhileStmt>) {
            tasks.push_back({Op::WhileDecide, &s, 0});
            tasks.push_back({Op::EvalExpr, node.cond.get(), 0});
          } else {
            tasks.push_back({Op::ReturnNow, &s, 0});
            tasks.push_back({Op::EvalExpr, node.value.get(), 0});
          }
        },
        s.node);
  }

  void run_task(const Task& t) {
    switch (t.op) {
      case Op::ExecStmt:
        assert(false);
        break;
      case Op::BlockStep: {
        const auto& block = *static_cast<const Block*>(t.node);
        if (t.index < block.stmts.size()) {
          tasks.push_back({Op::BlockStep, t.node, t.index + 1});
          tasks.push_back({Op::ExecStmt, &block.stmts[t.index], 0});
        }
        break;
      }
      case Op::EvalExpr:
        eval_expr(*static_cast<const Expr*>(t.node));
        break;
      case Op::ApplyBinary:
        apply_binary(*static_cast<const Expr*>(t.node));
        break;
      case Op::ShortCircuit: {
        const auto& e = *static_cast<const Expr*>(t.node);
        const auto& bin = std::get<BinaryExpr>(e.node);
        std::int64_t lhs = pop_value();
        bool skip = bin.op == BinOp::And ? lhs == 0 : lhs != 0;
        if (skip) {
          values.push_back(bin.op == BinOp::And ? 0 : 1);
        } else {
          tasks.push_back({Op::ApplyBinary, &e, 1});  // index 1: rhs only on stack
          tasks.push_back({Op::EvalExpr, bin.rhs.get(), 0});
        }
        break;
      }
      case Op::Invoke:
        invoke(*static_cast<const Expr*>(t.node));
        break;
      case Op::DropValue:
        pop_value();
        break;
      case Op::StoreDecl: {
        const auto& s = *static_cast<const Stmt*>(t.node);
        frames.back().locals[std::get<DeclStmt>(s.node).name] = pop_value();
        break;
      }
      case Op::StoreAssign: {
        const auto& s = *static_cast<const Stmt*>(t.node);
        const auto& name = std::get<AssignStmt>(s.node).name;
        auto it = frames.back().locals.find(name);
        if (it == frames.back().locals.end()) {
          throw RuntimeError(RuntimeFault::UnknownVariable, s.pos, consumed, name);
        }
        it->second = pop_value();
        break;
      }
      case Op::IfDecide: {
        const auto& s = *static_cast<const Stmt*>(t.node);
        const auto& node = std::get<IfStmt>(s.node);
        if (pop_value() != 0) {
          tasks.push_back({Op::BlockStep, &node.then_block, 0});
        } else if (node.else_block) {
          tasks.push_back({Op::BlockStep, &*node.else_block, 0});
        }
        break;
      }
      case Op::WhileDecide: {
        const auto& s = *static_cast<const Stmt*>(t.node);
        const auto& node = std::get<WhileStmt>(s.node);
        if (pop_value() != 0) {
          // Re-execute the while statement after the body; each iteration
          // re-charges the condition as one statement.
          tasks.push_back({Op::ExecStmt, &s, 0});
          tasks.push_back({Op::BlockStep, &node.body, 0});
        }
        break;
      }
      case Op::ReturnNow: {
        std::int64_t v = pop_value();
        unwind_frame(v);
        break;
      }
      case Op::FrameExit:
        // Body ran off the end: behave as "return 0".
        frames.pop_back();
        values.push_back(0);
        break;
    }
  }

  void eval_expr(const Expr& e) {
    std::visit(
        [&](const auto& node) {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, IntLit>) {
            values.push_back(node.value);
          } else if constexpr (std::is_same_v<T, VarRef>) {
            auto it = frames.back().locals.find(node.name);
            if (it == frames.back().locals.end()) {
              throw RuntimeError(RuntimeFault::UnknownVariable, e.pos, consumed, node.name);
            }
            values.push_back(it->second);
          } else if constexpr (std::is_same_v<T, BinaryExpr>) {
            if (node.op == BinOp::And || node.op == BinOp::Or) {
              tasks.push_back({Op::ShortCircuit, &e, 0});
              tasks.push_back({Op::EvalExpr, node.lhs.get(), 0});
            } else {
              tasks.push_back({Op::ApplyBinary, &e, 0});
              tasks.push_back({Op::EvalExpr, node.rhs.get(), 0});
              tasks.push_back({Op::EvalExpr, node.lhs.get(), 0});
            }
          } else if constexpr (std::is_same_v<T, CallExpr>) {
            tasks.push_back({Op::Invoke, &e, 0});
            for (auto it = node.args.rbegin(); it != node.args.rend(); ++it) {
              tasks.push_back({Op::EvalExpr, it->get(), 0});
            }
          } else {
            tasks.push_back({Op::EvalExpr, node.second.get(), 0});
            tasks.push_back({Op::DropValue, nullptr, 0});
            tasks.push_back({Op::EvalExpr, node.first.get(), 0});
          }
        },
        e.node);
  }

  void apply_binary(const Expr& e) {
    const auto& bin = std::get<BinaryExpr>(e.node);
    std::int64_t rhs = pop_value();
    // ShortCircuit path already consumed the lhs.
    std::int64_t lhs = 0;
    bool logical = bin.op == BinOp::And || bin.op == BinOp::Or;
    if (!logical) lhs = pop_value();
    std::int64_t out = 0;
    switch (bin.op) {
      case BinOp::Add:
        if (__builtin_add_overflow(lhs, rhs, &out)) overflow(e);
        break;
      case BinOp::Sub:
        if (__builtin_sub_overflow(lhs, rhs, &out)) overflow(e);
        break;
      case BinOp::Mul:
        if (__builtin_mul_overflow(lhs, rhs, &out)) overflow(e);
        break;
      case BinOp::Div:
        if (rhs == 0) throw RuntimeError(RuntimeFault::DivByZero, e.pos, consumed, "");
        if (lhs == std::numeric_limits<std::int64_t>::min() && rhs == -1) overflow(e);
        out = lhs / rhs;
        break;
      case BinOp::Lt: out = lhs < rhs; break;
      case BinOp::Le: out = lhs <= rhs; break;
      case BinOp::Eq: out = lhs == rhs; break;
      case BinOp::Ne: out = lhs != rhs; break;
      case BinOp::Gt: out = lhs > rhs; break;
      case BinOp::Ge: out = lhs >= rhs; break;
      case BinOp::And:
      case BinOp::Or:
        out = rhs != 0;
        break;
    }
    values.push_back(out);
  }

  [[noreturn]] void overflow(const Expr& e) {
    throw RuntimeError(RuntimeFault::Overflow, e.pos, consumed, "");
  }

  void invoke(const Expr& e) {
    const auto& call = std::get<CallExpr>(e.node);
    std::size_t n = call.args.size();
    std::vector<std::int64_t> args(n);
    for (std::size_t i = n; i > 0; --i) args[i - 1] = pop_value();

    if (is_builtin(call.callee)) {
      consumed += cost.builtin_cost(call.callee);
      if (call.callee == "__probe") {
        expect_arity(call, e.pos, 1, n);
        host.on_probe(args[0]);
      } else if (call.callee == "post_message") {
        expect_arity(call, e.pos, 2, n);
        host.on_post_message(args[0], args[1] < 0 ? 0 : args[1]);
      } else {
        expect_arity(call, e.pos, 1, n);
        host.on_print(args[0]);
      }
      values.push_back(0);
      return;
    }

    const FunDef* f = program.find_function(call.callee);
    if (f == nullptr) {
      throw RuntimeError(RuntimeFault::UnknownFunction, e.pos, consumed, call.callee);
    }
    expect_arity(call, e.pos, f->params.size(), n);
    push_frame(*f, std::move(args), e.pos);
  }

  void expect_arity(const CallExpr& call, SourcePos pos, std::size_t want, std::size_t got) {
    if (want != got) {
      throw RuntimeError(RuntimeFault::BadArity, pos, consumed,
                         call.callee + " expects " + std::to_string(want) + " args, got " +
                             std::to_string(got));
    }
  }

  void unwind_frame(std::int64_t value) {
    tasks.resize(frames.back().exit_task_index);
    frames.pop_back();
    values.push_back(value);
  }

  std::int64_t pop_value() {
    assert(!values.empty());
    std::int64_t v = values.back();
    values.pop_back();
    return v;
  }
};

Execution::Execution(const Program& program, const std::string& function,
                     std::vector<std::int64_t> args, const CostModel& cost, VmHost& host,
                     std::size_t max_stack_depth)
    : impl_(std::make_unique<Impl>(program, function, std::move(args), cost, host,
                                   max_stack_depth)) {}

Execution::~Execution() = default;
Execution::Execution(Execution&&) noexcept = default;
Execution& Execution::operator=(Execution&&) noexcept = default;

bool Execution::done() const { return impl_->finished; }

std::int64_t Execution::step_one() {
  if (impl_->finished) return 0;
  return impl_->step_one();
}

std::int64_t Execution::step_budgeted(std::int64_t budget_ms) {
  std::int64_t used = 0;
  while (!impl_->finished) {
    if (used + impl_->next_statement_cost() > budget_ms) break;
    used += impl_->step_one();
  }
  return used;
}

std::int64_t Execution::run_to_completion() {
  std::int64_t used = 0;
  while (!impl_->finished) used += impl_->step_one();
  return used;
}

std::int64_t Execution::return_value() const { return impl_->result; }

std::int64_t Execution::consumed_ms() const { return impl_->consumed; }

namespace {

class RecordingHost : public VmHost {
 public:
  void on_probe(std::int64_t id) override { probes.push_back(id); }
  void on_post_message(std::int64_t, std::int64_t) override {}
  void on_print(std::int64_t value) override { printed.push_back(value); }

  std::vector<std::int64_t> probes;
  std::vector<std::int64_t> printed;
};

}  // namespace

ExecResult run_function(const Program& program, const std::string& function,
                        std::vector<std::int64_t> args, const CostModel& cost) {
  RecordingHost host;
  Execution exec(program, function, std::move(args), cost, host);
  exec.run_to_completion();
  ExecResult r;
  r.return_value = exec.return_value();
  r.consumed_ms = exec.consumed_ms();
  r.probe_events = std::move(host.probes);
  r.printed = std::move(host.printed);
  return r;
}

ExecResult run_function(const Program& program, const std::string& function,
                        std::vector<std::int64_t> args, const CostModel& cost,
                        VmHost& host) {
  Execution exec(program, function, std::move(args), cost, host);
  exec.run_to_completion();
  ExecResult r;
  r.return_value = exec.return_value();
  r.consumed_ms = exec.consumed_ms();
  return r;
}

}  // namespace spectra::minic
