#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "spectra/instrument.hpp"
#include "spectra/minic/parser.hpp"
#include "spectra/minic/vm.hpp"
#include "support/oracle_interp.hpp"
#include "support/test_util.hpp"

using namespace spectra::minic;

namespace {

class NullHost : public VmHost {
 public:
  void on_probe(std::int64_t) override {}
  void on_post_message(std::int64_t, std::int64_t) override {}
  void on_print(std::int64_t) override {}
};

// calls(n) = calls(n-1) + calls(n-2) + 1, calls(0) = calls(1) = 1
std::uint64_t fib_call_count(int n) {
  if (n < 2) return 1;
  return fib_call_count(n - 1) + fib_call_count(n - 2) + 1;
}

}  // namespace

TEST_CASE("basic arithmetic") {
  Program p = parse("int main(){return 2+3;}");
  CHECK(run_function(p, "main", {}).return_value == 5);
}

TEST_CASE("a single instrumented call emits one probe event") {
  Program p = parse("int main(){f();return 0;} int f(){return 1;}");
  auto [out, manifest] = spectra::instrument(std::move(p), spectra::InstrumentationScope::AllCalls);
  auto r = run_function(out, "main", {});
  CHECK(r.probe_events == std::vector<std::int64_t>{0});
}

TEST_CASE("fib(10) produces 177 probe events for fib's id") {
  CHECK(fib_call_count(10) == 177);  // recursion-count oracle
  Program prog = parse(
      "int fib(int n) { if (n < 2) { return n; } return fib(n - 1) + fib(n - 2); }"
      "int main() { return fib(10); }");
  auto [out, manifest] = spectra::instrument(std::move(prog), spectra::InstrumentationScope::AllCalls);
  auto r = run_function(out, "main", {});
  std::size_t fib_id = *manifest.id_of("fib");
  std::uint64_t count = 0;
  for (auto id : r.probe_events) {
    if (static_cast<std::size_t>(id) == fib_id) ++count;
  }
  CHECK(count == 177);
  CHECK(r.return_value == 55);
}

TEST_CASE("consumed time equals executed statement count under unit costs") {
  Program p = parse("int main(){ int a = 1; int b = 2; int c = 3; return a + b + c; }");
  auto r = run_function(p, "main", {});
  CHECK(r.consumed_ms == 4);
  CHECK(r.return_value == 6);
}

TEST_CASE("while loops charge one statement per condition evaluation") {
  // Decl(1) + cond evals (4) + body assigns (3) + Return(1) = 9
  Program p = parse("int main(){ int i = 0; while (i < 3) { i = i + 1; } return i; }");
  auto r = run_function(p, "main", {});
  CHECK(r.consumed_ms == 9);
}

TEST_CASE("budgeted stepping stops before overrunning the budget") {
  Program p = parse(
      "int main(){ int a = 0; a = 1; a = 2; a = 3; a = 4; a = 5; a = 6; a = 7; a = 8; "
      "return a; }");
  NullHost host;
  Execution e(p, "main", {}, CostModel{}, host);
  CHECK(e.step_budgeted(4) == 4);
  CHECK(!e.done());
  CHECK(e.consumed_ms() == 4);

  // A budget that covers the rest completes the function.
  CHECK(e.step_budgeted(1000) == 6);
  CHECK(e.done());
  CHECK(e.return_value() == 8);
  CHECK(e.consumed_ms() == 10);
}

TEST_CASE("zero-budget-progress guard: a large statement cost is never split") {
  CostModel cost;
  cost.cost_per_statement = 10;
  Program p = parse("int main(){ int a = 1; return a; }");
  NullHost host;
  Execution e(p, "main", {}, cost, host);
  CHECK(e.step_budgeted(5) == 0);   // next statement would exceed
  CHECK(e.step_one() == 10);        // forced, runs whole statement
  CHECK(e.step_budgeted(10) == 10);
  CHECK(e.done());
}

TEST_CASE("interleaved budget slices replay the uninterrupted probe sequence") {
  std::string src =
      "int main(){ int i = 0; while (i < 6) { tick(i); i = i + 1; } return done(i); }"
      "int tick(int k){ if (k / 2 * 2 == k) { even(); } return k; }"
      "int even(){ return 1; }"
      "int done(int n){ return n; }";
  auto [prog, manifest] =
      spectra::instrument(parse(src), spectra::InstrumentationScope::AllCalls);

  auto uninterrupted = run_function(prog, "main", {});

  class Recorder : public VmHost {
   public:
    void on_probe(std::int64_t id) override { probes.push_back(id); }
    void on_post_message(std::int64_t, std::int64_t) override {}
    void on_print(std::int64_t v) override { printed.push_back(v); }
    std::vector<std::int64_t> probes;
    std::vector<std::int64_t> printed;
  };

  std::mt19937 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    Recorder host;
    Execution a(prog, "main", {}, CostModel{}, host);
    while (!a.done()) {
      std::int64_t budget = std::uniform_int_distribution<std::int64_t>(1, 5)(rng);
      if (a.step_budgeted(budget) == 0) a.step_one();
    }
    CHECK(a.return_value() == uninterrupted.return_value);
    CHECK(a.consumed_ms() == uninterrupted.consumed_ms);
    CHECK(host.probes == uninterrupted.probe_events);
  }
}

TEST_CASE("division by zero is a runtime fault carrying consumed time") {
  Program p = parse("int main(){ int a = 1; int b = 0; return a / b; }");
  try {
    run_function(p, "main", {});
    FAIL("expected RuntimeError");
  } catch (const RuntimeError& e) {
    CHECK(e.fault == RuntimeFault::DivByZero);
    CHECK(e.consumed_ms == 3);  // two decls + the return statement
  }
}

TEST_CASE("overflow is a runtime fault, not a wrap") {
  Program p = parse("int main(){ return 9223372036854775807 + 1; }");
  CHECK_THROWS_AS(run_function(p, "main", {}), RuntimeError);
  Program q = parse("int main(){ return -9223372036854775808 / -1; }");
  CHECK_THROWS_AS(run_function(q, "main", {}), RuntimeError);
}

TEST_CASE("unknown function and bad arity are faults") {
  Program p = parse("int main(){ return ghost(); }");
  try {
    run_function(p, "main", {});
    FAIL("expected RuntimeError");
  } catch (const RuntimeError& e) {
    CHECK(e.fault == RuntimeFault::UnknownFunction);
  }

  Program q = parse("int main(){ return f(1, 2); } int f(int a){ return a; }");
  try {
    run_function(q, "main", {});
    FAIL("expected RuntimeError");
  } catch (const RuntimeError& e) {
    CHECK(e.fault == RuntimeFault::BadArity);
  }
}

TEST_CASE("unknown variables and assignments to undeclared names fault") {
  CHECK_THROWS_AS(run_function(parse("int main(){ return nope; }"), "main", {}),
                  RuntimeError);
  CHECK_THROWS_AS(run_function(parse("int main(){ x = 3; return 0; }"), "main", {}),
                  RuntimeError);
}

TEST_CASE("runaway recursion hits the stack depth cap") {
  Program p = parse("int f(){ return f(); } int main(){ return f(); }");
  try {
    run_function(p, "main", {});
    FAIL("expected RuntimeError");
  } catch (const RuntimeError& e) {
    CHECK(e.fault == RuntimeFault::StackDepthExceeded);
  }
}

TEST_CASE("probe events cost nothing and never change results") {
  CostModel cost;
  cost.builtin_costs["print_int"] = 5;
  cost.builtin_costs["__probe"] = 99;  // ignored: probes are pinned free
  Program p = parse("int main(){ __probe(3); print_int(9); return 4; }");
  auto r = run_function(p, "main", cost);
  CHECK(r.return_value == 4);
  CHECK(r.probe_events == std::vector<std::int64_t>{3});
  CHECK(r.printed == std::vector<std::int64_t>{9});
  // 3 statements + print_int override; __probe stays free.
  CHECK(r.consumed_ms == 8);
}

TEST_CASE("short-circuit skips the untaken side, like the oracle") {
  std::string src =
      "int main(){ int a = zero() && boom(); int b = one() || boom(); return a * 10 + b; }"
      "int zero(){ return 0; } int one(){ return 1; }"
      "int boom(){ return 1 / 0; }";
  Program p = parse(src);
  auto r = run_function(p, "main", {});
  CHECK(r.return_value == 1);
  auto truth = oracle::run(p, "main", {});
  CHECK(truth.return_value == 1);
  CHECK(truth.call_counts.count("boom") == 0);
}

TEST_CASE("determinism: identical runs give identical results") {
  std::string src = testutil::read_file(testutil::fixtures_dir() + "/corpus/p13_collatz.mc");
  Program p = parse(src);
  auto a = run_function(p, "main", {});
  auto b = run_function(p, "main", {});
  CHECK(a.return_value == b.return_value);
  CHECK(a.consumed_ms == b.consumed_ms);
  CHECK(a.printed == b.printed);
}

TEST_CASE("post_message reaches the host with clamped delay") {
  class PostHost : public NullHost {
   public:
    void on_post_message(std::int64_t id, std::int64_t delay) override {
      posts.emplace_back(id, delay);
    }
    std::vector<std::pair<std::int64_t, std::int64_t>> posts;
  };
  PostHost host;
  Program p = parse("int main(){ post_message(4, 250); post_message(2, -9); return 0; }");
  run_function(p, "main", {}, CostModel{}, host);
  REQUIRE(host.posts.size() == 2);
  CHECK(host.posts[0] == std::pair<std::int64_t, std::int64_t>{4, 250});
  CHECK(host.posts[1] == std::pair<std::int64_t, std::int64_t>{2, 0});
}
