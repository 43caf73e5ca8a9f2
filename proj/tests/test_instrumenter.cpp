#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "spectra/instrument.hpp"
#include "spectra/minic/parser.hpp"
#include "spectra/minic/printer.hpp"
#include "spectra/minic/vm.hpp"
#include "support/oracle_interp.hpp"
#include "support/test_util.hpp"

using namespace spectra;
using namespace spectra::minic;

TEST_CASE("probe ids follow first textual occurrence") {
  Program p = parse("int main(){ f(); g(); f(); }");
  Manifest m = assign_probe_ids(p, InstrumentationScope::AllCalls);
  REQUIRE(m.n_funcs() == 2);
  CHECK(m.name_of(0) == "f");
  CHECK(m.name_of(1) == "g");
  CHECK(*m.id_of("g") == 1);
}

TEST_CASE("a call-free program yields an empty manifest") {
  Program p = parse("int main(){ int x = 1; return x; }");
  Manifest m = assign_probe_ids(p, InstrumentationScope::AllCalls);
  CHECK(m.n_funcs() == 0);

  auto [out, manifest] = instrument(std::move(p), InstrumentationScope::AllCalls);
  CHECK(manifest.n_funcs() == 0);
  CHECK(structurally_equal(out, parse("int main(){ int x = 1; return x; }")));
}

TEST_CASE("dispatch-entry ids follow registration order") {
  Program p = parse(testutil::read_file(testutil::fixtures_dir() + "/tv_control.mc"));
  std::vector<std::string> handlers;
  {
    std::istringstream in(testutil::read_file(testutil::fixtures_dir() + "/tv_handlers.txt"));
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty()) handlers.push_back(line);
    }
  }
  REQUIRE(handlers.size() == 12);
  Manifest m = assign_probe_ids(p, InstrumentationScope::DispatchEntryOnly, &handlers);
  CHECK(m.n_funcs() == 12);
  for (std::size_t i = 0; i < handlers.size(); ++i) CHECK(m.name_of(i) == handlers[i]);

  // Golden manifest file stays in sync with the fixture.
  Manifest golden =
      Manifest::from_text(testutil::read_file(testutil::fixtures_dir() + "/tv_manifest.tsv"));
  CHECK(golden == m);
}

TEST_CASE("dispatch-entry registration must resolve") {
  Program p = parse("int f(){}");
  std::vector<std::string> handlers{"f", "ghost"};
  CHECK_THROWS_AS(assign_probe_ids(p, InstrumentationScope::DispatchEntryOnly, &handlers),
                  UnknownHandler);
}

TEST_CASE("make_probe_call and wrap_call build the documented shapes") {
  CHECK(print(*make_probe_call(0)) == "__probe(0)");
  CHECK(print(*make_probe_call(41)) == "__probe(41)");
  CHECK(print(*make_probe_call(7)) == "__probe(7)");

  Program p = parse("int main(){ f(); }");
  auto& stmt = p.functions[0].body.stmts[0];
  auto call = std::move(std::get<ExprStmt>(stmt.node).expr);
  auto wrapped = wrap_call(std::move(call), 0);
  CHECK(print(*wrapped) == "(__probe(0), f())");

  // Wrapping a probe (or anything twice) violates the precondition.
  CHECK_THROWS_AS(wrap_call(make_probe_call(3), 1), std::invalid_argument);
  Program q = parse("int main(){ (__probe(0), f()); }");
  auto comma = std::move(std::get<ExprStmt>(q.functions[0].body.stmts[0].node).expr);
  CHECK_THROWS_AS(wrap_call(std::move(comma), 1), std::invalid_argument);
}

TEST_CASE("instrument wraps nested calls, arguments included") {
  Program p = parse("int main(){ f(g()); }");
  auto [out, manifest] = instrument(std::move(p), InstrumentationScope::AllCalls);
  REQUIRE(manifest.n_funcs() == 2);
  CHECK(manifest.name_of(0) == "f");
  CHECK(manifest.name_of(1) == "g");
  std::string text = print(out);
  CHECK(text.find("(__probe(0), f((__probe(1), g())))") != std::string::npos);
}

TEST_CASE("instrumented probes fire outer-first at run time") {
  Program p = parse("int main(){ f(g()); return 0; } int f(int x){ return x; } int g(){ return 1; }");
  auto [out, manifest] = instrument(std::move(p), InstrumentationScope::AllCalls);
  auto r = run_function(out, "main", {});
  REQUIRE(r.probe_events.size() == 2);
  CHECK(r.probe_events[0] == *manifest.id_of("f"));
  CHECK(r.probe_events[1] == *manifest.id_of("g"));
}

TEST_CASE("simple statement instrumentation shape") {
  Program p = parse("int main(){ f(); }");
  auto [out, manifest] = instrument(std::move(p), InstrumentationScope::AllCalls);
  CHECK(manifest.n_funcs() == 1);
  CHECK(print(out).find("(__probe(0), f());") != std::string::npos);
}

TEST_CASE("dispatch-entry scope leaves the program unchanged") {
  std::string src = "int h(){ helper(); } int helper(){}";
  Program p = parse(src);
  std::vector<std::string> handlers{"h"};
  auto [out, manifest] =
      instrument(std::move(p), InstrumentationScope::DispatchEntryOnly, &handlers);
  CHECK(structurally_equal(out, parse(src)));
  CHECK(manifest.n_funcs() == 1);
}

TEST_CASE("re-instrumentation is rejected") {
  Program p = parse("int main(){ f(); }");
  auto [once, manifest] = instrument(std::move(p), InstrumentationScope::AllCalls);
  CHECK_THROWS_AS(instrument(std::move(once), InstrumentationScope::AllCalls),
                  AlreadyInstrumented);
}

TEST_CASE("wrapped call used as a condition behaves like the bare call") {
  std::string src = "int main(){ if (f()) { return 10; } return 20; } int f(){ return 1; }";
  Program original = parse(src);
  auto [instrumented, manifest] = instrument(parse(src), InstrumentationScope::AllCalls);
  CHECK(run_function(original, "main", {}).return_value ==
        run_function(instrumented, "main", {}).return_value);
}

TEST_CASE("manifest text round-trips") {
  Manifest m(std::vector<std::string>{"alpha", "beta", "gamma"});
  CHECK(m.to_text() == "0\talpha\n1\tbeta\n2\tgamma\n");
  CHECK(Manifest::from_text(m.to_text()) == m);
  CHECK_THROWS(Manifest::from_text("0\talpha\n2\tbeta\n"));
  CHECK_THROWS(Manifest::from_text("0\talpha\n1\talpha\n"));
}

TEST_CASE("corpus: instrumentation preserves behavior and counts match the oracle") {
  auto paths = testutil::corpus_paths();
  REQUIRE(paths.size() >= 20);
  for (const auto& path : paths) {
    CAPTURE(path);
    std::string src = testutil::read_file(path);
    Program original = parse(src);
    auto [instrumented, manifest] = instrument(parse(src), InstrumentationScope::AllCalls);

    auto plain = run_function(original, "main", {});
    auto probed = run_function(instrumented, "main", {});

    // Same value, same output, same virtual cost: probes are free.
    CHECK(plain.return_value == probed.return_value);
    CHECK(plain.printed == probed.printed);
    CHECK(plain.consumed_ms == probed.consumed_ms);

    // Per-id probe counts equal direct Call counts from the oracle interpreter.
    auto truth = oracle::run(original, "main", {});
    std::vector<std::uint64_t> probe_counts(manifest.n_funcs(), 0);
    for (auto id : probed.probe_events) {
      REQUIRE(id >= 0);
      REQUIRE(static_cast<std::size_t>(id) < manifest.n_funcs());
      ++probe_counts[static_cast<std::size_t>(id)];
    }
    for (std::size_t id = 0; id < manifest.n_funcs(); ++id) {
      auto it = truth.call_counts.find(manifest.name_of(id));
      std::uint64_t expected = it == truth.call_counts.end() ? 0 : it->second;
      CAPTURE(manifest.name_of(id));
      CHECK(probe_counts[id] == expected);
    }

    // The oracle also agrees on observable behavior.
    CHECK(truth.return_value == plain.return_value);
    CHECK(truth.printed == plain.printed);
  }
}
