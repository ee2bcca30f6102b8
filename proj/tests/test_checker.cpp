#include <doctest.h>

#include <set>

#include "munity/checker.hpp"
#include "munity/error.hpp"
#include "munity/lang.hpp"
#include "support.hpp"

using namespace munity;

namespace {

const char* kCounter = R"(
program counter
declare c : integer
assign inc :: c := c + 1 if c < 10
end)";

std::set<std::string> digests(const TransitionSystem& ts) {
  std::set<std::string> out;
  for (const auto& s : ts.states) out.insert(s.digest_hex());
  return out;
}

}  // namespace

TEST_CASE("semaphore exploration keeps g within 0 and 1") {
  test::Sys sys(test::slurp(test::corpus("semaphore.unity")));
  TransitionSystem ts = explore(*sys.engine);
  CHECK_FALSE(ts.truncated);
  CHECK(ts.states.size() == 10);
  for (const auto& s : ts.states) CHECK(sys.holds(s, "g = 0 or g = 1"));
  // Hand check of one state: after the first request, p[0] is up and g = 1.
  const SystemState& first = ts.states[ts.edges[ts.out[ts.initial[0]][0]].to];
  CHECK(sys.get(first, "semaphore", "p") == test::bools({true, false}));
  CHECK(sys.get(first, "semaphore", "g") == test::I(1));
}

TEST_CASE("a system with nothing enabled explores to its initial state") {
  test::Sys sys("program still declare x : integer assign t :: x := 1 if x > 1 end");
  TransitionSystem ts = explore(*sys.engine);
  CHECK(ts.states.size() == 1);
  CHECK(ts.edges.empty());
  CHECK(check_invariant(*sys.engine, ts, sys.pred("x = 0")).holds());
}

TEST_CASE("mobile sender-receiver keeps the receiver behind the sender") {
  test::Sys sys(test::slurp(test::corpus("sender_receiver_mobile.unity")));
  TransitionSystem ts = explore(*sys.engine);
  CHECK_FALSE(ts.truncated);
  for (const auto& s : ts.states) CHECK(sys.holds(s, "receiver(0).c <= sender(1).c"));
}

TEST_CASE("co on the counter") {
  test::Sys sys(kCounter);
  TransitionSystem ts = explore(*sys.engine);
  CHECK(ts.states.size() == 11);
  CHECK(check_co(*sys.engine, ts, sys.pred("c = 5"), sys.pred("c = 5 or c = 6")).holds());
  Verdict v = check_co(*sys.engine, ts, sys.pred("c = 5"), sys.pred("c = 5"));
  REQUIRE(v.violated());
  REQUIRE_FALSE(v.labels.empty());
  CHECK(v.labels.back() == "counter.inc");
  CHECK(replay(*sys.engine, ts, v));
  CHECK(check_co(*sys.engine, ts, sys.pred("false"), sys.pred("false")).holds());
}

TEST_CASE("semaphore co instantiated over observed values") {
  test::Sys sys(test::slurp(test::corpus("semaphore.unity")));
  TransitionSystem ts = explore(*sys.engine);
  for (int n : {0, 1}) {
    std::map<std::string, Value> b{{"n", test::I(n)}};
    Expr p = sys.model.resolve_predicate(parse_expression("g = n"), b);
    Expr q = sys.model.resolve_predicate(parse_expression("g >= n - 1"), b);
    CHECK(check_co(*sys.engine, ts, p, q).holds());
  }
}

TEST_CASE("invariants") {
  test::Sys sys(test::slurp(test::corpus("semaphore.unity")));
  TransitionSystem ts = explore(*sys.engine);
  CHECK(check_invariant(*sys.engine, ts, sys.pred("0 <= g and g <= 1")).holds());
  CHECK(check_invariant(*sys.engine, ts, sys.pred("true")).holds());
  Verdict bad = check_invariant(*sys.engine, ts, sys.pred("g = 1"));
  REQUIRE(bad.violated());
  CHECK(bad.labels.size() >= 1);
  CHECK(bad.labels.back().find("semaphore.P") == 0);
  CHECK(replay(*sys.engine, ts, bad));
  // Violated in the initial state: the witness path is empty.
  Verdict init = check_invariant(*sys.engine, ts, sys.pred("g = 0"));
  REQUIRE(init.violated());
  CHECK(init.labels.empty());
}

TEST_CASE("transient needs one statement for every p-state") {
  test::Sys one("program f declare x : boolean initially x = true assign off :: x := false if x end");
  TransitionSystem t1 = explore(*one.engine);
  Verdict v = check_transient(*one.engine, t1, one.pred("x"));
  CHECK(v.holds());
  CHECK(v.witness == "f.off");

  test::Sys sys(test::slurp(test::corpus("semaphore.unity")));
  TransitionSystem ts = explore(*sys.engine);
  Verdict g = check_transient(*sys.engine, ts, sys.pred("p[0] and g > 0"));
  CHECK(g.holds());
  CHECK(g.witness == "semaphore.P[i=0]");
  CHECK_FALSE(check_transient(*sys.engine, ts, sys.pred("true")).holds());

  // Two states each falsified by a different statement: no single witness.
  test::Sys two(R"(
program t
declare a, b : boolean
initially a = true
assign
  sa :: a, b := false, true if a and not b
  || sb :: b := false if b and not a
  || r :: a := true if not a and not b
end)");
  TransitionSystem t2 = explore(*two.engine);
  CHECK_FALSE(check_transient(*two.engine, t2, two.pred("a or b")).holds());
}

TEST_CASE("ensures") {
  test::Sys sys(test::slurp(test::corpus("semaphore.unity")));
  TransitionSystem ts = explore(*sys.engine);
  Verdict v = check_ensures(*sys.engine, ts, sys.pred("p[0] and g > 0"), sys.pred("not p[0]"));
  CHECK(v.holds());
  CHECK(check_co(*sys.engine, ts, sys.pred("p[0] and g > 0 and p[0]"),
                 sys.pred("p[0] and g > 0 or not p[0]"))
            .holds());
  CHECK(check_ensures(*sys.engine, ts, sys.pred("g = 1"), sys.pred("g = 1")).holds());
  CHECK_FALSE(check_ensures(*sys.engine, ts, sys.pred("g = 1"), sys.pred("g = 5")).holds());
}

TEST_CASE("receiver progress ensures on the mobile system") {
  test::Sys sys(test::slurp(test::corpus("sender_receiver_mobile.unity")));
  TransitionSystem ts = explore(*sys.engine);
  for (int k = 0; k < 4; ++k) {
    std::map<std::string, Value> b{{"k", test::I(k)}};
    Expr p = sys.model.resolve_predicate(
        parse_expression("receiver(0).c = k and k < sender(1).c and sender(1).c < N",
                         program_signatures(sys.model.def)),
        b);
    Expr q = sys.model.resolve_predicate(
        parse_expression("receiver(0).c = k + 1", program_signatures(sys.model.def)), b);
    CHECK(check_ensures(*sys.engine, ts, p, q).holds());
  }
}

TEST_CASE("truncated exploration never reports holds") {
  test::Sys sys(test::slurp(test::corpus("semaphore.unity")));
  ExploreBounds b;
  b.max_states = 1;
  TransitionSystem ts = explore(*sys.engine, b);
  CHECK(ts.truncated);
  CHECK(check_invariant(*sys.engine, ts, sys.pred("true")).kind == Verdict::Kind::Unknown);
  CHECK(check_co(*sys.engine, ts, sys.pred("g = 1"), sys.pred("true")).kind ==
        Verdict::Kind::Unknown);
}

TEST_CASE("exploration is deterministic") {
  test::Sys sys(test::slurp(test::corpus("sender_receiver_mobile.unity")));
  TransitionSystem a = explore(*sys.engine);
  TransitionSystem b = explore(*sys.engine);
  REQUIRE(a.states.size() == b.states.size());
  for (std::size_t i = 0; i < a.states.size(); ++i) CHECK(a.states[i].same(b.states[i]));
}

TEST_CASE("inhibition equals guard strengthening") {
  test::Sys inh(test::slurp(test::corpus("sender_receiver_mobile.unity")));
  test::Sys grd(test::slurp(test::corpus("sender_receiver_guarded.unity")));
  TransitionSystem a = explore(*inh.engine);
  TransitionSystem b = explore(*grd.engine);
  CHECK(digests(a) == digests(b));

  Model inlined = inline_inhibitions(inh.model);
  Engine e(inlined, inh.env);
  CHECK(digests(explore(e)) == digests(a));
}

TEST_CASE("exploration reports reaction divergence as an error") {
  SchedulerConfig cfg;
  cfg.max_reaction_iters = 20;
  test::Sys sys(R"(
program osc
declare f, go : boolean
assign
  start :: go := true if not go
  || up :: f := true reacts-to go and not f
  || down :: f := false reacts-to go and f
end)", cfg);
  TransitionSystem ts = explore(*sys.engine);
  CHECK(ts.error_tainted());
  CHECK(check_invariant(*sys.engine, ts, sys.pred("true")).kind == Verdict::Kind::Unknown);
}

TEST_CASE("uninitialized variables can be enumerated") {
  test::Sys sys("program u declare x : boolean || n : integer initially n = 0 end");
  ExploreBounds b;
  b.enumerate_uninitialized = true;
  TransitionSystem ts = explore(*sys.engine, b);
  CHECK(ts.initial.size() == 2);
  CHECK(explore(*sys.engine).initial.size() == 1);
}

TEST_CASE("trace properties") {
  SchedulerConfig cfg;
  cfg.seed = 4;
  test::Sys sys(test::slurp(test::corpus("semaphore.unity")), cfg);
  Trace t = sys.engine->run({1000, true});
  std::vector<SystemState> states{t.initial};
  states.insert(states.end(), t.states.begin(), t.states.end());
  CHECK(check_trace_invariant(*sys.engine, states, sys.pred("0 <= g and g <= 1")).holds());
  CHECK(check_trace_invariant(*sys.engine, states, sys.pred("g = 1")).violated());
  CHECK(check_trace_leadsto(*sys.engine, states, sys.pred("false"), sys.pred("false")).holds());
  CHECK(check_trace_leadsto(*sys.engine, states, sys.pred("p[0]"), sys.pred("not p[0]")).holds());
  // An obligation still open at the end is unknown.
  std::vector<SystemState> cut(states.begin(), states.begin() + 2);
  CHECK(check_trace_leadsto(*sys.engine, cut, sys.pred("p[0]"), sys.pred("g = 0")).kind ==
        Verdict::Kind::Unknown);
  CHECK(check_trace_co(*sys.engine, states, sys.pred("g = 1"), sys.pred("g >= 0")).holds());
}

TEST_CASE("property files check against the explored graph") {
  test::Sys sys(test::slurp(test::corpus("semaphore.unity")));
  TransitionSystem ts = explore(*sys.engine);
  auto props = parse_properties(test::slurp(test::corpus("semaphore.props")),
                                program_signatures(sys.model.def));
  auto results = check_properties(*sys.engine, ts, props);
  REQUIRE(results.size() == props.size());
  for (const auto& r : results) CHECK_MESSAGE(r.verdict.holds(), r.decl.name);
}

TEST_CASE("labels replay from the initial state") {
  test::Sys sys(test::slurp(test::corpus("semaphore.unity")));
  auto states = replay_labels(*sys.engine, sys.init(),
                              {"interactions.request_p", "semaphore.P[i=0]"});
  REQUIRE(states.size() == 3);
  CHECK(sys.get(states.back(), "semaphore", "g") == test::I(0));
  CHECK_THROWS_AS(replay_labels(*sys.engine, sys.init(), {"semaphore.V[i=1]"}), Error);
}
