#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "munity/error.hpp"
#include "support.hpp"

using namespace munity;
using test::B;
using test::I;

namespace {

SchedulerConfig deficit(std::uint64_t seed = 1, int window = 4) {
  SchedulerConfig c;
  c.mode = SchedulerConfig::Mode::Deficit;
  c.seed = seed;
  c.fairness_window = window;
  return c;
}

const char* kThree = R"(
program three
declare a, b, c : integer
assign
  ta :: a := a + 1 if a < 1000000
  || tb :: b := b + 1 if b < 1000000
  || tc :: c := c + 1 if c < 1000000
end)";

const char* kTwoBlocks = R"(
program two
declare x, y : integer
assign
  priority 2:
    hi :: x := 1 - x
  priority 1:
    lo :: y := 1 - y
end)";

}  // namespace

TEST_CASE("semaphore initial state") {
  test::Sys sys(test::slurp(test::corpus("semaphore.unity")));
  SystemState s = sys.init();
  CHECK(sys.get(s, "semaphore", "g") == I(1));
  CHECK(sys.get(s, "semaphore", "p") == test::bools({false, false}));
  CHECK(sys.get(s, "semaphore", "v") == test::bools({false, false}));
  CHECK(s.step == 0);
}

TEST_CASE("client initial state") {
  test::Sys sys(test::slurp(test::corpus("ens_system.unity")));
  SystemState s = sys.init();
  CHECK(lang_equal(sys.get(s, "client(0)", "interface"), Value::bottom()));
  CHECK(sys.get(s, "client(0)", "server_addr").is_bottom());
  CHECK(sys.get(s, "client(1)", "topic") == I(1));
}

TEST_CASE("component without initially entries takes defaults") {
  test::Sys sys("program d declare x : integer || f : boolean || q : queue of integer end");
  SystemState s = sys.init();
  CHECK(sys.get(s, "d", "x") == I(0));
  CHECK(sys.get(s, "d", "f") == B(false));
  CHECK(sys.get(s, "d", "q") == Value::seq({}));
}

TEST_CASE("lambda comes from the initially section or the at clause") {
  test::Sys sys(test::slurp(test::corpus("sender_receiver_mobile.unity")));
  SystemState s = sys.init();
  CHECK(sys.get(s, "sender(1)", "lambda") == Value::location("L0"));
  CHECK(sys.get(s, "receiver(0)", "lambda") == Value::location("L0"));
}

TEST_CASE("initially entries run in dependency order; cycles are errors") {
  test::Sys ok("program d declare x, y : integer initially y = x + 1 || x = 2 end");
  CHECK(ok.get(ok.init(), "d", "y") == I(3));
  test::Sys bad("program d declare x, y : integer initially y = x || x = y end");
  CHECK_THROWS_WITH_AS(bad.init(), doctest::Contains("cyclic"), EvalError);
}

TEST_CASE("inhibited transmit is not enabled") {
  test::Sys sys(test::slurp(test::corpus("sender_receiver_mobile.unity")));
  SystemState s = sys.init();
  int tx = sys.unit("sender(1).transmit");
  CHECK(sys.engine->enabled(s, sys.model.units[tx]));
  sys.set(s, "sender(1)", "c", I(2));
  sys.set(s, "receiver(0)", "c", I(1));
  auto en = sys.engine->enabled_units(s);
  CHECK(std::find(en.begin(), en.end(), tx) == en.end());
  // Apart, the inhibition no longer applies.
  sys.set(s, "receiver(0)", "lambda", Value::location("far"));
  CHECK(sys.engine->enabled(s, sys.model.units[tx]));
}

TEST_CASE("enabled units") {
  test::Sys sys(test::slurp(test::corpus("semaphore.unity")));
  SystemState s = sys.init();
  sys.set(s, "semaphore", "p", test::bools({true, false}));
  auto en = sys.engine->enabled_units(s);
  CHECK(std::find(en.begin(), en.end(), sys.unit("semaphore.P[i=0]")) != en.end());
  CHECK(std::find(en.begin(), en.end(), sys.unit("semaphore.P[i=1]")) == en.end());

  test::Sys idle("program d declare x : integer assign t :: x := 1 if x > 5 end");
  CHECK(idle.engine->enabled_units(idle.init()).empty());
}

TEST_CASE("reactive statements never appear as units") {
  test::Sys sys(test::slurp(test::corpus("sender_receiver_mobile.unity")));
  for (const auto& u : sys.model.units) CHECK_FALSE(u.reactive);
  CHECK(sys.model.reactive.size() == 3);
}

TEST_CASE("no reactions: a single sweep") {
  test::Sys sys(test::slurp(test::corpus("semaphore.unity")));
  SystemState s = sys.init();
  std::string d = s.digest_hex();
  CHECK(sys.engine->reactive_fixed_point(s) == 1);
  CHECK(s.digest_hex() == d);
}

TEST_CASE("modified receiver resets its counter by reaction") {
  test::Sys sys(test::slurp(test::corpus("sender_receiver_mobile.unity")));
  SystemState s = sys.init();
  sys.set(s, "receiver(0)", "lambda", Value::location("elsewhere"));
  sys.set(s, "receiver(0)", "bit", B(true));
  sys.set(s, "receiver(0)", "c", I(4));
  CHECK(sys.engine->reactive_fixed_point(s) == 2);
  CHECK(sys.get(s, "receiver(0)", "c") == I(0));
}

TEST_CASE("oscillating reactions diverge at the cap") {
  SchedulerConfig cfg;
  cfg.max_reaction_iters = 50;
  test::Sys sys(R"(
program osc
declare f : boolean
assign
  up :: f := true reacts-to not f
  || down :: f := false reacts-to f
end)", cfg);
  try {
    sys.init();
    FAIL("expected divergence");
  } catch (const ReactionDivergence& e) {
    CHECK((e.statement() == "osc.up" || e.statement() == "osc.down"));
    CHECK(std::string(e.what()).find("50") != std::string::npos);
  }
}

TEST_CASE("semaphore step") {
  test::Sys sys(test::slurp(test::corpus("semaphore.unity")));
  SystemState s = sys.init();
  sys.set(s, "semaphore", "p", test::bools({true, false}));
  SystemState pre = s;
  std::string pre_digest = pre.digest_hex();
  sys.engine->execute(s, sys.unit("semaphore.P[i=0]"));
  CHECK(sys.get(s, "semaphore", "g") == I(0));
  CHECK(sys.get(s, "semaphore", "p") == test::bools({false, false}));
  CHECK(s.step == pre.step + 1);
  CHECK(pre.digest_hex() == pre_digest);  // the input copy is untouched
}

TEST_CASE("transaction runs its parts back to back") {
  test::Sys sys("program t declare x, y : integer assign tr :: < x := 1 ; y := x > if x = 0 end");
  SystemState s = sys.init();
  sys.engine->execute(s, sys.unit("t.tr"));
  CHECK(sys.get(s, "t", "x") == I(1));
  CHECK(sys.get(s, "t", "y") == I(1));
  CHECK(s.step == 1);
}

TEST_CASE("reactions fire inside a transaction") {
  test::Sys sys(R"(
program t
declare x, y, seen : integer
assign
  tr :: < x := 1 ; y := seen >
  || watch :: seen := x reacts-to seen /= x
end)");
  SystemState s = sys.init();
  sys.engine->execute(s, sys.unit("t.tr"));
  CHECK(sys.get(s, "t", "y") == I(1));
}

TEST_CASE("reactive interaction mirrors the bit in the same step") {
  test::Sys sys(R"(
system pair
program src declare bit : boolean assign flip :: bit := not bit end
program dst declare bit : boolean end
components src at @here || dst at @here
interactions dst.bit := src.bit reacts-to src.lambda = dst.lambda
end)");
  SystemState s = sys.init();
  sys.engine->execute(s, sys.unit("src.flip"));
  CHECK(sys.get(s, "src", "bit") == B(true));
  CHECK(sys.get(s, "dst", "bit") == B(true));
  sys.engine->execute(s, sys.unit("src.flip"));
  CHECK(sys.get(s, "dst", "bit") == B(false));
}

TEST_CASE("single enabled unit is always selected") {
  for (auto mode : {SchedulerConfig::Mode::Random, SchedulerConfig::Mode::Deficit}) {
    SchedulerConfig cfg;
    cfg.mode = mode;
    test::Sys sys(kThree, cfg);
    Scheduler sch(sys.model, cfg);
    for (int i = 0; i < 100; ++i) CHECK(sch.select({1}) == 1);
  }
}

TEST_CASE("deficit mode rotates three always-enabled statements") {
  SchedulerConfig cfg = deficit(1, 1);
  test::Sys sys(kThree, cfg);
  Scheduler sch(sys.model, cfg);
  std::vector<int> all{0, 1, 2};
  for (int i = 0; i < 6; ++i) sch.select(all);  // warm-up
  for (int round = 0; round < 1000; ++round) {
    std::set<int> seen;
    for (int k = 0; k < 3; ++k) seen.insert(sch.select(all));
    CHECK(seen.size() == 3);
  }
}

TEST_CASE("weighted random block frequencies") {
  SchedulerConfig cfg;
  cfg.mode = SchedulerConfig::Mode::Random;
  cfg.seed = 42;
  test::Sys sys(kTwoBlocks, cfg);
  Scheduler sch(sys.model, cfg);
  std::map<int, int> hits;
  const int n = 100000;
  for (int i = 0; i < n; ++i) hits[sys.model.units[sch.select({0, 1})].priority]++;
  CHECK(std::abs(hits[2] / double(n) - 2.0 / 3) < 0.02);
  CHECK(std::abs(hits[1] / double(n) - 1.0 / 3) < 0.02);
}

TEST_CASE("weights") {
  auto w = parse_weights("p2=2/3,p1=1/3");
  CHECK(w.at(2) == Rational(2, 3));
  CHECK(format_weights(w) == "p1=1/3,p2=2/3");
  CHECK(effective_weights({1, 2}, {}) == w);
  CHECK(effective_weights({7}, {}).at(7) == Rational(1));
  CHECK_THROWS_AS(effective_weights({1, 2}, parse_weights("p1=1/2,p2=1/3")), ConfigError);
  CHECK_THROWS_AS(effective_weights({1, 2}, parse_weights("p1=0,p2=1")), ConfigError);
  CHECK_THROWS_AS(effective_weights({1, 2}, parse_weights("p2=1")), ConfigError);
  CHECK_THROWS_AS(parse_weights("p1=x"), ConfigError);
}

TEST_CASE("semaphore run keeps g within 0 and 1") {
  for (auto mode : {SchedulerConfig::Mode::Random, SchedulerConfig::Mode::Deficit}) {
    SchedulerConfig cfg;
    cfg.mode = mode;
    cfg.seed = 9;
    test::Sys sys(test::slurp(test::corpus("semaphore.unity")), cfg);
    Trace t = sys.engine->run({1000, true});
    CHECK(t.steps.size() == 1000);
    for (const auto& s : t.states) {
      auto g = sys.get(s, "semaphore", "g").as_int();
      CHECK((g == 0 || g == 1));
    }
  }
}

TEST_CASE("zero steps: initial state only") {
  test::Sys sys(test::slurp(test::corpus("semaphore.unity")));
  Trace t = sys.engine->run({0, true});
  CHECK(t.steps.empty());
  CHECK(t.initial_digest == sys.init().digest_hex());
}

TEST_CASE("colocated sender and receiver transfer the word") {
  test::Sys sys(test::slurp(test::corpus("sender_receiver_mobile.unity")), deficit(3));
  Trace t = sys.engine->run({200, true});
  bool done = false;
  for (const auto& s : t.states) {
    if (sys.get(s, "receiver(0)", "buffer") == sys.get(s, "sender(1)", "word")) {
      done = true;
      break;
    }
  }
  CHECK(done);
}

TEST_CASE("quiescence stops the run") {
  test::Sys sys("program q declare x : integer assign t :: x := x + 1 if x < 3 end");
  Trace t = sys.engine->run({100, false});
  CHECK(t.stop_reason == "quiescent");
  CHECK(t.steps.size() == 3);
}

TEST_CASE("same seed, same trace") {
  for (auto mode : {SchedulerConfig::Mode::Random, SchedulerConfig::Mode::Deficit}) {
    SchedulerConfig cfg;
    cfg.mode = mode;
    cfg.seed = 1234;
    test::Sys a(test::slurp(test::corpus("semaphore.unity")), cfg);
    test::Sys b(test::slurp(test::corpus("semaphore.unity")), cfg);
    Trace ta = a.engine->run({500, false});
    Trace tb = b.engine->run({500, false});
    REQUIRE(ta.steps.size() == tb.steps.size());
    for (std::size_t i = 0; i < ta.steps.size(); ++i) {
      CHECK(ta.steps[i].digest == tb.steps[i].digest);
      CHECK(ta.steps[i].unit == tb.steps[i].unit);
    }
  }
}

TEST_CASE("deficit fairness bound holds over a long run") {
  SchedulerConfig cfg = deficit(5, 4);
  test::Sys sys(kThree, cfg);
  Trace t = sys.engine->run({10000, false});
  std::map<std::string, std::size_t> last;
  std::size_t worst = 0;
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const std::string& u = t.steps[i].unit;
    worst = std::max(worst, i - (last.count(u) ? last[u] : 0));
    last[u] = i;
  }
  CHECK(worst <= 4 * 3);
}

TEST_CASE("evaluation errors end the run with the statement name") {
  test::Sys sys("program e declare q : queue of integer || x : integer assign bad :: x := head(q) end");
  Trace t = sys.engine->run({10, false});
  CHECK(t.stop_reason == "error");
  REQUIRE(t.error);
  CHECK(t.error->find("e.bad") != std::string::npos);
}

TEST_CASE("scheduler configuration is validated") {
  SchedulerConfig cfg;
  cfg.max_reaction_iters = 0;
  CHECK_THROWS_AS(test::Sys(kThree, cfg), ConfigError);
  CHECK_THROWS_AS(parse_mode("fast"), ConfigError);
  CHECK(parse_mode("deficit") == SchedulerConfig::Mode::Deficit);
}
