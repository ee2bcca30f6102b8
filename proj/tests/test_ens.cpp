#include <doctest.h>

#include "munity/checker.hpp"
#include "munity/ens.hpp"
#include "munity/error.hpp"
#include "munity/lang.hpp"
#include "support.hpp"

using namespace munity;

namespace {

const ProgramDef& program(const SystemDef& sys, const std::string& name) {
  const ProgramDef* p = sys.find_program(name);
  REQUIRE(p);
  return *p;
}

int statements_in(const PriorityBlock& b) {
  int n = 0;
  for_each_statement(b.items, [&](const Statement&) { ++n; });
  return n;
}

const SystemState& final_state(const EnsRun& r) {
  return r.trace.states.empty() ? r.trace.initial : r.trace.states.back();
}

Value var(const EnsRun& r, const SystemState& s, const std::string& inst, const std::string& v) {
  return read_name(r.model, s, r.model.find_instance(inst), v);
}

std::string verdict(const EnsRun& r, const std::string& prop) {
  return r.report["properties"][prop]["verdict"].get<std::string>();
}

EnsRun run_yaml(const std::string& yaml) { return run_scenario(parse_scenario(yaml)); }

}  // namespace

TEST_CASE("client and server programs have the figure's blocks") {
  SystemDef sys = build_ens_system(1, 1);
  Model m = compile(sys);
  CHECK(m.instances.size() == 2);
  const ProgramDef& client = program(sys, "client");
  REQUIRE(client.blocks.size() == 2);
  CHECK(client.blocks[0].priority > client.blocks[1].priority);
  CHECK(statements_in(client.blocks[0]) == 5);
  CHECK(statements_in(client.blocks[1]) == 15);
  const ProgramDef& server = program(sys, "server");
  REQUIRE(server.blocks.size() == 2);
  CHECK(server.blocks[0].items[0].kind == Item::Kind::Family);
}

TEST_CASE("two-by-two ens-system validates cleanly") {
  SystemDef sys = build_ens_system(2, 2);
  CHECK(validate(sys).empty());
  CHECK(compile(sys).instances.size() == 4);
}

TEST_CASE("instance counts below one are rejected") {
  CHECK_THROWS_AS(build_ens_system(0, 1), ConfigError);
  CHECK_THROWS_AS(build_ens_system(1, 0), ConfigError);
}

TEST_CASE("scenario files are validated") {
  CHECK_THROWS_AS(parse_scenario("clients: 1\nservers: 1\ncolour: blue\n"), ConfigError);
  CHECK_THROWS_AS(parse_scenario("clients: 1\nservers: 1\nrequests:\n  - {step: 1, client: 0, flag: fly}\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_scenario("clients: 1\nservers: 1\nmobility:\n  - {step: 1, client: 3, server: 0}\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_scenario("clients: [1\n"), ConfigError);
  CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.yaml"), IoError);
  EnsScenario sc = parse_scenario("clients: 2\nservers: 3\nseed: 9\nmode: random\n");
  CHECK(sc.clients == 2);
  CHECK(sc.servers == 3);
  CHECK(sc.seed == 9);
  CHECK(sc.mode == SchedulerConfig::Mode::Random);
}

TEST_CASE("registration with an always-connected server") {
  EnsRun r = run_yaml("clients: 1\nservers: 1\nmaxSteps: 300\nseed: 2\n");
  bool registered = false;
  for (const auto& s : r.trace.states) {
    if (var(r, s, "client(0)", "registered").as_bool()) {
      registered = true;
      Value clients = var(r, s, "server(0)", "registered_clients");
      CHECK(clients.as_seq().size() == 1);
      break;
    }
  }
  CHECK(registered);
  CHECK(r.all_hold);
}

TEST_CASE("no connection, no registration") {
  EnsRun r = run_yaml(test::slurp(test::corpus("scenarios/disconnected.yaml")));
  for (const auto& s : r.trace.states) CHECK_FALSE(var(r, s, "client(0)", "registered").as_bool());
  CHECK(verdict(r, "registration_leadsto") == "unknown");
}

TEST_CASE("deregistration removes the client") {
  EnsRun r = run_yaml(test::slurp(test::corpus("scenarios/single.yaml")));
  CHECK(r.trace.stop_reason == "quiescent");
  const SystemState& s = final_state(r);
  CHECK(lang_equal(var(r, s, "server(0)", "registered_clients"), Value::bottom()));
  CHECK(var(r, s, "client(0)", "retired").as_bool());
  CHECK(r.all_hold);
}

TEST_CASE("a disconnected head does not block other recipients") {
  EnsRun r = run_yaml(R"(
clients: 2
servers: 1
maxSteps: 600
seed: 1
connectivity:
  - {from: 120, to: 100000, client: 0}
publish:
  - {step: 150, server: 0, topic: 0, tag: 1}
  - {step: 150, server: 0, topic: 1, tag: 2}
)");
  CHECK(r.report["accounting"]["created"] == 2);
  CHECK(r.report["accounting"]["clients"][0]["delivered"] == 0);
  CHECK(r.report["accounting"]["clients"][1]["delivered"] == 1);
  const SystemState& s = final_state(r);
  int waiting = 0;
  for (const auto& m : var(r, s, "server(0)", "interface").as_seq()) {
    if (m.is_bottom()) continue;
    const Message& msg = m.as_message();
    if (msg.type == MsgType::M) {
      CHECK(msg.destination == Value::address("client(0)"));
      CHECK_FALSE(msg.status);
      ++waiting;
    }
  }
  CHECK(waiting == 1);
  CHECK(verdict(r, "conservation") == "holds");
}

TEST_CASE("connected recipients drain the server interface") {
  EnsRun r = run_yaml(R"(
clients: 2
servers: 1
maxSteps: 600
publish:
  - {step: 150, server: 0, topic: 0, tag: 1}
  - {step: 150, server: 0, topic: 1, tag: 2}
)");
  const SystemState& s = final_state(r);
  CHECK(r.trace.stop_reason == "quiescent");
  CHECK(lang_equal(var(r, s, "server(0)", "interface"), Value::bottom()));
  CHECK(r.report["accounting"]["delivered"] == 2);
}

TEST_CASE("handoff delivers messages left at the old server") {
  EnsRun r = run_yaml(R"(
clients: 1
servers: 2
maxSteps: 1000
seed: 3
connectivity:
  - {from: 100, to: 100000, client: 0, server: 0}
publish:
  - {step: 150, server: 0, topic: 0, tag: 1}
  - {step: 160, server: 0, topic: 0, tag: 2}
mobility:
  - {step: 200, client: 0, server: 1}
)");
  const auto& h = r.report["properties"]["handoff_exactly_once"];
  CHECK(h["verdict"] == "holds");
  REQUIRE(h["detail"].size() == 1);
  CHECK(h["detail"][0]["undelivered_before"] == 2);
  CHECK(h["detail"][0]["delivered_after"] == 2);
  CHECK(verdict(r, "no_duplication") == "holds");
  CHECK(verdict(r, "conservation") == "holds");
  const SystemState& s = final_state(r);
  CHECK(var(r, s, "client(0)", "server_addr") == Value::address("server(1)"));
}

TEST_CASE("no handoff while new_server equals the current server") {
  EnsRun r = run_yaml("clients: 1\nservers: 1\nmaxSteps: 300\n");
  for (const auto& st : r.trace.steps) CHECK(st.unit != "client(0).handoff");
}

TEST_CASE("without publications the in queues stay empty") {
  EnsRun r = run_yaml("clients: 2\nservers: 2\nmaxSteps: 400\n");
  const SystemState& s = final_state(r);
  CHECK(lang_equal(var(r, s, "client(0)", "in"), Value::bottom()));
  CHECK(lang_equal(var(r, s, "client(1)", "in"), Value::bottom()));
  CHECK(r.report["accounting"]["created"] == 0);
}

TEST_CASE("links flapping every step keep messages conserved") {
  EnsRun r = run_yaml(test::slurp(test::corpus("scenarios/adversarial.yaml")));
  CHECK(verdict(r, "conservation") == "holds");
  CHECK(verdict(r, "no_duplication") == "holds");
  CHECK(r.report["accounting"]["lost"] == 0);
}

TEST_CASE("flagship scenario") {
  EnsRun r = run_scenario(load_scenario(test::corpus("scenarios/flagship.yaml")));
  CHECK(r.trace.steps.size() >= 2000);
  CHECK(r.all_hold);
  for (auto& [k, v] : r.report["properties"].items()) CHECK_MESSAGE(v["verdict"] == "holds", k);
  CHECK(r.report["accounting"]["delivered"] == r.report["accounting"]["created"]);
}

TEST_CASE("leads-to registration closes under eventual connectivity") {
  EnsRun r = run_yaml(R"(
clients: 1
servers: 1
maxSteps: 400
connectivity:
  - {from: 0, to: 120, client: 0}
)");
  CHECK(verdict(r, "registration_leadsto") == "holds");
}

TEST_CASE("census sees a message in exactly one place") {
  EnsRun r = run_yaml(test::slurp(test::corpus("scenarios/single.yaml")));
  for (const auto& s : r.trace.states) {
    std::string why;
    CHECK_MESSAGE(conservation_holds(r.model, s, &why), why);
    CHECK_MESSAGE(no_duplication(r.model, s, &why), why);
  }
}

TEST_CASE("registration safety holds on a small explored instance") {
  EnsScenario sc = parse_scenario(R"(
clients: 1
servers: 1
branchLinks: true
requests:
  - {step: 0, client: 0, flag: deregister}
)");
  Model m = compile(build_ens_system(1, 1, 2, 4));
  EnsEnvironment env(sc);
  Engine eng(m, env);
  ExploreBounds b;
  b.max_states = 60000;
  b.max_queue = 4;
  TransitionSystem ts = explore(eng, b);
  auto props = parse_properties(ens_properties(1, 1), program_signatures(m.def));
  for (const auto& pr : check_properties(eng, ts, {props[0]})) CHECK_FALSE(pr.verdict.violated());
  for (const auto& s : ts.states) {
    std::string why;
    CHECK_MESSAGE(no_duplication(m, s, &why), why);
  }
}
