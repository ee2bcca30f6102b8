#include <doctest.h>

#include <filesystem>

#include "munity/error.hpp"
#include "munity/lang.hpp"
#include "support.hpp"

using namespace munity;

namespace {

std::vector<std::string> corpus_systems() {
  std::vector<std::string> out;
  for (const auto& e : std::filesystem::directory_iterator(MUNITY_CORPUS_DIR)) {
    if (e.path().extension() == ".unity") out.push_back(e.path().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool has_rule(const std::vector<Diagnostic>& ds, const std::string& rule) {
  for (const auto& d : ds) {
    if (d.rule == rule) return true;
  }
  return false;
}

const char* kModifiedReceiver = R"(
system r(N = 4)
program receiver(j) at lambda
declare
  bit : boolean || buffer : array[N] of boolean || c : integer
assign
  zero :: c := 0 reacts-to bit and c >= N
  || receive :: buffer[c], c := bit, c + 1 if c < N
end
components receiver(0) at @home
end
)";

}  // namespace

TEST_CASE("corpus systems round-trip through the printer") {
  auto files = corpus_systems();
  CHECK(files.size() >= 5);
  for (const auto& f : files) {
    CAPTURE(f);
    SystemDef a = parse_source(test::slurp(f));
    SystemDef b = parse_source(print_system(a));
    CHECK(a == b);
    CHECK(print_system(b) == print_system(a));
  }
}

TEST_CASE("clean corpus systems validate without diagnostics") {
  for (const char* name : {"semaphore.unity", "sender_receiver.unity",
                           "sender_receiver_mobile.unity", "sender_receiver_guarded.unity",
                           "ens_system.unity"}) {
    CAPTURE(name);
    auto ds = validate(parse_source(test::slurp(test::corpus(name))));
    for (const auto& d : ds) MESSAGE(d.str());
    CHECK(ds.empty());
  }
}

TEST_CASE("inhibited reactive statement is diagnosed") {
  std::string text = test::slurp(test::corpus("sender_receiver_mobile.unity"));
  std::string bad = text;
  bad.replace(bad.rfind("end"), 3, "|| inhibit receiver(0).zero when true\nend");
  auto ds = validate(parse_source(bad));
  CHECK(has_rule(ds, "RULE-REACT-INHIBIT"));
  CHECK(has_errors(ds));
}

TEST_CASE("lambda never initialized is a warning") {
  auto ds = validate(parse_source(R"(
system s
program a at lambda declare x : integer assign m :: lambda := x end
components a
end)"));
  REQUIRE(ds.size() == 1);
  CHECK(ds[0].severity == Diagnostic::Severity::Warning);
  CHECK_FALSE(has_errors(ds));
}

TEST_CASE("validation is deterministic") {
  std::string text = test::slurp(test::corpus("sender_receiver_mobile.unity"));
  text.replace(text.rfind("end"), 3,
               "|| inhibit receiver(0).zero when true || inhibit receiver(0).move when true\nend");
  SystemDef sys = parse_source(text);
  auto a = validate(sys);
  auto b = validate(sys);
  REQUIRE(a.size() == 2);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].str() == b[i].str());
}

TEST_CASE("reacts-to becomes if in a new top block") {
  SystemDef sys = parse_source(kModifiedReceiver);
  int moved = 0;
  SystemDef out = eliminate_reacts_to(sys, &moved);
  CHECK(moved == 1);
  CHECK(count_reactive(out) == 0);
  const ProgramDef& p = out.programs[0];
  REQUIRE(p.blocks.size() == 2);
  const PriorityBlock& top = p.blocks[0].priority > p.blocks[1].priority ? p.blocks[0] : p.blocks[1];
  const PriorityBlock& low = &top == &p.blocks[0] ? p.blocks[1] : p.blocks[0];
  CHECK(top.priority > low.priority);
  REQUIRE(top.items.size() == 1);
  const Statement& zero = top.items[0].stmt;
  CHECK(zero.label == "zero");
  CHECK_FALSE(zero.reactive);
  CHECK(zero.guard == parse_expression("bit and c >= N"));
  std::string text = print_system(out);
  CHECK(text.find("zero :: c := 0 if bit and c >= N") != std::string::npos);
}

TEST_CASE("systems without reactions pass through unchanged") {
  SystemDef sys = parse_source(test::slurp(test::corpus("semaphore.unity")));
  int moved = -1;
  SystemDef out = eliminate_reacts_to(sys, &moved);
  CHECK(moved == 0);
  CHECK(out == sys);
}

TEST_CASE("elimination moves every reactive statement of the mobile system") {
  SystemDef sys = parse_source(test::slurp(test::corpus("sender_receiver_mobile.unity")));
  int written = count_reactive(sys);
  CHECK(written == 3);  // receiver.zero, receiver.move, the bit coupling
  int moved = 0;
  SystemDef out = eliminate_reacts_to(sys, &moved);
  CHECK(moved == written);
  CHECK(count_reactive(out) == 0);
  // Idempotent.
  int again = -1;
  CHECK(eliminate_reacts_to(out, &again) == out);
  CHECK(again == 0);
  // Still parses and validates after printing.
  SystemDef back = parse_source(print_system(out));
  CHECK(back == out);
  CHECK_FALSE(has_errors(validate(back)));
}

TEST_CASE("ens-system survives elimination and printing") {
  SystemDef sys = parse_source(test::slurp(test::corpus("ens_system.unity")));
  SystemDef out = eliminate_reacts_to(sys);
  CHECK(parse_source(print_system(out)) == out);
}

TEST_CASE("inlined inhibitions become guards") {
  Model m = compile(parse_source(test::slurp(test::corpus("sender_receiver_mobile.unity"))));
  Model g = inline_inhibitions(m);
  for (const auto& u : g.units) CHECK(u.inhibitors.empty());
  CHECK(g.units.size() == m.units.size());
}
