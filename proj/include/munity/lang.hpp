#pragma once

#include <string>
#include <vector>

#include "munity/ast.hpp"
#include "munity/model.hpp"

namespace munity {

// ---- printer ----

/// Canonical ASCII text; parse_system(print_system(x)) == x.
std::string print_system(const SystemDef& sys);
std::string print_program(const ProgramDef& prog);
std::string print_item(const Item& item, int indent = 0);

// ---- validation ----

struct Diagnostic {
  enum class Severity { Error, Warning };
  Severity severity = Severity::Error;
  std::string rule;  // e.g. RULE-REACT-INHIBIT
  std::string message;
  SourcePos pos;

  std::string str() const;
};

/// One diagnostic per violated rule instance, in a stable order.
std::vector<Diagnostic> validate(const SystemDef& sys);
bool has_errors(const std::vector<Diagnostic>& diags);

// ---- transforms ----

/// Turns every `a reacts-to p` into `a if p` inside one new block whose
/// priority exceeds every existing one. Reactive interaction statements move
/// to a matching interactions block. `moved` receives the statement count
/// (family members count once per written statement).
SystemDef eliminate_reacts_to(const SystemDef& sys, int* moved = nullptr);

/// Number of reactive statements written in the system text.
int count_reactive(const SystemDef& sys);

/// Rewrites every inhibition as guard strengthening: `inhibit L when p`
/// becomes L's guard conjoined with `not p`.
Model inline_inhibitions(Model m);

}  // namespace munity
