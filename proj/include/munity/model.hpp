#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "munity/ast.hpp"

namespace munity {

struct VarInfo {
  std::string name;
  TypeSpec type;
  std::int64_t array_len = 0;  // for Array types, evaluated at compile time
  bool is_queue() const { return type.kind == TypeSpec::Kind::Queue; }
};

/// A resolved selector: indices are expressions over the instance scope.
struct CSelector {
  Selector::Kind kind = Selector::Kind::Index;
  Expr index;
  std::string field;
};

struct CTarget {
  int instance = -1;
  int slot = -1;
  std::vector<CSelector> path;
  std::string text;  // source form, for diagnostics
};

struct CAssignment {
  std::vector<CTarget> targets;
  std::vector<Expr> values;
  Expr guard;  // transaction sub-assignments only
};

/// A concrete statement: a family member bound to one instance (or to the
/// interactions section, instance = -1).
struct Unit {
  int id = -1;
  std::string name;   // e.g. "semaphore.P[i=0]"
  std::string label;  // source label; "s<k>" when unlabeled
  int instance = -1;
  int priority = 1;
  bool transaction = false;
  bool reactive = false;
  std::vector<CAssignment> body;
  Expr guard;                    // null = unguarded
  std::vector<Expr> inhibitors;  // unit is disabled while any holds
  Expr overflow_check;           // dynamic family: true when the bound exceeds the cap
};

struct InitEntry {
  int slot = -1;
  Expr value;
};

struct Instance {
  std::string id;  // "client(1)", or the bare program name without args
  std::string program;
  std::vector<Value> args;
  std::vector<VarInfo> vars;  // slot 0 = lambda
  std::map<std::string, int> slot_of;
  Expr at;                    // component `at` clause, resolved
  std::vector<InitEntry> init;

  int slot(const std::string& name) const {
    auto it = slot_of.find(name);
    return it == slot_of.end() ? -1 : it->second;
  }
};

struct CompileOptions {
  /// Priority of interaction statements written without a `priority` header.
  /// Unset = highest program priority present.
  std::optional<int> interaction_priority;
  /// Cap for families whose bound depends on state (e.g. length(interface)).
  /// Unset = the system parameter MaxQueue, else 8.
  std::optional<int> max_family;
};

/// A system compiled to concrete instances and statements. All expressions
/// stored here are fully resolved: variables carry (instance, slot), and
/// parameters, formals, bound variables and aliases have been substituted.
class Model {
 public:
  SystemDef def;
  std::map<std::string, Value> params;
  std::vector<Instance> instances;
  std::vector<Unit> units;           // schedulable (non-reactive) units
  std::vector<Unit> reactive;        // sweep order
  std::vector<int> priorities;       // distinct priorities of `units`, ascending
  int family_cap = 8;

  int find_instance(const std::string& id) const;
  int instance_of(const Value& address) const;  // -1 when not an address of this model
  const Unit* find_unit(const std::string& name) const;

  /// Resolves a predicate or expression written against this system. Free
  /// variables may be qualified (`prog(args).v`) or, when the name is declared
  /// by exactly one instance, unqualified. `bound` supplies values for
  /// quantified names.
  Expr resolve_predicate(const Expr& e, const std::map<std::string, Value>& bound = {}) const;

  /// Resolves `e` as if written inside instance `inst` (aliases, self_addr).
  Expr resolve_in_instance(const Expr& e, int inst,
                           const std::map<std::string, Value>& bound = {}) const;
};

Model compile(const SystemDef& sys, const CompileOptions& opts = {});

/// Evaluates an expression without a state (parameters, literals only).
Value const_eval(const Expr& e);

}  // namespace munity
