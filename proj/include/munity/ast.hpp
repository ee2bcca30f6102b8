#pragma once

#include <optional>
#include <string>
#include <vector>

#include "munity/expr.hpp"

namespace munity {

struct TypeSpec {
  enum class Kind { Bool, Int, Location, Address, Message, Record, Any, Queue, Array };
  Kind kind = Kind::Any;
  std::vector<TypeSpec> elem;  // exactly one element for Queue / Array
  Expr size;                   // Array length

  bool operator==(const TypeSpec&) const = default;
};

struct Decl {
  std::vector<std::string> names;
  TypeSpec type;
  SourcePos pos;
  bool operator==(const Decl&) const = default;
};

/// `always` entry: a derived, read-only name (textual substitution).
struct Alias {
  std::string name;
  Expr value;
  SourcePos pos;
  bool operator==(const Alias&) const = default;
};

struct Init {
  std::string name;  // "lambda" for the location variable
  Expr value;
  SourcePos pos;
  bool operator==(const Init&) const = default;
};

struct Selector {
  enum class Kind { Index, Field, Head, At };
  Kind kind = Kind::Index;
  Expr index;         // Index / At
  std::string field;  // Field
  bool operator==(const Selector&) const = default;
};

struct LValue {
  std::string program;     // non-empty for a qualified target
  std::vector<Expr> args;  // instance arguments of a qualified target
  bool qualified = false;
  std::string var;
  std::vector<Selector> path;
  SourcePos pos;
  bool operator==(const LValue&) const = default;
};

struct Assignment {
  std::vector<LValue> targets;
  std::vector<Expr> values;
  Expr guard;  // only inside transactions
  SourcePos pos;
  bool operator==(const Assignment&) const = default;
};

/// A labeled guarded multiple assignment, reactive statement, or transaction.
struct Statement {
  std::string label;  // empty when unlabeled
  bool transaction = false;
  std::vector<Assignment> body;
  Expr guard;          // `if` guard, or the `reacts-to` predicate when reactive
  bool reactive = false;
  SourcePos pos;
  bool operator==(const Statement&) const = default;
};

struct Inhibition {
  std::string program;
  std::vector<Expr> args;
  std::string label;
  Expr when;
  SourcePos pos;
  bool operator==(const Inhibition&) const = default;
};

/// `<[] var : lo <= var < hi :: ...>`; `inclusive` records `var <= hi`.
struct Quantifier {
  std::string var;
  Expr lo;
  Expr hi;
  bool inclusive = false;
  bool operator==(const Quantifier&) const = default;
};

/// Assign-section or Interactions item: a statement, an inhibition, or a
/// quantified family of items.
struct Item {
  enum class Kind { Stmt, Inhibit, Family };
  Kind kind = Kind::Stmt;
  Statement stmt;
  Inhibition inhibit;
  Quantifier quant;
  std::vector<Item> children;
  SourcePos pos;
  bool operator==(const Item&) const = default;
};

struct PriorityBlock {
  int priority = 1;
  bool header = false;  // written with an explicit `priority N:` header
  std::vector<Item> items;
  bool operator==(const PriorityBlock&) const = default;
};

struct ProgramDef {
  std::string name;
  std::vector<std::string> params;
  bool at_lambda = false;
  std::vector<Decl> declare;
  std::vector<Alias> always;
  std::vector<Init> initially;
  std::vector<PriorityBlock> blocks;
  SourcePos pos;
  bool operator==(const ProgramDef&) const = default;

  std::vector<const Statement*> reactive_statements() const;
  std::vector<const Statement*> statements() const;
  const TypeSpec* find_decl(const std::string& name) const;
};

struct Component {
  std::string program;
  std::vector<Expr> args;
  Expr at;
  bool operator==(const Component&) const = default;
};

struct ComponentItem {
  bool family = false;
  Component comp;
  Quantifier quant;
  std::vector<ComponentItem> children;
  bool operator==(const ComponentItem&) const = default;
};

struct Param {
  std::string name;
  Expr value;
  bool operator==(const Param&) const = default;
};

struct SystemDef {
  std::string name;
  std::vector<Param> params;
  std::vector<ProgramDef> programs;
  std::vector<ComponentItem> components;
  std::vector<PriorityBlock> interactions;
  SourcePos pos;
  bool operator==(const SystemDef&) const = default;

  const ProgramDef* find_program(const std::string& name) const;
};

/// Calls f(const Statement&) on every statement in `items`, recursing into
/// families.
template <typename F>
void for_each_statement(const std::vector<Item>& items, F&& f) {
  for (const auto& it : items) {
    if (it.kind == Item::Kind::Stmt) f(it.stmt);
    else if (it.kind == Item::Kind::Family) for_each_statement(it.children, f);
  }
}

template <typename F>
void for_each_inhibition(const std::vector<Item>& items, F&& f) {
  for (const auto& it : items) {
    if (it.kind == Item::Kind::Inhibit) f(it.inhibit);
    else if (it.kind == Item::Kind::Family) for_each_inhibition(it.children, f);
  }
}

}  // namespace munity
