#pragma once

#include <memory>
#include <string>
#include <vector>

#include "munity/error.hpp"
#include "munity/value.hpp"

namespace munity {

enum class Op {
  Neg, Not,
  Add, Sub, Mul, Div, Mod,
  Eq, Ne, Lt, Le, Gt, Ge,
  And, Or, Implies,
  Append,  // q ++ v
};

enum class Builtin {
  None,
  Hook,       // environment-supplied function (can_send, send, update, ...)
  Head, Tail, Append, At, Length, Delete, Member, SetAt, Fill, Concat,
  Msg,        // msg(status, src, dst, type[, reply], content)
  Redirect,   // redirect(q, from, to): re-address unsent messages for `from`
  DeleteEach, // delete_each(arr, v): delete v from every queue of arr
  HasType,    // has_type(q, #T): some non-null message of type T in q
  Readdress,  // readdress(q, src, to): unsent messages from src not bound for `to` go to `to`
  Unrelay,    // unrelay(m, via): m sent by `via` to content.relay, relay field dropped
  EarlierFrom,  // earlier_from(q, i, src): an unprocessed request from src before index i
};

Builtin builtin_by_name(const std::string& name);
const char* builtin_name(Builtin b);

enum class ExprKind {
  Literal,
  Var,          // unqualified identifier (variable, alias, parameter, bound var)
  Qualified,    // program(args).var
  InstanceRef,  // program(args) used as an address value
  Unary,
  Binary,
  Call,
  Field,        // e.f
  Index,        // e[i]
  Cond,         // if c then a else b
  SeqLit,       // [a, b, c]
  RecordLit,    // rec(f: a, g: b)
};

class Expr;

struct ExprNode {
  ExprKind kind = ExprKind::Literal;
  SourcePos pos;
  Value value;
  std::string name;
  std::string program;
  Op op = Op::Add;
  Builtin builtin = Builtin::None;
  std::vector<Expr> args;
  std::vector<std::string> fields;

  // Filled by the compiler: a Var resolves to (instance, slot).
  int instance = -1;
  int slot = -1;
};

/// Immutable, shareable expression tree. Equality is structural and ignores
/// source positions and resolution annotations.
class Expr {
 public:
  Expr() = default;
  explicit Expr(std::shared_ptr<const ExprNode> n) : node_(std::move(n)) {}

  static Expr literal(Value v, SourcePos pos = {});
  static Expr var(std::string name, SourcePos pos = {});
  static Expr unary(Op op, Expr a, SourcePos pos = {});
  static Expr binary(Op op, Expr a, Expr b, SourcePos pos = {});
  static Expr make(ExprNode n);

  explicit operator bool() const { return node_ != nullptr; }
  const ExprNode& operator*() const { return *node_; }
  const ExprNode* operator->() const { return node_.get(); }
  const ExprNode* get() const { return node_.get(); }

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  std::shared_ptr<const ExprNode> node_;
};

/// Source text for an expression, parenthesized only where required.
std::string to_source(const Expr& e);

/// Visit every node (pre-order).
template <typename F>
void walk(const Expr& e, F&& f) {
  if (!e) return;
  f(*e);
  for (const auto& a : e->args) walk(a, f);
}

}  // namespace munity
