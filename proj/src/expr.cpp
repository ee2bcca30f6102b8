#include "munity/expr.hpp"

#include <utility>

namespace munity {

namespace {

const std::pair<const char*, Builtin> kBuiltins[] = {
    {"head", Builtin::Head},       {"tail", Builtin::Tail},
    {"append", Builtin::Append},   {"at", Builtin::At},
    {"length", Builtin::Length},   {"delete", Builtin::Delete},
    {"member", Builtin::Member},   {"set_at", Builtin::SetAt},
    {"fill", Builtin::Fill},       {"concat", Builtin::Concat},
    {"msg", Builtin::Msg},         {"redirect", Builtin::Redirect},
    {"delete_each", Builtin::DeleteEach}, {"has_type", Builtin::HasType},
    {"readdress", Builtin::Readdress}, {"unrelay", Builtin::Unrelay},
    {"earlier_from", Builtin::EarlierFrom},
};

}  // namespace

Builtin builtin_by_name(const std::string& name) {
  for (const auto& [n, b] : kBuiltins) {
    if (name == n) return b;
  }
  return Builtin::Hook;
}

const char* builtin_name(Builtin b) {
  for (const auto& [n, v] : kBuiltins) {
    if (v == b) return n;
  }
  return "?";
}

Expr Expr::make(ExprNode n) {
  return Expr(std::make_shared<const ExprNode>(std::move(n)));
}

Expr Expr::literal(Value v, SourcePos pos) {
  ExprNode n;
  n.kind = ExprKind::Literal;
  n.value = std::move(v);
  n.pos = pos;
  return make(std::move(n));
}

Expr Expr::var(std::string name, SourcePos pos) {
  ExprNode n;
  n.kind = ExprKind::Var;
  n.name = std::move(name);
  n.pos = pos;
  return make(std::move(n));
}

Expr Expr::unary(Op op, Expr a, SourcePos pos) {
  ExprNode n;
  n.kind = ExprKind::Unary;
  n.op = op;
  n.args.push_back(std::move(a));
  n.pos = pos;
  return make(std::move(n));
}

Expr Expr::binary(Op op, Expr a, Expr b, SourcePos pos) {
  ExprNode n;
  n.kind = ExprKind::Binary;
  n.op = op;
  n.args.push_back(std::move(a));
  n.args.push_back(std::move(b));
  n.pos = pos;
  return make(std::move(n));
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  if (!a.node_ || !b.node_) return false;
  const ExprNode& x = *a.node_;
  const ExprNode& y = *b.node_;
  return x.kind == y.kind && x.value == y.value && x.name == y.name &&
         x.program == y.program && x.op == y.op && x.builtin == y.builtin &&
         x.args == y.args && x.fields == y.fields;
}

namespace {

// Binding strength, loosest first.
enum Prec {
  kImplies = 1,
  kOr,
  kAnd,
  kNot,
  kCompare,
  kAdditive,
  kMultiplicative,
  kUnaryMinus,
  kPostfix,
  kPrimary,
};

int binary_prec(Op op) {
  switch (op) {
    case Op::Implies: return kImplies;
    case Op::Or: return kOr;
    case Op::And: return kAnd;
    case Op::Eq: case Op::Ne: case Op::Lt: case Op::Le: case Op::Gt: case Op::Ge:
      return kCompare;
    case Op::Add: case Op::Sub: case Op::Append: return kAdditive;
    case Op::Mul: case Op::Div: case Op::Mod: return kMultiplicative;
    default: return kPrimary;
  }
}

const char* op_text(Op op) {
  switch (op) {
    case Op::Neg: return "-";
    case Op::Not: return "not ";
    case Op::Add: return " + ";
    case Op::Sub: return " - ";
    case Op::Mul: return " * ";
    case Op::Div: return " / ";
    case Op::Mod: return " mod ";
    case Op::Eq: return " = ";
    case Op::Ne: return " /= ";
    case Op::Lt: return " < ";
    case Op::Le: return " <= ";
    case Op::Gt: return " > ";
    case Op::Ge: return " >= ";
    case Op::And: return " and ";
    case Op::Or: return " or ";
    case Op::Implies: return " implies ";
    case Op::Append: return " ++ ";
  }
  return "?";
}

int prec_of(const Expr& e) {
  switch (e->kind) {
    case ExprKind::Binary: return binary_prec(e->op);
    case ExprKind::Unary: return e->op == Op::Not ? kNot : kUnaryMinus;
    case ExprKind::Cond: return 0;
    case ExprKind::Field: case ExprKind::Index: return kPostfix;
    case ExprKind::Literal:
      // Negative literals only arise from transforms; print as unary minus.
      if (e->value.kind() == Value::Kind::Int && e->value.as_int() < 0)
        return kUnaryMinus;
      return kPrimary;
    default: return kPrimary;
  }
}

std::string print(const Expr& e);

std::string wrap(const Expr& e, int min_prec) {
  std::string s = print(e);
  return prec_of(e) < min_prec ? "(" + s + ")" : s;
}

std::string join_args(const std::vector<Expr>& args, std::size_t from = 0) {
  std::string s;
  for (std::size_t i = from; i < args.size(); ++i) {
    if (i > from) s += ", ";
    s += print(args[i]);
  }
  return s;
}

std::string print(const Expr& e) {
  const ExprNode& n = *e;
  switch (n.kind) {
    case ExprKind::Literal: return n.value.str();
    case ExprKind::Var: return n.name;
    case ExprKind::Qualified:
      return n.program + (n.args.empty() ? "" : "(" + join_args(n.args) + ")") +
             "." + n.name;
    case ExprKind::InstanceRef:
      return n.program + (n.args.empty() ? "" : "(" + join_args(n.args) + ")");
    case ExprKind::Unary:
      if (n.op == Op::Not) return "not " + wrap(n.args[0], kNot);
      return "-" + wrap(n.args[0], kUnaryMinus);
    case ExprKind::Binary: {
      int p = binary_prec(n.op);
      int lp = p, rp = p + 1;
      if (n.op == Op::Implies) {
        lp = p + 1;
        rp = p;
      } else if (p == kCompare) {
        lp = p + 1;
      }
      return wrap(n.args[0], lp) + op_text(n.op) + wrap(n.args[1], rp);
    }
    case ExprKind::Call:
      return n.name + "(" + join_args(n.args) + ")";
    case ExprKind::Field:
      return wrap(n.args[0], kPostfix) + "." + n.name;
    case ExprKind::Index:
      return wrap(n.args[0], kPostfix) + "[" + print(n.args[1]) + "]";
    case ExprKind::Cond:
      return "if " + print(n.args[0]) + " then " + print(n.args[1]) + " else " +
             wrap(n.args[2], 1);
    case ExprKind::SeqLit:
      return "[" + join_args(n.args) + "]";
    case ExprKind::RecordLit: {
      std::string s = "rec(";
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) s += ", ";
        s += n.fields[i] + ": " + print(n.args[i]);
      }
      return s + ")";
    }
  }
  return "?";
}

}  // namespace

std::string to_source(const Expr& e) { return e ? print(e) : std::string(); }

}  // namespace munity
