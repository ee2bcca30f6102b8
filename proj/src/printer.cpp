#include "munity/lang.hpp"

namespace munity {

namespace {

std::string pad(int n) { return std::string(static_cast<std::size_t>(n), ' '); }

// Family bounds are parsed at additive level; anything looser needs parens.
std::string bound_src(const Expr& e) {
  std::string s = to_source(e);
  bool loose = e->kind == ExprKind::Cond ||
               (e->kind == ExprKind::Unary && e->op == Op::Not) ||
               (e->kind == ExprKind::Binary &&
                (e->op == Op::And || e->op == Op::Or || e->op == Op::Implies || e->op == Op::Eq ||
                 e->op == Op::Ne || e->op == Op::Lt || e->op == Op::Le || e->op == Op::Gt ||
                 e->op == Op::Ge));
  return loose ? "(" + s + ")" : s;
}

std::string args_src(const std::vector<Expr>& args) {
  if (args.empty()) return "";
  std::string s = "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) s += ", ";
    s += to_source(args[i]);
  }
  return s + ")";
}

std::string type_src(const TypeSpec& t) {
  switch (t.kind) {
    case TypeSpec::Kind::Bool: return "boolean";
    case TypeSpec::Kind::Int: return "integer";
    case TypeSpec::Kind::Location: return "location";
    case TypeSpec::Kind::Address: return "address";
    case TypeSpec::Kind::Message: return "message";
    case TypeSpec::Kind::Record: return "record";
    case TypeSpec::Kind::Any: return "any";
    case TypeSpec::Kind::Queue: return "queue of " + type_src(t.elem.at(0));
    case TypeSpec::Kind::Array:
      return "array[" + to_source(t.size) + "] of " + type_src(t.elem.at(0));
  }
  return "?";
}

std::string lvalue_src(const LValue& lv) {
  std::string s = lv.qualified ? lv.program + args_src(lv.args) + "." + lv.var : lv.var;
  for (const auto& sel : lv.path) {
    switch (sel.kind) {
      case Selector::Kind::Index: s += "[" + to_source(sel.index) + "]"; break;
      case Selector::Kind::Field: s += "." + sel.field; break;
      case Selector::Kind::Head: s = "head(" + s + ")"; break;
      case Selector::Kind::At: s = "at(" + s + ", " + to_source(sel.index) + ")"; break;
    }
  }
  return s;
}

std::string assignment_src(const Assignment& a) {
  std::string s;
  for (std::size_t i = 0; i < a.targets.size(); ++i) s += (i ? ", " : "") + lvalue_src(a.targets[i]);
  s += " := ";
  for (std::size_t i = 0; i < a.values.size(); ++i) s += (i ? ", " : "") + to_source(a.values[i]);
  if (a.guard) s += " if " + to_source(a.guard);
  return s;
}

std::string statement_src(const Statement& st) {
  std::string s = st.label.empty() ? "" : st.label + " :: ";
  if (st.transaction) {
    s += "< ";
    for (std::size_t i = 0; i < st.body.size(); ++i) s += (i ? " ; " : "") + assignment_src(st.body[i]);
    s += " >";
  } else {
    s += assignment_src(st.body.at(0));
  }
  if (st.guard) s += (st.reactive ? " reacts-to " : " if ") + to_source(st.guard);
  return s;
}

std::string quant_src(const Quantifier& q) {
  return "<[] " + q.var + " : " + bound_src(q.lo) + " <= " + q.var + (q.inclusive ? " <= " : " < ") +
         bound_src(q.hi) + " ::";
}

std::string items_src(const std::vector<Item>& items, int indent) {
  std::string s;
  for (std::size_t i = 0; i < items.size(); ++i) {
    s += pad(indent) + (i ? "|| " : "") + print_item(items[i], indent) + "\n";
  }
  return s;
}

std::string blocks_src(const std::vector<PriorityBlock>& blocks, int indent) {
  bool headers = false;
  for (const auto& b : blocks) headers = headers || b.header;
  std::string s;
  for (const auto& b : blocks) {
    if (headers) {
      s += pad(indent) + "priority " + std::to_string(b.priority) + ":\n";
      s += items_src(b.items, indent + 2);
    } else {
      s += items_src(b.items, indent);
    }
  }
  return s;
}

std::string component_src(const ComponentItem& ci, int indent) {
  if (ci.family) {
    std::string s = quant_src(ci.quant) + "\n";
    for (std::size_t i = 0; i < ci.children.size(); ++i)
      s += pad(indent + 4) + (i ? "|| " : "") + component_src(ci.children[i], indent + 4) + "\n";
    return s + pad(indent) + ">";
  }
  std::string s = ci.comp.program + args_src(ci.comp.args);
  if (ci.comp.at) s += " at " + to_source(ci.comp.at);
  return s;
}

}  // namespace

std::string print_item(const Item& it, int indent) {
  switch (it.kind) {
    case Item::Kind::Stmt: return statement_src(it.stmt);
    case Item::Kind::Inhibit:
      return "inhibit " + it.inhibit.program + args_src(it.inhibit.args) + "." + it.inhibit.label +
             " when " + to_source(it.inhibit.when);
    case Item::Kind::Family: {
      std::string s = quant_src(it.quant) + "\n";
      s += items_src(it.children, indent + 4);
      return s + pad(indent) + ">";
    }
  }
  return "";
}

std::string print_program(const ProgramDef& p) {
  std::string s = "program " + p.name;
  if (!p.params.empty()) {
    s += "(";
    for (std::size_t i = 0; i < p.params.size(); ++i) s += (i ? ", " : "") + p.params[i];
    s += ")";
  }
  if (p.at_lambda) s += " at lambda";
  s += "\n";
  if (!p.declare.empty()) {
    s += "declare\n";
    for (const auto& d : p.declare) {
      s += "  ";
      for (std::size_t i = 0; i < d.names.size(); ++i) s += (i ? ", " : "") + d.names[i];
      s += " : " + type_src(d.type) + "\n";
    }
  }
  if (!p.always.empty()) {
    s += "always\n";
    for (std::size_t i = 0; i < p.always.size(); ++i)
      s += std::string(i ? "  || " : "  ") + p.always[i].name + " == " + to_source(p.always[i].value) + "\n";
  }
  if (!p.initially.empty()) {
    s += "initially\n";
    for (std::size_t i = 0; i < p.initially.size(); ++i)
      s += std::string(i ? "  || " : "  ") + p.initially[i].name + " = " +
           to_source(p.initially[i].value) + "\n";
  }
  if (!p.blocks.empty()) {
    s += "assign\n";
    s += blocks_src(p.blocks, 2);
  }
  return s + "end\n";
}

std::string print_system(const SystemDef& sys) {
  std::string s = "system " + sys.name;
  if (!sys.params.empty()) {
    s += "(";
    for (std::size_t i = 0; i < sys.params.size(); ++i)
      s += (i ? ", " : "") + sys.params[i].name + " = " + to_source(sys.params[i].value);
    s += ")";
  }
  s += "\n\n";
  for (const auto& p : sys.programs) s += print_program(p) + "\n";
  s += "components\n";
  for (std::size_t i = 0; i < sys.components.size(); ++i)
    s += std::string(i ? "  || " : "  ") + component_src(sys.components[i], 2) + "\n";
  if (!sys.interactions.empty()) {
    s += "interactions\n";
    s += blocks_src(sys.interactions, 2);
  }
  return s + "end\n";
}

}  // namespace munity
