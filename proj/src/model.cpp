#include "munity/model.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "munity/eval.hpp"

namespace munity {

Value const_eval(const Expr& e) {
  EvalContext ctx;
  return eval(e, ctx);
}

int Model::find_instance(const std::string& id) const {
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (instances[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

int Model::instance_of(const Value& address) const {
  if (address.kind() != Value::Kind::Address) return -1;
  return find_instance(address.as_address().instance);
}

const Unit* Model::find_unit(const std::string& name) const {
  for (const auto& u : units) {
    if (u.name == name) return &u;
  }
  return nullptr;
}

namespace {

std::string instance_id(const std::string& program, const std::vector<Value>& args) {
  if (args.empty()) return program;
  std::string s = program + "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) s += ",";
    s += args[i].str();
  }
  return s + ")";
}

bool has_state_refs(const Expr& e) {
  bool found = false;
  walk(e, [&](const ExprNode& n) {
    if (n.kind == ExprKind::Var || (n.kind == ExprKind::Call && n.builtin == Builtin::Hook))
      found = true;
  });
  return found;
}

Expr conj(const Expr& a, const Expr& b) {
  if (!a) return b;
  if (!b) return a;
  return Expr::binary(Op::And, a, b);
}

struct Scope {
  int instance = -1;
  std::map<std::string, Value> bound;
  bool unique_lookup = false;  // predicates: unqualified names by unique owner
};

class Resolver {
 public:
  explicit Resolver(const Model& m) : m_(m) {}

  Expr resolve(const Expr& e, const Scope& sc) {
    if (!e) return e;
    const ExprNode& n = *e;
    switch (n.kind) {
      case ExprKind::Literal: return e;
      case ExprKind::Var: return resolve_name(n, sc);
      case ExprKind::Qualified: {
        int inst = instance_for(n.program, n.args, sc, n.pos);
        return resolve_member(inst, n.name, n.pos);
      }
      case ExprKind::InstanceRef: {
        int inst = instance_for(n.program, n.args, sc, n.pos);
        return Expr::literal(Value::address(m_.instances[inst].id), n.pos);
      }
      default: {
        ExprNode copy = n;
        for (auto& a : copy.args) a = resolve(a, sc);
        return Expr::make(std::move(copy));
      }
    }
  }

  int instance_for(const std::string& program, const std::vector<Expr>& args, const Scope& sc,
                   SourcePos pos) {
    std::vector<Value> vals;
    for (const auto& a : args) {
      Expr r = resolve(a, sc);
      if (has_state_refs(r))
        throw ResolveError("instance arguments of " + program + " at " + pos.str() +
                           " must be constant");
      vals.push_back(const_eval(r));
    }
    std::string id = instance_id(program, vals);
    int inst = m_.find_instance(id);
    if (inst < 0) throw ResolveError("no component " + id + " (at " + pos.str() + ")");
    return inst;
  }

  Expr resolve_member(int inst, const std::string& name, SourcePos pos) {
    const Instance& in = m_.instances[inst];
    int slot = in.slot(name);
    if (slot >= 0) return var_node(inst, slot, name, pos);
    const ProgramDef* p = m_.def.find_program(in.program);
    for (const auto& a : p->always) {
      if (a.name == name) return resolve_alias(inst, a);
    }
    if (name == "self_addr") return Expr::literal(Value::address(in.id), pos);
    throw ResolveError(in.id + " has no variable '" + name + "' (at " + pos.str() + ")");
  }

  Expr resolve_alias(int inst, const Alias& a) {
    auto key = std::make_pair(inst, a.name);
    if (std::find(stack_.begin(), stack_.end(), key) != stack_.end())
      throw ResolveError("cyclic always definition involving '" + a.name + "' in " +
                         m_.instances[inst].id);
    stack_.push_back(key);
    Scope sc = instance_scope(inst);
    Expr r = resolve(a.value, sc);
    stack_.pop_back();
    return r;
  }

  Scope instance_scope(int inst) const {
    Scope sc;
    sc.instance = inst;
    const Instance& in = m_.instances[inst];
    const ProgramDef* p = m_.def.find_program(in.program);
    for (std::size_t i = 0; i < p->params.size(); ++i) sc.bound[p->params[i]] = in.args[i];
    return sc;
  }

 private:
  static Expr var_node(int inst, int slot, const std::string& name, SourcePos pos) {
    ExprNode v;
    v.kind = ExprKind::Var;
    v.name = name;
    v.pos = pos;
    v.instance = inst;
    v.slot = slot;
    return Expr::make(std::move(v));
  }

  Expr resolve_name(const ExprNode& n, const Scope& sc) {
    auto b = sc.bound.find(n.name);
    if (b != sc.bound.end()) return Expr::literal(b->second, n.pos);
    if (sc.instance >= 0) {
      const Instance& in = m_.instances[sc.instance];
      if (in.slot(n.name) >= 0 || n.name == "self_addr")
        return resolve_member(sc.instance, n.name, n.pos);
      const ProgramDef* p = m_.def.find_program(in.program);
      for (const auto& a : p->always) {
        if (a.name == n.name) return resolve_alias(sc.instance, a);
      }
    }
    auto pr = m_.params.find(n.name);
    if (pr != m_.params.end()) return Expr::literal(pr->second, n.pos);
    if (sc.unique_lookup) {
      int owner = -1;
      for (std::size_t i = 0; i < m_.instances.size(); ++i) {
        if (m_.instances[i].slot(n.name) >= 0 && n.name != "lambda") {
          if (owner >= 0)
            throw ResolveError("name '" + n.name + "' is ambiguous (declared by " +
                               m_.instances[owner].id + " and " + m_.instances[i].id +
                               "); qualify it");
          owner = static_cast<int>(i);
        }
      }
      if (owner >= 0) return resolve_member(owner, n.name, n.pos);
    }
    throw ResolveError("unknown name '" + n.name + "' at " + n.pos.str());
  }

  const Model& m_;
  std::vector<std::pair<int, std::string>> stack_;
};

class Compiler {
 public:
  Compiler(Model& m, const CompileOptions& opts) : m_(m), opts_(opts), res_(m) {}

  void run() {
    Scope global;
    for (const auto& p : m_.def.params) {
      Expr r = res_.resolve(p.value, global);
      if (has_state_refs(r)) throw ResolveError("parameter " + p.name + " must be constant");
      m_.params[p.name] = const_eval(r);
    }
    if (opts_.max_family) {
      m_.family_cap = *opts_.max_family;
    } else if (m_.params.count("MaxQueue")) {
      m_.family_cap = static_cast<int>(m_.params["MaxQueue"].as_int());
    }
    if (m_.family_cap < 1) throw ResolveError("family cap must be at least 1");

    for (const auto& ci : m_.def.components) add_components(ci, {});
    for (std::size_t i = 0; i < m_.instances.size(); ++i) compile_instance(static_cast<int>(i));

    int top = 1;
    bool any = false;
    for (const auto& u : m_.units) {
      top = any ? std::max(top, u.priority) : u.priority;
      any = true;
    }
    int interaction_priority = opts_.interaction_priority.value_or(top);
    int counter = 0;
    for (const auto& b : m_.def.interactions) {
      Ctx c;
      c.instance = -1;
      c.prefix = "interactions";
      c.priority = b.header ? b.priority : interaction_priority;
      c.counter = &counter;
      expand(b.items, c);
    }
    attach_inhibitions();

    std::set<int> prios;
    for (std::size_t i = 0; i < m_.units.size(); ++i) {
      m_.units[i].id = static_cast<int>(i);
      prios.insert(m_.units[i].priority);
    }
    for (std::size_t i = 0; i < m_.reactive.size(); ++i) m_.reactive[i].id = static_cast<int>(i);
    m_.priorities.assign(prios.begin(), prios.end());
  }

 private:
  struct Ctx {
    int instance = -1;
    std::string prefix;
    int priority = 1;
    std::map<std::string, Value> bound;  // family variables (formals live in the scope)
    std::vector<std::pair<std::string, Value>> bindings;
    Expr extra_guard;
    Expr overflow;
    const std::map<const Statement*, int>* numbering = nullptr;
    int* counter = nullptr;
  };

  struct PendingInhibit {
    int instance;
    std::string label;
    Expr when;
  };

  Scope scope_for(const Ctx& c) const {
    Scope sc = c.instance >= 0 ? res_.instance_scope(c.instance) : Scope{};
    for (const auto& [k, v] : c.bound) sc.bound[k] = v;
    return sc;
  }

  std::int64_t const_int(const Expr& e, const Scope& sc, const char* what) {
    Expr r = res_.resolve(e, sc);
    if (has_state_refs(r)) throw ResolveError(std::string(what) + " must be constant");
    return const_eval(r).as_int();
  }

  void add_components(const ComponentItem& ci, std::map<std::string, Value> bound) {
    Scope sc;
    sc.bound = bound;
    if (ci.family) {
      std::int64_t lo = const_int(ci.quant.lo, sc, "component family bound");
      std::int64_t hi = const_int(ci.quant.hi, sc, "component family bound");
      if (ci.quant.inclusive) ++hi;
      for (std::int64_t i = lo; i < hi; ++i) {
        auto b = bound;
        b[ci.quant.var] = Value::integer(i);
        for (const auto& c : ci.children) add_components(c, b);
      }
      return;
    }
    const ProgramDef* p = m_.def.find_program(ci.comp.program);
    if (!p) throw ResolveError("unknown program '" + ci.comp.program + "'");
    if (ci.comp.args.size() != p->params.size())
      throw ResolveError("component " + ci.comp.program + " expects " +
                         std::to_string(p->params.size()) + " arguments");
    Instance in;
    in.program = p->name;
    for (const auto& a : ci.comp.args) {
      Expr r = res_.resolve(a, sc);
      if (has_state_refs(r)) throw ResolveError("component arguments must be constant");
      in.args.push_back(const_eval(r));
    }
    in.id = instance_id(p->name, in.args);
    if (m_.find_instance(in.id) >= 0) throw ResolveError("duplicate component " + in.id);
    if (ci.comp.at) {
      Expr r = res_.resolve(ci.comp.at, sc);
      in.at = r;
    }
    Scope formal;
    for (std::size_t i = 0; i < p->params.size(); ++i) formal.bound[p->params[i]] = in.args[i];
    VarInfo lam;
    lam.name = "lambda";
    lam.type.kind = TypeSpec::Kind::Location;
    in.vars.push_back(lam);
    for (const auto& d : p->declare) {
      for (const auto& name : d.names) {
        VarInfo v;
        v.name = name;
        v.type = d.type;
        if (d.type.kind == TypeSpec::Kind::Array) {
          v.array_len = const_int(d.type.size, formal, "array size");
          if (v.array_len < 0) throw ResolveError("negative array size for " + name);
        }
        in.vars.push_back(v);
      }
    }
    for (std::size_t i = 0; i < in.vars.size(); ++i) in.slot_of[in.vars[i].name] = static_cast<int>(i);
    m_.instances.push_back(std::move(in));
  }

  void compile_instance(int inst) {
    Instance& in = m_.instances[inst];
    const ProgramDef* p = m_.def.find_program(in.program);
    Scope sc = res_.instance_scope(inst);
    for (const auto& init : p->initially) {
      InitEntry e;
      e.slot = in.slot(init.name);
      e.value = res_.resolve(init.value, sc);
      in.init.push_back(e);
    }
    std::map<const Statement*, int> numbering;
    int k = 0;
    for (const auto& b : p->blocks) {
      for_each_statement(b.items, [&](const Statement& s) { numbering[&s] = ++k; });
    }
    for (const auto& b : p->blocks) {
      Ctx c;
      c.instance = inst;
      c.prefix = in.id;
      c.priority = b.priority;
      c.numbering = &numbering;
      expand(b.items, c);
    }
  }

  void expand(const std::vector<Item>& items, const Ctx& c) {
    for (const auto& it : items) {
      switch (it.kind) {
        case Item::Kind::Stmt: add_statement(it.stmt, c); break;
        case Item::Kind::Inhibit: add_inhibit(it.inhibit, c); break;
        case Item::Kind::Family: expand_family(it, c); break;
      }
    }
  }

  void expand_family(const Item& it, const Ctx& c) {
    Scope sc = scope_for(c);
    std::int64_t lo = const_int(it.quant.lo, sc, "family lower bound");
    Expr hi = res_.resolve(it.quant.hi, sc);
    bool dynamic = has_state_refs(hi);
    std::int64_t end;
    if (dynamic) {
      end = lo + m_.family_cap;
    } else {
      end = const_eval(hi).as_int() + (it.quant.inclusive ? 1 : 0);
      if (end - lo > 100000) throw ResolveError("family over " + it.quant.var + " is too large");
    }
    for (std::int64_t i = lo; i < end; ++i) {
      Ctx cc = c;
      cc.bound[it.quant.var] = Value::integer(i);
      cc.bindings.emplace_back(it.quant.var, Value::integer(i));
      if (dynamic) {
        Expr iv = Expr::literal(Value::integer(i));
        cc.extra_guard = conj(c.extra_guard,
                              Expr::binary(it.quant.inclusive ? Op::Le : Op::Lt, iv, hi));
        if (i == end - 1) {
          // The last member reports a bound the cap cannot cover.
          Expr limit = Expr::literal(Value::integer(it.quant.inclusive ? end - 1 : end));
          Expr over = Expr::binary(Op::Gt, hi, limit);
          cc.overflow = c.overflow ? Expr::binary(Op::Or, c.overflow, over) : over;
        }
      }
      expand(it.children, cc);
    }
  }

  std::string unit_name(const Ctx& c, const std::string& label) const {
    std::string s = c.prefix + "." + label;
    if (!c.bindings.empty()) {
      s += "[";
      for (std::size_t i = 0; i < c.bindings.size(); ++i) {
        if (i) s += ",";
        s += c.bindings[i].first + "=" + c.bindings[i].second.str();
      }
      s += "]";
    }
    return s;
  }

  CTarget target(const LValue& lv, const Scope& sc) {
    CTarget t;
    t.text = lv.qualified ? lv.program + "." + lv.var : lv.var;
    if (lv.qualified) {
      t.instance = res_.instance_for(lv.program, lv.args, sc, lv.pos);
    } else {
      t.instance = sc.instance;
      if (t.instance < 0)
        throw ResolveError("unqualified target '" + lv.var + "' in interactions at " +
                           lv.pos.str());
    }
    t.slot = m_.instances[t.instance].slot(lv.var);
    if (t.slot < 0)
      throw ResolveError(m_.instances[t.instance].id + " has no variable '" + lv.var +
                         "' (at " + lv.pos.str() + ")");
    for (const auto& s : lv.path) {
      CSelector cs;
      cs.kind = s.kind;
      cs.field = s.field;
      if (s.index) cs.index = res_.resolve(s.index, sc);
      t.path.push_back(std::move(cs));
    }
    return t;
  }

  void add_statement(const Statement& st, const Ctx& c) {
    Scope sc = scope_for(c);
    Unit u;
    u.instance = c.instance;
    u.priority = c.priority;
    if (!st.label.empty()) {
      u.label = st.label;
    } else if (c.numbering) {
      u.label = "s" + std::to_string(c.numbering->at(&st));
    } else {
      u.label = "s" + std::to_string(++*c.counter);
    }
    u.name = unit_name(c, u.label);
    u.transaction = st.transaction;
    u.reactive = st.reactive;
    for (const auto& a : st.body) {
      CAssignment ca;
      for (const auto& t : a.targets) ca.targets.push_back(target(t, sc));
      for (const auto& v : a.values) ca.values.push_back(res_.resolve(v, sc));
      ca.guard = res_.resolve(a.guard, sc);
      u.body.push_back(std::move(ca));
    }
    u.guard = conj(c.extra_guard, res_.resolve(st.guard, sc));
    u.overflow_check = c.overflow;
    if (u.reactive) m_.reactive.push_back(std::move(u));
    else m_.units.push_back(std::move(u));
  }

  void add_inhibit(const Inhibition& in, const Ctx& c) {
    Scope sc = scope_for(c);
    PendingInhibit p;
    p.instance = res_.instance_for(in.program, in.args, sc, in.pos);
    p.label = in.label;
    p.when = res_.resolve(in.when, sc);
    inhibits_.push_back(std::move(p));
  }

  void attach_inhibitions() {
    for (const auto& p : inhibits_) {
      bool found = false;
      for (auto& u : m_.units) {
        if (u.instance == p.instance && u.label == p.label) {
          u.inhibitors.push_back(p.when);
          found = true;
        }
      }
      for (const auto& u : m_.reactive) {
        if (u.instance == p.instance && u.label == p.label) found = true;
      }
      if (!found)
        throw ResolveError("inhibition target " + m_.instances[p.instance].id + "." + p.label +
                           " not found");
    }
  }

  Model& m_;
  const CompileOptions& opts_;
  Resolver res_;
  std::vector<PendingInhibit> inhibits_;
};

}  // namespace

Expr Model::resolve_predicate(const Expr& e, const std::map<std::string, Value>& bound) const {
  Resolver r(*this);
  Scope sc;
  sc.bound = bound;
  sc.unique_lookup = true;
  return r.resolve(e, sc);
}

Expr Model::resolve_in_instance(const Expr& e, int inst,
                                const std::map<std::string, Value>& bound) const {
  Resolver r(*this);
  Scope sc = r.instance_scope(inst);
  for (const auto& [k, v] : bound) sc.bound[k] = v;
  return r.resolve(e, sc);
}

Model compile(const SystemDef& sys, const CompileOptions& opts) {
  Model m;
  m.def = sys;
  Compiler c(m, opts);
  c.run();
  return m;
}

}  // namespace munity
