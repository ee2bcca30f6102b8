#include "munity/eval.hpp"

#include <algorithm>

#include "munity/environment.hpp"

namespace munity {

namespace {

const Seq kEmpty;

// Sequence view of a value; null reads as the empty sequence.
const Seq& seq_of(const Value& v, const char* what) {
  if (v.is_bottom()) return kEmpty;
  if (!v.is_seq())
    throw EvalError(std::string(what) + " expects a sequence, got " + kind_name(v.kind()));
  return v.as_seq();
}

std::int64_t index_of(const Value& v, std::size_t len, const char* what) {
  std::int64_t i = v.as_int();
  if (i < 0 || static_cast<std::size_t>(i) >= len)
    throw EvalError(std::string(what) + ": index " + std::to_string(i) +
                    " out of range for length " + std::to_string(len));
  return i;
}

Value read_field(const Value& base, const std::string& f) {
  switch (base.kind()) {
    case Value::Kind::Bottom: return Value();
    case Value::Kind::Record: {
      const auto& fields = base.as_record().fields;
      auto it = fields.find(f);
      return it == fields.end() ? Value() : it->second;
    }
    case Value::Kind::Message: {
      const Message& m = base.as_message();
      if (f == "status") return Value::boolean(m.status);
      if (f == "source") return m.source;
      if (f == "destination") return m.destination;
      if (f == "type") return Value::symbol(to_string(m.type));
      if (f == "reply")
        return m.reply == Reply::None ? Value() : Value::symbol(to_string(m.reply));
      if (f == "content") return m.content;
      throw EvalError("message has no field '" + f + "'");
    }
    default:
      throw EvalError("field '" + f + "' of a " + std::string(kind_name(base.kind())) + " value");
  }
}

Reply reply_of(const Value& v) {
  if (v.is_bottom()) return Reply::None;
  const std::string& s = v.as_symbol().name;
  if (s == "Y") return Reply::Y;
  if (s == "N") return Reply::N;
  throw EvalError("reply must be #Y, #N or null, got #" + s);
}

MsgType type_of(const Value& v) {
  MsgType t;
  if (!parse_msg_type(v.as_symbol().name, &t))
    throw EvalError("unknown message type #" + v.as_symbol().name);
  return t;
}

Value with_field(const Value& base, const std::string& f, Value val) {
  if (base.kind() == Value::Kind::Message) {
    Message m = base.as_message();
    if (f == "status") m.status = val.as_bool();
    else if (f == "source") m.source = val;
    else if (f == "destination") m.destination = val;
    else if (f == "type") m.type = type_of(val);
    else if (f == "reply") m.reply = reply_of(val);
    else if (f == "content") m.content = val;
    else throw EvalError("message has no field '" + f + "'");
    return Value::message(std::move(m));
  }
  if (base.kind() == Value::Kind::Record) {
    auto fields = base.as_record().fields;
    fields[f] = std::move(val);
    return Value::record(std::move(fields));
  }
  if (base.is_bottom()) return Value::record({{f, std::move(val)}});
  throw EvalError("cannot set field '" + f + "' of a " + std::string(kind_name(base.kind())) +
                  " value");
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  if (b == 0) throw EvalError("division by zero");
  if (a == INT64_MIN && b == -1) throw EvalError("integer overflow");
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t floor_mod(std::int64_t a, std::int64_t b) {
  if (b == 0) throw EvalError("modulo by zero");
  if (b == -1) return 0;
  std::int64_t r = a % b;
  if (r != 0 && ((r < 0) != (b < 0))) r += b;
  return r;
}

Value eval_binary(const ExprNode& n, const EvalContext& ctx) {
  // Short-circuit connectives so guards can protect partial expressions.
  if (n.op == Op::And) {
    if (!eval(n.args[0], ctx).as_bool()) return Value::boolean(false);
    return Value::boolean(eval(n.args[1], ctx).as_bool());
  }
  if (n.op == Op::Or) {
    if (eval(n.args[0], ctx).as_bool()) return Value::boolean(true);
    return Value::boolean(eval(n.args[1], ctx).as_bool());
  }
  if (n.op == Op::Implies) {
    if (!eval(n.args[0], ctx).as_bool()) return Value::boolean(true);
    return Value::boolean(eval(n.args[1], ctx).as_bool());
  }
  Value a = eval(n.args[0], ctx);
  Value b = eval(n.args[1], ctx);
  switch (n.op) {
    case Op::Eq: return Value::boolean(lang_equal(a, b));
    case Op::Ne: return Value::boolean(!lang_equal(a, b));
    case Op::Lt: return Value::boolean(a.as_int() < b.as_int());
    case Op::Le: return Value::boolean(a.as_int() <= b.as_int());
    case Op::Gt: return Value::boolean(a.as_int() > b.as_int());
    case Op::Ge: return Value::boolean(a.as_int() >= b.as_int());
    case Op::Add: return Value::integer(checked_add(a.as_int(), b.as_int()));
    case Op::Sub: return Value::integer(checked_sub(a.as_int(), b.as_int()));
    case Op::Mul: return Value::integer(checked_mul(a.as_int(), b.as_int()));
    case Op::Div: return Value::integer(floor_div(a.as_int(), b.as_int()));
    case Op::Mod: return Value::integer(floor_mod(a.as_int(), b.as_int()));
    case Op::Append: {
      Seq s = seq_of(a, "++");
      s.push_back(std::move(b));
      return Value::seq(std::move(s));
    }
    default: break;
  }
  throw EvalError("bad binary operator");
}

void arity(const ExprNode& n, std::size_t lo, std::size_t hi) {
  if (n.args.size() < lo || n.args.size() > hi)
    throw EvalError(n.name + "() takes " + std::to_string(lo) +
                    (lo == hi ? "" : "-" + std::to_string(hi)) + " arguments, got " +
                    std::to_string(n.args.size()));
}

Value eval_call(const ExprNode& n, const EvalContext& ctx) {
  std::vector<Value> a;
  a.reserve(n.args.size());
  for (const auto& e : n.args) a.push_back(eval(e, ctx));
  switch (n.builtin) {
    case Builtin::Head: {
      arity(n, 1, 1);
      const Seq& s = seq_of(a[0], "head");
      if (s.empty()) throw EvalError("head of empty/null sequence");
      return s.front();
    }
    case Builtin::Tail: {
      arity(n, 1, 1);
      const Seq& s = seq_of(a[0], "tail");
      if (s.empty()) throw EvalError("tail of empty/null sequence");
      return Value::seq(Seq(s.begin() + 1, s.end()));
    }
    case Builtin::Append: {
      arity(n, 2, 2);
      Seq s = seq_of(a[0], "append");
      s.push_back(a[1]);
      return Value::seq(std::move(s));
    }
    case Builtin::At: {
      arity(n, 2, 2);
      const Seq& s = seq_of(a[0], "at");
      return s[index_of(a[1], s.size(), "at")];
    }
    case Builtin::Length:
      arity(n, 1, 1);
      return Value::integer(static_cast<std::int64_t>(seq_of(a[0], "length").size()));
    case Builtin::Delete: {
      arity(n, 2, 2);
      Seq s = seq_of(a[0], "delete");
      auto it = std::find(s.begin(), s.end(), a[1]);
      if (it != s.end()) s.erase(it);
      return Value::seq(std::move(s));
    }
    case Builtin::Member: {
      arity(n, 2, 2);
      const Seq& s = seq_of(a[0], "member");
      return Value::boolean(std::find(s.begin(), s.end(), a[1]) != s.end());
    }
    case Builtin::SetAt: {
      arity(n, 3, 3);
      Seq s = seq_of(a[0], "set_at");
      s[index_of(a[1], s.size(), "set_at")] = a[2];
      return Value::seq(std::move(s));
    }
    case Builtin::Fill: {
      arity(n, 2, 2);
      std::int64_t len = a[0].as_int();
      if (len < 0 || len > 1000000) throw EvalError("fill: bad length " + std::to_string(len));
      return Value::seq(Seq(static_cast<std::size_t>(len), a[1]));
    }
    case Builtin::Concat: {
      arity(n, 2, 2);
      Seq s = seq_of(a[0], "concat");
      const Seq& t = seq_of(a[1], "concat");
      s.insert(s.end(), t.begin(), t.end());
      return Value::seq(std::move(s));
    }
    case Builtin::Msg: {
      arity(n, 5, 6);
      Message m;
      m.status = a[0].as_bool();
      m.source = a[1];
      m.destination = a[2];
      m.type = type_of(a[3]);
      if (a.size() == 6) {
        m.reply = reply_of(a[4]);
        m.content = a[5];
      } else {
        m.content = a[4];
      }
      return Value::message(std::move(m));
    }
    case Builtin::Redirect: {
      // Unsent messages addressed to `from` go to `to`; the original
      // recipient is kept in content.relay so `to` can pass them on.
      arity(n, 3, 3);
      Seq s = seq_of(a[0], "redirect");
      for (auto& v : s) {
        if (v.kind() != Value::Kind::Message) continue;
        const Message& m = v.as_message();
        if (m.status || !(m.destination == a[1])) continue;
        Message r = m;
        r.destination = a[2];
        r.content = with_field(m.content.kind() == Value::Kind::Record
                                   ? m.content
                                   : Value::record({{"payload", m.content}}),
                               "relay", a[1]);
        v = Value::message(std::move(r));
      }
      return Value::seq(std::move(s));
    }
    case Builtin::DeleteEach: {
      arity(n, 2, 2);
      Seq outer = seq_of(a[0], "delete_each");
      for (auto& q : outer) {
        Seq s = seq_of(q, "delete_each");
        auto it = std::find(s.begin(), s.end(), a[1]);
        if (it != s.end()) s.erase(it);
        q = Value::seq(std::move(s));
      }
      return Value::seq(std::move(outer));
    }
    case Builtin::HasType: {
      arity(n, 2, 2);
      MsgType t = type_of(a[1]);
      for (const auto& v : seq_of(a[0], "has_type")) {
        if (v.kind() == Value::Kind::Message && v.as_message().type == t)
          return Value::boolean(true);
      }
      return Value::boolean(false);
    }
    case Builtin::Readdress: {
      arity(n, 3, 3);
      Seq s = seq_of(a[0], "readdress");
      for (auto& v : s) {
        if (v.kind() != Value::Kind::Message) continue;
        const Message& m = v.as_message();
        if (m.status || !(m.source == a[1]) || m.destination == a[2]) continue;
        Message r = m;
        r.destination = a[2];
        v = Value::message(std::move(r));
      }
      return Value::seq(std::move(s));
    }
    case Builtin::Unrelay: {
      arity(n, 2, 2);
      Message m = a[0].as_message();
      Value relay = read_field(m.content, "relay");
      if (relay.is_bottom()) throw EvalError("unrelay: message carries no relay address");
      auto fields = m.content.as_record().fields;
      fields.erase("relay");
      m.destination = relay;
      m.source = a[1];
      m.status = false;
      if (fields.size() == 1 && fields.count("payload"))
        m.content = fields.begin()->second;
      else
        m.content = Value::record(std::move(fields));
      return Value::message(std::move(m));
    }
    case Builtin::EarlierFrom: {
      arity(n, 3, 3);
      const Seq& s = seq_of(a[0], "earlier_from");
      std::int64_t upto = std::min<std::int64_t>(a[1].as_int(), static_cast<std::int64_t>(s.size()));
      for (std::int64_t k = 0; k < upto; ++k) {
        if (s[k].kind() != Value::Kind::Message) continue;
        const Message& m = s[k].as_message();
        if (!m.status && m.reply == Reply::None && m.source == a[2]) return Value::boolean(true);
      }
      return Value::boolean(false);
    }
    case Builtin::Hook:
      if (!ctx.env) throw EvalError("environment function " + n.name + "() unavailable here");
      return ctx.env->call(n.name, a, ctx);
    case Builtin::None: break;
  }
  throw EvalError("bad call " + n.name);
}

}  // namespace

Value eval(const Expr& e, const EvalContext& ctx) {
  const ExprNode& n = *e;
  switch (n.kind) {
    case ExprKind::Literal: return n.value;
    case ExprKind::Var:
      if (n.instance < 0) throw EvalError("unresolved name '" + n.name + "' at " + n.pos.str());
      if (!ctx.state)
        throw EvalError("variable '" + n.name + "' in a constant expression at " + n.pos.str());
      return ctx.state->stores[n.instance][n.slot];
    case ExprKind::Qualified:
    case ExprKind::InstanceRef:
      throw EvalError("unresolved reference to " + n.program + " at " + n.pos.str());
    case ExprKind::Unary: {
      Value a = eval(n.args[0], ctx);
      if (n.op == Op::Not) return Value::boolean(!a.as_bool());
      return Value::integer(checked_sub(0, a.as_int()));
    }
    case ExprKind::Binary: return eval_binary(n, ctx);
    case ExprKind::Call: return eval_call(n, ctx);
    case ExprKind::Field: return read_field(eval(n.args[0], ctx), n.name);
    case ExprKind::Index: {
      Value base = eval(n.args[0], ctx);
      const Seq& s = seq_of(base, "indexing");
      return s[index_of(eval(n.args[1], ctx), s.size(), "indexing")];
    }
    case ExprKind::Cond:
      return eval(eval(n.args[0], ctx).as_bool() ? n.args[1] : n.args[2], ctx);
    case ExprKind::SeqLit: {
      Seq s;
      for (const auto& a : n.args) s.push_back(eval(a, ctx));
      return Value::seq(std::move(s));
    }
    case ExprKind::RecordLit: {
      std::map<std::string, Value> f;
      for (std::size_t i = 0; i < n.args.size(); ++i) f[n.fields[i]] = eval(n.args[i], ctx);
      return Value::record(std::move(f));
    }
  }
  throw EvalError("bad expression");
}

bool eval_bool(const Expr& e, const EvalContext& ctx) {
  return !e || eval(e, ctx).as_bool();
}

Value default_value(const VarInfo& v) {
  switch (v.type.kind) {
    case TypeSpec::Kind::Bool: return Value::boolean(false);
    case TypeSpec::Kind::Int: return Value::integer(0);
    case TypeSpec::Kind::Queue: return Value::seq({});
    case TypeSpec::Kind::Array: {
      VarInfo elem;
      elem.type = v.type.elem.at(0);
      return Value::seq(Seq(static_cast<std::size_t>(v.array_len), default_value(elem)));
    }
    default: return Value();
  }
}

Value coerce_for(const VarInfo& v, Value val, const std::string& where) {
  auto bad = [&](const char* want) {
    throw EvalError(where + ": " + v.name + " expects " + want + ", got " + val.str());
  };
  switch (v.type.kind) {
    case TypeSpec::Kind::Bool:
      if (val.kind() != Value::Kind::Bool) bad("a boolean");
      break;
    case TypeSpec::Kind::Int:
      if (val.kind() != Value::Kind::Int) bad("an integer");
      break;
    case TypeSpec::Kind::Queue:
      if (val.is_bottom()) return Value::seq({});
      if (!val.is_seq()) bad("a queue");
      break;
    case TypeSpec::Kind::Array:
      if (!val.is_seq()) bad("an array");
      if (static_cast<std::int64_t>(val.as_seq().size()) != v.array_len)
        throw EvalError(where + ": " + v.name + " has length " + std::to_string(v.array_len) +
                        ", assigned a sequence of length " +
                        std::to_string(val.as_seq().size()));
      break;
    default: break;
  }
  return val;
}

namespace {

struct RSel {
  bool field = false;
  std::int64_t index = 0;
  std::string name;
  bool operator==(const RSel&) const = default;
};

struct RTarget {
  int instance;
  int slot;
  std::vector<RSel> path;
};

Value write_path(const Value& root, const std::vector<RSel>& path, std::size_t k, Value val) {
  if (k == path.size()) return val;
  const RSel& sel = path[k];
  if (sel.field) {
    return with_field(root, sel.name, write_path(read_field(root, sel.name), path, k + 1, val));
  }
  if (!root.is_seq()) throw EvalError("indexed write into a " + std::string(kind_name(root.kind())));
  Seq s = root.as_seq();
  if (sel.index < 0 || static_cast<std::size_t>(sel.index) >= s.size())
    throw EvalError("write index " + std::to_string(sel.index) + " out of range for length " +
                    std::to_string(s.size()));
  s[sel.index] = write_path(s[sel.index], path, k + 1, std::move(val));
  return Value::seq(std::move(s));
}

bool is_prefix(const RTarget& a, const RTarget& b) {
  if (a.instance != b.instance || a.slot != b.slot) return false;
  std::size_t n = std::min(a.path.size(), b.path.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!(a.path[i] == b.path[i])) return false;
  }
  return true;
}

}  // namespace

bool apply_assignment(SystemState& s, const CAssignment& a, const Model& m,
                      const Environment* env, int instance) {
  std::vector<Delivery> deliveries;
  EnvState env_out = s.env;
  EvalContext ctx{&m, &s, env, instance, &deliveries, &env_out};
  if (a.targets.size() != a.values.size())
    throw EvalError("assignment arity mismatch: " + std::to_string(a.targets.size()) +
                    " targets, " + std::to_string(a.values.size()) + " values");

  std::vector<Value> vals;
  vals.reserve(a.values.size());
  for (const auto& e : a.values) vals.push_back(eval(e, ctx));

  std::vector<RTarget> targets;
  for (const auto& t : a.targets) {
    RTarget r{t.instance, t.slot, {}};
    Value cur = s.stores[t.instance][t.slot];
    for (const auto& sel : t.path) {
      RSel rs;
      switch (sel.kind) {
        case Selector::Kind::Field:
          rs.field = true;
          rs.name = sel.field;
          cur = read_field(cur, sel.field);
          break;
        case Selector::Kind::Head: {
          const Seq& q = seq_of(cur, "head");
          if (q.empty()) throw EvalError("head of empty/null sequence in target " + t.text);
          rs.index = 0;
          cur = q[0];
          break;
        }
        case Selector::Kind::Index:
        case Selector::Kind::At: {
          const Seq& q = seq_of(cur, "indexing");
          rs.index = index_of(eval(sel.index, ctx), q.size(), t.text.c_str());
          cur = q[rs.index];
          break;
        }
      }
      r.path.push_back(std::move(rs));
    }
    targets.push_back(std::move(r));
  }
  for (std::size_t i = 0; i < targets.size(); ++i) {
    for (std::size_t j = i + 1; j < targets.size(); ++j) {
      if (is_prefix(targets[i], targets[j]))
        throw EvalError("assignment writes overlapping targets " + a.targets[i].text + " and " +
                        a.targets[j].text);
    }
  }

  bool changed = false;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const RTarget& t = targets[i];
    const VarInfo& var = m.instances[t.instance].vars[t.slot];
    Value& slot = s.stores[t.instance][t.slot];
    Value next = t.path.empty() ? coerce_for(var, vals[i], a.targets[i].text)
                                : write_path(slot, t.path, 0, vals[i]);
    if (!(next == slot)) {
      slot = std::move(next);
      changed = true;
    }
  }
  for (auto& d : deliveries) {
    Value& q = s.stores[d.instance][d.slot];
    Seq items = seq_of(q, "delivery");
    items.push_back(std::move(d.message));
    q = Value::seq(std::move(items));
    changed = true;
  }
  if (!(env_out == s.env)) {
    s.env = std::move(env_out);
    changed = true;
  }
  return changed;
}

Value read_name(const Model& m, const SystemState& s, int instance, const std::string& name) {
  Expr e = m.resolve_in_instance(Expr::var(name), instance);
  EvalContext ctx{&m, &s, nullptr, instance, nullptr, nullptr};
  return eval(e, ctx);
}

}  // namespace munity
