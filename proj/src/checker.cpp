#include "munity/checker.hpp"

#include <deque>
#include <set>

#include "munity/eval.hpp"

namespace munity {

const char* to_string(Verdict::Kind k) {
  switch (k) {
    case Verdict::Kind::Holds: return "holds";
    case Verdict::Kind::Violated: return "violated";
    case Verdict::Kind::Unknown: return "unknown";
  }
  return "?";
}

int TransitionSystem::find(const SystemState& s) const {
  auto it = index.find(s.digest());
  if (it == index.end()) return -1;
  for (int i : it->second) {
    if (states[i].same(s)) return i;
  }
  return -1;
}

std::vector<int> TransitionSystem::path_to(int state) const {
  std::vector<int> edges_rev;
  while (parent_edge[state] >= 0) {
    edges_rev.push_back(parent_edge[state]);
    state = edges[parent_edge[state]].from;
  }
  return {edges_rev.rbegin(), edges_rev.rend()};
}

namespace {

bool over_queue_bound(const Model& m, const SystemState& s, std::size_t bound) {
  for (std::size_t i = 0; i < m.instances.size(); ++i) {
    const auto& vars = m.instances[i].vars;
    for (std::size_t k = 0; k < vars.size(); ++k) {
      const Value& v = s.stores[i][k];
      if (!v.is_seq()) continue;
      if (vars[k].is_queue() && v.as_seq().size() > bound) return true;
      if (vars[k].type.kind == TypeSpec::Kind::Array &&
          vars[k].type.elem.at(0).kind == TypeSpec::Kind::Queue) {
        for (const auto& q : v.as_seq()) {
          if (q.is_seq() && q.as_seq().size() > bound) return true;
        }
      }
    }
  }
  return false;
}

std::vector<SystemState> initial_states(const Engine& eng, const ExploreBounds& b) {
  SystemState base = eng.init_state();
  if (!b.enumerate_uninitialized) return {base};
  const Model& m = eng.model();
  std::vector<std::pair<int, int>> free;  // (instance, slot)
  for (std::size_t i = 0; i < m.instances.size(); ++i) {
    const Instance& in = m.instances[i];
    std::set<int> set_slots;
    for (const auto& e : in.init) set_slots.insert(e.slot);
    for (std::size_t k = 1; k < in.vars.size(); ++k) {
      auto kind = in.vars[k].type.kind;
      if (set_slots.count(static_cast<int>(k))) continue;
      if (kind == TypeSpec::Kind::Bool || kind == TypeSpec::Kind::Int)
        free.emplace_back(static_cast<int>(i), static_cast<int>(k));
    }
  }
  if (free.size() > 20) throw ConfigError("too many uninitialized variables to enumerate");
  std::vector<SystemState> out;
  for (std::uint64_t mask = 0; mask < (1ULL << free.size()); ++mask) {
    SystemState s = base;
    for (std::size_t f = 0; f < free.size(); ++f) {
      auto [i, k] = free[f];
      bool bit = (mask >> f) & 1;
      s.stores[i][k] = m.instances[i].vars[k].type.kind == TypeSpec::Kind::Bool
                           ? Value::boolean(bit)
                           : Value::integer(bit ? 1 : 0);
    }
    eng.reactive_fixed_point(s);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

TransitionSystem explore(const Engine& eng, const ExploreBounds& bounds) {
  TransitionSystem ts;
  const Model& m = eng.model();
  std::deque<int> frontier;

  auto add_state = [&](SystemState s, int parent) -> int {
    s.step = 0;
    int found = ts.find(s);
    if (found >= 0) return found;
    if (ts.states.size() >= bounds.max_states) {
      ts.truncated = true;
      ts.truncation_reason = "state cap " + std::to_string(bounds.max_states) + " reached";
      return -1;
    }
    int id = static_cast<int>(ts.states.size());
    ts.index[s.digest()].push_back(id);
    ts.states.push_back(std::move(s));
    ts.out.emplace_back();
    ts.parent_edge.push_back(parent);
    ts.expanded.push_back(false);
    frontier.push_back(id);
    return id;
  };

  for (auto& s : initial_states(eng, bounds)) {
    int id = add_state(std::move(s), -1);
    if (id >= 0 && (ts.initial.empty() || ts.initial.back() != id)) ts.initial.push_back(id);
  }

  auto add_edge = [&](int from, SystemState next, int unit, std::string label) {
    Edge e;
    e.from = from;
    e.unit = unit;
    e.label = std::move(label);
    int eid = static_cast<int>(ts.edges.size());
    int to = add_state(std::move(next), eid);
    if (to < 0) return false;
    e.to = to;
    ts.edges.push_back(std::move(e));
    ts.out[from].push_back(eid);
    return true;
  };

  while (!frontier.empty() && !(ts.truncated && ts.truncation_reason.rfind("state cap", 0) == 0)) {
    int cur = frontier.front();
    frontier.pop_front();
    if (over_queue_bound(m, ts.states[cur], bounds.max_queue)) {
      ts.truncated = true;
      if (ts.truncation_reason.empty())
        ts.truncation_reason = "queue longer than " + std::to_string(bounds.max_queue);
      continue;
    }
    const SystemState base = ts.states[cur];
    std::vector<int> en;
    try {
      en = eng.enabled_units(base);
    } catch (const Error& err) {
      ts.errors.push_back(err.what());
      continue;
    }
    bool complete = true;
    for (int id : en) {
      SystemState next = base;
      try {
        eng.execute(next, id);
      } catch (const Error& err) {
        Edge e;
        e.from = cur;
        e.unit = id;
        e.label = m.units[id].name;
        e.error = err.what();
        ts.out[cur].push_back(static_cast<int>(ts.edges.size()));
        ts.edges.push_back(e);
        ts.errors.push_back(e.label + ": " + err.what());
        continue;
      }
      if (!add_edge(cur, std::move(next), id, m.units[id].name)) {
        complete = false;
        break;
      }
    }
    if (complete) {
      for (auto& mv : eng.env().moves(base, m)) {
        SystemState next = std::move(mv.next);
        try {
          eng.settle_env(next);
        } catch (const Error& err) {
          ts.errors.push_back("env:" + mv.name + ": " + err.what());
          continue;
        }
        if (!add_edge(cur, std::move(next), -1, "env:" + mv.name)) {
          complete = false;
          break;
        }
      }
    }
    ts.expanded[cur] = complete;
  }
  return ts;
}

namespace {

Verdict unknown(std::string why) {
  Verdict v;
  v.kind = Verdict::Kind::Unknown;
  v.detail = std::move(why);
  return v;
}

Verdict violation_at(const TransitionSystem& ts, int state, int extra_edge, std::string detail) {
  Verdict v;
  v.kind = Verdict::Kind::Violated;
  v.detail = std::move(detail);
  std::vector<int> path = ts.path_to(state);
  if (extra_edge >= 0) path.push_back(extra_edge);
  int start = path.empty() ? state : ts.edges[path.front()].from;
  v.states.push_back(start);
  for (int e : path) {
    v.states.push_back(ts.edges[e].to);
    v.labels.push_back(ts.edges[e].label);
  }
  return v;
}

std::string incomplete_reason(const TransitionSystem& ts) {
  if (ts.error_tainted()) return "exploration hit step errors: " + ts.errors.front();
  return "exploration truncated: " + ts.truncation_reason;
}

bool eval_pred(const Engine& eng, const Expr& p, const SystemState& s) {
  try {
    return eng.holds(p, s);
  } catch (const EvalError& e) {
    throw Error(std::string("predicate evaluation failed: ") + e.what());
  }
}

}  // namespace

Verdict check_co(const Engine& eng, const TransitionSystem& ts, const Expr& p, const Expr& q) {
  for (std::size_t i = 0; i < ts.edges.size(); ++i) {
    const Edge& e = ts.edges[i];
    if (e.to < 0) continue;
    if (eval_pred(eng, p, ts.states[e.from]) && !eval_pred(eng, q, ts.states[e.to]))
      return violation_at(ts, e.from, static_cast<int>(i),
                          "step " + e.label + " leaves the target predicate");
  }
  if (ts.truncated || ts.error_tainted()) return unknown(incomplete_reason(ts));
  return Verdict{};
}

Verdict check_invariant(const Engine& eng, const TransitionSystem& ts, const Expr& inv) {
  for (int s : ts.initial) {
    if (!eval_pred(eng, inv, ts.states[s])) return violation_at(ts, s, -1, "false in an initial state");
  }
  return check_co(eng, ts, inv, inv);
}

Verdict check_transient(const Engine& eng, const TransitionSystem& ts, const Expr& p) {
  const Model& m = eng.model();
  std::vector<int> pstates;
  for (std::size_t i = 0; i < ts.states.size(); ++i) {
    if (eval_pred(eng, p, ts.states[i])) pstates.push_back(static_cast<int>(i));
  }
  bool incomplete = false;
  for (int s : pstates) incomplete = incomplete || !ts.expanded[s];
  // One statement must be enabled in every p-state and falsify p from each.
  std::vector<char> ok(m.units.size(), 1);
  for (int s : pstates) {
    std::vector<char> here(m.units.size(), 0);
    for (int e : ts.out[s]) {
      const Edge& edge = ts.edges[e];
      if (edge.unit < 0 || edge.to < 0) continue;
      if (!eval_pred(eng, p, ts.states[edge.to])) here[edge.unit] = 1;
    }
    for (std::size_t u = 0; u < ok.size(); ++u) ok[u] = ok[u] && here[u];
  }
  for (std::size_t u = 0; u < ok.size(); ++u) {
    if (!ok[u]) continue;
    if (incomplete || ts.error_tainted()) return unknown(incomplete_reason(ts));
    Verdict v;
    v.witness = m.units[u].name;
    v.detail = pstates.empty() ? "no reachable state satisfies the predicate" : "falsified by " + v.witness;
    return v;
  }
  if (pstates.empty() && m.units.empty()) {
    Verdict v;
    v.detail = "no reachable state satisfies the predicate";
    return v;
  }
  if (incomplete || ts.error_tainted()) return unknown(incomplete_reason(ts));
  // Witness the failure with a p-state from which no enabled statement
  // falsifies p, or the first p-state otherwise.
  int worst = pstates.front();
  for (int s : pstates) {
    bool any = false;
    for (int e : ts.out[s]) {
      const Edge& edge = ts.edges[e];
      if (edge.unit >= 0 && edge.to >= 0 && !eval_pred(eng, p, ts.states[edge.to])) any = true;
    }
    if (!any) {
      worst = s;
      break;
    }
  }
  return violation_at(ts, worst, -1, "no single statement falsifies the predicate from every state");
}

Verdict check_ensures(const Engine& eng, const TransitionSystem& ts, const Expr& p, const Expr& q) {
  Expr pnq = Expr::binary(Op::And, p, Expr::unary(Op::Not, q));
  Expr pq = Expr::binary(Op::Or, p, q);
  Verdict co = check_co(eng, ts, pnq, pq);
  if (co.violated()) {
    co.detail = "co conjunct: " + co.detail;
    return co;
  }
  Verdict tr = check_transient(eng, ts, pnq);
  if (tr.violated()) {
    tr.detail = "transient conjunct: " + tr.detail;
    return tr;
  }
  if (co.kind == Verdict::Kind::Unknown) return co;
  if (tr.kind == Verdict::Kind::Unknown) return tr;
  return tr;
}

namespace {

Verdict trace_violation(std::size_t index, std::string detail) {
  Verdict v;
  v.kind = Verdict::Kind::Violated;
  v.detail = std::move(detail) + " at trace position " + std::to_string(index);
  v.states.push_back(static_cast<int>(index));
  return v;
}

}  // namespace

Verdict check_trace_invariant(const Engine& eng, const std::vector<SystemState>& states,
                              const Expr& inv) {
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (!eval_pred(eng, inv, states[i])) return trace_violation(i, "invariant false");
  }
  return Verdict{};
}

Verdict check_trace_co(const Engine& eng, const std::vector<SystemState>& states, const Expr& p,
                       const Expr& q) {
  for (std::size_t i = 0; i + 1 < states.size(); ++i) {
    if (eval_pred(eng, p, states[i]) && !eval_pred(eng, q, states[i + 1]))
      return trace_violation(i + 1, "co violated");
  }
  return Verdict{};
}

Verdict check_trace_leadsto(const Engine& eng, const std::vector<SystemState>& states,
                            const Expr& p, const Expr& q) {
  std::size_t open = 0;
  std::int64_t first_open = -1;
  bool q_later = false;  // q holds at some position >= i (scanning backwards)
  for (std::size_t k = states.size(); k-- > 0;) {
    if (eval_pred(eng, q, states[k])) q_later = true;
    if (!q_later && eval_pred(eng, p, states[k])) {
      ++open;
      first_open = static_cast<std::int64_t>(k);
    }
  }
  if (open == 0) return Verdict{};
  return unknown(std::to_string(open) + " obligation(s) still open at trace end (first at position " +
                 std::to_string(first_open) + ")");
}

std::vector<SystemState> replay_labels(const Engine& eng, const SystemState& start,
                                       const std::vector<std::string>& labels) {
  const Model& m = eng.model();
  std::vector<SystemState> out{start};
  SystemState s = start;
  for (const auto& label : labels) {
    if (label.rfind("env:", 0) == 0) {
      std::string name = label.substr(4);
      bool found = false;
      for (auto& mv : eng.env().moves(s, m)) {
        if (mv.name == name) {
          s = std::move(mv.next);
          eng.settle_env(s);
          found = true;
          break;
        }
      }
      if (!found) throw Error("replay: environment move " + name + " unavailable");
    } else {
      const Unit* u = m.find_unit(label);
      if (!u) throw Error("replay: unknown unit " + label);
      if (!eng.enabled(s, *u)) throw Error("replay: unit " + label + " not enabled");
      eng.execute(s, u->id);
    }
    out.push_back(s);
  }
  return out;
}

bool replay(const Engine& eng, const TransitionSystem& ts, const Verdict& v) {
  if (v.states.empty()) return false;
  try {
    auto states = replay_labels(eng, ts.states[v.states.front()], v.labels);
    for (std::size_t i = 0; i < states.size(); ++i) {
      if (!states[i].same(ts.states[v.states[i]])) return false;
    }
    return true;
  } catch (const Error&) {
    return false;
  }
}

namespace {

// Values of `over` observed across the given states, in first-seen order.
std::vector<Value> observed(const Engine& eng, const Expr& over,
                            const std::vector<const SystemState*>& states) {
  std::vector<Value> vals;
  EvalContext ctx{&eng.model(), nullptr, &eng.env(), -1, nullptr, nullptr};
  for (const SystemState* s : states) {
    ctx.state = s;
    Value v = eval(over, ctx);
    if (std::find(vals.begin(), vals.end(), v) == vals.end()) vals.push_back(v);
  }
  return vals;
}

template <typename CheckOne>
Verdict quantified(const Engine& eng, const PropertyDecl& d,
                   const std::vector<const SystemState*>& states, CheckOne check_one) {
  const Model& m = eng.model();
  if (d.bound_var.empty()) {
    return check_one(m.resolve_predicate(d.p), d.q ? m.resolve_predicate(d.q) : Expr());
  }
  Expr over = m.resolve_predicate(d.bound_over);
  Verdict agg;
  for (const Value& val : observed(eng, over, states)) {
    std::map<std::string, Value> b{{d.bound_var, val}};
    Verdict v = check_one(m.resolve_predicate(d.p, b), d.q ? m.resolve_predicate(d.q, b) : Expr());
    if (!v.detail.empty()) v.detail = d.bound_var + "=" + val.str() + ": " + v.detail;
    if (v.violated()) return v;
    if (v.kind == Verdict::Kind::Unknown && agg.holds()) agg = v;
  }
  return agg;
}

}  // namespace

std::vector<PropertyResult> check_properties(const Engine& eng, const TransitionSystem& ts,
                                             const std::vector<PropertyDecl>& props) {
  std::vector<const SystemState*> all;
  for (const auto& s : ts.states) all.push_back(&s);
  std::vector<PropertyResult> out;
  for (const auto& d : props) {
    Verdict v = quantified(eng, d, all, [&](const Expr& p, const Expr& q) {
      switch (d.kind) {
        case PropertyDecl::Kind::Invariant: return check_invariant(eng, ts, p);
        case PropertyDecl::Kind::Co: return check_co(eng, ts, p, q);
        case PropertyDecl::Kind::Transient: return check_transient(eng, ts, p);
        case PropertyDecl::Kind::Ensures: return check_ensures(eng, ts, p, q);
        case PropertyDecl::Kind::LeadsTo: break;
      }
      return unknown("leads-to is checked on traces only");
    });
    out.push_back({d, v});
  }
  return out;
}

std::vector<PropertyResult> check_trace_properties(const Engine& eng,
                                                   const std::vector<SystemState>& states,
                                                   const std::vector<PropertyDecl>& props) {
  std::vector<const SystemState*> all;
  for (const auto& s : states) all.push_back(&s);
  std::vector<PropertyResult> out;
  for (const auto& d : props) {
    Verdict v = quantified(eng, d, all, [&](const Expr& p, const Expr& q) {
      switch (d.kind) {
        case PropertyDecl::Kind::Invariant: return check_trace_invariant(eng, states, p);
        case PropertyDecl::Kind::Co: return check_trace_co(eng, states, p, q);
        case PropertyDecl::Kind::LeadsTo: return check_trace_leadsto(eng, states, p, q);
        default: break;
      }
      return unknown(std::string(to_string(d.kind)) + " is checked by exploration only");
    });
    out.push_back({d, v});
  }
  return out;
}

}  // namespace munity
