#include "munity/engine.hpp"

#include <set>

#include "munity/eval.hpp"

namespace munity {

Engine::Engine(const Model& m, const Environment& env, SchedulerConfig cfg)
    : m_(m), env_(env), cfg_(std::move(cfg)) {
  if (cfg_.max_reaction_iters < 1) throw ConfigError("max reaction iterations must be positive");
  effective_weights(m_.priorities, cfg_.weights);  // validate early
}

namespace {

std::set<int> slots_read(const Expr& e, int inst) {
  std::set<int> out;
  walk(e, [&](const ExprNode& n) {
    if (n.kind == ExprKind::Var && n.instance == inst) out.insert(n.slot);
  });
  return out;
}

}  // namespace

SystemState Engine::init_state() const {
  SystemState s;
  s.stores.resize(m_.instances.size());
  for (std::size_t i = 0; i < m_.instances.size(); ++i) {
    for (const auto& v : m_.instances[i].vars) s.stores[i].push_back(default_value(v));
  }
  for (std::size_t i = 0; i < m_.instances.size(); ++i) {
    const Instance& in = m_.instances[i];
    int inst = static_cast<int>(i);
    EvalContext ctx{&m_, &s, &env_, inst, nullptr, nullptr};
    if (in.at) s.stores[i][0] = eval(in.at, ctx);

    // Entries run once everything they read from the same section is set.
    std::set<int> assigned;
    for (const auto& e : in.init) assigned.insert(e.slot);
    std::vector<bool> done(in.init.size(), false);
    std::size_t remaining = in.init.size();
    while (remaining > 0) {
      bool progress = false;
      for (std::size_t k = 0; k < in.init.size(); ++k) {
        if (done[k]) continue;
        bool ready = true;
        for (int slot : slots_read(in.init[k].value, inst)) {
          if (!assigned.count(slot)) continue;
          for (std::size_t j = 0; j < in.init.size(); ++j) {
            if (!done[j] && j != k && in.init[j].slot == slot) ready = false;
          }
          if (slot == in.init[k].slot) ready = false;
        }
        if (!ready) continue;
        const VarInfo& var = in.vars[in.init[k].slot];
        try {
          s.stores[i][in.init[k].slot] =
              coerce_for(var, eval(in.init[k].value, ctx), in.id + " initially");
        } catch (const EvalError& err) {
          throw EvalError(in.id + ": initially " + var.name + ": " + err.what());
        }
        done[k] = true;
        --remaining;
        progress = true;
      }
      if (!progress) {
        std::string names;
        for (std::size_t k = 0; k < in.init.size(); ++k) {
          if (!done[k]) names += (names.empty() ? "" : ", ") + in.vars[in.init[k].slot].name;
        }
        throw EvalError(in.id + ": cyclic initially section (" + names + ")");
      }
    }
  }
  env_.init(s, m_);
  reactive_fixed_point(s);
  env_.observe(s, m_);
  s.step = 0;
  return s;
}

bool Engine::holds(const Expr& pred, const SystemState& s) const {
  EvalContext ctx{&m_, &s, &env_, -1, nullptr, nullptr};
  return eval_bool(pred, ctx);
}

bool Engine::enabled(const SystemState& s, const Unit& u) const {
  EvalContext ctx{&m_, &s, &env_, u.instance, nullptr, nullptr};
  try {
    if (u.overflow_check && eval(u.overflow_check, ctx).as_bool())
      throw EvalError("family bound exceeds the cap of " + std::to_string(m_.family_cap) +
                      " (raise MaxQueue)");
    if (!eval_bool(u.guard, ctx)) return false;
    EvalContext ictx{&m_, &s, &env_, -1, nullptr, nullptr};
    for (const auto& inh : u.inhibitors) {
      if (eval(inh, ictx).as_bool()) return false;
    }
  } catch (const EvalError& e) {
    throw EvalError(u.name + ": " + e.what());
  }
  return true;
}

std::vector<int> Engine::enabled_units(const SystemState& s) const {
  std::vector<int> out;
  for (const auto& u : m_.units) {
    if (enabled(s, u)) out.push_back(u.id);
  }
  return out;
}

int Engine::reactive_fixed_point(SystemState& s) const {
  if (m_.reactive.empty()) return 1;
  int iters = 0;
  std::string last;
  for (;;) {
    if (++iters > cfg_.max_reaction_iters) throw ReactionDivergence(last, cfg_.max_reaction_iters);
    bool changed = false;
    for (const auto& r : m_.reactive) {
      try {
        EvalContext ctx{&m_, &s, &env_, r.instance, nullptr, nullptr};
        if (!eval_bool(r.guard, ctx)) continue;
        bool c = false;
        for (const auto& a : r.body) {
          EvalContext actx{&m_, &s, &env_, r.instance, nullptr, nullptr};
          if (!eval_bool(a.guard, actx)) continue;
          c = apply_assignment(s, a, m_, &env_, r.instance) || c;
        }
        if (c) {
          changed = true;
          last = r.name;
        }
      } catch (const ReactionDivergence&) {
        throw;
      } catch (const EvalError& e) {
        throw EvalError(r.name + ": " + e.what());
      }
    }
    if (!changed) return iters;
  }
}

int Engine::run_unit_body(SystemState& s, const Unit& u) const {
  int reactions = 0;
  try {
    if (!u.transaction) {
      apply_assignment(s, u.body.at(0), m_, &env_, u.instance);
    } else {
      // Sub-assignments run back to back; only reactions may intervene.
      for (const auto& a : u.body) {
        EvalContext ctx{&m_, &s, &env_, u.instance, nullptr, nullptr};
        if (eval_bool(a.guard, ctx)) apply_assignment(s, a, m_, &env_, u.instance);
        reactions += reactive_fixed_point(s);
      }
    }
  } catch (const ReactionDivergence&) {
    throw;
  } catch (const EvalError& e) {
    throw EvalError(u.name + ": " + e.what());
  }
  return reactions + reactive_fixed_point(s);
}

int Engine::execute(SystemState& s, int id) const {
  int r = run_unit_body(s, m_.units.at(id));
  ++s.step;
  env_.observe(s, m_);
  return r;
}

int Engine::settle_env(SystemState& s) const {
  int r = reactive_fixed_point(s);
  env_.observe(s, m_);
  return r;
}

bool Engine::can_progress(const SystemState& s) const {
  for (int id : enabled_units(s)) {
    SystemState t = s;
    run_unit_body(t, m_.units[id]);
    if (!t.same(s)) return true;
  }
  return false;
}

Trace Engine::run(const RunOptions& opts) const {
  Trace t;
  SystemState s;
  try {
    s = init_state();
  } catch (const Error& e) {
    t.error = e.what();
    t.stop_reason = "error";
    return t;
  }
  t.initial = s;
  t.initial_digest = s.digest_hex();
  Scheduler sched(m_, cfg_);
  t.stop_reason = "max-steps";
  try {
    while (s.step < opts.max_steps) {
      StepRecord rec;
      int reactions = 0;
      bool env_changed = env_.advance(s, m_);
      if (env_changed) reactions += settle_env(s);
      std::vector<int> en = enabled_units(s);
      bool changed = env_changed;
      if (en.empty()) {
        if (!env_changed && !env_.pending(s)) {
          t.stop_reason = "quiescent";
          break;
        }
        rec.unit = "idle";
        ++s.step;
      } else {
        int id = sched.select(en);
        SystemState before = s;
        reactions += execute(s, id);
        changed = changed || !s.same(before);
        // A step that changed nothing may mean a fixed point.
        if (!changed && !env_.pending(s) && !can_progress(s)) t.stop_reason = "quiescent";
        rec.unit = m_.units[id].name;
        rec.unit_id = id;
      }
      rec.step = s.step;
      rec.reactions = reactions;
      rec.changed = changed;
      rec.digest = s.digest_hex();
      t.steps.push_back(std::move(rec));
      if (opts.keep_states) t.states.push_back(s);
      if (t.stop_reason == "quiescent") break;
    }
  } catch (const Error& e) {
    t.error = "step " + std::to_string(s.step + 1) + ": " + e.what();
    t.stop_reason = "error";
  }
  return t;
}

}  // namespace munity
