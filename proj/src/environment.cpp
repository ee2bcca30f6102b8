#include "munity/environment.hpp"

namespace munity {

void Environment::init(SystemState& s, const Model& m) const {
  s.env.locations.assign(m.instances.size(), Value());
  for (std::size_t i = 0; i < m.instances.size(); ++i) s.env.locations[i] = s.stores[i][0];
}

Value Environment::location_of(const SystemState& s, int inst) const {
  if (physical_locations && static_cast<std::size_t>(inst) < s.env.locations.size())
    return s.env.locations[inst];
  return s.stores[inst][0];
}

bool Environment::can_send(const SystemState& s, const Model& m, int from, int to) const {
  if (from < 0 || to < 0) return false;
  if (s.env.is_blocked(from, to, m.instances.size())) return false;
  return lang_equal(location_of(s, from), location_of(s, to));
}

namespace {

void want(const std::string& name, const std::vector<Value>& args, std::size_t n) {
  if (args.size() != n)
    throw EvalError(name + "() takes " + std::to_string(n) + " arguments, got " +
                    std::to_string(args.size()));
}

}  // namespace

Value Environment::call(const std::string& name, const std::vector<Value>& args,
                        const EvalContext& ctx) const {
  const Model& m = *ctx.model;
  if (name == "can_send") {
    want(name, args, 2);
    if (!ctx.state) throw EvalError("can_send() needs a state");
    return Value::boolean(can_send(*ctx.state, m, m.instance_of(args[0]), m.instance_of(args[1])));
  }
  if (name == "send") {
    // Delivers a fresh (status=false) copy to the destination's `interface`
    // when the link is up; the result is the new status of the sender's copy.
    want(name, args, 1);
    if (!ctx.deliveries) throw EvalError("send() is not allowed in a guard or predicate");
    const Message& msg = args[0].as_message();
    int src = m.instance_of(msg.source);
    int dst = m.instance_of(msg.destination);
    if (dst < 0 || !can_send(*ctx.state, m, src, dst)) return Value::boolean(false);
    int slot = m.instances[dst].slot("interface");
    if (slot < 0) throw EvalError(m.instances[dst].id + " has no interface queue");
    Message copy = msg;
    copy.status = false;
    ctx.deliveries->push_back(Delivery{dst, slot, Value::message(std::move(copy))});
    return Value::boolean(true);
  }
  if (name == "update") {
    want(name, args, 1);
    if (ctx.instance >= 0 && static_cast<std::size_t>(ctx.instance) < ctx.state->env.locations.size()) {
      const Value& loc = ctx.state->env.locations[ctx.instance];
      if (!loc.is_bottom()) return loc;
    }
    return args[0];
  }
  if (name == "NewWord") {
    // A fixed word whose first and last bits are set.
    want(name, args, 0);
    std::int64_t n = word_length;
    if (n == 0) {
      auto it = m.params.find("N");
      if (it == m.params.end()) throw EvalError("NewWord() needs a parameter N");
      n = it->second.as_int();
    }
    if (n < 0) throw EvalError("NewWord(): negative word length");
    Seq w(static_cast<std::size_t>(n), Value::boolean(false));
    if (n > 0) {
      w.front() = Value::boolean(true);
      w.back() = Value::boolean(true);
    }
    return Value::seq(std::move(w));
  }
  if (name == "validLoc") {
    want(name, args, 1);
    return Value::boolean(false);
  }
  if (name == "SenderLocation") {
    want(name, args, 1);
    return Value::location(sender_location);
  }
  throw EvalError("unknown environment function " + name + "()");
}

bool Environment::advance(SystemState&, const Model&) const { return false; }

bool Environment::pending(const SystemState&) const { return false; }

void Environment::observe(SystemState&, const Model&) const {}

std::vector<EnvMove> Environment::moves(const SystemState&, const Model&) const { return {}; }

}  // namespace munity
