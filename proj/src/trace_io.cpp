#include "munity/trace_io.hpp"

#include <ostream>

namespace munity {

using nlohmann::json;

std::string config_hash(const TraceMeta& meta, const std::string& source_text) {
  json c = {{"system", meta.system},
            {"mode", to_string(meta.config.mode)},
            {"weights", format_weights(meta.config.weights)},
            {"fairness_window", meta.config.fairness_window},
            {"max_reaction_iters", meta.config.max_reaction_iters},
            {"seed", meta.config.seed},
            {"max_steps", meta.max_steps},
            {"full_states", meta.full_states}};
  std::uint64_t h = kFnvOffset;
  std::string text = c.dump() + "\n" + source_text;
  fnv_mix(h, text.data(), text.size());
  return hex_digest(h);
}

json state_json(const Model& m, const SystemState& s) {
  json out = json::object();
  for (std::size_t i = 0; i < m.instances.size(); ++i) {
    json vars = json::object();
    const Instance& in = m.instances[i];
    for (std::size_t k = 0; k < in.vars.size(); ++k) vars[in.vars[k].name] = s.stores[i][k].to_json();
    out[in.id] = std::move(vars);
  }
  return out;
}

json state_delta(const Model& m, const SystemState& a, const SystemState& b) {
  json out = json::object();
  for (std::size_t i = 0; i < m.instances.size(); ++i) {
    const Instance& in = m.instances[i];
    for (std::size_t k = 0; k < in.vars.size(); ++k) {
      if (a.stores[i][k] == b.stores[i][k]) continue;
      out[in.id][in.vars[k].name] = b.stores[i][k].to_json();
    }
  }
  return out;
}

namespace {

void line(std::ostream& out, const json& j) { out << j.dump() << '\n'; }

}  // namespace

void write_trace(std::ostream& out, const Model& m, const Trace& t, const TraceMeta& meta,
                 const std::string& hash) {
  line(out, {{"record", "header"},
             {"format", "munity-trace"},
             {"version", kTraceFormatVersion},
             {"system", meta.system},
             {"seed", meta.config.seed},
             {"mode", to_string(meta.config.mode)},
             {"weights", format_weights(effective_weights(m.priorities, meta.config.weights))},
             {"max_steps", meta.max_steps},
             {"config_hash", hash}});
  if (t.initial.stores.empty()) {
    if (t.error) line(out, {{"record", "error"}, {"step", 0}, {"message", *t.error}});
    line(out, {{"record", "end"}, {"steps", 0}, {"stop_reason", t.stop_reason}});
    return;
  }
  line(out, {{"record", "init"},
             {"step", 0},
             {"digest", t.initial_digest},
             {"state", state_json(m, t.initial)}});
  const SystemState* prev = &t.initial;
  for (std::size_t k = 0; k < t.steps.size(); ++k) {
    const StepRecord& r = t.steps[k];
    json j = {{"record", "step"},
              {"step", r.step},
              {"unit", r.unit},
              {"reactions", r.reactions},
              {"changed", r.changed},
              {"digest", r.digest}};
    if (meta.full_states && k < t.states.size()) {
      j["delta"] = state_delta(m, *prev, t.states[k]);
      prev = &t.states[k];
    }
    line(out, j);
  }
  if (t.error) {
    line(out, {{"record", "error"},
               {"step", t.steps.empty() ? 0 : t.steps.back().step + 1},
               {"message", *t.error}});
  }
  line(out, {{"record", "end"},
             {"steps", t.steps.size()},
             {"stop_reason", t.stop_reason},
             {"final_digest", t.steps.empty() ? t.initial_digest : t.steps.back().digest}});
}

}  // namespace munity
