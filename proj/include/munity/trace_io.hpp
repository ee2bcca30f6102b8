#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "munity/engine.hpp"

namespace munity {

inline constexpr int kTraceFormatVersion = 1;

struct TraceMeta {
  std::string system;
  SchedulerConfig config;
  std::uint64_t max_steps = 0;
  bool full_states = false;
};

/// Stable hash of everything that influences a run besides the source text.
std::string config_hash(const TraceMeta& meta, const std::string& source_text);

nlohmann::json state_json(const Model& m, const SystemState& s);

/// Variables whose value differs between a and b, as {instance: {var: value}}.
nlohmann::json state_delta(const Model& m, const SystemState& a, const SystemState& b);

/// Line-delimited JSON: header, init, one record per step, optional error,
/// end. With full_states each step carries the changed variables, which
/// needs trace.states to be filled.
void write_trace(std::ostream& out, const Model& m, const Trace& t, const TraceMeta& meta,
                 const std::string& hash);

}  // namespace munity
