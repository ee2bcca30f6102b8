#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "munity/engine.hpp"
#include "munity/parser.hpp"

namespace munity {

struct ExploreBounds {
  std::size_t max_states = 200000;
  /// States holding a queue-typed variable longer than this are kept but not
  /// expanded; the result is then truncated.
  std::size_t max_queue = 8;
  /// Branch over {false,true} / {0,1} for boolean and integer variables that
  /// no `initially` entry or `at` clause sets.
  bool enumerate_uninitialized = false;
};

struct Edge {
  int from = -1;
  int to = -1;        // -1 when the step failed
  int unit = -1;      // program unit id, -1 for an environment move
  std::string label;  // unit name or "env:<move>"
  std::string error;  // non-empty when the step failed
};

struct TransitionSystem {
  std::vector<SystemState> states;
  std::vector<int> initial;
  std::vector<Edge> edges;
  std::vector<std::vector<int>> out;  // edge ids per state
  std::vector<int> parent_edge;       // BFS tree edge, -1 for initial states
  std::vector<bool> expanded;
  bool truncated = false;
  std::string truncation_reason;
  std::vector<std::string> errors;  // step failures (reaction divergence, ...)

  bool error_tainted() const { return !errors.empty(); }
  int find(const SystemState& s) const;
  /// Edge labels from an initial state to `state`.
  std::vector<int> path_to(int state) const;

  std::unordered_map<std::uint64_t, std::vector<int>> index;
};

TransitionSystem explore(const Engine& eng, const ExploreBounds& bounds = {});

struct Verdict {
  enum class Kind { Holds, Violated, Unknown };
  Kind kind = Kind::Holds;
  std::string detail;
  /// Counterexample: states[0] is initial, labels[i] leads from states[i] to
  /// states[i+1].
  std::vector<int> states;
  std::vector<std::string> labels;
  std::string witness;  // transient / ensures: the falsifying unit

  bool holds() const { return kind == Kind::Holds; }
  bool violated() const { return kind == Kind::Violated; }
};

const char* to_string(Verdict::Kind k);

// Predicates passed below are resolved against the engine's model.
Verdict check_co(const Engine& eng, const TransitionSystem& ts, const Expr& p, const Expr& q);
Verdict check_invariant(const Engine& eng, const TransitionSystem& ts, const Expr& inv);
Verdict check_transient(const Engine& eng, const TransitionSystem& ts, const Expr& p);
Verdict check_ensures(const Engine& eng, const TransitionSystem& ts, const Expr& p, const Expr& q);

/// Trace checks over a sequence of states (initial state first).
Verdict check_trace_invariant(const Engine& eng, const std::vector<SystemState>& states, const Expr& inv);
Verdict check_trace_co(const Engine& eng, const std::vector<SystemState>& states, const Expr& p,
                       const Expr& q);
Verdict check_trace_leadsto(const Engine& eng, const std::vector<SystemState>& states,
                            const Expr& p, const Expr& q);

/// Re-executes a counterexample from its initial state. Returns true when
/// every intermediate digest matches the explored states.
bool replay(const Engine& eng, const TransitionSystem& ts, const Verdict& v);

/// Follows transition labels (unit names or "env:<move>") from `start`.
/// Throws Error when a label is not enabled.
std::vector<SystemState> replay_labels(const Engine& eng, const SystemState& start,
                                       const std::vector<std::string>& labels);

struct PropertyResult {
  PropertyDecl decl;
  Verdict verdict;
};

std::vector<PropertyResult> check_properties(const Engine& eng, const TransitionSystem& ts,
                                             const std::vector<PropertyDecl>& props);
std::vector<PropertyResult> check_trace_properties(const Engine& eng,
                                                   const std::vector<SystemState>& states,
                                                   const std::vector<PropertyDecl>& props);

}  // namespace munity
