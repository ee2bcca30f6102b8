#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "munity/environment.hpp"
#include "munity/model.hpp"
#include "munity/state.hpp"

namespace munity {

using Rational = boost::rational<std::int64_t>;

struct SchedulerConfig {
  enum class Mode { Random, Deficit };
  Mode mode = Mode::Random;
  /// Block weights keyed by priority value. Empty = rank-proportional
  /// defaults (two blocks: low 1/3, high 2/3).
  std::map<int, Rational> weights;
  int fairness_window = 4;
  int max_reaction_iters = 10000;
  std::uint64_t seed = 0;
};

const char* to_string(SchedulerConfig::Mode m);
SchedulerConfig::Mode parse_mode(const std::string& s);

/// Parses "p2=2/3,p1=1/3" (also "2=2/3"). Throws ConfigError.
std::map<int, Rational> parse_weights(const std::string& text);
std::string format_weights(const std::map<int, Rational>& w);

/// Weights for `priorities` (ascending): explicit weights are validated
/// (positive, every block covered, summing to 1), otherwise rank-proportional.
std::map<int, Rational> effective_weights(const std::vector<int>& priorities,
                                          const std::map<int, Rational>& explicit_weights);

/// Uniform integer in [0, n) by rejection sampling; identical on every
/// platform for a given generator state.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n);

class Scheduler {
 public:
  Scheduler(const Model& m, const SchedulerConfig& cfg);

  /// Picks one of `enabled` (unit ids, non-empty) and updates fairness state.
  int select(const std::vector<int>& enabled);

  /// Priority block chosen for the last selection.
  int last_block() const { return last_block_; }

 private:
  int select_random(const std::vector<int>& enabled);
  int select_deficit(const std::vector<int>& enabled);

  const Model& m_;
  SchedulerConfig cfg_;
  std::map<int, Rational> weights_;
  std::mt19937_64 rng_;
  std::vector<std::int64_t> deficit_;
  std::map<int, std::int64_t> credit_;  // smooth weighted round robin state
  int last_block_ = 0;
};

struct StepRecord {
  std::uint64_t step = 0;  // index of the step (1-based after execution)
  std::string unit;        // unit name, "env:<move>" or "idle"
  int unit_id = -1;
  int reactions = 0;       // reactive sweeps performed during the step
  bool changed = false;
  std::string digest;
};

struct Trace {
  SystemState initial;
  std::string initial_digest;
  std::vector<StepRecord> steps;
  std::vector<SystemState> states;  // post-states, when kept
  std::string stop_reason;          // "max-steps", "quiescent", "error"
  std::optional<std::string> error;
};

struct RunOptions {
  std::uint64_t max_steps = 1000;
  bool keep_states = false;
};

class Engine {
 public:
  Engine(const Model& m, const Environment& env, SchedulerConfig cfg = {});

  const Model& model() const { return m_; }
  const Environment& env() const { return env_; }
  const SchedulerConfig& config() const { return cfg_; }

  /// Defaults, then the component `at` clause, then `initially` entries in
  /// dependency order, then a reactive fixed point.
  SystemState init_state() const;

  /// Schedulable units whose guard holds and which no inhibition disables.
  std::vector<int> enabled_units(const SystemState& s) const;
  bool enabled(const SystemState& s, const Unit& u) const;

  /// Runs reactive statements in sweep order until a full sweep changes
  /// nothing. Returns the number of sweeps including the confirming one.
  int reactive_fixed_point(SystemState& s) const;

  /// The s* step for unit `id` (assumed enabled): execute, run reactions,
  /// advance the step counter. Returns the reaction sweep count.
  int execute(SystemState& s, int id) const;

  /// Applies an environment move's successor followed by reactions.
  int settle_env(SystemState& s) const;

  /// True when executing some enabled unit would change the state.
  bool can_progress(const SystemState& s) const;

  Trace run(const RunOptions& opts) const;

  /// Evaluates a resolved predicate in a state.
  bool holds(const Expr& pred, const SystemState& s) const;

 private:
  int run_unit_body(SystemState& s, const Unit& u) const;

  const Model& m_;
  const Environment& env_;
  SchedulerConfig cfg_;
};

}  // namespace munity
