#pragma once

#include <string>
#include <utility>
#include <vector>

#include "munity/eval.hpp"

namespace munity {

/// A named environment transition used by exploration (scripted event,
/// link toggle). `next` is the state right after the move, before reactions.
struct EnvMove {
  std::string name;
  SystemState next;
};

/// Supplies the functions a specification calls but does not define
/// (can_send, send, update, NewWord, ...) and the environment's own moves.
/// All mutable environment data lives in SystemState::env.
class Environment {
 public:
  virtual ~Environment() = default;

  /// Called once after the initially section has been applied.
  virtual void init(SystemState& s, const Model& m) const;

  virtual Value call(const std::string& name, const std::vector<Value>& args,
                     const EvalContext& ctx) const;

  /// Applies scripted events due at s.step (run mode). Returns true when the
  /// state changed.
  virtual bool advance(SystemState& s, const Model& m) const;

  /// True while scripted events remain.
  virtual bool pending(const SystemState& s) const;

  /// Environment transitions available from s (exploration mode).
  virtual std::vector<EnvMove> moves(const SystemState& s, const Model& m) const;

  /// Called after every completed step and environment move; may update
  /// history data kept in s.env (e.g. which messages were consumed).
  virtual void observe(SystemState& s, const Model& m) const;

  virtual bool can_send(const SystemState& s, const Model& m, int from, int to) const;

  // Helpers shared by environments.
  Value location_of(const SystemState& s, int inst) const;
  /// When true, connectivity follows physical locations in EnvState instead
  /// of the instances' λ variables.
  bool physical_locations = false;

  /// Word length for NewWord(); 0 = the system parameter N.
  int word_length = 0;
  std::string sender_location = "L0";
};

}  // namespace munity
