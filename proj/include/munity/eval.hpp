#pragma once

#include <string>
#include <vector>

#include "munity/model.hpp"
#include "munity/state.hpp"

namespace munity {

class Environment;

/// A message handed to an instance's queue by the environment; applied after
/// the invoking assignment has written its targets.
struct Delivery {
  int instance = -1;
  int slot = -1;
  Value message;
};

struct EvalContext {
  const Model* model = nullptr;
  const SystemState* state = nullptr;  // null: constant evaluation
  const Environment* env = nullptr;
  int instance = -1;                    // invoking instance, -1 for interactions
  std::vector<Delivery>* deliveries = nullptr;  // null: side effects forbidden
  EnvState* env_out = nullptr;          // environment state updated by hooks
};

Value eval(const Expr& e, const EvalContext& ctx);
bool eval_bool(const Expr& e, const EvalContext& ctx);

/// Executes one multiple assignment in place: every right-hand side and
/// target index is evaluated on the pre-state, then all targets are written
/// at once, then environment deliveries are applied. Returns whether the
/// state changed. Throws EvalError on overlapping targets or bad writes.
bool apply_assignment(SystemState& s, const CAssignment& a, const Model& m,
                      const Environment* env, int instance);

/// Reads a variable or `always` alias of an instance by name.
Value read_name(const Model& m, const SystemState& s, int instance, const std::string& name);

/// Default value for a declared type (false, 0, empty queue, filled array, null).
Value default_value(const VarInfo& v);

/// Normalizes a value written to a whole variable (a null queue becomes empty)
/// and checks it against the declared type.
Value coerce_for(const VarInfo& v, Value val, const std::string& where);

}  // namespace munity
