#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "munity/ast.hpp"

namespace munity {

enum class Tok { Ident, Int, Symbol, Location, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::int64_t ival = 0;
  SourcePos pos;
};

/// Splits source text into tokens. `{ ... }` comments are skipped; the
/// Unicode forms of the operators (λ, ⊥, ∧, ∨, ¬, ≠, ≤, ≥, ≡, •, ∥, ⟨, ⟩)
/// are accepted and mapped to their ASCII spelling.
std::vector<Token> tokenize(std::string_view text);

using ParamOverrides = std::map<std::string, std::int64_t>;

/// Parses a single `program ... end` definition.
ProgramDef parse_program(std::string_view text);

/// Parses a `system ... end` definition and resolves cross-program
/// references (component programs, inhibition labels, qualified variables).
SystemDef parse_system(std::string_view text, const ParamOverrides& overrides = {});

/// Parses either a system or a lone program; a lone program is wrapped into a
/// one-component system named after it.
SystemDef parse_source(std::string_view text, const ParamOverrides& overrides = {});

SystemDef wrap_program(ProgramDef program);

/// Parses an expression. `programs` maps known program names to whether they
/// take parameters (used to recognize qualified references).
Expr parse_expression(std::string_view text,
                      const std::map<std::string, bool>& programs = {});

std::map<std::string, bool> program_signatures(const SystemDef& sys);

/// One declaration in a property file.
struct PropertyDecl {
  enum class Kind { Invariant, Co, Transient, Ensures, LeadsTo };
  Kind kind = Kind::Invariant;
  std::string name;
  Expr p;
  Expr q;  // unused for invariant / transient
  std::string bound_var;  // `forall n over e:`; empty when unquantified
  Expr bound_over;
  SourcePos pos;
};

const char* to_string(PropertyDecl::Kind k);

/// Property file syntax, one declaration per entry:
///   invariant NAME: expr
///   transient NAME: expr
///   co NAME: expr => expr
///   ensures NAME: expr => expr
///   leadsto NAME: expr => expr
/// Any entry may be quantified: `co NAME forall n over expr: p => q`.
std::vector<PropertyDecl> parse_properties(
    std::string_view text, const std::map<std::string, bool>& programs = {});

}  // namespace munity
