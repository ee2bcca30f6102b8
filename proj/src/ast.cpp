#include "munity/ast.hpp"

namespace munity {

std::vector<const Statement*> ProgramDef::statements() const {
  std::vector<const Statement*> out;
  for (const auto& b : blocks) {
    for_each_statement(b.items, [&](const Statement& s) { out.push_back(&s); });
  }
  return out;
}

std::vector<const Statement*> ProgramDef::reactive_statements() const {
  std::vector<const Statement*> out;
  for (const Statement* s : statements()) {
    if (s->reactive) out.push_back(s);
  }
  return out;
}

const TypeSpec* ProgramDef::find_decl(const std::string& name) const {
  for (const auto& d : declare) {
    for (const auto& n : d.names) {
      if (n == name) return &d.type;
    }
  }
  return nullptr;
}

const ProgramDef* SystemDef::find_program(const std::string& name) const {
  for (const auto& p : programs) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

}  // namespace munity
