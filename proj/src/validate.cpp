#include <set>

#include "munity/lang.hpp"

namespace munity {

std::string Diagnostic::str() const {
  std::string s = severity == Severity::Error ? "error" : "warning";
  s += " [" + rule + "]";
  if (pos.line > 0) s += " " + pos.str();
  return s + ": " + message;
}

bool has_errors(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags) {
    if (d.severity == Diagnostic::Severity::Error) return true;
  }
  return false;
}

namespace {

bool mentions_lambda(const Expr& e) {
  bool found = false;
  walk(e, [&](const ExprNode& n) {
    if (n.kind == ExprKind::Var && n.name == "lambda") found = true;
  });
  return found;
}

bool program_uses_lambda(const ProgramDef& p) {
  bool used = false;
  for (const auto& a : p.always) used = used || mentions_lambda(a.value);
  for (const auto& in : p.initially) used = used || (in.name != "lambda" && mentions_lambda(in.value));
  for (const Statement* s : p.statements()) {
    used = used || mentions_lambda(s->guard);
    for (const auto& a : s->body) {
      used = used || mentions_lambda(a.guard);
      for (const auto& v : a.values) used = used || mentions_lambda(v);
      for (const auto& t : a.targets) used = used || (!t.qualified && t.var == "lambda");
    }
  }
  return used;
}

bool interactions_use_lambda_of(const SystemDef& sys, const std::string& program) {
  bool used = false;
  auto check = [&](const Expr& e) {
    walk(e, [&](const ExprNode& n) {
      if (n.kind == ExprKind::Qualified && n.program == program && n.name == "lambda") used = true;
    });
  };
  for (const auto& b : sys.interactions) {
    for_each_statement(b.items, [&](const Statement& s) {
      check(s.guard);
      for (const auto& a : s.body) {
        check(a.guard);
        for (const auto& v : a.values) check(v);
      }
    });
    for_each_inhibition(b.items, [&](const Inhibition& in) { check(in.when); });
  }
  return used;
}

void components_of(const std::vector<ComponentItem>& items, std::vector<const Component*>& out) {
  for (const auto& ci : items) {
    if (ci.family) components_of(ci.children, out);
    else out.push_back(&ci.comp);
  }
}

}  // namespace

std::vector<Diagnostic> validate(const SystemDef& sys) {
  std::vector<Diagnostic> out;
  auto error = [&](const char* rule, std::string msg, SourcePos pos = {}) {
    out.push_back({Diagnostic::Severity::Error, rule, std::move(msg), pos});
  };
  auto warning = [&](const char* rule, std::string msg, SourcePos pos = {}) {
    out.push_back({Diagnostic::Severity::Warning, rule, std::move(msg), pos});
  };

  std::vector<const Component*> comps;
  components_of(sys.components, comps);

  std::set<std::string> program_names;
  for (const auto& p : sys.programs) {
    if (!program_names.insert(p.name).second)
      error("RULE-PROGRAM-UNIQUE", "program " + p.name + " defined twice", p.pos);

    std::set<std::string> declared{"lambda"};
    for (const auto& d : p.declare) declared.insert(d.names.begin(), d.names.end());
    std::set<std::string> labels;
    std::set<int> prios;
    for (const auto& b : p.blocks) {
      if (b.priority < 1)
        error("RULE-PRIORITY-POSITIVE", p.name + ": priority " + std::to_string(b.priority) +
                                            " is not positive", p.pos);
      if (!prios.insert(b.priority).second)
        error("RULE-PRIORITY-UNIQUE", p.name + ": priority " + std::to_string(b.priority) +
                                          " used by two blocks", p.pos);
    }
    for (const Statement* s : p.statements()) {
      if (!s->label.empty() && !labels.insert(s->label).second)
        error("RULE-LABEL-UNIQUE", p.name + ": duplicate label " + s->label, s->pos);
      for (const auto& a : s->body) {
        for (const auto& t : a.targets) {
          if (!t.qualified && !declared.count(t.var))
            error("RULE-DECLARED", p.name + ": assignment to undeclared variable " + t.var, t.pos);
        }
      }
    }
    bool lambda_set = false;
    for (const auto& in : p.initially) lambda_set = lambda_set || in.name == "lambda";
    bool placed = !comps.empty();
    for (const Component* c : comps) {
      if (c->program == p.name) placed = placed && static_cast<bool>(c->at);
    }
    if (!lambda_set && !placed && (program_uses_lambda(p) || interactions_use_lambda_of(sys, p.name)))
      warning("RULE-LAMBDA-INIT",
              p.name + ": location variable lambda is read but never initialized (defaults to null)",
              p.pos);
  }

  for (const Component* c : comps) {
    if (!program_names.count(c->program))
      error("RULE-COMPONENT-PROGRAM", "component references unknown program " + c->program);
  }

  std::set<int> iprios;
  for (const auto& b : sys.interactions) {
    if (b.header && !iprios.insert(b.priority).second)
      error("RULE-PRIORITY-UNIQUE", "interactions: priority " + std::to_string(b.priority) +
                                        " used by two blocks");
    for_each_inhibition(b.items, [&](const Inhibition& in) {
      const ProgramDef* p = sys.find_program(in.program);
      if (!p) {
        error("RULE-INHIBIT-TARGET", "inhibition names unknown program " + in.program, in.pos);
        return;
      }
      const Statement* target = nullptr;
      for (const Statement* s : p->statements()) {
        if (s->label == in.label) target = s;
      }
      if (!target) {
        error("RULE-INHIBIT-TARGET", "inhibition target " + in.program + "." + in.label + " not found",
              in.pos);
      } else if (target->reactive) {
        error("RULE-REACT-INHIBIT",
              "reactive statement " + in.program + "." + in.label + " must not be inhibited", in.pos);
      }
    });
  }

  if (!has_errors(out)) {
    try {
      compile(sys);
    } catch (const Error& e) {
      error("RULE-RESOLVE", e.what());
    }
  }
  return out;
}

}  // namespace munity
