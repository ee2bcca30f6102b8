#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include "munity/engine.hpp"
#include "munity/environment.hpp"
#include "munity/eval.hpp"
#include "munity/model.hpp"
#include "munity/parser.hpp"

namespace test {

inline std::string corpus(const std::string& name) {
  return std::string(MUNITY_CORPUS_DIR) + "/" + name;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::filesystem::path scratch_dir() {
  static std::filesystem::path dir = [] {
    auto d = std::filesystem::temp_directory_path() /
             ("munity-tests-" + std::to_string(::getpid()));
    std::filesystem::create_directories(d);
    return d;
  }();
  return dir;
}

struct Cli {
  int code = -1;
  std::string out;  // stdout and stderr together
};

inline Cli cli(const std::string& args) {
  std::string cmd = std::string(MUNITY_CLI_PATH) + " " + args + " 2>&1";
  Cli r;
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

/// A compiled system with an engine over it. Not movable: the engine keeps
/// references into the fixture.
struct Sys {
  munity::Model model;
  munity::Environment env;
  std::unique_ptr<munity::Engine> engine;

  explicit Sys(const std::string& text, munity::SchedulerConfig cfg = {},
               const munity::ParamOverrides& params = {})
      : model(munity::compile(munity::parse_source(text, params))) {
    engine = std::make_unique<munity::Engine>(model, env, std::move(cfg));
  }
  Sys(const Sys&) = delete;

  munity::SystemState init() const { return engine->init_state(); }

  int inst(const std::string& id) const { return model.find_instance(id); }

  munity::Value get(const munity::SystemState& s, const std::string& id,
                    const std::string& var) const {
    return munity::read_name(model, s, inst(id), var);
  }
  void set(munity::SystemState& s, const std::string& id, const std::string& var,
           munity::Value v) const {
    int i = inst(id);
    s.stores[i][model.instances[i].slot(var)] = std::move(v);
  }

  /// Evaluates `text` as if written inside instance `id`.
  munity::Value eval_in(const munity::SystemState& s, const std::string& id,
                        const std::string& text) const {
    int i = inst(id);
    munity::Expr e = model.resolve_in_instance(
        munity::parse_expression(text, munity::program_signatures(model.def)), i);
    munity::EvalContext ctx{&model, &s, &env, i, nullptr, nullptr};
    return munity::eval(e, ctx);
  }

  munity::Expr pred(const std::string& text) const {
    return model.resolve_predicate(
        munity::parse_expression(text, munity::program_signatures(model.def)));
  }
  bool holds(const munity::SystemState& s, const std::string& text) const {
    return engine->holds(pred(text), s);
  }

  int unit(const std::string& name) const {
    const munity::Unit* u = model.find_unit(name);
    if (!u) throw std::runtime_error("no unit " + name);
    return u->id;
  }
};

inline munity::Value I(std::int64_t v) { return munity::Value::integer(v); }
inline munity::Value B(bool v) { return munity::Value::boolean(v); }
inline munity::Value bools(std::initializer_list<bool> bs) {
  munity::Seq s;
  for (bool b : bs) s.push_back(munity::Value::boolean(b));
  return munity::Value::seq(std::move(s));
}

}  // namespace test
