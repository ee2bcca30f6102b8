// munity: parse, run, check and transform UNITY / Mobile UNITY systems, and
// run ENS scenarios.
//
// Exit codes: 0 ok, 1 syntax/validation/usage, 2 I/O, 3 engine error,
// 4 property violated, 5 property unknown.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "munity/checker.hpp"
#include "munity/ens.hpp"
#include "munity/lang.hpp"
#include "munity/parser.hpp"
#include "munity/trace_io.hpp"

#ifndef MUNITY_DEFAULT_CORPUS
#define MUNITY_DEFAULT_CORPUS "corpus"
#endif

namespace fs = std::filesystem;
using namespace munity;

namespace {

enum Exit { kOk = 0, kSyntax = 1, kIo = 2, kEngine = 3, kViolated = 4, kUnknown = 5 };

std::string corpus_dir() {
  const char* env = std::getenv("MUNITY_CORPUS");
  return env && *env ? env : MUNITY_DEFAULT_CORPUS;
}

// Plain paths win; otherwise look the name up in the corpus directory.
std::string resolve_input(const std::string& name, const char* ext) {
  if (fs::exists(name)) return name;
  fs::path dir = corpus_dir();
  for (fs::path p : {dir / name, dir / (name + ext), dir / "scenarios" / name,
                     dir / "scenarios" / (name + ext)}) {
    if (fs::exists(p)) return p.string();
  }
  throw IoError("cannot find " + name + " (also looked in " + dir.string() + ")");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

ParamOverrides parse_params(const std::vector<std::string>& items) {
  ParamOverrides out;
  for (const auto& it : items) {
    auto eq = it.find('=');
    if (eq == std::string::npos) throw ConfigError("--param expects NAME=INT, got " + it);
    try {
      out[it.substr(0, eq)] = std::stoll(it.substr(eq + 1));
    } catch (const std::exception&) {
      throw ConfigError("--param expects NAME=INT, got " + it);
    }
  }
  return out;
}

struct Options {
  std::string system;
  std::string props;
  std::string scenario;
  std::vector<std::string> params;
  std::uint64_t seed = 0;
  std::uint64_t steps = 1000;
  std::string mode = "random";
  std::string weights;
  int fairness_window = 4;
  std::size_t max_states = 200000;
  std::size_t max_queue = 8;
  bool enumerate = false;
  std::string trace;
  std::string report;
  std::string counterexample = "counterexample.txt";
  bool full_states = false;
  bool on_trace = false;
  bool print = false;
  std::string output;
  std::string save_config;
};

SchedulerConfig scheduler_config(const Options& o) {
  SchedulerConfig cfg;
  cfg.mode = parse_mode(o.mode);
  if (!o.weights.empty()) cfg.weights = parse_weights(o.weights);
  cfg.fairness_window = o.fairness_window;
  cfg.seed = o.seed;
  return cfg;
}

// Loads and validates a system; prints diagnostics.
SystemDef load_system(const Options& o, std::string* text_out = nullptr) {
  std::string path = resolve_input(o.system, ".unity");
  std::string text = read_file(path);
  SystemDef sys = parse_source(text, parse_params(o.params));
  auto diags = validate(sys);
  for (const auto& d : diags) std::cerr << path << ": " << d.str() << "\n";
  if (has_errors(diags)) throw ParseError(SourcePos{}, "validation failed");
  if (text_out) *text_out = text;
  return sys;
}

int cmd_parse(const Options& o) {
  std::string path = resolve_input(o.system, ".unity");
  std::string text = read_file(path);
  SystemDef sys = parse_source(text, parse_params(o.params));
  auto diags = validate(sys);
  for (const auto& d : diags) std::cout << path << ": " << d.str() << "\n";
  if (has_errors(diags)) return kSyntax;
  if (o.print) {
    std::cout << print_system(sys);
  } else {
    std::cout << "ok: system " << sys.name << ", " << sys.programs.size() << " program(s)\n";
  }
  return kOk;
}

int cmd_run(const Options& o) {
  std::string text;
  SystemDef sys = load_system(o, &text);
  Model m = compile(sys);
  Environment env;
  Engine eng(m, env, scheduler_config(o));
  RunOptions ro;
  ro.max_steps = o.steps;
  ro.keep_states = o.full_states;
  Trace t = eng.run(ro);
  TraceMeta meta{sys.name, eng.config(), o.steps, o.full_states};
  if (!o.trace.empty()) {
    std::ostringstream out;
    write_trace(out, m, t, meta, config_hash(meta, text));
    write_file(o.trace, out.str());
  }
  std::cout << "steps: " << t.steps.size() << "\nstop: " << t.stop_reason << "\nfinal digest: "
            << (t.steps.empty() ? t.initial_digest : t.steps.back().digest) << "\n";
  if (t.error) {
    std::cerr << "error: " << *t.error << "\n";
    return kEngine;
  }
  return kOk;
}

int exit_for(const std::vector<Verdict::Kind>& kinds) {
  bool unknown = false;
  for (auto k : kinds) {
    if (k == Verdict::Kind::Violated) return kViolated;
    if (k == Verdict::Kind::Unknown) unknown = true;
  }
  return unknown ? kUnknown : kOk;
}

void print_table(const std::vector<PropertyResult>& rs) {
  for (const auto& r : rs) {
    std::cout << to_string(r.decl.kind) << " " << r.decl.name << ": " << to_string(r.verdict.kind);
    if (!r.verdict.detail.empty()) std::cout << " (" << r.verdict.detail << ")";
    if (!r.verdict.witness.empty()) std::cout << " [witness " << r.verdict.witness << "]";
    std::cout << "\n";
  }
}

void write_counterexamples(const std::string& path, const Model& m,
                           const std::vector<PropertyResult>& rs,
                           const std::vector<SystemState>& states) {
  std::ostringstream out;
  for (const auto& r : rs) {
    if (!r.verdict.violated()) continue;
    nlohmann::json j = {{"property", r.decl.name},
                        {"detail", r.verdict.detail},
                        {"labels", r.verdict.labels}};
    nlohmann::json path_states = nlohmann::json::array();
    for (int id : r.verdict.states) {
      if (id >= 0 && static_cast<std::size_t>(id) < states.size())
        path_states.push_back(state_json(m, states[id]));
    }
    j["states"] = std::move(path_states);
    out << j.dump() << "\n";
  }
  write_file(path, out.str());
}

int cmd_check(const Options& o) {
  std::unique_ptr<Environment> env;
  SystemDef sys;
  std::string props_text;
  if (!o.scenario.empty()) {
    EnsScenario sc = load_scenario(resolve_input(o.scenario, ".yaml"));
    sys = build_ens_system(sc.clients, sc.servers, sc.topics, sc.max_queue);
    env = std::make_unique<EnsEnvironment>(sc);
    props_text = o.props.empty() ? ens_properties(sc.clients, sc.servers)
                                 : read_file(resolve_input(o.props, ".props"));
  } else {
    if (o.system.empty()) throw ConfigError("check needs a system or --scenario");
    sys = load_system(o);
    env = std::make_unique<Environment>();
    std::string props = o.props;
    if (props.empty()) {
      fs::path p = resolve_input(o.system, ".unity");
      props = p.replace_extension(".props").string();
    }
    props_text = read_file(resolve_input(props, ".props"));
  }
  auto decls = parse_properties(props_text, program_signatures(sys));
  Model m = compile(sys);
  Engine eng(m, *env, scheduler_config(o));

  std::vector<PropertyResult> rs;
  std::vector<SystemState> states;
  if (o.on_trace) {
    RunOptions ro;
    ro.max_steps = o.steps;
    ro.keep_states = true;
    Trace t = eng.run(ro);
    if (t.error) {
      std::cerr << "error: " << *t.error << "\n";
      return kEngine;
    }
    states.push_back(t.initial);
    for (auto& s : t.states) states.push_back(std::move(s));
    rs = check_trace_properties(eng, states, decls);
    std::cout << "trace: " << states.size() << " states\n";
  } else {
    ExploreBounds b;
    b.max_states = o.max_states;
    b.max_queue = o.max_queue;
    b.enumerate_uninitialized = o.enumerate;
    TransitionSystem ts = explore(eng, b);
    std::cout << "explored: " << ts.states.size() << " states, " << ts.edges.size() << " edges";
    if (ts.truncated) std::cout << " (truncated: " << ts.truncation_reason << ")";
    if (ts.error_tainted()) std::cout << " (" << ts.errors.size() << " step errors)";
    std::cout << "\n";
    rs = check_properties(eng, ts, decls);
    states = ts.states;
  }
  print_table(rs);
  std::vector<Verdict::Kind> kinds;
  for (const auto& r : rs) kinds.push_back(r.verdict.kind);
  int code = exit_for(kinds);
  if (code == kViolated) {
    write_counterexamples(o.counterexample, m, rs, states);
    std::cout << "counterexample: " << o.counterexample << "\n";
  }
  return code;
}

int cmd_transform(const Options& o) {
  SystemDef sys = load_system(o);
  int moved = 0;
  SystemDef out = eliminate_reacts_to(sys, &moved);
  std::string text = print_system(out);
  if (o.output.empty()) {
    std::cout << text;
  } else {
    write_file(o.output, text);
    std::cerr << "moved " << moved << " reactive statement(s)\n";
  }
  return kOk;
}

int cmd_scenario(const Options& o, bool seed_set, bool steps_set, bool mode_set) {
  std::string path = resolve_input(o.scenario, ".yaml");
  std::string text = read_file(path);
  EnsScenario sc = parse_scenario(text);
  if (seed_set) sc.seed = o.seed;
  if (steps_set) sc.max_steps = o.steps;
  if (mode_set) sc.mode = parse_mode(o.mode);
  if (!o.weights.empty()) sc.weights = parse_weights(o.weights);

  EnsRun r = run_scenario(sc);
  if (!o.trace.empty()) {
    SchedulerConfig cfg;
    cfg.mode = sc.mode;
    cfg.weights = sc.weights;
    cfg.fairness_window = sc.fairness_window;
    cfg.seed = sc.seed;
    TraceMeta meta{"ens-system", cfg, sc.max_steps, o.full_states};
    std::ostringstream out;
    write_trace(out, r.model, r.trace, meta, config_hash(meta, text));
    write_file(o.trace, out.str());
    r.report["trace"] = o.trace;
  }
  std::string rep = r.report.dump(2) + "\n";
  if (o.report.empty()) {
    std::cout << rep;
  } else {
    write_file(o.report, rep);
    for (const auto& [name, v] : r.report["properties"].items())
      std::cout << name << ": " << v["verdict"].get<std::string>() << "\n";
  }
  if (r.trace.error) {
    std::cerr << "error: " << *r.trace.error << "\n";
    return kEngine;
  }
  bool unknown = false;
  for (const auto& [name, v] : r.report["properties"].items()) {
    if (v["verdict"] == "violated") return kViolated;
    if (v["verdict"] != "holds") unknown = true;
  }
  return unknown ? kUnknown : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"munity: UNITY / Mobile UNITY interpreter, scheduler and property checker"};
  app.set_config("--config", "", "read options from a TOML/INI file; flags override it");
  app.require_subcommand(1);
  Options o;

  auto sched_flags = [&](CLI::App* c) {
    c->add_option("--seed", o.seed, "random seed");
    c->add_option("--steps", o.steps, "maximum number of steps");
    c->add_option("--mode", o.mode, "scheduler mode: random or deficit");
    c->add_option("--weights", o.weights, "block weights, e.g. p2=2/3,p1=1/3");
    c->add_option("--fairness-window", o.fairness_window, "deficit mode window W");
  };
  auto system_flags = [&](CLI::App* c, bool required = true) {
    c->add_option("system,--system", o.system, "system file or corpus name")->required(required);
    c->add_option("--param", o.params, "override a system parameter, NAME=INT");
  };

  auto* parse = app.add_subcommand("parse", "parse and validate a system");
  system_flags(parse);
  parse->add_flag("--print", o.print, "pretty-print the parsed system");

  auto* run = app.add_subcommand("run", "run a system and write a trace");
  system_flags(run);
  sched_flags(run);
  run->add_option("--trace", o.trace, "trace output (line-delimited JSON)");
  run->add_flag("--full-states", o.full_states, "record changed variables in every step");

  auto* check = app.add_subcommand("check", "check a property file");
  system_flags(check, false);
  sched_flags(check);
  check->add_option("--props", o.props, "property file (default: system file with .props)");
  check->add_option("--scenario", o.scenario, "explore the ENS under a scenario instead");
  check->add_option("--max-states", o.max_states, "exploration state cap");
  check->add_option("--max-queue", o.max_queue, "do not expand states with longer queues");
  check->add_flag("--enumerate", o.enumerate, "branch over uninitialized booleans/integers");
  check->add_flag("--on-trace", o.on_trace, "check on one run instead of exploring");
  check->add_option("--counterexample", o.counterexample, "counterexample output file");

  auto* transform = app.add_subcommand("transform", "replace reacts-to by if");
  system_flags(transform);
  transform->add_option("-o,--output", o.output, "output file (default stdout)");

  auto* scenario = app.add_subcommand("scenario", "run an ENS scenario");
  scenario->add_option("scenario,--scenario", o.scenario, "scenario file or corpus name")
      ->required();
  sched_flags(scenario);
  scenario->add_option("--trace", o.trace, "trace output (line-delimited JSON)");
  scenario->add_option("--report", o.report, "report output (JSON; default stdout)");
  scenario->add_flag("--full-states", o.full_states, "record changed variables in every step");

  for (auto* c : {parse, run, check, transform, scenario})
    c->add_option("--save-config", o.save_config, "write the effective options to a file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kSyntax;
  }

  try {
    if (!o.save_config.empty()) {
      // Only options actually given; the file must not re-save itself.
      std::istringstream all(app.config_to_str(false, false));
      std::string text;
      for (std::string line; std::getline(all, line);) {
        if (line.find("save-config") == std::string::npos) text += line + "\n";
      }
      write_file(o.save_config, text);
    }
    if (parse->parsed()) return cmd_parse(o);
    if (run->parsed()) return cmd_run(o);
    if (check->parsed()) return cmd_check(o);
    if (transform->parsed()) return cmd_transform(o);
    return cmd_scenario(o, scenario->count("--seed") > 0, scenario->count("--steps") > 0,
                        scenario->count("--mode") > 0);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSyntax;
  } catch (const ResolveError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSyntax;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSyntax;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kEngine;
  }
}
