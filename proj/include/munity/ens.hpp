#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "munity/checker.hpp"
#include "munity/engine.hpp"

namespace munity {

/// Source text of the built-in ens-system specification.
extern const char* const kEnsSystemText;

/// The ens-system with the given instance counts. Throws ConfigError when a
/// count is below 1.
SystemDef build_ens_system(int clients, int servers, int topics = 2, int max_queue = 16);

/// Property file text for a given size: registration safety per client and
/// the registration / subscription leads-to obligations.
std::string ens_properties(int clients, int servers);

struct EnsEvent {
  enum class Kind { Move, LinkDown, LinkUp, Publish, Request };
  std::uint64_t step = 0;
  Kind kind = Kind::Move;
  int client = -1;
  int server = -1;  // Move: target cell; Link*: -1 = every server; Publish: origin
  int topic = 0;
  Value tag;
  std::string flag;  // Request: unsubscribe, update_add, update_del, deregister

  std::string describe() const;
};

struct EnsScenario {
  std::string name = "scenario";
  int clients = 1;
  int servers = 1;
  int topics = 2;
  int max_queue = 16;
  std::uint64_t max_steps = 1000;
  std::uint64_t seed = 0;
  SchedulerConfig::Mode mode = SchedulerConfig::Mode::Deficit;
  std::map<int, Rational> weights;
  int fairness_window = 4;
  std::vector<EnsEvent> events;  // stable-sorted by step
  /// Exploration only: also branch over toggling every client/server link.
  bool branch_links = false;

  void sort_events();
};

/// Parses the YAML scenario format; throws ConfigError.
EnsScenario parse_scenario(const std::string& yaml_text);
EnsScenario load_scenario(const std::string& path);

/// Mobile environment for the ENS: connectivity follows physical cells
/// (client and server in the same cell, link not forced down); servers
/// reach each other over a fixed backbone. Scripted events move clients,
/// take links down and up, publish to current subscribers and raise client
/// request flags.
class EnsEnvironment : public Environment {
 public:
  explicit EnsEnvironment(EnsScenario sc);

  void init(SystemState& s, const Model& m) const override;
  bool can_send(const SystemState& s, const Model& m, int from, int to) const override;
  bool advance(SystemState& s, const Model& m) const override;
  bool pending(const SystemState& s) const override;
  std::vector<EnvMove> moves(const SystemState& s, const Model& m) const override;
  void observe(SystemState& s, const Model& m) const override;

  void apply(SystemState& s, const Model& m, const EnsEvent& e) const;
  const EnsScenario& scenario() const { return sc_; }

 private:
  EnsScenario sc_;
};

/// Message ids carried by application messages.
struct Census {
  std::map<std::int64_t, int> live;   // unsent (status=false) copies in interface/out queues
  std::map<std::int64_t, int> in_in;  // copies sitting in a client's `in`
  std::map<std::int64_t, std::string> bound_for;  // client the live copy is meant for
  std::map<std::int64_t, std::string> in_owner;   // client holding it in `in`
};
Census census(const Model& m, const SystemState& s);

/// Every created message is in exactly one place: one live copy, or consumed.
bool conservation_holds(const Model& m, const SystemState& s, std::string* why = nullptr);
/// No id has two copies across all queues.
bool no_duplication(const Model& m, const SystemState& s, std::string* why = nullptr);

struct EnsRun {
  Model model;
  Trace trace;
  nlohmann::json report;
  bool all_hold = false;
};

/// Builds the system, runs it under the scenario and evaluates the suite's
/// properties over the whole trace.
EnsRun run_scenario(const EnsScenario& sc);

}  // namespace munity
