#include "munity/ens.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "munity/parser.hpp"

namespace munity {

using nlohmann::json;

SystemDef build_ens_system(int clients, int servers, int topics, int max_queue) {
  if (clients < 1 || servers < 1)
    throw ConfigError("ens-system needs at least one client and one server (got " +
                      std::to_string(clients) + " clients, " + std::to_string(servers) +
                      " servers)");
  if (topics < 1) throw ConfigError("ens-system needs at least one topic");
  if (max_queue < 1) throw ConfigError("MaxQueue must be positive");
  return parse_system(kEnsSystemText, {{"NumClients", clients},
                                       {"NumServers", servers},
                                       {"NumTopics", topics},
                                       {"MaxQueue", max_queue}});
}

std::string ens_properties(int clients, int servers) {
  std::ostringstream out;
  for (int c = 0; c < clients; ++c) {
    std::string cl = "client(" + std::to_string(c) + ")";
    out << "invariant REG_SAFE_" << c << ": " << cl << ".registered implies (";
    for (int s = 0; s < servers; ++s) {
      if (s) out << " or ";
      out << "member(server(" << s << ").registered_clients, " << cl << ")";
    }
    out << ")\n";
    out << "leadsto REG_" << c << ": not " << cl << ".registered and not " << cl
        << ".retired => " << cl << ".registered or " << cl << ".retired\n";
    out << "leadsto SUB_" << c << ": " << cl << ".registered and not " << cl << ".subscribed => "
        << cl << ".subscribed or " << cl << ".retired\n";
  }
  return out.str();
}

// ---- scenarios ----

std::string EnsEvent::describe() const {
  std::string c = "client(" + std::to_string(client) + ")";
  std::string s = "server(" + std::to_string(server) + ")";
  switch (kind) {
    case Kind::Move: return "move " + c + " to " + s;
    case Kind::LinkDown: return "down " + c + (server < 0 ? "" : "-" + s);
    case Kind::LinkUp: return "up " + c + (server < 0 ? "" : "-" + s);
    case Kind::Publish: return "publish " + s + " topic " + std::to_string(topic);
    case Kind::Request: return c + " " + flag;
  }
  return "?";
}

void EnsScenario::sort_events() {
  std::stable_sort(events.begin(), events.end(),
                   [](const EnsEvent& a, const EnsEvent& b) { return a.step < b.step; });
}

namespace {

template <typename T>
T get(const YAML::Node& n, const char* key, T fallback) {
  if (!n[key]) return fallback;
  try {
    return n[key].as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(std::string("scenario: bad value for '") + key + "'");
  }
}

template <typename T>
T need(const YAML::Node& n, const char* key, const char* where) {
  if (!n[key]) throw ConfigError(std::string("scenario: ") + where + " entry needs '" + key + "'");
  return get<T>(n, key, T{});
}

Value yaml_value(const YAML::Node& n) {
  if (!n || n.IsNull()) return Value();
  if (n.IsScalar()) {
    const std::string& s = n.Scalar();
    if (s == "true") return Value::boolean(true);
    if (s == "false") return Value::boolean(false);
    try {
      std::size_t used = 0;
      long long v = std::stoll(s, &used);
      if (used == s.size()) return Value::integer(v);
    } catch (const std::exception&) {
    }
    return Value::symbol(s);
  }
  if (n.IsSequence()) {
    Seq items;
    for (const auto& x : n) items.push_back(yaml_value(x));
    return Value::seq(std::move(items));
  }
  std::map<std::string, Value> fields;
  for (const auto& kv : n) fields[kv.first.as<std::string>()] = yaml_value(kv.second);
  return Value::record(std::move(fields));
}

void check_range(int v, int n, const char* what) {
  if (v < 0 || v >= n)
    throw ConfigError(std::string("scenario: ") + what + " " + std::to_string(v) +
                      " out of range (have " + std::to_string(n) + ")");
}

}  // namespace

EnsScenario parse_scenario(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  if (!root.IsMap()) throw ConfigError("scenario: expected a mapping at top level");
  static const std::set<std::string> known = {
      "scenario", "clients",  "servers",        "topics",       "maxQueue",
      "maxSteps", "seed",     "mode",           "weights",      "fairnessWindow",
      "branchLinks", "connectivity", "mobility", "publish", "requests"};
  for (const auto& kv : root) {
    std::string k = kv.first.as<std::string>();
    if (!known.count(k)) throw ConfigError("scenario: unknown key '" + k + "'");
  }

  EnsScenario sc;
  sc.name = get<std::string>(root, "scenario", sc.name);
  sc.clients = get<int>(root, "clients", sc.clients);
  sc.servers = get<int>(root, "servers", sc.servers);
  sc.topics = get<int>(root, "topics", sc.topics);
  sc.max_queue = get<int>(root, "maxQueue", sc.max_queue);
  sc.max_steps = get<std::uint64_t>(root, "maxSteps", sc.max_steps);
  sc.seed = get<std::uint64_t>(root, "seed", sc.seed);
  if (root["mode"]) sc.mode = parse_mode(get<std::string>(root, "mode", ""));
  if (root["weights"]) sc.weights = parse_weights(get<std::string>(root, "weights", ""));
  sc.fairness_window = get<int>(root, "fairnessWindow", sc.fairness_window);
  sc.branch_links = get<bool>(root, "branchLinks", false);
  if (sc.clients < 1 || sc.servers < 1)
    throw ConfigError("scenario: clients and servers must be at least 1");
  if (sc.topics < 1) throw ConfigError("scenario: topics must be at least 1");

  for (const auto& c : root["connectivity"]) {
    std::uint64_t from = need<std::uint64_t>(c, "from", "connectivity");
    std::uint64_t to = need<std::uint64_t>(c, "to", "connectivity");
    int client = need<int>(c, "client", "connectivity");
    int server = get<int>(c, "server", -1);
    std::uint64_t period = get<std::uint64_t>(c, "period", 0);
    check_range(client, sc.clients, "client");
    if (server >= 0) check_range(server, sc.servers, "server");
    if (to <= from) throw ConfigError("scenario: connectivity range needs from < to");
    // A period flips the link every `period` steps inside [from, to).
    std::uint64_t stride = period == 0 ? to - from : period;
    bool down = true;
    for (std::uint64_t t = from; t < to; t += stride, down = !down) {
      EnsEvent e;
      e.step = t;
      e.kind = down ? EnsEvent::Kind::LinkDown : EnsEvent::Kind::LinkUp;
      e.client = client;
      e.server = server;
      sc.events.push_back(e);
    }
    EnsEvent up;
    up.step = to;
    up.kind = EnsEvent::Kind::LinkUp;
    up.client = client;
    up.server = server;
    sc.events.push_back(up);
  }
  for (const auto& mv : root["mobility"]) {
    EnsEvent e;
    e.kind = EnsEvent::Kind::Move;
    e.step = need<std::uint64_t>(mv, "step", "mobility");
    e.client = need<int>(mv, "client", "mobility");
    e.server = need<int>(mv, "server", "mobility");
    check_range(e.client, sc.clients, "client");
    check_range(e.server, sc.servers, "server");
    sc.events.push_back(e);
  }
  for (const auto& p : root["publish"]) {
    EnsEvent e;
    e.kind = EnsEvent::Kind::Publish;
    e.step = need<std::uint64_t>(p, "step", "publish");
    e.server = need<int>(p, "server", "publish");
    e.topic = need<int>(p, "topic", "publish");
    e.tag = yaml_value(p["tag"]);
    check_range(e.server, sc.servers, "server");
    check_range(e.topic, sc.topics, "topic");
    sc.events.push_back(e);
  }
  static const std::set<std::string> flags = {"unsubscribe", "update_add", "update_del",
                                              "deregister"};
  for (const auto& r : root["requests"]) {
    EnsEvent e;
    e.kind = EnsEvent::Kind::Request;
    e.step = need<std::uint64_t>(r, "step", "requests");
    e.client = need<int>(r, "client", "requests");
    e.flag = need<std::string>(r, "flag", "requests");
    check_range(e.client, sc.clients, "client");
    if (!flags.count(e.flag)) throw ConfigError("scenario: unknown request flag '" + e.flag + "'");
    sc.events.push_back(e);
  }
  sc.sort_events();
  return sc;
}

EnsScenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

// ---- environment ----

namespace {

std::string client_id(int c) { return "client(" + std::to_string(c) + ")"; }
std::string server_id(int s) { return "server(" + std::to_string(s) + ")"; }

int must_find(const Model& m, const std::string& id) {
  int i = m.find_instance(id);
  if (i < 0) throw ConfigError("scenario refers to missing instance " + id);
  return i;
}

bool is_server(const Model& m, int inst) { return m.instances[inst].program == "server"; }
bool is_client(const Model& m, int inst) { return m.instances[inst].program == "client"; }

void set_link(SystemState& s, const Model& m, int a, int b, bool down) {
  std::size_t n = m.instances.size();
  if (s.env.blocked.size() != n * n) s.env.blocked.assign(n * n, 0);
  s.env.blocked[a * n + b] = down ? 1 : 0;
  s.env.blocked[b * n + a] = down ? 1 : 0;
}

std::optional<std::int64_t> message_id(const Message& msg) {
  if (msg.content.kind() != Value::Kind::Record) return std::nullopt;
  const auto& f = msg.content.as_record().fields;
  auto it = f.find("id");
  if (it == f.end() || it->second.kind() != Value::Kind::Int) return std::nullopt;
  return it->second.as_int();
}

}  // namespace

EnsEnvironment::EnsEnvironment(EnsScenario sc) : sc_(std::move(sc)) {
  physical_locations = true;
  sc_.sort_events();
}

void EnsEnvironment::init(SystemState& s, const Model& m) const {
  Environment::init(s, m);
  s.env.blocked.assign(m.instances.size() * m.instances.size(), 0);
}

bool EnsEnvironment::can_send(const SystemState& s, const Model& m, int from, int to) const {
  if (from < 0 || to < 0) return false;
  if (is_server(m, from) && is_server(m, to))
    return !s.env.is_blocked(from, to, m.instances.size());
  if (is_client(m, from) == is_client(m, to)) return false;
  return Environment::can_send(s, m, from, to);
}

void EnsEnvironment::apply(SystemState& s, const Model& m, const EnsEvent& e) const {
  switch (e.kind) {
    case EnsEvent::Kind::Move: {
      int c = must_find(m, client_id(e.client));
      int sv = must_find(m, server_id(e.server));
      s.env.locations[c] = s.env.locations[sv];
      break;
    }
    case EnsEvent::Kind::LinkDown:
    case EnsEvent::Kind::LinkUp: {
      int c = must_find(m, client_id(e.client));
      bool down = e.kind == EnsEvent::Kind::LinkDown;
      for (int j = 0; j < sc_.servers; ++j) {
        if (e.server >= 0 && e.server != j) continue;
        set_link(s, m, c, must_find(m, server_id(j)), down);
      }
      break;
    }
    case EnsEvent::Kind::Publish: {
      // One message per current subscriber of the topic.
      int sv = must_find(m, server_id(e.server));
      const Instance& in = m.instances[sv];
      const Value& subscr = s.stores[sv][in.slot("subscr")];
      const Seq& lists = subscr.as_seq();
      if (e.topic < 0 || static_cast<std::size_t>(e.topic) >= lists.size())
        throw ConfigError("publish: topic " + std::to_string(e.topic) + " out of range");
      Value& out = s.stores[sv][in.slot("out")];
      Seq q = out.is_bottom() ? Seq{} : out.as_seq();
      if (!lists[e.topic].is_bottom()) {
        for (const Value& dest : lists[e.topic].as_seq()) {
          Message msg;
          msg.source = Value::address(in.id);
          msg.destination = dest;
          msg.type = MsgType::M;
          msg.content = Value::record({{"id", Value::integer(s.env.next_id++)},
                                       {"topic", Value::integer(e.topic)},
                                       {"tag", e.tag}});
          q.push_back(Value::message(std::move(msg)));
        }
      }
      out = Value::seq(std::move(q));
      break;
    }
    case EnsEvent::Kind::Request: {
      int c = must_find(m, client_id(e.client));
      int slot = m.instances[c].slot(e.flag);
      if (slot < 0) throw ConfigError("client has no flag " + e.flag);
      s.stores[c][slot] = Value::boolean(true);
      break;
    }
  }
}

bool EnsEnvironment::advance(SystemState& s, const Model& m) const {
  bool changed = false;
  while (s.env.cursor < sc_.events.size() && sc_.events[s.env.cursor].step <= s.step) {
    apply(s, m, sc_.events[s.env.cursor]);
    ++s.env.cursor;
    changed = true;
  }
  return changed;
}

bool EnsEnvironment::pending(const SystemState& s) const {
  return s.env.cursor < sc_.events.size();
}

std::vector<EnvMove> EnsEnvironment::moves(const SystemState& s, const Model& m) const {
  std::vector<EnvMove> out;
  if (s.env.cursor < sc_.events.size()) {
    EnvMove mv;
    const EnsEvent& e = sc_.events[s.env.cursor];
    mv.name = "event" + std::to_string(s.env.cursor) + ":" + e.describe();
    mv.next = s;
    apply(mv.next, m, e);
    ++mv.next.env.cursor;
    out.push_back(std::move(mv));
  }
  if (sc_.branch_links) {
    std::size_t n = m.instances.size();
    for (int c = 0; c < sc_.clients; ++c) {
      int ci = must_find(m, client_id(c));
      for (int j = 0; j < sc_.servers; ++j) {
        int sj = must_find(m, server_id(j));
        EnvMove mv;
        mv.name = "toggle:" + client_id(c) + "-" + server_id(j);
        mv.next = s;
        set_link(mv.next, m, ci, sj, !s.env.is_blocked(ci, sj, n));
        out.push_back(std::move(mv));
      }
    }
  }
  return out;
}

void EnsEnvironment::observe(SystemState& s, const Model& m) const {
  for (std::size_t i = 0; i < m.instances.size(); ++i) {
    if (!is_client(m, static_cast<int>(i))) continue;
    int slot = m.instances[i].slot("in");
    const Value& q = s.stores[i][slot];
    if (!q.is_seq()) continue;
    for (const Value& v : q.as_seq()) {
      if (v.kind() != Value::Kind::Message) continue;
      auto id = message_id(v.as_message());
      if (!id) continue;
      auto& log = s.env.consumed;
      auto it = std::lower_bound(log.begin(), log.end(), *id);
      if (it == log.end() || *it != *id) log.insert(it, *id);
    }
  }
}

// ---- harness checks ----

Census census(const Model& m, const SystemState& s) {
  Census c;
  for (std::size_t i = 0; i < m.instances.size(); ++i) {
    const Instance& in = m.instances[i];
    for (const char* name : {"interface", "out", "in"}) {
      int slot = in.slot(name);
      if (slot < 0) continue;
      const Value& q = s.stores[i][slot];
      if (!q.is_seq()) continue;
      bool in_queue = std::string(name) == "in";
      for (const Value& v : q.as_seq()) {
        if (v.kind() != Value::Kind::Message) continue;
        const Message& msg = v.as_message();
        auto id = message_id(msg);
        if (!id) continue;
        if (in_queue) {
          ++c.in_in[*id];
          c.in_owner[*id] = in.id;
        } else if (!msg.status) {
          ++c.live[*id];
          Value relay;
          if (msg.content.kind() == Value::Kind::Record) {
            auto f = msg.content.as_record().fields.find("relay");
            if (f != msg.content.as_record().fields.end()) relay = f->second;
          }
          const Value& who = relay.is_bottom() ? msg.destination : relay;
          if (who.kind() == Value::Kind::Address) c.bound_for[*id] = who.as_address().instance;
        }
      }
    }
  }
  return c;
}

namespace {

bool consumed(const SystemState& s, std::int64_t id) {
  return std::binary_search(s.env.consumed.begin(), s.env.consumed.end(), id);
}

int count(const std::map<std::int64_t, int>& m, std::int64_t id) {
  auto it = m.find(id);
  return it == m.end() ? 0 : it->second;
}

}  // namespace

bool conservation_holds(const Model& m, const SystemState& s, std::string* why) {
  Census c = census(m, s);
  for (std::int64_t id = 1; id < s.env.next_id; ++id) {
    int places = count(c.live, id) + (consumed(s, id) ? 1 : 0);
    if (places != 1) {
      if (why)
        *why = "message " + std::to_string(id) + " is in " + std::to_string(places) +
               " places (live copies " + std::to_string(count(c.live, id)) +
               (consumed(s, id) ? ", consumed)" : ", not consumed)");
      return false;
    }
  }
  for (const auto& [id, n] : c.live) {
    if (id < 1 || id >= s.env.next_id) {
      if (why) *why = "message " + std::to_string(id) + " was never created";
      return false;
    }
  }
  return true;
}

bool no_duplication(const Model& m, const SystemState& s, std::string* why) {
  Census c = census(m, s);
  std::set<std::int64_t> ids;
  for (const auto& kv : c.live) ids.insert(kv.first);
  for (const auto& kv : c.in_in) ids.insert(kv.first);
  for (std::int64_t id : ids) {
    int copies = count(c.live, id) + count(c.in_in, id);
    bool stale = count(c.live, id) > 0 && consumed(s, id);
    if (copies > 1 || stale) {
      if (why)
        *why = "message " + std::to_string(id) + " has " + std::to_string(copies) + " copies" +
               (stale ? " and was already consumed" : "");
      return false;
    }
  }
  return true;
}

// ---- scenario runs ----

namespace {

json verdict_json(const char* kind, const std::string& detail) {
  return {{"verdict", kind}, {"detail", detail}};
}

json verdict_json(const Verdict& v) {
  json j = {{"verdict", to_string(v.kind)}, {"detail", v.detail}};
  return j;
}

}  // namespace

EnsRun run_scenario(const EnsScenario& sc) {
  EnsRun r;
  SystemDef def = build_ens_system(sc.clients, sc.servers, sc.topics, sc.max_queue);
  r.model = compile(def);
  EnsEnvironment env(sc);
  SchedulerConfig cfg;
  cfg.mode = sc.mode;
  cfg.weights = sc.weights;
  cfg.fairness_window = sc.fairness_window;
  cfg.seed = sc.seed;
  Engine eng(r.model, env, cfg);
  RunOptions opts;
  opts.max_steps = sc.max_steps;
  opts.keep_states = true;
  r.trace = eng.run(opts);
  const Model& m = r.model;

  json props = json::object();
  json& rep = r.report;
  rep["format"] = "munity-ens-report";
  rep["version"] = 1;
  rep["scenario"] = sc.name;
  rep["clients"] = sc.clients;
  rep["servers"] = sc.servers;
  rep["seed"] = sc.seed;
  rep["mode"] = to_string(sc.mode);
  rep["steps"] = r.trace.steps.size();
  rep["stop_reason"] = r.trace.stop_reason;
  rep["error"] = r.trace.error ? json(*r.trace.error) : json(nullptr);
  rep["trace"] = nullptr;
  if (r.trace.initial.stores.empty()) {
    rep["properties"] = props;
    r.all_hold = false;
    return r;
  }

  std::vector<SystemState> states;
  states.reserve(r.trace.states.size() + 1);
  states.push_back(r.trace.initial);
  for (const auto& s : r.trace.states) states.push_back(s);

  // Conservation and duplication at every step.
  auto scan = [&](auto pred, const char* name) {
    for (std::size_t k = 0; k < states.size(); ++k) {
      std::string why;
      if (!pred(m, states[k], &why)) {
        props[name] = verdict_json("violated", "step " + std::to_string(k) + ": " + why);
        return;
      }
    }
    props[name] = verdict_json("holds", "checked " + std::to_string(states.size()) + " states");
  };
  scan(conservation_holds, "conservation");
  scan(no_duplication, "no_duplication");

  // Language-level properties.
  auto decls = parse_properties(ens_properties(sc.clients, sc.servers), program_signatures(def));
  auto results = check_trace_properties(eng, states, decls);
  std::map<std::string, std::vector<const PropertyResult*>> groups;
  for (const auto& pr : results) {
    std::string n = pr.decl.name;
    std::string group = n.rfind("REG_SAFE", 0) == 0 ? "registration_safety"
                        : n.rfind("REG_", 0) == 0   ? "registration_leadsto"
                                                    : "subscription_leadsto";
    groups[group].push_back(&pr);
  }
  for (const auto& [group, items] : groups) {
    json per = json::object();
    Verdict::Kind worst = Verdict::Kind::Holds;
    for (const auto* pr : items) {
      per[pr->decl.name] = verdict_json(pr->verdict);
      if (pr->verdict.violated()) worst = Verdict::Kind::Violated;
      else if (pr->verdict.kind == Verdict::Kind::Unknown && worst == Verdict::Kind::Holds)
        worst = Verdict::Kind::Unknown;
    }
    props[group] = {{"verdict", to_string(worst)}, {"detail", per}};
  }

  // Every published message reaches its subscriber.
  const SystemState& last = states.back();
  Census end = census(m, last);
  std::int64_t created = last.env.next_id - 1;
  std::int64_t delivered = 0, open = 0, lost = 0;
  for (std::int64_t id = 1; id <= created; ++id) {
    if (consumed(last, id)) ++delivered;
    else if (count(end.live, id) > 0) ++open;
    else ++lost;
  }
  std::string ddetail = std::to_string(delivered) + "/" + std::to_string(created) +
                        " delivered, " + std::to_string(open) + " open, " +
                        std::to_string(lost) + " lost";
  props["subscription_delivery"] =
      verdict_json(lost ? "violated" : open ? "unknown" : "holds", ddetail);

  // Handoff: messages bound for a moving client before the move arrive exactly once.
  json handoffs = json::array();
  bool ho_lost = false, ho_open = false;
  bool dup_ok = props["no_duplication"]["verdict"] == "holds";
  for (std::size_t ev = 0; ev < sc.events.size(); ++ev) {
    const EnsEvent& e = sc.events[ev];
    if (e.kind != EnsEvent::Kind::Move) continue;
    std::size_t k = 0;
    while (k < states.size() && states[k].env.cursor <= ev) ++k;
    if (k == states.size() || k == 0) continue;  // move never happened in the run
    const SystemState& before = states[k - 1];
    Census c = census(m, before);
    std::string who = client_id(e.client);
    std::int64_t pending = 0, arrived = 0;
    for (const auto& [id, n] : c.live) {
      auto it = c.bound_for.find(id);
      if (it == c.bound_for.end() || it->second != who) continue;
      ++pending;
      if (consumed(last, id)) ++arrived;
      else if (count(end.live, id) > 0) ho_open = true;
      else ho_lost = true;
    }
    handoffs.push_back({{"client", e.client},
                        {"to_server", e.server},
                        {"step", before.step},
                        {"undelivered_before", pending},
                        {"delivered_after", arrived}});
  }
  const char* hv = (ho_lost || !dup_ok) ? "violated" : ho_open ? "unknown" : "holds";
  props["handoff_exactly_once"] = {{"verdict", hv}, {"detail", handoffs}};

  // Who consumed what, from the `in` queues seen along the run.
  std::map<std::int64_t, std::string> owner;
  for (const auto& st : states) {
    for (const auto& [id, who] : census(m, st).in_owner) owner.emplace(id, who);
  }
  json per_client = json::array();
  for (int c = 0; c < sc.clients; ++c) {
    int ci = m.find_instance(client_id(c));
    std::int64_t got = 0;
    for (const auto& kv : owner) got += kv.second == client_id(c) ? 1 : 0;
    const Value& reg = last.stores[ci][m.instances[ci].slot("registered")];
    const Value& sub = last.stores[ci][m.instances[ci].slot("subscribed")];
    per_client.push_back({{"client", c},
                          {"delivered", got},
                          {"registered", reg.as_bool()},
                          {"subscribed", sub.as_bool()}});
  }
  rep["accounting"] = {{"created", created},
                       {"delivered", delivered},
                       {"in_flight", open},
                       {"lost", lost},
                       {"clients", per_client}};
  rep["properties"] = props;

  r.all_hold = !r.trace.error;
  for (const auto& [name, v] : props.items()) {
    if (v["verdict"] != "holds") r.all_hold = false;
  }
  return r;
}

}  // namespace munity
