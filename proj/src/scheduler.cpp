#include <algorithm>
#include <numeric>

#include "munity/engine.hpp"

namespace munity {

const char* to_string(SchedulerConfig::Mode m) {
  return m == SchedulerConfig::Mode::Random ? "random" : "deficit";
}

SchedulerConfig::Mode parse_mode(const std::string& s) {
  if (s == "random") return SchedulerConfig::Mode::Random;
  if (s == "deficit") return SchedulerConfig::Mode::Deficit;
  throw ConfigError("unknown scheduler mode '" + s + "' (expected random or deficit)");
}

namespace {

std::int64_t parse_int(const std::string& s, const std::string& ctx) {
  std::size_t used = 0;
  std::int64_t v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw ConfigError("bad number '" + s + "' in " + ctx);
  return v;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

}  // namespace

std::map<int, Rational> parse_weights(const std::string& text) {
  std::map<int, Rational> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    std::string item = trim(text.substr(start, comma == std::string::npos ? std::string::npos
                                                                          : comma - start));
    start = comma == std::string::npos ? text.size() + 1 : comma + 1;
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("weight '" + item + "' needs the form pN=a/b");
    std::string key = trim(item.substr(0, eq));
    std::string val = trim(item.substr(eq + 1));
    if (!key.empty() && (key[0] == 'p' || key[0] == 'P')) key = key.substr(1);
    int prio = static_cast<int>(parse_int(key, "weight key"));
    auto slash = val.find('/');
    std::int64_t num = parse_int(trim(val.substr(0, slash)), "weight");
    std::int64_t den = slash == std::string::npos ? 1 : parse_int(trim(val.substr(slash + 1)), "weight");
    if (den <= 0 || num <= 0) throw ConfigError("weight for p" + key + " must be positive");
    if (out.count(prio)) throw ConfigError("weight for p" + key + " given twice");
    out[prio] = Rational(num, den);
  }
  return out;
}

std::string format_weights(const std::map<int, Rational>& w) {
  std::string s;
  for (const auto& [p, r] : w) {
    if (!s.empty()) s += ",";
    s += "p" + std::to_string(p) + "=" + std::to_string(r.numerator()) + "/" +
         std::to_string(r.denominator());
  }
  return s;
}

std::map<int, Rational> effective_weights(const std::vector<int>& priorities,
                                          const std::map<int, Rational>& explicit_weights) {
  std::map<int, Rational> out;
  if (explicit_weights.empty()) {
    std::int64_t k = static_cast<std::int64_t>(priorities.size());
    std::int64_t total = k * (k + 1) / 2;
    for (std::size_t i = 0; i < priorities.size(); ++i)
      out[priorities[i]] = Rational(static_cast<std::int64_t>(i) + 1, total);
    return out;
  }
  Rational sum(0);
  for (int p : priorities) {
    auto it = explicit_weights.find(p);
    if (it == explicit_weights.end())
      throw ConfigError("no weight given for priority block p" + std::to_string(p));
    if (it->second <= Rational(0)) throw ConfigError("weights must be positive");
    out[p] = it->second;
    sum += it->second;
  }
  for (const auto& [p, w] : explicit_weights) {
    if (!out.count(p)) throw ConfigError("weight given for absent priority block p" + std::to_string(p));
  }
  if (!priorities.empty() && sum != Rational(1))
    throw ConfigError("block weights must sum to 1 (got " + std::to_string(sum.numerator()) + "/" +
                      std::to_string(sum.denominator()) + ")");
  return out;
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  if (n <= 1) {
    rng();
    return 0;
  }
  // Largest multiple of n that fits; values above it are rejected.
  std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n + 1) % n;
  for (;;) {
    std::uint64_t r = rng();
    if (r <= limit) return r % n;
  }
}

Scheduler::Scheduler(const Model& m, const SchedulerConfig& cfg)
    : m_(m),
      cfg_(cfg),
      weights_(effective_weights(m.priorities, cfg.weights)),
      rng_(cfg.seed),
      deficit_(m.units.size(), 0) {
  if (cfg.fairness_window < 1) throw ConfigError("fairness window must be at least 1");
}

namespace {

struct Blocks {
  std::vector<int> prios;               // occupied, ascending
  std::map<int, std::vector<int>> members;
  std::map<int, std::int64_t> nums;     // weights scaled to a common denominator
  std::int64_t total = 0;
};

Blocks group(const Model& m, const std::map<int, Rational>& weights, const std::vector<int>& enabled) {
  Blocks b;
  for (int id : enabled) b.members[m.units[id].priority].push_back(id);
  std::int64_t lcm = 1;
  for (const auto& [p, ids] : b.members) {
    b.prios.push_back(p);
    lcm = std::lcm(lcm, weights.at(p).denominator());
  }
  for (int p : b.prios) {
    const Rational& w = weights.at(p);
    b.nums[p] = checked_mul(w.numerator(), lcm / w.denominator());
    b.total = checked_add(b.total, b.nums[p]);
  }
  return b;
}

}  // namespace

int Scheduler::select(const std::vector<int>& enabled) {
  int chosen = cfg_.mode == SchedulerConfig::Mode::Random ? select_random(enabled)
                                                          : select_deficit(enabled);
  std::vector<char> on(m_.units.size(), 0);
  for (int id : enabled) on[id] = 1;
  for (std::size_t i = 0; i < deficit_.size(); ++i) {
    if (static_cast<int>(i) == chosen || !on[i]) deficit_[i] = 0;
    else ++deficit_[i];
  }
  last_block_ = m_.units[chosen].priority;
  return chosen;
}

int Scheduler::select_random(const std::vector<int>& enabled) {
  Blocks b = group(m_, weights_, enabled);
  std::uint64_t r = uniform_below(rng_, static_cast<std::uint64_t>(b.total));
  int block = b.prios.back();
  for (int p : b.prios) {
    if (r < static_cast<std::uint64_t>(b.nums[p])) {
      block = p;
      break;
    }
    r -= b.nums[p];
  }
  const auto& ids = b.members[block];
  return ids[uniform_below(rng_, ids.size())];
}

int Scheduler::select_deficit(const std::vector<int>& enabled) {
  // Overdue units (waited long enough to threaten the fairness bound) go
  // first, oldest first; ties by lowest id.
  std::int64_t n = static_cast<std::int64_t>(m_.units.size());
  std::int64_t threshold = std::max<std::int64_t>(1, (cfg_.fairness_window - 1) * n);
  int best = -1;
  for (int id : enabled) {
    if (deficit_[id] >= threshold && (best < 0 || deficit_[id] > deficit_[best])) best = id;
  }
  if (best >= 0) return best;

  // Otherwise smooth weighted round robin over occupied blocks, then the
  // longest-waiting unit inside the chosen block.
  Blocks b = group(m_, weights_, enabled);
  int block = b.prios.front();
  for (int p : b.prios) {
    credit_[p] += b.nums[p];
    if (credit_[p] >= credit_[block]) block = p;  // ties favour the higher priority
  }
  credit_[block] -= b.total;
  for (int id : b.members[block]) {
    if (best < 0 || deficit_[id] > deficit_[best]) best = id;
  }
  return best;
}

}  // namespace munity
