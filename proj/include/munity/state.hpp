#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "munity/value.hpp"

namespace munity {

/// Environment-owned part of a state: physical locations, forced link
/// outages, script cursor, and the message-id counter. Kept inside the state
/// so exploration treats environment moves like any other transition.
struct EnvState {
  std::vector<Value> locations;       // per instance; null = not tracked
  std::vector<std::uint8_t> blocked;  // n*n, 1 = link a->b forced down
  std::uint64_t cursor = 0;           // next scripted event
  std::int64_t next_id = 1;
  std::vector<std::int64_t> consumed;  // sorted ids observed as consumed

  bool operator==(const EnvState&) const = default;
  void hash_into(std::uint64_t& h) const;
  bool is_blocked(std::size_t a, std::size_t b, std::size_t n) const {
    return !blocked.empty() && blocked[a * n + b] != 0;
  }
};

/// One value vector per component instance; slot 0 is always λ.
using VarStore = std::vector<Value>;

struct SystemState {
  std::vector<VarStore> stores;
  std::uint64_t step = 0;
  EnvState env;

  /// Equality and digest ignore the step counter: two states reached at
  /// different times are the same exploration node.
  bool same(const SystemState& o) const { return stores == o.stores && env == o.env; }
  std::uint64_t digest() const;
  std::string digest_hex() const { return hex_digest(digest()); }
};

}  // namespace munity
