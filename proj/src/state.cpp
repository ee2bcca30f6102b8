#include "munity/state.hpp"

namespace munity {

void EnvState::hash_into(std::uint64_t& h) const {
  fnv_mix_u64(h, locations.size());
  for (const auto& v : locations) v.hash_into(h);
  fnv_mix_u64(h, blocked.size());
  if (!blocked.empty()) fnv_mix(h, blocked.data(), blocked.size());
  fnv_mix_u64(h, cursor);
  fnv_mix_u64(h, static_cast<std::uint64_t>(next_id));
  fnv_mix_u64(h, consumed.size());
  for (auto id : consumed) fnv_mix_u64(h, static_cast<std::uint64_t>(id));
}

std::uint64_t SystemState::digest() const {
  std::uint64_t h = kFnvOffset;
  fnv_mix_u64(h, stores.size());
  for (const auto& store : stores) {
    fnv_mix_u64(h, store.size());
    for (const auto& v : store) v.hash_into(h);
  }
  env.hash_into(h);
  return h;
}

}  // namespace munity
