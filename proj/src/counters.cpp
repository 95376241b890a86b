// SPDX-License-Identifier: Apache-2.0
#include "pactree/counters.hpp"

#include <array>
#include <atomic>
#include <cstddef>

namespace pactree {
namespace {

constexpr std::size_t kShards = 64;
constexpr std::size_t kEvents = static_cast<std::size_t>(Event::count_);

struct alignas(64) Shard {
  std::array<std::atomic<std::int64_t>, kEvents> v{};
};

std::array<Shard, kShards> g_shards;
std::atomic<std::size_t> g_next_shard{0};

Shard& my_shard() {
  thread_local Shard* s =
      &g_shards[g_next_shard.fetch_add(1, std::memory_order_relaxed) % kShards];
  return *s;
}

}  // namespace

void count_event(Event e, std::int64_t delta) noexcept {
  my_shard().v[static_cast<std::size_t>(e)].fetch_add(
      delta, std::memory_order_relaxed);
}

Counters counters() {
  std::array<std::int64_t, kEvents> sum{};
  for (const Shard& s : g_shards)
    for (std::size_t i = 0; i < kEvents; ++i)
      sum[i] += s.v[i].load(std::memory_order_relaxed);
  auto at = [&](Event e) { return sum[static_cast<std::size_t>(e)]; };
  Counters c;
  c.unfolds = static_cast<std::uint64_t>(at(Event::unfold));
  c.folds = static_cast<std::uint64_t>(at(Event::fold));
  c.decodes = static_cast<std::uint64_t>(at(Event::decode));
  c.allocations = static_cast<std::uint64_t>(at(Event::allocation));
  c.reclaims = static_cast<std::uint64_t>(at(Event::reclaim));
  c.structural_bytes = at(Event::structural_bytes);
  c.payload_bytes = at(Event::payload_bytes);
  return c;
}

}  // namespace pactree
