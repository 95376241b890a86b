// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "pactree/export.h"

namespace pactree {

// Process-wide event tallies. Tests read deltas around an operation.
struct Counters {
  std::uint64_t unfolds = 0;
  std::uint64_t folds = 0;
  std::uint64_t decodes = 0;
  std::uint64_t allocations = 0;
  std::uint64_t reclaims = 0;
  // Bytes currently held by live nodes, split into node structure (regular
  // nodes and block headers) and encoded block payload.
  std::int64_t structural_bytes = 0;
  std::int64_t payload_bytes = 0;

  std::int64_t live() const {
    return static_cast<std::int64_t>(allocations) -
           static_cast<std::int64_t>(reclaims);
  }
  std::int64_t total_bytes() const { return structural_bytes + payload_bytes; }

  friend Counters operator-(const Counters& a, const Counters& b) {
    return {a.unfolds - b.unfolds,
            a.folds - b.folds,
            a.decodes - b.decodes,
            a.allocations - b.allocations,
            a.reclaims - b.reclaims,
            a.structural_bytes - b.structural_bytes,
            a.payload_bytes - b.payload_bytes};
  }
};

enum class Event : unsigned {
  unfold,
  fold,
  decode,
  allocation,
  reclaim,
  structural_bytes,
  payload_bytes,
  count_
};

PACTREE_API Counters counters();
PACTREE_API void count_event(Event e, std::int64_t delta = 1) noexcept;

}  // namespace pactree
