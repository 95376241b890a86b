// Shared helpers for the test binaries: reference models and counters.
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "doctest.h"
#include "pactree/core.hpp"
#include "pactree/counters.hpp"
#include "pactree/invariants.hpp"

namespace testing {

using u64 = std::uint64_t;

// Counter deltas over a scope.
struct Delta {
  pactree::Counters start = pactree::counters();
  pactree::Counters get() const { return pactree::counters() - start; }
};

inline std::vector<u64> random_keys(std::mt19937_64& rng, std::size_t n,
                                    u64 range) {
  std::set<u64> s;
  std::uniform_int_distribution<u64> d(0, range - 1);
  while (s.size() < n) s.insert(d(rng));
  return {s.begin(), s.end()};
}

template <class P>
std::vector<typename P::entry_type> contents(const pactree::Tree<P>& t) {
  return pactree::Core<P>::entries(t);
}

template <class P>
bool valid(const pactree::Core<P>& core, const pactree::Tree<P>& t) {
  auto r = pactree::check(core, t);
  if (!r.ok()) MESSAGE(r.summary());
  return r.ok();
}

}  // namespace testing
