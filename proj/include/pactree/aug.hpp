// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <concepts>
#include <limits>

#include "pactree/entry.hpp"

namespace pactree {

// An augmentation is a monoid over lifted entries:
//   identity()        neutral element
//   lift(entry)       value of a single entry
//   combine(a, b)     associative
// Every regular node caches the combination over its whole subtree, every
// flat node the combination over its block.
template <class A, class E>
concept AugSpec = requires(const E& e, const typename A::value_type& v) {
  typename A::value_type;
  { A::identity() } -> std::convertible_to<typename A::value_type>;
  { A::lift(e) } -> std::convertible_to<typename A::value_type>;
  { A::combine(v, v) } -> std::convertible_to<typename A::value_type>;
};

struct no_aug {
  using value_type = Unit;
  static Unit identity() { return {}; }
  template <class E>
  static Unit lift(const E&) {
    return {};
  }
  static Unit combine(Unit, Unit) { return {}; }
};

// Sum of keys (sets, sequences of numbers, or maps).
template <class T>
struct sum_keys {
  using value_type = T;
  static T identity() { return T{}; }
  template <class E>
  static T lift(const E& e) {
    return static_cast<T>(entry_traits<E>::key(e));
  }
  static T combine(const T& a, const T& b) { return a + b; }
};

template <class T>
struct sum_values {
  using value_type = T;
  static T identity() { return T{}; }
  template <class E>
  static T lift(const E& e) {
    return static_cast<T>(entry_traits<E>::value(e));
  }
  static T combine(const T& a, const T& b) { return a + b; }
};

template <class T>
struct max_values {
  using value_type = T;
  static T identity() { return std::numeric_limits<T>::lowest(); }
  template <class E>
  static T lift(const E& e) {
    return static_cast<T>(entry_traits<E>::value(e));
  }
  static T combine(const T& a, const T& b) { return std::max(a, b); }
};

}  // namespace pactree
