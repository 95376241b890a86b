// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <type_traits>

namespace pactree {

// Payload of set entries and of the default augmentation.
struct Unit {
  friend constexpr bool operator==(Unit, Unit) { return true; }
};

template <class K, class V>
struct KeyValue {
  K key;
  V value;

  friend bool operator==(const KeyValue&, const KeyValue&) = default;
};

// How the map layer sees an entry. The primary template treats the entry as
// a bare key (ordered sets, sequences of scalars).
template <class E>
struct entry_traits {
  using key_type = E;
  using value_type = Unit;
  static const key_type& key(const E& e) { return e; }
  static value_type value(const E&) { return {}; }
  static E make(const key_type& k, const value_type&) { return k; }
};

template <class K, class V>
struct entry_traits<KeyValue<K, V>> {
  using key_type = K;
  using value_type = V;
  static const K& key(const KeyValue<K, V>& e) { return e.key; }
  static const V& value(const KeyValue<K, V>& e) { return e.value; }
  static KeyValue<K, V> make(const K& k, const V& v) { return {k, v}; }
};

}  // namespace pactree
