// SPDX-License-Identifier: Apache-2.0
#pragma once

// Ordered sets and maps on PaC-trees. An OrderedMap object holds the
// configuration and is stateless otherwise; trees are plain values.
//
// Arguments taken as Input<P> follow the reuse convention: pass an lvalue to
// keep it (the result shares structure with it), pass an rvalue to hand it
// over so that nodes it owns alone can be recycled.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "pactree/core.hpp"

namespace pactree {

// Collision policy: keep the value coming from the second argument.
struct second_wins {
  template <class V>
  V operator()(const V&, const V& incoming) const {
    return incoming;
  }
};

struct first_wins {
  template <class V>
  V operator()(const V& existing, const V&) const {
    return existing;
  }
};

template <class P>
class OrderedMap {
 public:
  using CoreT = Core<P>;
  using E = typename P::entry_type;
  using A = typename P::aug_type;
  using Aug = typename P::aug;
  using C = typename P::codec;
  using traits = entry_traits<E>;
  using K = typename traits::key_type;
  using V = typename traits::value_type;
  using TreeT = Tree<P>;
  using InputT = Input<P>;
  using PtrT = Ptr<P>;
  using NodeBase = detail::NodeBase;
  using N = detail::Nodes<P>;
  using R = detail::Regular<P>;

  static_assert(P::ordered, "OrderedMap needs an ordered parameter set");

  explicit OrderedMap(Config cfg = {}) : core_(cfg) {}

  const CoreT& core() const { return core_; }
  const Config& config() const { return core_.config(); }

  // -------------------------------------------------------------------
  // Construction

  template <class F = second_wins>
  TreeT build(std::vector<E> es, const F& combine = {}) const {
    std::stable_sort(es.begin(), es.end(), [](const E& a, const E& b) {
      return traits::key(a) < traits::key(b);
    });
    dedupe(es, combine);
    return out(core_.from_sorted(std::span<const E>(es)));
  }

  // Strictly increasing keys required.
  TreeT from_sorted(std::span<const E> es) const {
    PACTREE_DEBUG_REQUIRE(sorted_unique(es), "from_sorted input not strictly increasing");
    return out(core_.from_sorted(es));
  }
  TreeT from_sorted(const std::vector<E>& es) const {
    return from_sorted(std::span<const E>(es));
  }

  static std::vector<E> entries(const TreeT& t) { return CoreT::entries(t); }
  static std::size_t size(const TreeT& t) { return t.size(); }

  // -------------------------------------------------------------------
  // Point queries

  static std::optional<E> find_entry(const TreeT& t, const K& k) {
    const NodeBase* n = t.root();
    while (n) {
      if (n->flat()) return block_find(n, k);
      const R* r = N::regular(n);
      const K& key = traits::key(r->entry);
      if (k < key) n = r->left;
      else if (key < k) n = r->right;
      else return r->entry;
    }
    return std::nullopt;
  }

  static std::optional<V> find(const TreeT& t, const K& k) {
    auto e = find_entry(t, k);
    if (!e) return std::nullopt;
    return traits::value(*e);
  }

  static bool contains(const TreeT& t, const K& k) { return find_entry(t, k).has_value(); }

  // Number of keys strictly smaller than k.
  static std::size_t rank(const TreeT& t, const K& k) {
    std::size_t acc = 0;
    const NodeBase* n = t.root();
    while (n) {
      if (n->flat()) {
        if (!(CoreT::first_key(n) < k)) return acc;
        if (CoreT::last_key(n) < k) return acc + n->size;
        return acc + block_rank(n, k);
      }
      const R* r = N::regular(n);
      if (traits::key(r->entry) < k) {
        acc += N::size(r->left) + 1;
        n = r->right;
      } else {
        n = r->left;
      }
    }
    return acc;
  }

  // Smallest entry with key > k.
  static std::optional<E> next(const TreeT& t, const K& k) {
    std::optional<E> best;
    const NodeBase* n = t.root();
    while (n) {
      if (n->flat()) {
        if (!(k < CoreT::last_key(n))) break;
        std::vector<E> es = decoded(n);
        auto it = std::upper_bound(es.begin(), es.end(), k, [](const K& a, const E& b) {
          return a < traits::key(b);
        });
        return *it;
      }
      const R* r = N::regular(n);
      if (k < traits::key(r->entry)) {
        best = r->entry;
        n = r->left;
      } else {
        n = r->right;
      }
    }
    return best;
  }

  // Largest entry with key < k.
  static std::optional<E> previous(const TreeT& t, const K& k) {
    std::optional<E> best;
    const NodeBase* n = t.root();
    while (n) {
      if (n->flat()) {
        if (!(CoreT::first_key(n) < k)) break;
        std::vector<E> es = decoded(n);
        auto it = std::lower_bound(es.begin(), es.end(), k, [](const E& a, const K& b) {
          return traits::key(a) < b;
        });
        return *std::prev(it);
      }
      const R* r = N::regular(n);
      if (traits::key(r->entry) < k) {
        best = r->entry;
        n = r->right;
      } else {
        n = r->left;
      }
    }
    return best;
  }

  static std::optional<E> first(const TreeT& t) {
    if (t.empty()) return std::nullopt;
    return select(t, 0);
  }
  static std::optional<E> last(const TreeT& t) {
    if (t.empty()) return std::nullopt;
    return select(t, t.size() - 1);
  }

  // Entry of rank i (0-based).
  static E select(const TreeT& t, std::size_t i) {
    PACTREE_REQUIRE(i < t.size(), "select index out of range");
    const NodeBase* n = t.root();
    for (;;) {
      if (n->flat()) return block_at(n, i);
      const R* r = N::regular(n);
      const std::size_t ls = N::size(r->left);
      if (i < ls) {
        n = r->left;
      } else if (i == ls) {
        return r->entry;
      } else {
        i -= ls + 1;
        n = r->right;
      }
    }
  }

  // -------------------------------------------------------------------
  // Point updates

  // Existing key: value becomes combine(old, incoming).
  template <class F = second_wins>
  TreeT insert(InputT t, E e, const F& combine = {}) const {
    return out(insert_rec(std::move(t).take(), std::move(e), combine));
  }

  TreeT remove(InputT t, const K& k) const {
    PtrT p = std::move(t).take();
    if (!contains_node(p.get(), k)) return out(std::move(p));
    return out(remove_rec(std::move(p), k));
  }

  // -------------------------------------------------------------------
  // Set algebra. Collisions resolve as combine(value in a, value in b).

  template <class F = second_wins>
  TreeT map_union(InputT a, InputT b, const F& combine = {}) const {
    return out(union_rec(std::move(a).take(), std::move(b).take(), combine));
  }

  template <class F = second_wins>
  TreeT map_intersect(InputT a, InputT b, const F& combine = {}) const {
    return out(intersect_rec(std::move(a).take(), std::move(b).take(), combine));
  }

  TreeT map_difference(InputT a, InputT b) const {
    return out(difference_rec(std::move(a).take(), std::move(b).take()));
  }

  // Union without the small-input merge: once either side is a single
  // block, both sides are expanded, the recursion runs without folding and
  // the expanded result is folded back by refold.
  template <class F = second_wins>
  TreeT union_efficient(InputT a, InputT b, const F& combine = {}) const {
    return out(core_.refold(union_fold_rec(std::move(a).take(), std::move(b).take(), combine)));
  }

  // -------------------------------------------------------------------
  // Batch updates

  template <class F = second_wins>
  TreeT multi_insert(InputT t, std::vector<E> batch, const F& combine = {}) const {
    std::stable_sort(batch.begin(), batch.end(), [](const E& a, const E& b) {
      return traits::key(a) < traits::key(b);
    });
    dedupe(batch, combine);
    return out(multi_insert_rec(std::move(t).take(), std::span<const E>(batch), combine));
  }

  TreeT multi_delete(InputT t, std::vector<K> keys) const {
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end(),
                           [](const K& a, const K& b) { return !(a < b) && !(b < a); }),
               keys.end());
    return out(multi_delete_rec(std::move(t).take(), std::span<const K>(keys)));
  }

  // -------------------------------------------------------------------
  // Traversals

  template <class Pred>
  TreeT filter(InputT t, const Pred& pred) const {
    auto keep_all = [](const A&) { return true; };
    return out(filter_rec(std::move(t).take(), pred, keep_all));
  }

  // f: entry -> new value. Keys and shape are kept.
  template <class F>
  TreeT map_values(const TreeT& t, const F& f) const {
    return out(map_rec(t.root(), f));
  }

  // Fold of g(entry) under the associative f.
  template <class T, class G, class F>
  T map_reduce(const TreeT& t, const G& g, const F& f, T identity) const {
    return map_reduce_rec(t.root(), g, f, identity);
  }

  template <class T, class F>
  T reduce(const TreeT& t, const F& f, T identity) const {
    return map_reduce(
        t, [](const E& e) { return static_cast<T>(traits::value(e)); }, f, identity);
  }

  template <class F>
  static void for_each(const TreeT& t, const F& f) {
    for_each_rec(t.root(), f);
  }

  // Entries with lo <= key <= hi.
  TreeT range(const TreeT& t, const K& lo, const K& hi) const {
    if (hi < lo) return {};
    auto s1 = core_.split(PtrT::borrowed(const_cast<NodeBase*>(t.root())), lo);
    PtrT right = std::move(s1.right);
    if (s1.found) right = core_.join(PtrT{}, std::move(*s1.found), std::move(right));
    auto s2 = core_.split(std::move(right), hi);
    PtrT left = std::move(s2.left);
    if (s2.found) left = core_.join(std::move(left), std::move(*s2.found), PtrT{});
    return out(std::move(left));
  }

  // -------------------------------------------------------------------
  // Augmented queries

  static A aug_val(const TreeT& t) { return t.aug(); }

  // Combination over entries with lo <= key <= hi. Only the blocks that
  // straddle a bound are decoded.
  static A aug_range(const TreeT& t, const K& lo, const K& hi) {
    if (hi < lo) return Aug::identity();
    const NodeBase* n = t.root();
    while (n) {
      if (n->flat()) return block_aug(n, &lo, &hi);
      const R* r = N::regular(n);
      const K& key = traits::key(r->entry);
      if (key < lo) {
        n = r->right;
      } else if (hi < key) {
        n = r->left;
      } else {
        return Aug::combine(aug_from(r->left, lo),
                            Aug::combine(Aug::lift(r->entry), aug_upto(r->right, hi)));
      }
    }
    return Aug::identity();
  }

  // Entries e with h(lift(e)). h must be monotone over combine:
  // h(combine(a, b)) implies h(a) or h(b), so subtrees whose aug fails h are
  // skipped without being read.
  template <class H>
  TreeT aug_filter(InputT t, const H& h) const {
    auto pred = [&h](const E& e) { return h(Aug::lift(e)); };
    return out(filter_rec(std::move(t).take(), pred, h));
  }

 private:
  static TreeT out(PtrT&& p) { return TreeT::adopt(std::move(p)); }
  static PtrT own(NodeBase* n) { return PtrT::owned(n); }
  static PtrT view(const NodeBase* n) { return PtrT::borrowed(const_cast<NodeBase*>(n)); }

  static bool sorted_unique(std::span<const E> es) {
    for (std::size_t i = 1; i < es.size(); ++i)
      if (!(traits::key(es[i - 1]) < traits::key(es[i]))) return false;
    return true;
  }

  template <class F>
  static E combined(const E& existing, const E& incoming, const F& f) {
    return traits::make(traits::key(existing),
                        f(traits::value(existing), traits::value(incoming)));
  }

  // Collapses runs of equal keys (already sorted) left to right.
  template <class F>
  static void dedupe(std::vector<E>& es, const F& f) {
    if (es.empty()) return;
    std::size_t w = 0;
    for (std::size_t i = 1; i < es.size(); ++i) {
      if (traits::key(es[w]) < traits::key(es[i])) {
        es[++w] = std::move(es[i]);
      } else {
        es[w] = combined(es[w], es[i], f);
      }
    }
    es.resize(w + 1);
  }

  bool fork(std::size_t n) const { return n > core_.config().granularity(); }
  bool small(std::size_t n) const { return n < core_.config().base_case(); }

  // ---- block helpers

  static std::vector<E> decoded(const NodeBase* n) {
    std::vector<E> es;
    es.reserve(n->size);
    CoreT::decode(n, es);
    return es;
  }

  static std::optional<E> block_find(const NodeBase* n, const K& k) {
    if (k < CoreT::first_key(n) || CoreT::last_key(n) < k) return std::nullopt;
    if constexpr (C::random_access) {
      const E* p = C::view(N::flat(n)->payload());
      const E* end = p + n->size;
      const E* it = std::lower_bound(p, end, k, [](const E& a, const K& b) {
        return traits::key(a) < b;
      });
      if (it != end && !(k < traits::key(*it))) return *it;
      return std::nullopt;
    } else {
      std::vector<E> es = decoded(n);
      auto it = std::lower_bound(es.begin(), es.end(), k, [](const E& a, const K& b) {
        return traits::key(a) < b;
      });
      if (it != es.end() && !(k < traits::key(*it))) return *it;
      return std::nullopt;
    }
  }

  static std::size_t block_rank(const NodeBase* n, const K& k) {
    auto less = [](const E& a, const K& b) { return traits::key(a) < b; };
    if constexpr (C::random_access) {
      const E* p = C::view(N::flat(n)->payload());
      return static_cast<std::size_t>(std::lower_bound(p, p + n->size, k, less) - p);
    } else {
      std::vector<E> es = decoded(n);
      return static_cast<std::size_t>(std::lower_bound(es.begin(), es.end(), k, less) -
                                      es.begin());
    }
  }

  static E block_at(const NodeBase* n, std::size_t i) {
    if constexpr (C::random_access) {
      return C::view(N::flat(n)->payload())[i];
    } else {
      return decoded(n)[i];
    }
  }

  static bool contains_node(const NodeBase* n, const K& k) {
    while (n) {
      if (n->flat()) return block_find(n, k).has_value();
      const R* r = N::regular(n);
      const K& key = traits::key(r->entry);
      if (k < key) n = r->left;
      else if (key < k) n = r->right;
      else return true;
    }
    return false;
  }

  // Aug over the block entries inside [*lo, *hi]; null means unbounded.
  static A block_aug(const NodeBase* n, const K* lo, const K* hi) {
    const K& first = CoreT::first_key(n);
    const K& last = CoreT::last_key(n);
    if ((lo && last < *lo) || (hi && *hi < first)) return Aug::identity();
    if ((!lo || !(first < *lo)) && (!hi || !(*hi < last))) return N::flat(n)->aug;
    A a = Aug::identity();
    auto add = [&](const E& e) {
      const K& k = traits::key(e);
      if ((!lo || !(k < *lo)) && (!hi || !(*hi < k))) a = Aug::combine(a, Aug::lift(e));
    };
    if constexpr (C::random_access) {
      const E* p = C::view(N::flat(n)->payload());
      for (std::size_t i = 0; i < n->size; ++i) add(p[i]);
    } else {
      for (const E& e : decoded(n)) add(e);
    }
    return a;
  }

  // Aug of entries with key >= lo.
  static A aug_from(const NodeBase* n, const K& lo) {
    A acc = Aug::identity();
    while (n) {
      if (n->flat()) return Aug::combine(block_aug(n, &lo, nullptr), acc);
      const R* r = N::regular(n);
      if (traits::key(r->entry) < lo) {
        n = r->right;
      } else {
        acc = Aug::combine(Aug::lift(r->entry), Aug::combine(N::aug(r->right), acc));
        n = r->left;
      }
    }
    return acc;
  }

  // Aug of entries with key <= hi.
  static A aug_upto(const NodeBase* n, const K& hi) {
    A acc = Aug::identity();
    while (n) {
      if (n->flat()) return Aug::combine(acc, block_aug(n, nullptr, &hi));
      const R* r = N::regular(n);
      if (hi < traits::key(r->entry)) {
        n = r->left;
      } else {
        acc = Aug::combine(acc, Aug::combine(N::aug(r->left), Aug::lift(r->entry)));
        n = r->right;
      }
    }
    return acc;
  }

  // ---- point updates

  template <class F>
  PtrT insert_rec(PtrT t, E e, const F& f) const {
    if (!t) return core_.node(PtrT{}, std::move(e), PtrT{});
    if (t.flat()) {
      std::vector<E> es = decoded(t.get());
      auto it = std::lower_bound(es.begin(), es.end(), traits::key(e),
                                 [](const E& a, const K& b) { return traits::key(a) < b; });
      if (it != es.end() && !(traits::key(e) < traits::key(*it))) {
        *it = combined(*it, e, f);
      } else {
        es.insert(it, std::move(e));
      }
      return core_.from_sorted(std::span<const E>(es));
    }
    auto x = core_.expose(std::move(t));
    const K& key = traits::key(x.entry);
    if (traits::key(e) < key) {
      PtrT l = insert_rec(std::move(x.left), std::move(e), f);
      return core_.join(std::move(l), std::move(x.entry), std::move(x.right), Mode::normal,
                        std::move(x.shell));
    }
    if (key < traits::key(e)) {
      PtrT r = insert_rec(std::move(x.right), std::move(e), f);
      return core_.join(std::move(x.left), std::move(x.entry), std::move(r), Mode::normal,
                        std::move(x.shell));
    }
    E merged = combined(x.entry, e, f);
    return core_.node(std::move(x.left), std::move(merged), std::move(x.right),
                      std::move(x.shell));
  }

  PtrT remove_rec(PtrT t, const K& k) const {
    if (!t) return t;
    if (t.flat()) {
      std::vector<E> es = decoded(t.get());
      auto it = std::lower_bound(es.begin(), es.end(), k,
                                 [](const E& a, const K& b) { return traits::key(a) < b; });
      if (it == es.end() || k < traits::key(*it)) return t;
      es.erase(it);
      return core_.from_sorted(std::span<const E>(es));
    }
    auto x = core_.expose(std::move(t));
    const K& key = traits::key(x.entry);
    if (k < key) {
      PtrT l = remove_rec(std::move(x.left), k);
      return core_.join(std::move(l), std::move(x.entry), std::move(x.right), Mode::normal,
                        std::move(x.shell));
    }
    if (key < k) {
      PtrT r = remove_rec(std::move(x.right), k);
      return core_.join(std::move(x.left), std::move(x.entry), std::move(r), Mode::normal,
                        std::move(x.shell));
    }
    return core_.join2(std::move(x.left), std::move(x.right));
  }

  // ---- small-input merges

  template <class F>
  PtrT merge_union(const PtrT& a, const PtrT& b, const F& f) const {
    std::vector<E> xs, ys, zs;
    xs.reserve(a.size());
    ys.reserve(b.size());
    CoreT::flatten(a.get(), xs);
    CoreT::flatten(b.get(), ys);
    zs.reserve(xs.size() + ys.size());
    std::size_t i = 0, j = 0;
    while (i < xs.size() && j < ys.size()) {
      const K& ka = traits::key(xs[i]);
      const K& kb = traits::key(ys[j]);
      if (ka < kb) zs.push_back(std::move(xs[i++]));
      else if (kb < ka) zs.push_back(std::move(ys[j++]));
      else zs.push_back(combined(xs[i++], ys[j++], f));
    }
    for (; i < xs.size(); ++i) zs.push_back(std::move(xs[i]));
    for (; j < ys.size(); ++j) zs.push_back(std::move(ys[j]));
    return core_.from_sorted(std::span<const E>(zs));
  }

  template <class F>
  PtrT merge_intersect(const PtrT& a, const PtrT& b, const F& f) const {
    std::vector<E> xs, ys, zs;
    xs.reserve(a.size());
    ys.reserve(b.size());
    CoreT::flatten(a.get(), xs);
    CoreT::flatten(b.get(), ys);
    std::size_t i = 0, j = 0;
    while (i < xs.size() && j < ys.size()) {
      const K& ka = traits::key(xs[i]);
      const K& kb = traits::key(ys[j]);
      if (ka < kb) ++i;
      else if (kb < ka) ++j;
      else zs.push_back(combined(xs[i++], ys[j++], f));
    }
    return core_.from_sorted(std::span<const E>(zs));
  }

  PtrT merge_difference(const PtrT& a, const PtrT& b) const {
    std::vector<E> xs, ys, zs;
    xs.reserve(a.size());
    ys.reserve(b.size());
    CoreT::flatten(a.get(), xs);
    CoreT::flatten(b.get(), ys);
    std::size_t i = 0, j = 0;
    while (i < xs.size()) {
      if (j == ys.size()) {
        zs.push_back(std::move(xs[i++]));
        continue;
      }
      const K& ka = traits::key(xs[i]);
      const K& kb = traits::key(ys[j]);
      if (ka < kb) zs.push_back(std::move(xs[i++]));
      else if (kb < ka) ++j;
      else ++i, ++j;
    }
    if (zs.size() == xs.size()) return copy_ref(a);
    return core_.from_sorted(std::span<const E>(zs));
  }

  // Another reference to the same node, owned or borrowed like p.
  static PtrT copy_ref(const PtrT& p) {
    if (!p || p.visible()) return p.view();
    N::retain(p.get());
    return own(p.get());
  }

  // ---- set algebra recursions

  template <class F>
  PtrT union_rec(PtrT a, PtrT b, const F& f) const {
    if (!a) return b;
    if (!b) return a;
    const std::size_t n = a.size() + b.size();
    if (small(n)) return merge_union(a, b, f);
    auto x = core_.expose(std::move(b));
    auto s = core_.split(std::move(a), traits::key(x.entry));
    E e = s.found ? combined(*s.found, x.entry, f) : std::move(x.entry);
    PtrT l, r;
    par_do(
        fork(n), [&] { l = union_rec(std::move(s.left), std::move(x.left), f); },
        [&] { r = union_rec(std::move(s.right), std::move(x.right), f); });
    return core_.join(std::move(l), std::move(e), std::move(r), Mode::normal,
                      std::move(x.shell));
  }

  template <class F>
  PtrT intersect_rec(PtrT a, PtrT b, const F& f) const {
    if (!a || !b) return {};
    const std::size_t n = a.size() + b.size();
    if (small(n)) return merge_intersect(a, b, f);
    auto x = core_.expose(std::move(b));
    auto s = core_.split(std::move(a), traits::key(x.entry));
    PtrT l, r;
    par_do(
        fork(n), [&] { l = intersect_rec(std::move(s.left), std::move(x.left), f); },
        [&] { r = intersect_rec(std::move(s.right), std::move(x.right), f); });
    if (s.found)
      return core_.join(std::move(l), combined(*s.found, x.entry, f), std::move(r),
                        Mode::normal, std::move(x.shell));
    return core_.join2(std::move(l), std::move(r));
  }

  PtrT difference_rec(PtrT a, PtrT b) const {
    if (!a) return {};
    if (!b) return a;
    const std::size_t n = a.size() + b.size();
    if (small(n)) return merge_difference(a, b);
    auto x = core_.expose(std::move(b));
    auto s = core_.split(std::move(a), traits::key(x.entry));
    PtrT l, r;
    par_do(
        fork(n), [&] { l = difference_rec(std::move(s.left), std::move(x.left)); },
        [&] { r = difference_rec(std::move(s.right), std::move(x.right)); });
    return core_.join2(std::move(l), std::move(r));
  }

  template <class F>
  PtrT union_fold_rec(PtrT a, PtrT b, const F& f) const {
    if (!a) return b;
    if (!b) return a;
    if (a.flat() || b.flat())
      return core_.refold(union_expanded(std::move(a), std::move(b), f));
    const std::size_t n = a.size() + b.size();
    auto x = core_.expose(std::move(b));
    // Expanded split: a block of `a` is decompressed at most once; its
    // pieces stay regular (marked) and the final refold repairs them.
    auto s = core_.split(std::move(a), traits::key(x.entry), Mode::expanded);
    E e = s.found ? combined(*s.found, x.entry, f) : std::move(x.entry);
    PtrT l, r;
    par_do(
        fork(n), [&] { l = union_fold_rec(std::move(s.left), std::move(x.left), f); },
        [&] { r = union_fold_rec(std::move(s.right), std::move(x.right), f); });
    return core_.join(std::move(l), std::move(e), std::move(r), Mode::normal,
                      std::move(x.shell));
  }

  template <class F>
  PtrT union_expanded(PtrT a, PtrT b, const F& f) const {
    if (!a) return b;
    if (!b) return a;
    if (a.flat()) a = core_.unfold(a);
    if (b.flat()) b = core_.unfold(b);
    const std::size_t n = a.size() + b.size();
    auto x = core_.expose(std::move(b));
    auto s = core_.split(std::move(a), traits::key(x.entry), Mode::expanded);
    E e = s.found ? combined(*s.found, x.entry, f) : std::move(x.entry);
    PtrT l, r;
    par_do(
        fork(n), [&] { l = union_expanded(std::move(s.left), std::move(x.left), f); },
        [&] { r = union_expanded(std::move(s.right), std::move(x.right), f); });
    return core_.join(std::move(l), std::move(e), std::move(r), Mode::expanded,
                      std::move(x.shell));
  }

  // ---- batch recursions

  template <class F>
  PtrT multi_insert_rec(PtrT t, std::span<const E> batch, const F& f) const {
    if (batch.empty()) return t;
    if (!t) return core_.from_sorted(batch);
    const std::size_t n = t.size() + batch.size();
    if (small(n)) {
      std::vector<E> xs, zs;
      xs.reserve(t.size());
      CoreT::flatten(t.get(), xs);
      zs.reserve(n);
      std::size_t i = 0, j = 0;
      while (i < xs.size() && j < batch.size()) {
        const K& ka = traits::key(xs[i]);
        const K& kb = traits::key(batch[j]);
        if (ka < kb) zs.push_back(std::move(xs[i++]));
        else if (kb < ka) zs.push_back(batch[j++]);
        else zs.push_back(combined(xs[i++], batch[j++], f));
      }
      for (; i < xs.size(); ++i) zs.push_back(std::move(xs[i]));
      for (; j < batch.size(); ++j) zs.push_back(batch[j]);
      return core_.from_sorted(std::span<const E>(zs));
    }
    auto x = core_.expose(std::move(t));
    const K& key = traits::key(x.entry);
    auto it = std::lower_bound(batch.begin(), batch.end(), key,
                               [](const E& a, const K& b) { return traits::key(a) < b; });
    const std::size_t i = static_cast<std::size_t>(it - batch.begin());
    const bool hit = it != batch.end() && !(key < traits::key(*it));
    E e = hit ? combined(x.entry, *it, f) : std::move(x.entry);
    auto lb = batch.first(i);
    auto rb = batch.subspan(hit ? i + 1 : i);
    PtrT l, r;
    par_do(
        fork(n), [&] { l = multi_insert_rec(std::move(x.left), lb, f); },
        [&] { r = multi_insert_rec(std::move(x.right), rb, f); });
    return core_.join(std::move(l), std::move(e), std::move(r), Mode::normal,
                      std::move(x.shell));
  }

  PtrT multi_delete_rec(PtrT t, std::span<const K> keys) const {
    if (!t || keys.empty()) return t;
    const std::size_t n = t.size() + keys.size();
    if (small(n)) {
      std::vector<E> xs, zs;
      xs.reserve(t.size());
      CoreT::flatten(t.get(), xs);
      std::size_t j = 0;
      for (E& e : xs) {
        const K& k = traits::key(e);
        while (j < keys.size() && keys[j] < k) ++j;
        if (j < keys.size() && !(k < keys[j])) continue;
        zs.push_back(std::move(e));
      }
      if (zs.size() == xs.size()) return t;
      return core_.from_sorted(std::span<const E>(zs));
    }
    auto x = core_.expose(std::move(t));
    const K& key = traits::key(x.entry);
    auto it = std::lower_bound(keys.begin(), keys.end(), key);
    const std::size_t i = static_cast<std::size_t>(it - keys.begin());
    const bool hit = it != keys.end() && !(key < *it);
    auto lk = keys.first(i);
    auto rk = keys.subspan(hit ? i + 1 : i);
    PtrT l, r;
    par_do(
        fork(n), [&] { l = multi_delete_rec(std::move(x.left), lk); },
        [&] { r = multi_delete_rec(std::move(x.right), rk); });
    if (hit) return core_.join2(std::move(l), std::move(r));
    return core_.join(std::move(l), std::move(x.entry), std::move(r), Mode::normal,
                      std::move(x.shell));
  }

  // ---- traversals

  // Keeps entries satisfying pred; subtrees whose aug fails `prune` are
  // dropped unread. Unchanged subtrees come back as the same node.
  template <class Pred, class Prune>
  PtrT filter_rec(PtrT t, const Pred& pred, const Prune& prune) const {
    if (!t) return t;
    if (!prune(N::aug(t.get()))) return {};
    const std::size_t n = t.size();
    if (t.flat()) {
      std::vector<E> es = decoded(t.get()), kept;
      kept.reserve(es.size());
      for (E& e : es)
        if (pred(e)) kept.push_back(std::move(e));
      if (kept.size() == es.size()) return t;
      return core_.from_sorted(std::span<const E>(kept));
    }
    if (!t.unique()) {
      const R* r = N::regular(t.get());
      PtrT l, rr;
      par_do(
          fork(n), [&] { l = filter_rec(view(r->left), pred, prune); },
          [&] { rr = filter_rec(view(r->right), pred, prune); });
      const bool keep = pred(r->entry);
      if (keep && l.get() == r->left && rr.get() == r->right) return t;
      if (keep) return core_.join(std::move(l), r->entry, std::move(rr));
      return core_.join2(std::move(l), std::move(rr));
    }
    auto x = core_.expose(std::move(t));
    PtrT l, rr;
    par_do(
        fork(n), [&] { l = filter_rec(std::move(x.left), pred, prune); },
        [&] { rr = filter_rec(std::move(x.right), pred, prune); });
    if (pred(x.entry))
      return core_.join(std::move(l), std::move(x.entry), std::move(rr), Mode::normal,
                        std::move(x.shell));
    return core_.join2(std::move(l), std::move(rr));
  }

  template <class F>
  PtrT map_rec(const NodeBase* n, const F& f) const {
    if (!n) return {};
    if (n->flat()) {
      std::vector<E> es = decoded(n);
      for (E& e : es) e = traits::make(traits::key(e), f(e));
      return own(N::make_flat(es));
    }
    const R* r = N::regular(n);
    PtrT l, rr;
    par_do(
        fork(n->size), [&] { l = map_rec(r->left, f); },
        [&] { rr = map_rec(r->right, f); });
    return own(N::make_regular(std::move(l).into_owned(),
                               traits::make(traits::key(r->entry), f(r->entry)),
                               std::move(rr).into_owned(), false));
  }

  template <class T, class G, class F>
  T map_reduce_rec(const NodeBase* n, const G& g, const F& f, const T& id) const {
    if (!n) return id;
    if (n->flat()) {
      T acc = id;
      if constexpr (C::random_access) {
        const E* p = C::view(N::flat(n)->payload());
        for (std::size_t i = 0; i < n->size; ++i) acc = f(acc, g(p[i]));
      } else {
        for (const E& e : decoded(n)) acc = f(acc, g(e));
      }
      return acc;
    }
    const R* r = N::regular(n);
    T l = id, rr = id;
    par_do(
        fork(n->size), [&] { l = map_reduce_rec(r->left, g, f, id); },
        [&] { rr = map_reduce_rec(r->right, g, f, id); });
    return f(f(l, g(r->entry)), rr);
  }

  template <class F>
  static void for_each_rec(const NodeBase* n, const F& f) {
    if (!n) return;
    if (n->flat()) {
      if constexpr (C::random_access) {
        const E* p = C::view(N::flat(n)->payload());
        for (std::size_t i = 0; i < n->size; ++i) f(p[i]);
      } else {
        for (const E& e : decoded(n)) f(e);
      }
      return;
    }
    const R* r = N::regular(n);
    for_each_rec(r->left, f);
    f(r->entry);
    for_each_rec(r->right, f);
  }

  CoreT core_;
};

template <class K, class V, class Aug = no_aug, class Encoding = identity_encoding>
using ordered_map = OrderedMap<Params<KeyValue<K, V>, Aug, Encoding>>;

template <class K, class Aug = no_aug, class Encoding = identity_encoding>
using ordered_set = OrderedMap<Params<K, Aug, Encoding>>;

}  // namespace pactree
