// SPDX-License-Identifier: Apache-2.0
#pragma once

// Positional sequences. Same node shapes as ordered maps; the order is the
// in-order position and there is no key invariant. Blocks use the identity
// codec only, since difference coding needs sorted integer keys.

#include <algorithm>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pactree/core.hpp"

namespace pactree {

template <class T, class Aug = no_aug>
class Sequence {
 public:
  using P = Params<T, Aug, identity_encoding, false>;
  using CoreT = Core<P>;
  using E = T;
  using A = typename P::aug_type;
  using C = typename P::codec;
  using TreeT = Tree<P>;
  using InputT = Input<P>;
  using PtrT = Ptr<P>;
  using NodeBase = detail::NodeBase;
  using N = detail::Nodes<P>;
  using R = detail::Regular<P>;

  explicit Sequence(Config cfg = {}) : core_(cfg) {}

  const CoreT& core() const { return core_; }

  TreeT build(std::span<const T> xs) const { return out(core_.from_sorted(xs)); }
  TreeT build(const std::vector<T>& xs) const { return build(std::span<const T>(xs)); }

  static std::vector<T> to_vector(const TreeT& s) { return CoreT::entries(s); }

  static T nth(const TreeT& s, std::size_t i) {
    if (i >= s.size()) throw std::out_of_range(bounds_msg("nth", i, s.size()));
    const NodeBase* n = s.root();
    for (;;) {
      if (n->flat()) return C::view(N::flat(n)->payload())[i];
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

  TreeT take(InputT s, std::size_t i) const {
    PtrT p = std::move(s).take();
    if (i > p.size()) throw std::out_of_range(bounds_msg("take", i, p.size()));
    return out(core_.split_at(std::move(p), i).first);
  }

  TreeT drop(InputT s, std::size_t i) const {
    PtrT p = std::move(s).take();
    if (i > p.size()) throw std::out_of_range(bounds_msg("drop", i, p.size()));
    return out(core_.split_at(std::move(p), i).second);
  }

  // Elements at positions [i, j).
  TreeT subseq(InputT s, std::size_t i, std::size_t j) const {
    PtrT p = std::move(s).take();
    if (i > j || j > p.size())
      throw std::out_of_range("subseq [" + std::to_string(i) + ", " + std::to_string(j) +
                              ") outside a sequence of " + std::to_string(p.size()));
    auto head = core_.split_at(std::move(p), j).first;
    return out(core_.split_at(std::move(head), i).second);
  }

  TreeT append(InputT a, InputT b) const {
    return out(core_.join2(std::move(a).take(), std::move(b).take()));
  }

  TreeT reverse(const TreeT& s) const { return out(reverse_rec(s.root())); }

  template <class F>
  TreeT map(const TreeT& s, const F& f) const {
    return out(map_rec(s.root(), f));
  }

  template <class Pred>
  TreeT filter(const TreeT& s, const Pred& pred) const {
    return out(filter_rec(PtrT::borrowed(const_cast<NodeBase*>(s.root())), pred));
  }

  // f associative over T.
  template <class F>
  T reduce(const TreeT& s, const F& f, T identity) const {
    return reduce_rec(s.root(), f, identity);
  }

  // Leftmost element satisfying pred; stops at the first hit.
  template <class Pred>
  static std::optional<T> find_first(const TreeT& s, const Pred& pred) {
    std::optional<T> hit;
    find_rec(s.root(), pred, hit);
    return hit;
  }

 private:
  static TreeT out(PtrT&& p) { return TreeT::adopt(std::move(p)); }
  static PtrT own(NodeBase* n) { return PtrT::owned(n); }
  bool fork(std::size_t n) const { return n > core_.config().granularity(); }

  static std::string bounds_msg(const char* op, std::size_t i, std::size_t n) {
    return std::string(op) + " index " + std::to_string(i) + " outside a sequence of " +
           std::to_string(n);
  }

  static std::vector<T> decoded(const NodeBase* n) {
    std::vector<T> xs;
    xs.reserve(n->size);
    CoreT::decode(n, xs);
    return xs;
  }

  PtrT reverse_rec(const NodeBase* n) const {
    if (!n) return {};
    if (n->flat()) {
      std::vector<T> xs = decoded(n);
      std::reverse(xs.begin(), xs.end());
      return own(N::make_flat(xs));
    }
    const R* r = N::regular(n);
    PtrT a, b;
    par_do(
        fork(n->size), [&] { a = reverse_rec(r->right); },
        [&] { b = reverse_rec(r->left); });
    return own(N::make_regular(std::move(a).into_owned(), r->entry,
                               std::move(b).into_owned(), false));
  }

  template <class F>
  PtrT map_rec(const NodeBase* n, const F& f) const {
    if (!n) return {};
    if (n->flat()) {
      std::vector<T> xs = decoded(n);
      for (T& x : xs) x = f(x);
      return own(N::make_flat(xs));
    }
    const R* r = N::regular(n);
    PtrT a, b;
    par_do(
        fork(n->size), [&] { a = map_rec(r->left, f); }, [&] { b = map_rec(r->right, f); });
    return own(N::make_regular(std::move(a).into_owned(), f(r->entry),
                               std::move(b).into_owned(), false));
  }

  template <class Pred>
  PtrT filter_rec(PtrT t, const Pred& pred) const {
    if (!t) return t;
    if (t.flat()) {
      std::vector<T> xs = decoded(t.get()), kept;
      for (T& x : xs)
        if (pred(x)) kept.push_back(std::move(x));
      if (kept.size() == xs.size()) return t;
      return core_.from_sorted(std::span<const T>(kept));
    }
    const R* r = N::regular(t.get());
    PtrT a, b;
    par_do(
        fork(t.size()),
        [&] { a = filter_rec(PtrT::borrowed(r->left), pred); },
        [&] { b = filter_rec(PtrT::borrowed(r->right), pred); });
    const bool keep = pred(r->entry);
    if (keep && a.get() == r->left && b.get() == r->right) return t;
    if (keep) return core_.join(std::move(a), r->entry, std::move(b));
    return core_.join2(std::move(a), std::move(b));
  }

  template <class F>
  T reduce_rec(const NodeBase* n, const F& f, const T& id) const {
    if (!n) return id;
    if (n->flat()) {
      const T* p = C::view(N::flat(n)->payload());
      T acc = id;
      for (std::size_t i = 0; i < n->size; ++i) acc = f(acc, p[i]);
      return acc;
    }
    const R* r = N::regular(n);
    T a = id, b = id;
    par_do(
        fork(n->size), [&] { a = reduce_rec(r->left, f, id); },
        [&] { b = reduce_rec(r->right, f, id); });
    return f(f(a, r->entry), b);
  }

  template <class Pred>
  static bool find_rec(const NodeBase* n, const Pred& pred, std::optional<T>& hit) {
    if (!n) return false;
    if (n->flat()) {
      for (const T& x : decoded(n)) {
        if (pred(x)) {
          hit = x;
          return true;
        }
      }
      return false;
    }
    const R* r = N::regular(n);
    if (find_rec(r->left, pred, hit)) return true;
    if (pred(r->entry)) {
      hit = r->entry;
      return true;
    }
    return find_rec(r->right, pred, hit);
  }

  CoreT core_;
};

}  // namespace pactree
