// SPDX-License-Identifier: Apache-2.0
#pragma once

// The primitive algebra over PaC-trees: expose, node, fold, unfold, refold,
// join, split, split_last and join2. Every bulk algorithm is written in
// terms of these.
//
// Internally the primitives work on Ptr (extra pointers). A borrowed Ptr is
// read-only and its results share its subtrees; an owned Ptr with owner
// count one is consumed and its nodes are recycled.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "pactree/config.hpp"
#include "pactree/node.hpp"
#include "pactree/parallel.hpp"

namespace pactree {

// expanded: never fold, mark every node created (see refold).
enum class Mode { normal, expanded };

// Memory of a consumed regular node, kept for the next node() call.
template <class P>
class Shell {
  using R = detail::Regular<P>;

 public:
  Shell() = default;
  explicit Shell(R* r) : r_(r) {}
  Shell(Shell&& o) noexcept : r_(std::exchange(o.r_, nullptr)) {}
  Shell& operator=(Shell&& o) noexcept {
    if (this != &o) {
      reset();
      r_ = std::exchange(o.r_, nullptr);
    }
    return *this;
  }
  ~Shell() { reset(); }
  R* take() { return std::exchange(r_, nullptr); }
  explicit operator bool() const { return r_ != nullptr; }

 private:
  void reset() {
    if (r_) detail::Nodes<P>::free_shell(std::exchange(r_, nullptr));
  }
  R* r_ = nullptr;
};

template <class P>
class Core {
 public:
  using params = P;
  using E = typename P::entry_type;
  using A = typename P::aug_type;
  using Aug = typename P::aug;
  using C = typename P::codec;
  using traits = entry_traits<E>;
  using K = typename traits::key_type;
  using NodeBase = detail::NodeBase;
  using N = detail::Nodes<P>;
  using R = detail::Regular<P>;
  using PtrT = Ptr<P>;
  using TreeT = Tree<P>;
  using InputT = Input<P>;

  struct Exposed {
    PtrT left;
    E entry;
    PtrT right;
    Shell<P> shell;
  };
  struct Split {
    PtrT left;
    std::optional<E> found;
    PtrT right;
  };
  struct Last {
    PtrT rest;
    E last;
  };

  explicit Core(Config cfg = {}) : cfg_(cfg) { validate(cfg_); }

  const Config& config() const { return cfg_; }
  std::size_t block() const { return cfg_.block; }

  static PtrT own(NodeBase* n) { return PtrT::owned(n); }
  static TreeT out(PtrT&& p) { return TreeT::adopt(std::move(p)); }

  // -------------------------------------------------------------------
  // Balance

  bool balanced(std::size_t wa, std::size_t wb) const {
    const double t = cfg_.alpha * static_cast<double>(wa + wb);
    return static_cast<double>(wa) >= t && static_cast<double>(wb) >= t;
  }
  // a is too heavy to sit next to b.
  bool heavy(std::size_t sa, std::size_t sb) const {
    return sa > sb && !balanced(sa + 1, sb + 1);
  }

  // -------------------------------------------------------------------
  // Leaves

  static void decode(const NodeBase* n, std::vector<E>& out) { N::decode(n, out); }

  // Appends the in-order entries of t.
  static void flatten(const NodeBase* t, std::vector<E>& out) {
    if (!t) return;
    if (t->flat()) {
      N::decode(t, out);
      return;
    }
    const R* r = N::regular(t);
    flatten(r->left, out);
    out.push_back(r->entry);
    flatten(r->right, out);
  }

  // Perfectly balanced all-regular tree, median n/2 at the root.
  PtrT balanced_tree(std::span<const E> es, bool mark) const {
    if (es.empty()) return {};
    const std::size_t m = es.size() / 2;
    PtrT l, r;
    par_do(
        es.size() > cfg_.granularity(),
        [&] { l = balanced_tree(es.first(m), mark); },
        [&] { r = balanced_tree(es.subspan(m + 1), mark); });
    return own(N::make_regular(std::move(l).into_owned(), es[m],
                               std::move(r).into_owned(), mark));
  }

  PtrT from_sorted(std::span<const E> es, Mode mode = Mode::normal) const {
    if (mode == Mode::expanded) return balanced_tree(es, true);
    const std::size_t n = es.size(), B = cfg_.block;
    if (n == 0) return {};
    if (n < B) return balanced_tree(es, false);
    if (n <= 2 * B) return own(N::make_flat(es));
    const std::size_t m = n / 2;
    PtrT l, r;
    par_do(
        n > cfg_.granularity(),
        [&] { l = from_sorted(es.first(m)); },
        [&] { r = from_sorted(es.subspan(m + 1)); });
    return own(N::make_regular(std::move(l).into_owned(), es[m],
                               std::move(r).into_owned(), false));
  }

  PtrT fold(PtrT t) const {
    const std::size_t n = t.size();
    if (!t || t.flat() || n < cfg_.block || n > 2 * cfg_.block) return t;
    std::vector<E> es;
    es.reserve(n);
    flatten(t.get(), es);
    return own(N::make_flat(es));
  }

  PtrT unfold(const PtrT& t) const {
    PACTREE_REQUIRE(t.flat(), "unfold of a non-flat node");
    count_event(Event::unfold);
    std::vector<E> es;
    es.reserve(t.size());
    decode(t.get(), es);
    return balanced_tree(es, true);
  }

  // -------------------------------------------------------------------
  // expose / node

  Exposed expose(PtrT t) const {
    PACTREE_REQUIRE(static_cast<bool>(t), "expose of an empty tree");
    if (t.flat()) return expose(unfold(t));
    R* r = N::regular(t.get());
    if (t.visible())
      return {PtrT::borrowed(r->left), r->entry, PtrT::borrowed(r->right), {}};
    if (t.unique()) {
      std::move(t).leak();
      return {own(r->left), std::move(r->entry), own(r->right), Shell<P>(r)};
    }
    N::retain(r->left);
    N::retain(r->right);
    return {own(r->left), r->entry, own(r->right), {}};
  }

  // Smart constructor: picks the node shape from the combined size.
  PtrT node(PtrT l, E e, PtrT r, Shell<P> shell = {},
            Mode mode = Mode::normal) const {
    check_order(l, e, r);
    const std::size_t s = l.size() + r.size() + 1, B = cfg_.block;
    if (mode == Mode::expanded) return regular(std::move(l), std::move(e), std::move(r), shell, true);
    if (s > 4 * B) {
      l = normalize(std::move(l));
      r = normalize(std::move(r));
      if (l.size() < B || r.size() < B) return rebuild(l, e, r);
      return regular(std::move(l), std::move(e), std::move(r), shell, false);
    }
    if (s >= B && s <= 2 * B) {
      std::vector<E> es = gather(l, e, r);
      return own(N::make_flat(es));
    }
    if (s > 2 * B) {
      const std::size_t m = s / 2;
      if (l.flat() && r.flat() && l.size() == m && r.size() == s - m - 1)
        return regular(std::move(l), std::move(e), std::move(r), shell, false);
      std::vector<E> es = gather(l, e, r);
      std::span<const E> all(es);
      PtrT a = own(N::make_flat(all.first(m)));
      PtrT b = own(N::make_flat(all.subspan(m + 1)));
      return regular(std::move(a), es[m], std::move(b), shell, false);
    }
    if (balanced(l.size() + 1, r.size() + 1))
      return regular(std::move(l), std::move(e), std::move(r), shell, false);
    return rebuild(l, e, r);
  }

  // -------------------------------------------------------------------
  // join

  PtrT join(PtrT l, E e, PtrT r, Mode mode = Mode::normal,
            Shell<P> shell = {}) const {
    check_order(l, e, r);
    if (heavy(l.size(), r.size()))
      return join_right(std::move(l), std::move(e), std::move(r), mode, std::move(shell));
    if (heavy(r.size(), l.size()))
      return join_left(std::move(l), std::move(e), std::move(r), mode, std::move(shell));
    return node(std::move(l), std::move(e), std::move(r), std::move(shell), mode);
  }

  PtrT join2(PtrT l, PtrT r, Mode mode = Mode::normal) const {
    if (!l) return r;
    if (!r) return l;
    Last sl = split_last(std::move(l), mode);
    return join(std::move(sl.rest), std::move(sl.last), std::move(r), mode);
  }

  // -------------------------------------------------------------------
  // split

  Split split(PtrT t, const K& k, Mode mode = Mode::normal) const {
    if (!t) return {};
    if (t.flat()) {
      if (k < first_key(t.get())) return {{}, std::nullopt, std::move(t)};
      if (last_key(t.get()) < k) return {std::move(t), std::nullopt, {}};
      count_event(Event::unfold);
      std::vector<E> es;
      es.reserve(t.size());
      decode(t.get(), es);
      auto it = std::lower_bound(es.begin(), es.end(), k,
                                 [](const E& a, const K& b) { return traits::key(a) < b; });
      const std::size_t i = static_cast<std::size_t>(it - es.begin());
      const bool hit = it != es.end() && !(k < traits::key(*it));
      std::span<const E> all(es);
      Split s;
      s.left = from_sorted(all.first(i), mode);
      s.right = from_sorted(all.subspan(hit ? i + 1 : i), mode);
      if (hit) s.found = es[i];
      return s;
    }
    Exposed x = expose(std::move(t));
    const K& key = traits::key(x.entry);
    if (k < key) {
      Split s = split(std::move(x.left), k, mode);
      s.right = join(std::move(s.right), std::move(x.entry), std::move(x.right), mode,
                     std::move(x.shell));
      return s;
    }
    if (key < k) {
      Split s = split(std::move(x.right), k, mode);
      s.left = join(std::move(x.left), std::move(x.entry), std::move(s.left), mode,
                    std::move(x.shell));
      return s;
    }
    return {std::move(x.left), std::move(x.entry), std::move(x.right)};
  }

  // First i entries to the left, the rest to the right (positional).
  std::pair<PtrT, PtrT> split_at(PtrT t, std::size_t i) const {
    if (!t) return {};
    if (i == 0) return {PtrT{}, std::move(t)};
    if (i >= t.size()) return {std::move(t), PtrT{}};
    if (t.flat()) {
      count_event(Event::unfold);
      std::vector<E> es;
      es.reserve(t.size());
      decode(t.get(), es);
      std::span<const E> all(es);
      return {from_sorted(all.first(i)), from_sorted(all.subspan(i))};
    }
    Exposed x = expose(std::move(t));
    const std::size_t ls = x.left.size();
    if (i <= ls) {
      auto [a, b] = split_at(std::move(x.left), i);
      return {std::move(a), join(std::move(b), std::move(x.entry), std::move(x.right),
                                 Mode::normal, std::move(x.shell))};
    }
    auto [a, b] = split_at(std::move(x.right), i - ls - 1);
    return {join(std::move(x.left), std::move(x.entry), std::move(a), Mode::normal,
                 std::move(x.shell)),
            std::move(b)};
  }

  Last split_last(PtrT t, Mode mode = Mode::normal) const {
    PACTREE_REQUIRE(static_cast<bool>(t), "split_last of an empty tree");
    if (t.flat()) {
      count_event(Event::unfold);
      std::vector<E> es;
      es.reserve(t.size());
      decode(t.get(), es);
      E last = std::move(es.back());
      es.pop_back();
      return {from_sorted(es, mode), std::move(last)};
    }
    Exposed x = expose(std::move(t));
    if (!x.right) return {std::move(x.left), std::move(x.entry)};
    Last sl = split_last(std::move(x.right), mode);
    sl.rest = join(std::move(x.left), std::move(x.entry), std::move(sl.rest), mode,
                   std::move(x.shell));
    return sl;
  }

  // -------------------------------------------------------------------
  // refold: repairs a tree whose marked (expanded) regions may break the
  // blocked-leaf invariant. Unmarked subtrees are valid and kept as-is.

  PtrT refold(PtrT t) const {
    if (!t || !t.marked()) return t;
    const std::size_t n = t.size();
    if (n >= cfg_.block && n <= 2 * cfg_.block) return fold(std::move(t));
    Exposed x = expose(std::move(t));
    PtrT l, r;
    par_do(
        n > cfg_.granularity(), [&] { l = refold(std::move(x.left)); },
        [&] { r = refold(std::move(x.right)); });
    return join(std::move(l), std::move(x.entry), std::move(r), Mode::normal,
                std::move(x.shell));
  }

  // -------------------------------------------------------------------
  // Key bounds

  static const K& first_key(const NodeBase* t) {
    while (!t->flat()) {
      const R* r = N::regular(t);
      if (!r->left) return traits::key(r->entry);
      t = r->left;
    }
    if constexpr (C::random_access) {
      return traits::key(C::view(N::flat(t)->payload())[0]);
    } else {
      return N::flat(t)->bounds.first;
    }
  }

  static const K& last_key(const NodeBase* t) {
    while (!t->flat()) {
      const R* r = N::regular(t);
      if (!r->right) return traits::key(r->entry);
      t = r->right;
    }
    if constexpr (C::random_access) {
      return traits::key(C::view(N::flat(t)->payload())[t->size - 1]);
    } else {
      return N::flat(t)->bounds.last;
    }
  }

  // -------------------------------------------------------------------
  // Handle-level entry points

  struct TreeTriple {
    TreeT left;
    E entry;
    TreeT right;
  };
  struct TreeSplit {
    TreeT left;
    std::optional<E> found;
    TreeT right;
  };

  TreeT from_sorted(const std::vector<E>& es) const {
    return out(from_sorted(std::span<const E>(es)));
  }
  TreeT singleton(E e) const {
    return out(node(PtrT{}, std::move(e), PtrT{}));
  }
  TreeTriple expose(InputT t) const {
    Exposed x = expose(std::move(t).take());
    return {out(std::move(x.left)), std::move(x.entry), out(std::move(x.right))};
  }
  TreeT node(InputT l, E e, InputT r) const {
    return out(node(std::move(l).take(), std::move(e), std::move(r).take()));
  }
  TreeT join(InputT l, E e, InputT r, Mode mode = Mode::normal) const {
    return out(join(std::move(l).take(), std::move(e), std::move(r).take(), mode));
  }
  TreeT join2(InputT l, InputT r) const {
    return out(join2(std::move(l).take(), std::move(r).take()));
  }
  TreeSplit split(InputT t, const K& k) const {
    Split s = split(std::move(t).take(), k);
    return {out(std::move(s.left)), std::move(s.found), out(std::move(s.right))};
  }
  std::pair<TreeT, E> split_last(InputT t) const {
    Last sl = split_last(std::move(t).take());
    return {out(std::move(sl.rest)), std::move(sl.last)};
  }
  TreeT fold(InputT t) const { return out(fold(std::move(t).take())); }
  TreeT unfold(const TreeT& t) const {
    return out(unfold(PtrT::borrowed(const_cast<NodeBase*>(t.root()))));
  }
  TreeT refold(InputT t) const { return out(refold(std::move(t).take())); }
  // Fully expanded copy: every node regular and marked.
  TreeT expand(const TreeT& t) const {
    std::vector<E> es = entries(t);
    return out(balanced_tree(es, true));
  }

  static std::vector<E> entries(const TreeT& t) {
    std::vector<E> es;
    es.reserve(t.size());
    flatten(t.root(), es);
    return es;
  }

 private:
  PtrT regular(PtrT l, E e, PtrT r, Shell<P>& shell, bool mark) const {
    return own(N::make_regular(std::move(l).into_owned(), std::move(e),
                               std::move(r).into_owned(), mark, shell.take()));
  }

  static std::vector<E> gather(const PtrT& l, const E& e, const PtrT& r) {
    std::vector<E> es;
    es.reserve(l.size() + r.size() + 1);
    flatten(l.get(), es);
    es.push_back(e);
    flatten(r.get(), es);
    return es;
  }

  PtrT rebuild(const PtrT& l, const E& e, const PtrT& r) const {
    std::vector<E> es = gather(l, e, r);
    return from_sorted(std::span<const E>(es));
  }

  // A child of a node above 4B must itself be blocked; pieces in [B, 2B]
  // that are still regular (left over from an unfold) are folded here.
  PtrT normalize(PtrT c) const { return fold(std::move(c)); }

  // Balance fix along the right spine of l; l is heavy.
  PtrT join_right(PtrT l, E e, PtrT r, Mode mode, Shell<P> shell) const {
    const std::size_t s = l.size() + r.size() + 1;
    if (mode == Mode::normal && s <= 4 * cfg_.block && s >= cfg_.block)
      return node(std::move(l), std::move(e), std::move(r), std::move(shell), mode);
    if (!heavy(l.size(), r.size()))
      return node(std::move(l), std::move(e), std::move(r), std::move(shell), mode);
    Exposed x = expose(std::move(l));
    PtrT t = join_right(std::move(x.right), std::move(e), std::move(r), mode,
                        std::move(shell));
    if (balanced(x.left.size() + 1, t.size() + 1))
      return node(std::move(x.left), std::move(x.entry), std::move(t),
                  std::move(x.shell), mode);
    Exposed y = expose(std::move(t));
    const std::size_t wll = x.left.size() + 1, wtl = y.left.size() + 1,
                      wtr = y.right.size() + 1;
    if (balanced(wll, wtl) && balanced(wll + wtl, wtr)) {
      PtrT inner = node(std::move(x.left), std::move(x.entry), std::move(y.left),
                        std::move(x.shell), mode);
      return node(std::move(inner), std::move(y.entry), std::move(y.right),
                  std::move(y.shell), mode);
    }
    Exposed z = expose(std::move(y.left));
    PtrT a = node(std::move(x.left), std::move(x.entry), std::move(z.left),
                  std::move(x.shell), mode);
    PtrT b = node(std::move(z.right), std::move(y.entry), std::move(y.right),
                  std::move(y.shell), mode);
    return node(std::move(a), std::move(z.entry), std::move(b), std::move(z.shell), mode);
  }

  PtrT join_left(PtrT l, E e, PtrT r, Mode mode, Shell<P> shell) const {
    const std::size_t s = l.size() + r.size() + 1;
    if (mode == Mode::normal && s <= 4 * cfg_.block && s >= cfg_.block)
      return node(std::move(l), std::move(e), std::move(r), std::move(shell), mode);
    if (!heavy(r.size(), l.size()))
      return node(std::move(l), std::move(e), std::move(r), std::move(shell), mode);
    Exposed x = expose(std::move(r));
    PtrT t = join_left(std::move(l), std::move(e), std::move(x.left), mode,
                       std::move(shell));
    if (balanced(t.size() + 1, x.right.size() + 1))
      return node(std::move(t), std::move(x.entry), std::move(x.right),
                  std::move(x.shell), mode);
    Exposed y = expose(std::move(t));
    const std::size_t wrr = x.right.size() + 1, wtl = y.left.size() + 1,
                      wtr = y.right.size() + 1;
    if (balanced(wtr, wrr) && balanced(wtl, wtr + wrr)) {
      PtrT inner = node(std::move(y.right), std::move(x.entry), std::move(x.right),
                        std::move(x.shell), mode);
      return node(std::move(y.left), std::move(y.entry), std::move(inner),
                  std::move(y.shell), mode);
    }
    Exposed z = expose(std::move(y.right));
    PtrT a = node(std::move(y.left), std::move(y.entry), std::move(z.left),
                  std::move(y.shell), mode);
    PtrT b = node(std::move(z.right), std::move(x.entry), std::move(x.right),
                  std::move(x.shell), mode);
    return node(std::move(a), std::move(z.entry), std::move(b), std::move(z.shell), mode);
  }

  void check_order([[maybe_unused]] const PtrT& l, [[maybe_unused]] const E& e,
                   [[maybe_unused]] const PtrT& r) const {
#if PACTREE_CHECKS
    if constexpr (P::ordered) {
      const K& k = traits::key(e);
      PACTREE_REQUIRE(!l || last_key(l.get()) < k, "key order violated (left)");
      PACTREE_REQUIRE(!r || k < first_key(r.get()), "key order violated (right)");
    }
#endif
  }

  Config cfg_;
};

}  // namespace pactree
