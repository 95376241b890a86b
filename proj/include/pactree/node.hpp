// SPDX-License-Identifier: Apache-2.0
#pragma once

// Node storage for PaC-trees.
//
// Two node shapes share a 64-bit header: a 32-bit word holding the owner
// count plus two immutable flag bits, and a 32-bit entry count. Regular
// nodes carry one entry and two children; flat nodes carry a block of
// entries encoded by the codec, laid out right after the header.

#include <atomic>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <new>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <utility>
#include <vector>

#include "pactree/aug.hpp"
#include "pactree/counters.hpp"
#include "pactree/encoding.hpp"
#include "pactree/entry.hpp"

#if !defined(NDEBUG) || defined(PACTREE_DEBUG_CHECKS)
#define PACTREE_CHECKS 1
#else
#define PACTREE_CHECKS 0
#endif

namespace pactree {

[[noreturn]] inline void contract_violation(const char* what, const char* file,
                                            int line) {
  std::fprintf(stderr, "pactree: contract violation: %s (%s:%d)\n", what, file,
               line);
  std::abort();
}

// Always-on check for cheap preconditions.
#define PACTREE_REQUIRE(cond, what) \
  ((cond) ? void(0) : ::pactree::contract_violation(what, __FILE__, __LINE__))

// Debug-only check for preconditions that cost a traversal or a decode.
#if PACTREE_CHECKS
#define PACTREE_DEBUG_REQUIRE(cond, what) PACTREE_REQUIRE(cond, what)
#else
#define PACTREE_DEBUG_REQUIRE(cond, what) ((void)0)
#endif

// Bundles the entry type, augmentation and block encoding of one tree type.
// Ordered = false drops the key-order precondition (positional sequences).
template <class E, class Aug = no_aug, class Encoding = identity_encoding,
          bool Ordered = true>
struct Params {
  static constexpr bool ordered = Ordered;
  using entry_type = E;
  using aug = Aug;
  using aug_type = typename Aug::value_type;
  using encoding = Encoding;
  using codec = codec_for<Encoding, E>;

  static_assert(AugSpec<Aug, E>);
  static_assert(BlockCodec<codec, E>);
};

namespace detail {

inline constexpr std::uint32_t kFlatBit = 1u << 31;
inline constexpr std::uint32_t kMarkBit = 1u << 30;
inline constexpr std::uint32_t kOwnerMask = kMarkBit - 1;

struct NodeBase {
  std::atomic<std::uint32_t> word;
  std::uint32_t size;

  NodeBase(std::uint32_t flags, std::uint32_t n) : word(flags | 1u), size(n) {}

  bool flat() const { return word.load(std::memory_order_relaxed) & kFlatBit; }
  bool marked() const {
    return word.load(std::memory_order_relaxed) & kMarkBit;
  }
  std::uint32_t owners() const {
    return word.load(std::memory_order_acquire) & kOwnerMask;
  }
};

inline std::uint32_t checked_size(std::size_t n) {
  if (n > 0xffffffffu) throw std::length_error("pactree: tree too large");
  return static_cast<std::uint32_t>(n);
}

// Uncompressed first/last keys, cached in the header of blocks whose codec
// cannot be read in place.
template <class P, bool Cached = !P::codec::random_access>
struct BlockBounds {};

template <class P>
struct BlockBounds<P, true> {
  using key_type = typename entry_traits<typename P::entry_type>::key_type;
  key_type first{};
  key_type last{};
};

template <class P>
struct Regular : NodeBase {
  using E = typename P::entry_type;
  using A = typename P::aug_type;

  NodeBase* left;
  NodeBase* right;
  E entry;
  [[no_unique_address]] A aug;

  Regular(NodeBase* l, E&& e, NodeBase* r, std::size_t n, A a, bool mark)
      : NodeBase(mark ? kMarkBit : 0u, checked_size(n)),
        left(l),
        right(r),
        entry(std::move(e)),
        aug(std::move(a)) {}
};

template <class P>
struct Flat : NodeBase {
  using E = typename P::entry_type;
  using A = typename P::aug_type;

  std::uint32_t nbytes;
  [[no_unique_address]] A aug;
  [[no_unique_address]] BlockBounds<P> bounds;

  Flat(std::size_t count, std::size_t bytes, A a)
      : NodeBase(kFlatBit, checked_size(count)),
        nbytes(checked_size(bytes)),
        aug(std::move(a)) {}

  static constexpr std::size_t header_bytes() {
    constexpr std::size_t al = alignof(E) > alignof(Flat) ? alignof(E)
                                                           : alignof(Flat);
    return (sizeof(Flat) + al - 1) / al * al;
  }
  std::byte* payload() { return reinterpret_cast<std::byte*>(this) + header_bytes(); }
  const std::byte* payload() const {
    return reinterpret_cast<const std::byte*>(this) + header_bytes();
  }
  std::span<const std::byte> bytes() const { return {payload(), nbytes}; }
};

// Allocation, reference counting and reclamation for one Params type.
template <class P>
struct Nodes {
  using E = typename P::entry_type;
  using A = typename P::aug_type;
  using Aug = typename P::aug;
  using C = typename P::codec;
  using R = Regular<P>;
  using F = Flat<P>;

  static_assert(alignof(E) <= __STDCPP_DEFAULT_NEW_ALIGNMENT__);

  static R* regular(NodeBase* n) { return static_cast<R*>(n); }
  static const R* regular(const NodeBase* n) { return static_cast<const R*>(n); }
  static F* flat(NodeBase* n) { return static_cast<F*>(n); }
  static const F* flat(const NodeBase* n) { return static_cast<const F*>(n); }

  static std::size_t size(const NodeBase* n) { return n ? n->size : 0; }

  static A aug(const NodeBase* n) {
    if (!n) return Aug::identity();
    return n->flat() ? flat(n)->aug : regular(n)->aug;
  }

  static void retain(NodeBase* n) noexcept {
    if (!n) return;
    [[maybe_unused]] auto prev = n->word.fetch_add(1, std::memory_order_relaxed);
    PACTREE_DEBUG_REQUIRE((prev & kOwnerMask) != 0, "retain of a reclaimed node");
    PACTREE_REQUIRE((prev & kOwnerMask) != kOwnerMask, "owner count overflow");
  }

  static void release(NodeBase* n) noexcept {
    if (!n) return;
    const auto prev = n->word.fetch_sub(1, std::memory_order_acq_rel);
    PACTREE_REQUIRE((prev & kOwnerMask) != 0, "release below zero owners");
    if ((prev & kOwnerMask) == 1) destroy(n);
  }

  // Regular node over already-owned children. Reuses `shell` when given.
  static NodeBase* make_regular(NodeBase* l, E e, NodeBase* r, bool mark,
                                R* shell = nullptr) {
    const std::size_t n = size(l) + size(r) + 1;
    checked_size(n);
    // A mark means "expanded region somewhere below"; refold follows marks.
    mark = mark || (l && l->marked()) || (r && r->marked());
    A a = Aug::combine(aug(l), Aug::combine(Aug::lift(e), aug(r)));
    if (shell) {
      shell->~R();
      return new (shell) R(l, std::move(e), r, n, std::move(a), mark);
    }
    void* mem = ::operator new(sizeof(R));
    count_event(Event::allocation);
    count_event(Event::structural_bytes, sizeof(R));
    return new (mem) R(l, std::move(e), r, n, std::move(a), mark);
  }

  static NodeBase* make_flat(std::span<const E> es) {
    PACTREE_REQUIRE(!es.empty(), "empty block");
    const std::size_t nbytes = C::encoded_size(es);
    A a = Aug::identity();
    for (const E& e : es) a = Aug::combine(a, Aug::lift(e));
    void* mem = ::operator new(F::header_bytes() + nbytes);
    F* f = new (mem) F(es.size(), nbytes, std::move(a));
    try {
      C::encode(es, f->payload());
    } catch (...) {
      f->~F();
      ::operator delete(mem);
      throw;
    }
    if constexpr (!C::random_access) {
      f->bounds.first = entry_traits<E>::key(es.front());
      f->bounds.last = entry_traits<E>::key(es.back());
    }
    count_event(Event::allocation);
    count_event(Event::fold);
    count_event(Event::structural_bytes, F::header_bytes());
    count_event(Event::payload_bytes, static_cast<std::int64_t>(nbytes));
    return f;
  }

  // Memory of a uniquely owned regular node whose children were moved out.
  static void free_shell(R* r) noexcept {
    r->~R();
    ::operator delete(r);
    count_event(Event::reclaim);
    count_event(Event::structural_bytes, -static_cast<std::int64_t>(sizeof(R)));
  }

  static void destroy(NodeBase* n) noexcept {
    if (n->flat()) {
      F* f = flat(n);
      const std::size_t nbytes = f->nbytes;
      C::destroy(f->payload(), f->size);
      f->~F();
      ::operator delete(f);
      count_event(Event::reclaim);
      count_event(Event::structural_bytes,
                  -static_cast<std::int64_t>(F::header_bytes()));
      count_event(Event::payload_bytes, -static_cast<std::int64_t>(nbytes));
    } else {
      R* r = regular(n);
      NodeBase* l = r->left;
      NodeBase* rr = r->right;
      free_shell(r);
      release(l);
      release(rr);
    }
  }

  // Decodes a block, appending its entries to `out`.
  static void decode(const NodeBase* n, std::vector<E>& out) {
    const F* f = flat(n);
    count_event(Event::decode);
    if constexpr (C::random_access) {
      const E* p = C::view(f->payload());
      out.insert(out.end(), p, p + f->size);
    } else {
      C::decode(f->bytes(), f->size, out);
    }
  }
};

}  // namespace detail

// Extra pointer: a node reference plus a visibility bit. A visible pointer
// is borrowed from a caller that keeps the node alive for the duration of
// the operation; it must never be mutated and is retained when stored. A
// non-visible pointer owns one reference.
template <class P>
class Ptr {
  using NodeBase = detail::NodeBase;
  using N = detail::Nodes<P>;

 public:
  Ptr() = default;
  Ptr(std::nullptr_t) {}
  static Ptr owned(NodeBase* n) {
    Ptr p;
    p.n_ = n;
    return p;
  }
  static Ptr borrowed(NodeBase* n) {
    Ptr p;
    p.n_ = n;
    p.visible_ = n != nullptr;
    return p;
  }

  Ptr(Ptr&& o) noexcept
      : n_(std::exchange(o.n_, nullptr)), visible_(std::exchange(o.visible_, false)) {}
  Ptr& operator=(Ptr&& o) noexcept {
    if (this != &o) {
      reset();
      n_ = std::exchange(o.n_, nullptr);
      visible_ = std::exchange(o.visible_, false);
    }
    return *this;
  }
  Ptr(const Ptr&) = delete;
  Ptr& operator=(const Ptr&) = delete;
  ~Ptr() { reset(); }

  void reset() noexcept {
    if (n_ && !visible_) N::release(n_);
    n_ = nullptr;
    visible_ = false;
  }

  NodeBase* get() const { return n_; }
  explicit operator bool() const { return n_ != nullptr; }
  bool visible() const { return visible_; }
  std::size_t size() const { return N::size(n_); }
  bool flat() const { return n_ && n_->flat(); }
  bool marked() const { return n_ && n_->marked(); }
  // True when this pointer is the only route to the node.
  bool unique() const { return n_ && !visible_ && n_->owners() == 1; }

  // Borrowed view of the same node; valid while *this is alive.
  Ptr view() const { return borrowed(n_); }

  // Converts to one owned reference, retaining if borrowed.
  NodeBase* into_owned() && {
    NodeBase* n = std::exchange(n_, nullptr);
    if (n && visible_) N::retain(n);
    visible_ = false;
    return n;
  }

  // Hands back the raw pointer without touching the owner count.
  NodeBase* leak() && {
    visible_ = false;
    return std::exchange(n_, nullptr);
  }

 private:
  NodeBase* n_ = nullptr;
  bool visible_ = false;
};

template <class P>
class Core;

// Owning handle to an immutable tree. Copies share structure.
template <class P>
class Tree {
  using NodeBase = detail::NodeBase;
  using N = detail::Nodes<P>;

 public:
  using params = P;
  using entry_type = typename P::entry_type;
  using aug_type = typename P::aug_type;

  Tree() = default;
  Tree(const Tree& o) : root_(o.root_) { N::retain(root_); }
  Tree(Tree&& o) noexcept : root_(std::exchange(o.root_, nullptr)) {}
  Tree& operator=(const Tree& o) {
    if (this != &o) {
      N::retain(o.root_);
      N::release(root_);
      root_ = o.root_;
    }
    return *this;
  }
  Tree& operator=(Tree&& o) noexcept {
    if (this != &o) {
      N::release(root_);
      root_ = std::exchange(o.root_, nullptr);
    }
    return *this;
  }
  ~Tree() { N::release(root_); }

  std::size_t size() const { return N::size(root_); }
  bool empty() const { return root_ == nullptr; }
  aug_type aug() const { return N::aug(root_); }
  const NodeBase* root() const { return root_; }

  // Same root node, i.e. physically shared.
  friend bool same_node(const Tree& a, const Tree& b) { return a.root_ == b.root_; }

  // Manual owner-count control for foreign-language bindings.
  void retain() const { N::retain(root_); }
  void release_root() {
    N::release(std::exchange(root_, nullptr));
  }

  static Tree adopt(Ptr<P>&& p) {
    Tree t;
    t.root_ = std::move(p).into_owned();
    return t;
  }

 private:
  template <class>
  friend class Input;
  NodeBase* root_ = nullptr;
};

// Argument adaptor: an lvalue Tree is borrowed (the caller keeps it, so the
// operation copies paths), an rvalue Tree is consumed and its uniquely owned
// nodes may be rewritten in place.
template <class P>
class Input {
 public:
  Input(const Tree<P>& t) : p_(Ptr<P>::borrowed(t.root_)) {}
  Input(Tree<P>&& t) : p_(Ptr<P>::owned(std::exchange(t.root_, nullptr))) {}
  Ptr<P> take() && { return std::move(p_); }
  const Ptr<P>& peek() const { return p_; }

 private:
  Ptr<P> p_;
};

}  // namespace pactree
