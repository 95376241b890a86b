// SPDX-License-Identifier: Apache-2.0
#pragma once

// Structural checker and shape statistics. The checker recomputes every
// cached field bottom-up and reports each violation it finds.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "pactree/core.hpp"

namespace pactree {

struct Shape {
  std::size_t regular_nodes = 0;
  std::size_t flat_nodes = 0;
  std::size_t marked_nodes = 0;
  std::size_t height = 0;
  std::size_t min_block = 0;
  std::size_t max_block = 0;
  std::size_t structural_bytes = 0;  // regular nodes and block headers
  std::size_t payload_bytes = 0;     // encoded block contents

  std::size_t total_bytes() const { return structural_bytes + payload_bytes; }
};

struct Report {
  std::vector<std::string> violations;
  Shape shape;

  bool ok() const { return violations.empty(); }
  std::string summary() const {
    std::string s;
    for (std::size_t i = 0; i < violations.size() && i < 8; ++i)
      s += violations[i] + "\n";
    if (violations.size() > 8)
      s += "... " + std::to_string(violations.size() - 8) + " more\n";
    return s;
  }
};

// Largest height allowed by weight balance: log base 1/(1-alpha) of w(T).
inline double height_bound(double alpha, std::size_t size) {
  return std::log(static_cast<double>(size + 1)) / std::log(1.0 / (1.0 - alpha));
}

template <class P>
class Checker {
  using CoreT = Core<P>;
  using E = typename P::entry_type;
  using A = typename P::aug_type;
  using Aug = typename P::aug;
  using C = typename P::codec;
  using traits = entry_traits<E>;
  using K = typename traits::key_type;
  using NodeBase = detail::NodeBase;
  using N = detail::Nodes<P>;

 public:
  explicit Checker(const Config& cfg) : cfg_(cfg) {}

  Report run(const Tree<P>& t) {
    report_ = {};
    const NodeBase* root = t.root();
    blocked_ = t.size() >= cfg_.block;
    have_prev_ = false;
    visit(root, 1);
    if (report_.shape.flat_nodes == 0) report_.shape.min_block = 0;
    return std::move(report_);
  }

 private:
  void fail(const std::string& what) { report_.violations.push_back(what); }

  template <class T>
  static bool same(const T& a, const T& b) {
    if constexpr (std::equality_comparable<T>) return a == b;
    else return true;
  }

  void key(const E& e) {
    if constexpr (P::ordered) {
      if (have_prev_ && !(traits::key(prev_) < traits::key(e)))
        fail("keys not strictly increasing");
    }
    prev_ = e;
    have_prev_ = true;
  }

  // Returns the recomputed aug; checks everything below n.
  A visit(const NodeBase* n, std::size_t depth) {
    if (!n) return Aug::identity();
    Shape& sh = report_.shape;
    sh.height = std::max(sh.height, depth);
    if (n->owners() == 0) fail("reachable node with zero owners");
    if (n->marked()) ++sh.marked_nodes;
    if (n->flat()) return visit_flat(n);

    const auto* r = N::regular(n);
    ++sh.regular_nodes;
    sh.structural_bytes += sizeof(detail::Regular<P>);
    const std::size_t ls = N::size(r->left), rs = N::size(r->right);
    if (r->size != ls + rs + 1) fail("size field mismatch");
    const double w = static_cast<double>(ls + rs + 2);
    const double lo = cfg_.alpha * w - 1e-9;
    if (static_cast<double>(ls + 1) < lo || static_cast<double>(rs + 1) < lo) {
      std::ostringstream os;
      os << "weight balance violated: sizes " << ls << "/" << rs;
      fail(os.str());
    }
    if (blocked_ && (!r->left || !r->right))
      fail("regular node with an empty child in a blocked tree");
    A la = visit(r->left, depth + 1);
    key(r->entry);
    A ra = visit(r->right, depth + 1);
    A a = Aug::combine(la, Aug::combine(Aug::lift(r->entry), ra));
    if (!same(a, r->aug)) fail("aug mismatch at regular node");
    return a;
  }

  A visit_flat(const NodeBase* n) {
    Shape& sh = report_.shape;
    const auto* f = N::flat(n);
    ++sh.flat_nodes;
    sh.structural_bytes += detail::Flat<P>::header_bytes();
    sh.payload_bytes += f->nbytes;
    const std::size_t c = f->size;
    sh.min_block = sh.flat_nodes == 1 ? c : std::min(sh.min_block, c);
    sh.max_block = std::max(sh.max_block, c);
    if (!blocked_) fail("flat node in a tree smaller than B");
    if (c < cfg_.block || c > 2 * cfg_.block) {
      std::ostringstream os;
      os << "block of " << c << " entries outside [" << cfg_.block << ", "
         << 2 * cfg_.block << "]";
      fail(os.str());
    }
    std::vector<E> es;
    try {
      C::decode(f->bytes(), c, es);
    } catch (const CodecError& e) {
      fail(std::string("block does not decode: ") + e.what());
      return f->aug;
    }
    if (es.size() != c) fail("decoded count differs from header");
    if (C::encoded_size(es) != f->nbytes) fail("encoded size differs from header");
    if constexpr (!C::random_access) {
      if (!es.empty() && (f->bounds.first != traits::key(es.front()) ||
                          f->bounds.last != traits::key(es.back())))
        fail("cached key bounds differ from block contents");
    }
    A a = Aug::identity();
    for (const E& e : es) {
      key(e);
      a = Aug::combine(a, Aug::lift(e));
    }
    if (!same(a, f->aug)) fail("aug mismatch at flat node");
    return a;
  }

  Config cfg_;
  Report report_;
  bool blocked_ = false;
  bool have_prev_ = false;
  E prev_{};
};

template <class P>
Report check(const Config& cfg, const Tree<P>& t) {
  return Checker<P>(cfg).run(t);
}

template <class P>
Report check(const Core<P>& core, const Tree<P>& t) {
  return check(core.config(), t);
}

}  // namespace pactree
