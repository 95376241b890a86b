// SPDX-License-Identifier: Apache-2.0
#pragma once

// Graphs as nested PaC-trees: a vertex tree mapping each vertex id to an
// edge tree (the sorted, difference-encoded set of its out-neighbors). The
// vertex tree is augmented with edge-tree sizes, so the edge count is read
// at the root. A Graph is an immutable snapshot; updates return new ones.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <tbb/enumerable_thread_specific.h>
#include <tbb/parallel_for.h>

#include "pactree/export.h"
#include "pactree/invariants.hpp"
#include "pactree/ordmap.hpp"

namespace pactree {

using VertexId = std::uint64_t;

struct Edge {
  VertexId src;
  VertexId dst;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

class NotFoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& detail, const std::string& source = {})
      : std::runtime_error((source.empty() ? "line " : source + ":") + std::to_string(line) +
                           ": " + detail),
        line_(line),
        detail_(detail) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Edge-list text: one "u v" pair per line, '#' comment lines and blank
// lines skipped.
PACTREE_API std::vector<Edge> parse_edge_list(std::istream& in);
PACTREE_API std::vector<Edge> read_edge_list(const std::string& path);
// Adds v->u for every u->v.
PACTREE_API std::vector<Edge> symmetrize(std::vector<Edge> edges);

using EdgeParams = Params<VertexId, no_aug, diff_encoding>;
using EdgeTree = Tree<EdgeParams>;
using EdgeSet = OrderedMap<EdgeParams>;

struct edge_count {
  using value_type = std::uint64_t;
  static value_type identity() { return 0; }
  static value_type lift(const KeyValue<VertexId, EdgeTree>& e) { return e.value.size(); }
  static value_type combine(value_type a, value_type b) { return a + b; }
};

using VertexParams = Params<KeyValue<VertexId, EdgeTree>, edge_count, identity_encoding>;
using VertexTree = Tree<VertexParams>;
using VertexMap = OrderedMap<VertexParams>;

struct Graph {
  VertexTree vertices;
};

struct GraphSpace {
  std::size_t structural_bytes = 0;    // regular nodes and block headers, both levels
  std::size_t edge_payload_bytes = 0;  // encoded edge-tree blocks
  std::size_t vertex_payload_bytes = 0;
  std::size_t edges = 0;

  std::size_t total_bytes() const {
    return structural_bytes + edge_payload_bytes + vertex_payload_bytes;
  }
};

class GraphStore {
 public:
  using VertexEntry = KeyValue<VertexId, EdgeTree>;

  explicit GraphStore(std::size_t vertex_block = 64, std::size_t edge_block = 64)
      : vertices_(Config{.block = vertex_block}), edges_(Config{.block = edge_block}) {}

  const VertexMap& vertex_ops() const { return vertices_; }
  const EdgeSet& edge_ops() const { return edges_; }

  Graph from_edge_list(std::vector<Edge> edges) const {
    return insert_edges(Graph{}, std::move(edges));
  }

  // Adds the distinct edges of the batch; both endpoints become vertices.
  Graph insert_edges(const Graph& g, std::vector<Edge> batch) const {
    normalize(batch);
    std::vector<VertexEntry> groups = group(batch, true);
    auto combine = [this](const EdgeTree& a, const EdgeTree& b) {
      return edges_.map_union(a, b);
    };
    return {vertices_.multi_insert(g.vertices, std::move(groups), combine)};
  }

  // Removes the batch's edges that exist. Vertices are kept.
  Graph delete_edges(const Graph& g, std::vector<Edge> batch) const {
    normalize(batch);
    std::vector<VertexEntry> groups = group(batch, false);
    std::erase_if(groups, [&](const VertexEntry& e) {
      return !VertexMap::contains(g.vertices, e.key);
    });
    auto combine = [this](const EdgeTree& a, const EdgeTree& b) {
      return edges_.map_difference(a, b);
    };
    return {vertices_.multi_insert(g.vertices, std::move(groups), combine)};
  }

  static std::uint64_t edge_count(const Graph& g) { return g.vertices.aug(); }
  static std::size_t vertex_count(const Graph& g) { return g.vertices.size(); }

  static std::size_t degree(const Graph& g, VertexId v) {
    auto e = VertexMap::find_entry(g.vertices, v);
    return e ? e->value.size() : 0;
  }

  static bool has_vertex(const Graph& g, VertexId v) { return VertexMap::contains(g.vertices, v); }

  static bool has_edge(const Graph& g, VertexId u, VertexId v) {
    auto e = VertexMap::find_entry(g.vertices, u);
    return e && EdgeSet::contains(e->value, v);
  }

  static std::vector<VertexId> neighbors(const Graph& g, VertexId v) {
    auto e = VertexMap::find_entry(g.vertices, v);
    if (!e) return {};
    return EdgeSet::entries(e->value);
  }

  static std::vector<Edge> edges(const Graph& g) {
    std::vector<Edge> out;
    out.reserve(edge_count(g));
    VertexMap::for_each(g.vertices, [&](const VertexEntry& e) {
      EdgeSet::for_each(e.value, [&](VertexId d) { out.push_back({e.key, d}); });
    });
    return out;
  }

  // Unweighted distances from src, as (vertex, distance) sorted by vertex.
  // Unreachable vertices are absent.
  std::vector<std::pair<VertexId, std::uint64_t>> bfs(const Graph& g, VertexId src) const {
    const VertexTree& vt = g.vertices;
    if (!VertexMap::contains(vt, src))
      throw NotFoundError("bfs source " + std::to_string(src) + " is not a vertex");
    constexpr std::uint64_t kUnseen = ~std::uint64_t{0};
    const std::size_t n = vt.size();
    std::vector<std::atomic<std::uint64_t>> dist(n);
    for (auto& d : dist) d.store(kUnseen, std::memory_order_relaxed);

    std::vector<std::size_t> frontier{VertexMap::rank(vt, src)};
    dist[frontier[0]].store(0, std::memory_order_relaxed);
    for (std::uint64_t level = 1; !frontier.empty(); ++level) {
      tbb::enumerable_thread_specific<std::vector<std::size_t>> next;
      tbb::parallel_for(std::size_t{0}, frontier.size(), [&](std::size_t i) {
        const VertexEntry u = VertexMap::select(vt, frontier[i]);
        auto& local = next.local();
        EdgeSet::for_each(u.value, [&](VertexId v) {
          const std::size_t j = VertexMap::rank(vt, v);
          std::uint64_t expect = kUnseen;
          if (dist[j].compare_exchange_strong(expect, level, std::memory_order_relaxed))
            local.push_back(j);
        });
      });
      frontier.clear();
      for (auto& part : next) frontier.insert(frontier.end(), part.begin(), part.end());
      std::sort(frontier.begin(), frontier.end());
    }

    std::vector<std::pair<VertexId, std::uint64_t>> out;
    std::size_t i = 0;
    VertexMap::for_each(vt, [&](const VertexEntry& e) {
      const std::uint64_t d = dist[i++].load(std::memory_order_relaxed);
      if (d != kUnseen) out.emplace_back(e.key, d);
    });
    return out;
  }

  // Byte accounting over both levels. Edge trees shared between snapshots
  // are counted once per reference.
  GraphSpace space(const Graph& g) const {
    GraphSpace s;
    Report vr = check(vertices_.core(), g.vertices);
    s.structural_bytes += vr.shape.structural_bytes;
    s.vertex_payload_bytes += vr.shape.payload_bytes;
    VertexMap::for_each(g.vertices, [&](const VertexEntry& e) {
      Shape sh = check(edges_.core(), e.value).shape;
      s.structural_bytes += sh.structural_bytes;
      s.edge_payload_bytes += sh.payload_bytes;
      s.edges += e.value.size();
    });
    return s;
  }

  // Full structural check of both levels.
  Report validate(const Graph& g) const {
    Report r = check(vertices_.core(), g.vertices);
    std::uint64_t total = 0;
    VertexMap::for_each(g.vertices, [&](const VertexEntry& e) {
      Report er = check(edges_.core(), e.value);
      for (auto& v : er.violations)
        r.violations.push_back("edge tree of " + std::to_string(e.key) + ": " + v);
      total += e.value.size();
    });
    if (total != g.vertices.aug()) r.violations.push_back("edge count aug mismatch");
    return r;
  }

 private:
  static void normalize(std::vector<Edge>& batch) {
    std::sort(batch.begin(), batch.end());
    batch.erase(std::unique(batch.begin(), batch.end()), batch.end());
  }

  // One entry per source with its sorted targets; with `endpoints`, also an
  // empty entry for every target so that it exists as a vertex.
  std::vector<VertexEntry> group(const std::vector<Edge>& batch, bool endpoints) const {
    std::vector<VertexEntry> out;
    std::vector<VertexId> targets;
    for (std::size_t i = 0; i < batch.size();) {
      std::size_t j = i;
      targets.clear();
      for (; j < batch.size() && batch[j].src == batch[i].src; ++j)
        targets.push_back(batch[j].dst);
      out.push_back({batch[i].src, edges_.from_sorted(targets)});
      if (endpoints)
        for (VertexId d : targets) out.push_back({d, EdgeTree{}});
      i = j;
    }
    return out;
  }

  VertexMap vertices_;
  EdgeSet edges_;
};

}  // namespace pactree
