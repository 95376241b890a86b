// SPDX-License-Identifier: Apache-2.0
#include "pactree.h"

#include <exception>
#include <new>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "pactree/graph.hpp"
#include "pactree/invariants.hpp"
#include "pactree/ordmap.hpp"
#include "pactree/parallel.hpp"

using namespace pactree;

namespace {

using u64 = std::uint64_t;
using Sum = sum_values<u64>;
using PlainMap = ordered_map<u64, u64, Sum, identity_encoding>;
using DiffMap = ordered_map<u64, u64, Sum, diff_encoding>;

template <class Ops>
struct Held {
  Ops ops;
  typename Ops::TreeT tree;
};

thread_local std::string last_error;

pt_status fail(pt_status s, const std::string& what) {
  last_error = what;
  return s;
}

// Runs f, translating exceptions into status codes.
template <class F>
pt_status guard(F&& f) {
  try {
    f();
    return PT_OK;
  } catch (const NotFoundError& e) {
    return fail(PT_NOT_FOUND, e.what());
  } catch (const ParseError& e) {
    return fail(PT_PARSE_ERROR, e.what());
  } catch (const IoError& e) {
    return fail(PT_IO_ERROR, e.what());
  } catch (const CodecError& e) {
    return fail(PT_CODEC_ERROR, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(PT_INVALID_ARGUMENT, e.what());
  } catch (const std::out_of_range& e) {
    return fail(PT_OUT_OF_RANGE, e.what());
  } catch (const std::bad_alloc&) {
    return fail(PT_OUT_OF_MEMORY, "out of memory");
  } catch (const std::exception& e) {
    return fail(PT_INTERNAL, e.what());
  } catch (...) {
    return fail(PT_INTERNAL, "unknown exception");
  }
}

void need(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

Config to_config(const pt_config* c) {
  Config cfg;
  if (c) {
    if (c->alpha != 0.0) cfg.alpha = c->alpha;
    if (c->block) cfg.block = c->block;
    cfg.kappa = c->kappa;
    cfg.grain = c->grain;
    need(c->encoding == PT_ENCODING_IDENTITY || c->encoding == PT_ENCODING_DIFF,
         "unknown encoding");
  }
  validate(cfg);
  return cfg;
}

}  // namespace

struct pt_map {
  std::variant<Held<PlainMap>, Held<DiffMap>> v;
};

struct pt_graph {
  GraphStore store;
  Graph g;
};

namespace {

pt_map* make_map(const pt_config* c) {
  const Config cfg = to_config(c);
  if (c && c->encoding == PT_ENCODING_DIFF) return new pt_map{Held<DiffMap>{DiffMap(cfg), {}}};
  return new pt_map{Held<PlainMap>{PlainMap(cfg), {}}};
}

// A new handle with the same ops and the given tree.
template <class H>
pt_map* derive(const H& h, typename decltype(H::ops)::TreeT t) {
  return new pt_map{H{h.ops, std::move(t)}};
}

template <class Ops>
std::vector<typename Ops::E> pairs(const u64* keys, const u64* values, std::size_t n) {
  need(n == 0 || keys, "keys is null");
  std::vector<typename Ops::E> es;
  es.reserve(n);
  for (std::size_t i = 0; i < n; ++i) es.push_back({keys[i], values ? values[i] : 0});
  return es;
}

template <class F>
pt_status with_map(const pt_map* m, F&& f) {
  if (!m) return fail(PT_INVALID_ARGUMENT, "map handle is null");
  return guard([&] { std::visit(f, m->v); });
}

template <class F>
pt_status binary(const pt_map* a, const pt_map* b, pt_map** out, F&& f) {
  if (!a || !b || !out) return fail(PT_INVALID_ARGUMENT, "null argument");
  return guard([&] {
    need(a->v.index() == b->v.index(), "maps use different encodings");
    std::visit(
        [&](const auto& ha) {
          using H = std::decay_t<decltype(ha)>;
          const H& hb = std::get<H>(b->v);
          need(ha.ops.config().block == hb.ops.config().block &&
                   ha.ops.config().alpha == hb.ops.config().alpha,
               "maps use different block sizes or balance factors");
          *out = derive(ha, f(ha.ops, ha.tree, hb.tree));
        },
        a->v);
  });
}

std::vector<Edge> edge_batch(const u64* src, const u64* dst, std::size_t n) {
  need(n == 0 || (src && dst), "edge arrays are null");
  std::vector<Edge> es(n);
  for (std::size_t i = 0; i < n; ++i) es[i] = {src[i], dst[i]};
  return es;
}

}  // namespace

extern "C" {

const char* pt_version(void) { return "1.0.0"; }

const char* pt_last_error(void) { return last_error.c_str(); }

const char* pt_status_name(pt_status s) {
  switch (s) {
    case PT_OK: return "ok";
    case PT_INVALID_ARGUMENT: return "invalid argument";
    case PT_NOT_FOUND: return "not found";
    case PT_OUT_OF_RANGE: return "out of range";
    case PT_BUFFER_TOO_SMALL: return "buffer too small";
    case PT_CODEC_ERROR: return "codec error";
    case PT_PARSE_ERROR: return "parse error";
    case PT_IO_ERROR: return "i/o error";
    case PT_OUT_OF_MEMORY: return "out of memory";
    case PT_INTERNAL: return "internal error";
  }
  return "unknown status";
}

pt_status pt_set_threads(size_t n) {
  return guard([&] { set_num_threads(n); });
}

size_t pt_threads(void) { return num_threads(); }

void pt_get_counters(pt_counters* out) {
  if (!out) return;
  const Counters c = counters();
  *out = {c.unfolds,  c.folds,  c.decodes, c.allocations,
          c.reclaims, c.live(), c.structural_bytes, c.payload_bytes};
}

// ---- maps

pt_status pt_map_new(const pt_config* cfg, pt_map** out) {
  if (!out) return fail(PT_INVALID_ARGUMENT, "out is null");
  return guard([&] { *out = make_map(cfg); });
}

pt_status pt_map_build(const pt_config* cfg, const uint64_t* keys, const uint64_t* values,
                       size_t n, pt_map** out) {
  if (!out) return fail(PT_INVALID_ARGUMENT, "out is null");
  return guard([&] {
    pt_map* m = make_map(cfg);
    try {
      std::visit(
          [&](auto& h) {
            using Ops = decltype(h.ops);
            h.tree = h.ops.build(pairs<Ops>(keys, values, n));
          },
          m->v);
    } catch (...) {
      delete m;
      throw;
    }
    *out = m;
  });
}

pt_status pt_map_clone(const pt_map* m, pt_map** out) {
  if (!m || !out) return fail(PT_INVALID_ARGUMENT, "null argument");
  return guard([&] { *out = new pt_map(*m); });
}

void pt_map_free(pt_map* m) { delete m; }

size_t pt_map_size(const pt_map* m) {
  if (!m) return 0;
  return std::visit([](const auto& h) { return h.tree.size(); }, m->v);
}

uint64_t pt_map_sum(const pt_map* m) {
  if (!m) return 0;
  return std::visit([](const auto& h) -> u64 { return h.tree.aug(); }, m->v);
}

pt_status pt_map_find(const pt_map* m, uint64_t key, uint64_t* value, int* found) {
  if (!found) return fail(PT_INVALID_ARGUMENT, "found is null");
  return with_map(m, [&](const auto& h) {
    auto v = h.ops.find(h.tree, key);
    *found = v.has_value();
    if (v && value) *value = *v;
  });
}

pt_status pt_map_rank(const pt_map* m, uint64_t key, size_t* rank) {
  if (!rank) return fail(PT_INVALID_ARGUMENT, "rank is null");
  return with_map(m, [&](const auto& h) { *rank = h.ops.rank(h.tree, key); });
}

pt_status pt_map_select(const pt_map* m, size_t i, uint64_t* key, uint64_t* value) {
  return with_map(m, [&](const auto& h) {
    if (i >= h.tree.size())
      throw std::out_of_range("select index " + std::to_string(i) + " outside a map of " +
                              std::to_string(h.tree.size()));
    auto e = h.ops.select(h.tree, i);
    if (key) *key = e.key;
    if (value) *value = e.value;
  });
}

pt_status pt_map_aug_range(const pt_map* m, uint64_t lo, uint64_t hi, uint64_t* sum) {
  if (!sum) return fail(PT_INVALID_ARGUMENT, "sum is null");
  return with_map(m, [&](const auto& h) { *sum = h.ops.aug_range(h.tree, lo, hi); });
}

pt_status pt_map_entries(const pt_map* m, uint64_t* keys, uint64_t* values, size_t cap,
                         size_t* n) {
  if (!n) return fail(PT_INVALID_ARGUMENT, "n is null");
  bool small = false;
  pt_status s = with_map(m, [&](const auto& h) {
    *n = h.tree.size();
    if (cap < *n) {
      small = true;
      return;
    }
    need(*n == 0 || keys, "keys is null");
    std::size_t i = 0;
    h.ops.for_each(h.tree, [&](const auto& e) {
      keys[i] = e.key;
      if (values) values[i] = e.value;
      ++i;
    });
  });
  if (s == PT_OK && small)
    return fail(PT_BUFFER_TOO_SMALL, "buffer holds " + std::to_string(cap) + " of " +
                                         std::to_string(*n) + " entries");
  return s;
}

pt_status pt_map_insert(const pt_map* m, uint64_t key, uint64_t value, pt_map** out) {
  if (!out) return fail(PT_INVALID_ARGUMENT, "out is null");
  return with_map(m, [&](const auto& h) {
    *out = derive(h, h.ops.insert(h.tree, {key, value}));
  });
}

pt_status pt_map_remove(const pt_map* m, uint64_t key, pt_map** out) {
  if (!out) return fail(PT_INVALID_ARGUMENT, "out is null");
  return with_map(m, [&](const auto& h) { *out = derive(h, h.ops.remove(h.tree, key)); });
}

pt_status pt_map_insert_inplace(pt_map* m, uint64_t key, uint64_t value) {
  if (!m) return fail(PT_INVALID_ARGUMENT, "map handle is null");
  return guard([&] {
    std::visit([&](auto& h) { h.tree = h.ops.insert(std::move(h.tree), {key, value}); }, m->v);
  });
}

pt_status pt_map_remove_inplace(pt_map* m, uint64_t key) {
  if (!m) return fail(PT_INVALID_ARGUMENT, "map handle is null");
  return guard([&] {
    std::visit([&](auto& h) { h.tree = h.ops.remove(std::move(h.tree), key); }, m->v);
  });
}

pt_status pt_map_union(const pt_map* a, const pt_map* b, pt_map** out) {
  return binary(a, b, out, [](const auto& ops, const auto& x, const auto& y) {
    return ops.map_union(x, y);
  });
}

pt_status pt_map_intersect(const pt_map* a, const pt_map* b, pt_map** out) {
  return binary(a, b, out, [](const auto& ops, const auto& x, const auto& y) {
    return ops.map_intersect(x, y);
  });
}

pt_status pt_map_difference(const pt_map* a, const pt_map* b, pt_map** out) {
  return binary(a, b, out, [](const auto& ops, const auto& x, const auto& y) {
    return ops.map_difference(x, y);
  });
}

pt_status pt_map_multi_insert(const pt_map* m, const uint64_t* keys, const uint64_t* values,
                              size_t n, pt_map** out) {
  if (!out) return fail(PT_INVALID_ARGUMENT, "out is null");
  return with_map(m, [&](const auto& h) {
    using Ops = std::decay_t<decltype(h.ops)>;
    *out = derive(h, h.ops.multi_insert(h.tree, pairs<Ops>(keys, values, n)));
  });
}

pt_status pt_map_multi_delete(const pt_map* m, const uint64_t* keys, size_t n, pt_map** out) {
  if (!out) return fail(PT_INVALID_ARGUMENT, "out is null");
  return with_map(m, [&](const auto& h) {
    need(n == 0 || keys, "keys is null");
    *out = derive(h, h.ops.multi_delete(h.tree, std::vector<u64>(keys, keys + n)));
  });
}

pt_status pt_map_range(const pt_map* m, uint64_t lo, uint64_t hi, pt_map** out) {
  if (!out) return fail(PT_INVALID_ARGUMENT, "out is null");
  return with_map(m, [&](const auto& h) { *out = derive(h, h.ops.range(h.tree, lo, hi)); });
}

pt_status pt_map_filter(const pt_map* m, int (*pred)(uint64_t, uint64_t, void*), void* ctx,
                        pt_map** out) {
  if (!out || !pred) return fail(PT_INVALID_ARGUMENT, "null argument");
  return with_map(m, [&](const auto& h) {
    *out = derive(h, h.ops.filter(h.tree, [&](const auto& e) {
      return pred(e.key, e.value, ctx) != 0;
    }));
  });
}

pt_status pt_map_space(const pt_map* m, pt_space* out) {
  if (!out) return fail(PT_INVALID_ARGUMENT, "out is null");
  return with_map(m, [&](const auto& h) {
    Report r = check(h.ops.core(), h.tree);
    if (!r.ok()) throw std::logic_error(r.summary());
    *out = {r.shape.regular_nodes, r.shape.flat_nodes, r.shape.height,
            r.shape.structural_bytes, r.shape.payload_bytes};
  });
}

pt_status pt_map_validate(const pt_map* m) {
  return with_map(m, [&](const auto& h) {
    Report r = check(h.ops.core(), h.tree);
    if (!r.ok()) throw std::logic_error(r.summary());
  });
}

// ---- graphs

pt_status pt_graph_new(size_t vertex_block, size_t edge_block, pt_graph** out) {
  return pt_graph_from_edges(vertex_block, edge_block, nullptr, nullptr, 0, out);
}

pt_status pt_graph_from_edges(size_t vertex_block, size_t edge_block, const uint64_t* src,
                              const uint64_t* dst, size_t n, pt_graph** out) {
  if (!out) return fail(PT_INVALID_ARGUMENT, "out is null");
  return guard([&] {
    GraphStore store(vertex_block ? vertex_block : 64, edge_block ? edge_block : 64);
    Graph g = store.from_edge_list(edge_batch(src, dst, n));
    *out = new pt_graph{store, std::move(g)};
  });
}

pt_status pt_graph_read(const char* path, int symmetric, size_t vertex_block, size_t edge_block,
                        pt_graph** out) {
  if (!out || !path) return fail(PT_INVALID_ARGUMENT, "null argument");
  return guard([&] {
    std::vector<Edge> es = read_edge_list(path);
    if (symmetric) es = symmetrize(std::move(es));
    GraphStore store(vertex_block ? vertex_block : 64, edge_block ? edge_block : 64);
    Graph g = store.from_edge_list(std::move(es));
    *out = new pt_graph{store, std::move(g)};
  });
}

pt_status pt_graph_clone(const pt_graph* g, pt_graph** out) {
  if (!g || !out) return fail(PT_INVALID_ARGUMENT, "null argument");
  return guard([&] { *out = new pt_graph(*g); });
}

void pt_graph_free(pt_graph* g) { delete g; }

pt_status pt_graph_insert_edges(const pt_graph* g, const uint64_t* src, const uint64_t* dst,
                                size_t n, pt_graph** out) {
  if (!g || !out) return fail(PT_INVALID_ARGUMENT, "null argument");
  return guard([&] {
    Graph h = g->store.insert_edges(g->g, edge_batch(src, dst, n));
    *out = new pt_graph{g->store, std::move(h)};
  });
}

pt_status pt_graph_delete_edges(const pt_graph* g, const uint64_t* src, const uint64_t* dst,
                                size_t n, pt_graph** out) {
  if (!g || !out) return fail(PT_INVALID_ARGUMENT, "null argument");
  return guard([&] {
    Graph h = g->store.delete_edges(g->g, edge_batch(src, dst, n));
    *out = new pt_graph{g->store, std::move(h)};
  });
}

uint64_t pt_graph_edge_count(const pt_graph* g) { return g ? GraphStore::edge_count(g->g) : 0; }

size_t pt_graph_vertex_count(const pt_graph* g) { return g ? GraphStore::vertex_count(g->g) : 0; }

size_t pt_graph_degree(const pt_graph* g, uint64_t v) {
  return g ? GraphStore::degree(g->g, v) : 0;
}

int pt_graph_has_edge(const pt_graph* g, uint64_t u, uint64_t v) {
  return g && GraphStore::has_edge(g->g, u, v);
}

pt_status pt_graph_edges(const pt_graph* g, uint64_t* src, uint64_t* dst, size_t cap,
                         size_t* n) {
  if (!g || !n) return fail(PT_INVALID_ARGUMENT, "null argument");
  *n = GraphStore::edge_count(g->g);
  if (cap < *n)
    return fail(PT_BUFFER_TOO_SMALL, "buffer holds " + std::to_string(cap) + " of " +
                                         std::to_string(*n) + " edges");
  return guard([&] {
    need(*n == 0 || (src && dst), "edge arrays are null");
    std::size_t i = 0;
    for (const Edge& e : GraphStore::edges(g->g)) {
      src[i] = e.src;
      dst[i] = e.dst;
      ++i;
    }
  });
}

pt_status pt_graph_bfs(const pt_graph* g, uint64_t source, uint64_t* vertices, uint64_t* dist,
                       size_t cap, size_t* n) {
  if (!g || !n) return fail(PT_INVALID_ARGUMENT, "null argument");
  bool small = false;
  pt_status s = guard([&] {
    auto d = g->store.bfs(g->g, source);
    *n = d.size();
    if (cap < d.size()) {
      small = true;
      return;
    }
    need(d.empty() || (vertices && dist), "output arrays are null");
    for (std::size_t i = 0; i < d.size(); ++i) {
      vertices[i] = d[i].first;
      dist[i] = d[i].second;
    }
  });
  if (s == PT_OK && small)
    return fail(PT_BUFFER_TOO_SMALL, "buffer holds " + std::to_string(cap) + " of " +
                                         std::to_string(*n) + " distances");
  return s;
}

pt_status pt_graph_space(const pt_graph* g, size_t* structural_bytes, size_t* edge_payload_bytes,
                         size_t* vertex_payload_bytes) {
  if (!g) return fail(PT_INVALID_ARGUMENT, "graph handle is null");
  return guard([&] {
    GraphSpace s = g->store.space(g->g);
    if (structural_bytes) *structural_bytes = s.structural_bytes;
    if (edge_payload_bytes) *edge_payload_bytes = s.edge_payload_bytes;
    if (vertex_payload_bytes) *vertex_payload_bytes = s.vertex_payload_bytes;
  });
}

}  // extern "C"
