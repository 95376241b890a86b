// SPDX-License-Identifier: Apache-2.0
// Benchmark harness over the C interface. Emits CSV.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pactree.h"

namespace {

using u64 = std::uint64_t;

struct Failure : std::runtime_error {
  int code;
  Failure(int c, const std::string& what) : std::runtime_error(what), code(c) {}
};

void ok(pt_status s, const char* what) {
  if (s != PT_OK)
    throw Failure(2, std::string(what) + ": " + pt_status_name(s) + ": " + pt_last_error());
}

struct MapDeleter {
  void operator()(pt_map* m) const { pt_map_free(m); }
};
struct GraphDeleter {
  void operator()(pt_graph* g) const { pt_graph_free(g); }
};
using MapPtr = std::unique_ptr<pt_map, MapDeleter>;
using GraphPtr = std::unique_ptr<pt_graph, GraphDeleter>;

struct MicroConfig {
  std::string op = "build";
  std::size_t n = 100000;
  std::size_t m = 100000;
  std::size_t block = 128;
  std::string encoding = "identity";
  std::size_t threads = 0;
  u64 seed = 1;
  std::size_t trials = 3;
};

const std::vector<std::string> kOps = {"build",        "union",        "intersect", "difference",
                                       "find",         "insert",       "multi_insert",
                                       "multi_delete", "range",        "aug_range", "filter"};

// Distinct keys drawn uniformly from [0, 16 * universe).
std::vector<u64> distinct_keys(std::mt19937_64& rng, std::size_t count, std::size_t universe) {
  const u64 range = 16 * static_cast<u64>(std::max<std::size_t>(universe, 1));
  std::uniform_int_distribution<u64> d(0, range - 1);
  std::set<u64> s;
  while (s.size() < count && s.size() < range) s.insert(d(rng));
  std::vector<u64> ks(s.begin(), s.end());
  std::shuffle(ks.begin(), ks.end(), rng);
  return ks;
}

std::vector<u64> values_for(std::mt19937_64& rng, std::size_t count) {
  std::vector<u64> vs(count);
  for (auto& v : vs) v = rng() % 1000;
  return vs;
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t k = xs.size() / 2;
  return xs.size() % 2 ? xs[k] : (xs[k - 1] + xs[k]) / 2;
}

template <class F>
double time_ms(const F& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

struct Row {
  double median_ms = 0;
  std::size_t bytes_total = 0;
  std::size_t bytes_metadata = 0;
};

// Metadata is everything except entry bytes: node headers, child pointers,
// counts and aug values. Entries held by regular nodes count as data.
void measure(const pt_map* m, Row& row) {
  pt_space sp{};
  ok(pt_map_space(m, &sp), "space");
  row.bytes_total = sp.structural_bytes + sp.payload_bytes;
  row.bytes_metadata = sp.structural_bytes - sp.regular_nodes * 2 * sizeof(u64);
}

Row run_micro(const MicroConfig& c) {
  if (std::find(kOps.begin(), kOps.end(), c.op) == kOps.end())
    throw Failure(1, "unknown op '" + c.op + "'");
  if (c.trials < 1) throw Failure(1, "trials must be >= 1");
  ok(pt_set_threads(c.threads), "set threads");

  pt_config cfg{};
  cfg.block = c.block;
  cfg.encoding = c.encoding == "diff" ? PT_ENCODING_DIFF : PT_ENCODING_IDENTITY;

  std::mt19937_64 rng(c.seed);
  const std::vector<u64> ka = distinct_keys(rng, c.n, c.n);
  const std::vector<u64> va = values_for(rng, ka.size());
  const std::vector<u64> kb = distinct_keys(rng, c.m, c.n);
  const std::vector<u64> vb = values_for(rng, kb.size());
  std::vector<std::pair<u64, u64>> bounds(c.m);
  const u64 width = 16 * 100;  // about 100 entries per range query
  for (auto& [lo, hi] : bounds) {
    lo = rng() % (16 * static_cast<u64>(c.n));
    hi = lo + width;
  }

  pt_map* raw = nullptr;
  ok(pt_map_build(&cfg, ka.data(), va.data(), ka.size(), &raw), "build");
  MapPtr a(raw);
  ok(pt_map_build(&cfg, kb.data(), vb.data(), kb.size(), &raw), "build");
  MapPtr b(raw);

  Row row;
  MapPtr result;
  std::vector<double> times;
  for (std::size_t t = 0; t < c.trials; ++t) {
    pt_map* out = nullptr;
    u64 sink = 0;
    double ms = 0;
    if (c.op == "build") {
      ms = time_ms([&] { ok(pt_map_build(&cfg, ka.data(), va.data(), ka.size(), &out), "build"); });
    } else if (c.op == "union") {
      ms = time_ms([&] { ok(pt_map_union(a.get(), b.get(), &out), "union"); });
    } else if (c.op == "intersect") {
      ms = time_ms([&] { ok(pt_map_intersect(a.get(), b.get(), &out), "intersect"); });
    } else if (c.op == "difference") {
      ms = time_ms([&] { ok(pt_map_difference(a.get(), b.get(), &out), "difference"); });
    } else if (c.op == "find") {
      ms = time_ms([&] {
        for (u64 k : kb) {
          u64 v = 0;
          int found = 0;
          ok(pt_map_find(a.get(), k, &v, &found), "find");
          sink += found ? v : 0;
        }
      });
    } else if (c.op == "insert") {
      ok(pt_map_clone(a.get(), &out), "clone");
      ms = time_ms([&] {
        for (std::size_t i = 0; i < kb.size(); ++i)
          ok(pt_map_insert_inplace(out, kb[i], vb[i]), "insert");
      });
    } else if (c.op == "multi_insert") {
      ms = time_ms([&] {
        ok(pt_map_multi_insert(a.get(), kb.data(), vb.data(), kb.size(), &out), "multi_insert");
      });
    } else if (c.op == "multi_delete") {
      const std::size_t k = std::min(c.m, ka.size());
      ms = time_ms([&] { ok(pt_map_multi_delete(a.get(), ka.data(), k, &out), "multi_delete"); });
    } else if (c.op == "range") {
      ms = time_ms([&] {
        for (auto [lo, hi] : bounds) {
          pt_map* r = nullptr;
          ok(pt_map_range(a.get(), lo, hi, &r), "range");
          sink += pt_map_size(r);
          pt_map_free(r);
        }
      });
    } else if (c.op == "aug_range") {
      ms = time_ms([&] {
        for (auto [lo, hi] : bounds) {
          u64 s = 0;
          ok(pt_map_aug_range(a.get(), lo, hi, &s), "aug_range");
          sink += s;
        }
      });
    } else if (c.op == "filter") {
      auto even = [](u64 k, u64, void*) -> int { return k % 2 == 0; };
      ms = time_ms([&] { ok(pt_map_filter(a.get(), even, nullptr, &out), "filter"); });
    }
    if (sink == 0xffffffffffffffffULL) std::fputc('\0', stderr);
    times.push_back(ms);
    result.reset(out);
  }
  row.median_ms = median(times);
  measure(result ? result.get() : a.get(), row);
  return row;
}

const char* kMicroHeader = "op,n,m,B,encoding,threads,median_ms,bytes_total,bytes_metadata";

void print_row(std::ostream& os, const MicroConfig& c, const Row& r) {
  char ms[64];
  std::snprintf(ms, sizeof ms, "%.3f", r.median_ms);
  os << c.op << ',' << c.n << ',' << c.m << ',' << c.block << ',' << c.encoding << ','
     << pt_threads() << ',' << ms << ',' << r.bytes_total << ',' << r.bytes_metadata << '\n';
}

std::vector<std::pair<u64, u64>> random_edges(std::mt19937_64& rng, std::size_t count,
                                              u64 vertices) {
  std::vector<std::pair<u64, u64>> es(count);
  for (auto& [u, v] : es) {
    u = rng() % vertices;
    v = rng() % vertices;
  }
  return es;
}

// Comma-separated positive sizes; empty items are skipped.
std::vector<std::size_t> parse_sizes(const std::string& list, const std::string& flag) {
  std::vector<std::size_t> out;
  std::stringstream ss(list);
  for (std::string item; std::getline(ss, item, ',');) {
    if (item.empty()) continue;
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != item.size() || v == 0 || item[0] == '-')
      throw Failure(1, flag + ": '" + item + "' is not a positive integer");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

// Insert and delete throughput per batch size on the graph read from path.
void run_graph(std::ostream& os, const std::string& path, const std::vector<std::size_t>& batches,
               u64 seed, std::size_t trials, std::size_t threads, bool symmetric) {
  ok(pt_set_threads(threads), "set threads");
  pt_graph* raw = nullptr;
  ok(pt_graph_read(path.c_str(), symmetric, 0, 0, &raw), "read graph");
  GraphPtr g(raw);
  os << "batch_size,insert_edges_per_sec,delete_edges_per_sec\n";
  if (batches.empty()) return;
  const u64 edges = pt_graph_edge_count(g.get());
  const u64 vertices = std::max<u64>(pt_graph_vertex_count(g.get()), 1);

  // A separate stream from gen-graph, so batches are not the file's edges.
  std::seed_seq seq{seed, u64{1}};
  std::mt19937_64 rng(seq);
  for (std::size_t bs : batches) {
    std::size_t deleted = 0;
    std::vector<double> ins, del;
    for (std::size_t t = 0; t < std::max<std::size_t>(trials, 1); ++t) {
      auto batch = random_edges(rng, bs, vertices);
      std::vector<u64> src(bs), dst(bs);
      for (std::size_t i = 0; i < bs; ++i) std::tie(src[i], dst[i]) = batch[i];
      // Delete only edges that are new, so the round trip restores g.
      std::vector<u64> fs, fd;
      for (std::size_t i = 0; i < bs; ++i)
        if (!pt_graph_has_edge(g.get(), src[i], dst[i])) {
          fs.push_back(src[i]);
          fd.push_back(dst[i]);
        }
      pt_graph *g2 = nullptr, *g3 = nullptr;
      ins.push_back(time_ms([&] {
        ok(pt_graph_insert_edges(g.get(), src.data(), dst.data(), bs, &g2), "insert_edges");
      }));
      GraphPtr hold2(g2);
      del.push_back(time_ms([&] {
        ok(pt_graph_delete_edges(g2, fs.data(), fd.data(), fs.size(), &g3), "delete_edges");
      }));
      GraphPtr hold3(g3);
      deleted += fs.size();
      if (pt_graph_edge_count(g3) != edges)
        throw Failure(2, "insert/delete round trip changed the edge count");
    }
    const std::size_t reps = ins.size();
    auto rate = [](double count, double ms) { return ms > 0 ? count / (ms / 1000.0) : 0.0; };
    char line[128];
    std::snprintf(line, sizeof line, "%zu,%.0f,%.0f\n", bs, rate(static_cast<double>(bs), median(ins)),
                  rate(static_cast<double>(deleted) / static_cast<double>(reps), median(del)));
    os << line;
  }
}

void generate_graph(std::ostream& os, std::size_t vertices, std::size_t edges, u64 seed) {
  std::mt19937_64 rng(seed);
  os << "# random graph: " << vertices << " vertices, " << edges << " edges, seed " << seed << '\n';
  for (auto [u, v] : random_edges(rng, edges, std::max<std::size_t>(vertices, 1)))
    os << u << ' ' << v << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pactree benchmark harness"};
  app.require_subcommand(1);
  std::string out_path;
  app.add_option("--out", out_path, "Write CSV to this file instead of stdout");

  MicroConfig mc;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--n", mc.n, "Tree size")->check(CLI::PositiveNumber);
    sub->add_option("--m", mc.m, "Size of the second input or batch");
    sub->add_option("--encoding", mc.encoding, "Block encoding")
        ->check(CLI::IsMember({"identity", "diff"}));
    sub->add_option("--threads", mc.threads, "Worker threads (0 = all)");
    sub->add_option("--seed", mc.seed, "Input seed");
    sub->add_option("--trials", mc.trials, "Repetitions; the median is reported")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", out_path, "Write CSV to this file instead of stdout");
  };

  auto* micro = app.add_subcommand("micro", "One primitive at one block size");
  micro->add_option("--op", mc.op, "Operation")->check(CLI::IsMember(kOps));
  micro->add_option("--B", mc.block, "Block size")->check(CLI::PositiveNumber);
  add_common(micro);

  std::string block_list = "8,16,32,64,128,256,512,1024";
  auto* sweep = app.add_subcommand("sweep-B", "One primitive across block sizes");
  sweep->add_option("--op", mc.op, "Operation")->check(CLI::IsMember(kOps));
  sweep->add_option("--Bs", block_list, "Comma-separated block sizes");
  add_common(sweep);

  std::string input;
  std::string batch_list = "10,100,1000,10000,100000";
  bool symmetric = false;
  auto* graph = app.add_subcommand("graph", "Batch edge update throughput");
  graph->add_option("--input", input, "Edge list file")->required();
  graph->add_option("--batches", batch_list, "Comma-separated batch sizes; empty for none");
  graph->add_flag("--symmetrize", symmetric, "Add the reverse of every edge");
  graph->add_option("--seed", mc.seed, "Batch seed");
  graph->add_option("--trials", mc.trials, "Repetitions per batch size");
  graph->add_option("--threads", mc.threads, "Worker threads (0 = all)");
  graph->add_option("--out", out_path, "Write CSV to this file instead of stdout");

  std::size_t gen_vertices = 10000, gen_edges = 100000;
  auto* gen = app.add_subcommand("gen-graph", "Write a random edge list");
  gen->add_option("--vertices", gen_vertices, "Vertex id range");
  gen->add_option("--edges", gen_edges, "Edge count");
  gen->add_option("--seed", mc.seed, "Seed");
  gen->add_option("--out", out_path, "Output file instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    std::ofstream file;
    if (!out_path.empty()) {
      file.open(out_path);
      if (!file) throw Failure(2, out_path + ": cannot open for writing");
    }
    std::ostream& os = out_path.empty() ? std::cout : file;

    if (*micro) {
      const Row r = run_micro(mc);
      os << kMicroHeader << '\n';
      print_row(os, mc, r);
    } else if (*sweep) {
      const std::vector<std::size_t> blocks = parse_sizes(block_list, "--Bs");
      if (blocks.empty()) throw Failure(1, "--Bs needs at least one block size");
      os << kMicroHeader << '\n';
      std::vector<std::pair<std::size_t, std::size_t>> sizes;
      for (std::size_t b : blocks) {
        MicroConfig c = mc;
        c.block = b;
        const Row r = run_micro(c);
        print_row(os, c, r);
        sizes.emplace_back(b, r.bytes_total);
      }
      std::sort(sizes.begin(), sizes.end());
      for (std::size_t i = 1; i < sizes.size(); ++i)
        if (sizes[i].second > sizes[i - 1].second)
          throw Failure(3, "bytes grew from B=" + std::to_string(sizes[i - 1].first) +
                               " to B=" + std::to_string(sizes[i].first));
    } else if (*graph) {
      run_graph(os, input, parse_sizes(batch_list, "--batches"),  mc.seed, mc.trials, mc.threads, symmetric);
    } else if (*gen) {
      generate_graph(os, gen_vertices, gen_edges, mc.seed);
    }
  } catch (const Failure& e) {
    std::cerr << "bench: " << e.what() << '\n';
    return e.code;
  }
  return 0;
}
