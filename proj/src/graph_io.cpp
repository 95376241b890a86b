// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <string>
#include <string_view>

#include "pactree/graph.hpp"

namespace pactree {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view next_token(std::string_view& s) {
  std::size_t i = 0;
  while (i < s.size() && is_space(s[i])) ++i;
  std::size_t j = i;
  while (j < s.size() && !is_space(s[j])) ++j;
  std::string_view tok = s.substr(i, j - i);
  s.remove_prefix(j);
  return tok;
}

VertexId parse_id(std::string_view tok, std::size_t line) {
  VertexId v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec == std::errc::result_out_of_range)
    throw ParseError(line, "vertex id out of range: '" + std::string(tok) + "'");
  if (ec != std::errc() || p != tok.data() + tok.size())
    throw ParseError(line, "expected a nonnegative integer, got '" + std::string(tok) + "'");
  return v;
}

}  // namespace

std::vector<Edge> parse_edge_list(std::istream& in) {
  std::vector<Edge> edges;
  std::string buf;
  std::size_t line = 0;
  while (std::getline(in, buf)) {
    ++line;
    std::string_view s(buf);
    std::string_view first = next_token(s);
    if (first.empty() || first.front() == '#') continue;
    std::string_view second = next_token(s);
    if (second.empty()) throw ParseError(line, "expected two vertex ids");
    if (!next_token(s).empty()) throw ParseError(line, "trailing tokens after the edge");
    edges.push_back({parse_id(first, line), parse_id(second, line)});
  }
  if (in.bad()) throw IoError("read error");
  return edges;
}

std::vector<Edge> read_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path + ": " + std::strerror(errno));
  try {
    return parse_edge_list(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.detail(), path);
  } catch (const IoError&) {
    throw IoError(path + ": read error");
  }
}

std::vector<Edge> symmetrize(std::vector<Edge> edges) {
  const std::size_t n = edges.size();
  edges.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) edges.push_back({edges[i].dst, edges[i].src});
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

}  // namespace pactree
