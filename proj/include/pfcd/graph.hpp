#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace pfcd {

// Undirected simple graph over dense node ids 0..n-1. Adjacency lists are
// sorted and symmetric; self-loops and parallel edges never appear. The
// original textual labels survive in node_labels / label_to_id.
struct Graph {
  int n = 0;
  std::int64_t m = 0;
  std::vector<std::vector<int>> adjacency;
  std::vector<std::string> node_labels;
  std::unordered_map<std::string, int> label_to_id;

  int degree(int u) const { return static_cast<int>(adjacency[u].size()); }

  bool has_edge(int u, int v) const {
    const auto& a = adjacency[u];
    return std::binary_search(a.begin(), a.end(), v);
  }
};

// Counts of input lines dropped during canonicalization.
struct EdgeListReport {
  std::size_t self_loops_dropped = 0;
  std::size_t duplicates_dropped = 0;
};

// Builds a canonical graph from raw (possibly duplicated, possibly looped,
// possibly directed) endpoint pairs. Ids must lie in [0, n).
inline Graph make_graph(int n, const std::vector<std::pair<int, int>>& edges,
                        EdgeListReport* report = nullptr,
                        std::vector<std::string> labels = {}) {
  if (n < 0) throw std::invalid_argument("make_graph: negative node count");
  Graph g;
  g.n = n;
  g.adjacency.assign(static_cast<std::size_t>(n), {});

  std::size_t loops = 0;
  for (const auto& [u, v] : edges) {
    if (u < 0 || u >= n || v < 0 || v >= n)
      throw std::invalid_argument("make_graph: endpoint out of range");
    if (u == v) {
      ++loops;
      continue;
    }
    g.adjacency[u].push_back(v);
    g.adjacency[v].push_back(u);
  }

  std::size_t kept = 0;
  for (auto& a : g.adjacency) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    kept += a.size();
  }
  g.m = static_cast<std::int64_t>(kept / 2);

  if (report) {
    report->self_loops_dropped = loops;
    report->duplicates_dropped = edges.size() - loops - static_cast<std::size_t>(g.m);
  }

  if (labels.empty()) {
    g.node_labels.reserve(static_cast<std::size_t>(n));
    for (int u = 0; u < n; ++u) g.node_labels.push_back(std::to_string(u));
  } else {
    if (static_cast<int>(labels.size()) != n)
      throw std::invalid_argument("make_graph: label count does not match n");
    g.node_labels = std::move(labels);
  }
  for (int u = 0; u < n; ++u) {
    if (!g.label_to_id.emplace(g.node_labels[u], u).second)
      throw std::invalid_argument("make_graph: duplicate node label '" + g.node_labels[u] + "'");
  }
  return g;
}

namespace detail {

inline bool is_comment_or_blank(const std::string& line) {
  const auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == '#';
}

}  // namespace detail

// Reads a whitespace-separated edge list. Node labels are arbitrary tokens
// and get dense ids in order of first appearance. Lines that are blank or
// start with '#' are skipped. Self-loops and duplicate edges (either
// orientation) are dropped and counted in the report.
inline Graph load_edge_list(const std::string& path, EdgeListReport* report = nullptr) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_edge_list: cannot open '" + path + "'");

  std::vector<std::string> labels;
  std::unordered_map<std::string, int> ids;
  auto intern = [&](const std::string& tok) {
    auto [it, fresh] = ids.emplace(tok, static_cast<int>(labels.size()));
    if (fresh) labels.push_back(tok);
    return it->second;
  };

  std::vector<std::pair<int, int>> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::is_comment_or_blank(line)) continue;
    std::istringstream ss(line);
    std::string a, b, extra;
    if (!(ss >> a >> b) || (ss >> extra)) {
      throw std::runtime_error("load_edge_list: parse error at " + path + ":" +
                               std::to_string(lineno) + ": expected two node labels");
    }
    const int ia = intern(a);  // sequence the interning: ids follow appearance order
    const int ib = intern(b);
    edges.emplace_back(ia, ib);
  }
  const int n = static_cast<int>(labels.size());
  return make_graph(n, edges, report, std::move(labels));
}

// Writes one edge per line as "label_u label_v" with u < v, ascending.
// Re-loading the output reproduces the canonical edge set.
inline void write_edge_list(const Graph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_edge_list: cannot open '" + path + "'");
  for (int u = 0; u < g.n; ++u)
    for (int v : g.adjacency[u])
      if (u < v) out << g.node_labels[u] << ' ' << g.node_labels[v] << '\n';
  if (!out) throw std::runtime_error("write_edge_list: write failed for '" + path + "'");
}

}  // namespace pfcd
