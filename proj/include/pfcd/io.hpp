#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pfcd/extraction.hpp"
#include "pfcd/feature_table.hpp"
#include "pfcd/graph.hpp"
#include "pfcd/learner.hpp"
#include "pfcd/metrics.hpp"
#include "pfcd/model.hpp"
#include "pfcd/types.hpp"

namespace pfcd {

namespace detail {

// 17 significant digits: enough to round-trip an IEEE double exactly.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return in;
}

inline void write_matrix(const Matrix& m, const std::string& name, const std::string& path) {
  auto out = open_out(path);
  out << "# pfcd params v1 " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << '\t';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

inline Matrix read_matrix(const std::string& name, const std::string& path) {
  auto in = open_in(path);
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("empty params file '" + path + "'");
  std::istringstream hs(header);
  std::string hash, magic, kind, version, got_name;
  Eigen::Index rows = -1, cols = -1;
  if (!(hs >> hash >> magic >> kind >> version >> got_name >> rows >> cols) || hash != "#" ||
      magic != "pfcd" || kind != "params" || version != "v1" || got_name != name || rows < 0 ||
      cols < 0)
    throw std::runtime_error("bad params header in '" + path + "'");

  Matrix m(rows, cols);
  std::string line;
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (!std::getline(in, line))
      throw std::runtime_error("truncated params file '" + path + "'");
    std::istringstream ls(line);
    for (Eigen::Index c = 0; c < cols; ++c)
      if (!(ls >> m(r, c)))
        throw std::runtime_error("bad row " + std::to_string(r) + " in '" + path + "'");
  }
  return m;
}

}  // namespace detail

// The four-file parameter bundle: membership.tsv, beta.tsv,
// assortative_weights.tsv, generative_weights.tsv inside dir. Values carry
// 17 significant digits, so save/load round-trips bit-exactly.
inline void save_model_params(const ModelParams& p, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  detail::write_matrix(p.membership, "membership", (fs::path(dir) / "membership.tsv").string());
  detail::write_matrix(p.beta, "beta", (fs::path(dir) / "beta.tsv").string());
  detail::write_matrix(p.assortative_weights, "assortative_weights",
                       (fs::path(dir) / "assortative_weights.tsv").string());
  detail::write_matrix(p.generative_weights, "generative_weights",
                       (fs::path(dir) / "generative_weights.tsv").string());
}

inline ModelParams load_model_params(const std::string& dir) {
  namespace fs = std::filesystem;
  ModelParams p;
  p.membership = detail::read_matrix("membership", (fs::path(dir) / "membership.tsv").string());
  p.beta = detail::read_matrix("beta", (fs::path(dir) / "beta.tsv").string());
  p.assortative_weights = detail::read_matrix(
      "assortative_weights", (fs::path(dir) / "assortative_weights.tsv").string());
  p.generative_weights = detail::read_matrix(
      "generative_weights", (fs::path(dir) / "generative_weights.tsv").string());
  return p;
}

// Key-value run manifest, one "key<TAB>value" line per entry in the given
// order. No timestamps or hostnames: identical runs produce identical bytes.
inline void write_run_manifest(const std::vector<std::pair<std::string, std::string>>& entries,
                               const std::string& path) {
  auto out = detail::open_out(path);
  for (const auto& [key, value] : entries) out << key << '\t' << value << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

inline std::map<std::string, std::string> read_run_manifest(const std::string& path) {
  auto in = detail::open_in(path);
  std::map<std::string, std::string> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error("bad manifest line in '" + path + "': " + line);
    entries[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return entries;
}

// Manifest fragment shared by every fit: the full effective configuration
// plus the outcome and the objective trace (space-separated).
inline std::vector<std::pair<std::string, std::string>> manifest_entries(const FitConfig& cfg,
                                                                         const FitResult& result) {
  std::vector<std::pair<std::string, std::string>> e;
  e.emplace_back("k", std::to_string(cfg.k));
  e.emplace_back("alpha", detail::format_double(cfg.alpha));
  e.emplace_back("ll_threshold", detail::format_double(cfg.ll_threshold));
  e.emplace_back("max_iters", std::to_string(cfg.max_iters));
  e.emplace_back("seed", std::to_string(cfg.seed));
  e.emplace_back("jacobi_sweep", cfg.jacobi_sweep ? "1" : "0");
  e.emplace_back("iterations", std::to_string(result.iterations));
  e.emplace_back("converged", result.converged ? "1" : "0");
  std::string trace;
  for (std::size_t i = 0; i < result.ll_trace.size(); ++i) {
    if (i) trace += ' ';
    trace += detail::format_double(result.ll_trace[i]);
  }
  e.emplace_back("ll_trace", trace);
  return e;
}

// "node<TAB>community" rows, one per (node, community) pair, nodes in id
// order and communities ascending within a node.
inline void write_assignment(const CommunityAssignment& a,
                             const std::vector<std::string>& node_labels,
                             const std::string& path) {
  std::vector<std::vector<int>> per_node(node_labels.size());
  for (std::size_t s = 0; s < a.communities.size(); ++s)
    for (int u : a.communities[s])
      per_node.at(static_cast<std::size_t>(u)).push_back(a.community_ids[s]);
  auto out = detail::open_out(path);
  for (std::size_t u = 0; u < per_node.size(); ++u)
    for (int c : per_node[u]) out << node_labels[u] << '\t' << c << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

// Hard labels in the same two-column format (exactly one row per node).
inline void write_hard_labels(const CommunityAssignment& a,
                              const std::vector<std::string>& node_labels,
                              const std::string& path) {
  if (a.labels.size() != node_labels.size())
    throw std::invalid_argument("write_hard_labels: label count mismatch");
  auto out = detail::open_out(path);
  for (std::size_t u = 0; u < node_labels.size(); ++u)
    out << node_labels[u] << '\t' << a.labels[u] << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

// Reads a "node community" file (whitespace-separated, '#' comments and
// blank lines skipped). Nodes and communities get dense ids in order of
// first appearance; node_labels receives the node universe. Hard labels take
// each node's lowest community id.
inline CommunityAssignment read_assignment(const std::string& path,
                                           std::vector<std::string>& node_labels) {
  auto in = detail::open_in(path);
  node_labels.clear();
  std::unordered_map<std::string, int> node_ids, community_ids;
  std::vector<std::vector<int>> sets;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::is_comment_or_blank(line)) continue;
    std::istringstream ss(line);
    std::string node, community, extra;
    if (!(ss >> node >> community) || (ss >> extra))
      throw std::runtime_error("read_assignment: parse error at " + path + ":" +
                               std::to_string(lineno) + ": expected node and community");
    auto [nit, nfresh] = node_ids.emplace(node, static_cast<int>(node_labels.size()));
    if (nfresh) node_labels.push_back(node);
    auto [cit, cfresh] = community_ids.emplace(community, static_cast<int>(sets.size()));
    if (cfresh) sets.emplace_back();
    sets[static_cast<std::size_t>(cit->second)].push_back(nit->second);
  }

  CommunityAssignment a;
  a.labels.assign(node_labels.size(), -1);
  for (std::size_t c = 0; c < sets.size(); ++c) {
    auto& s = sets[c];
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    for (int u : s) {
      int& l = a.labels[static_cast<std::size_t>(u)];
      if (l == -1 || static_cast<int>(c) < l) l = static_cast<int>(c);
    }
    if (!s.empty()) {
      a.communities.push_back(std::move(s));
      a.community_ids.push_back(static_cast<int>(c));
    }
  }
  for (std::size_t u = 0; u < a.labels.size(); ++u)
    if (a.labels[u] == -1)
      throw std::runtime_error("read_assignment: node '" + node_labels[u] + "' has no community");
  return a;
}

// "feature<TAB>community<TAB>weight" rows in report order.
inline void write_influence_report(const std::vector<InfluenceEntry>& report,
                                   const std::string& path) {
  auto out = detail::open_out(path);
  out << "# feature\tcommunity\tweight\n";
  for (const auto& e : report)
    out << e.feature << '\t' << e.community << '\t' << detail::format_double(e.weight) << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

// "node<TAB>feature<TAB>value" rows compatible with load_feature_table.
inline void write_feature_tsv(const RawFeatureTable& table,
                              const std::vector<std::string>& node_labels,
                              const std::string& path) {
  if (static_cast<Eigen::Index>(node_labels.size()) != table.n())
    throw std::invalid_argument("write_feature_tsv: node label count mismatch");
  auto out = detail::open_out(path);
  for (Eigen::Index u = 0; u < table.n(); ++u)
    for (Eigen::Index j = 0; j < table.cols(); ++j)
      out << node_labels[static_cast<std::size_t>(u)] << '\t'
          << table.names[static_cast<std::size_t>(j)] << '\t'
          << detail::format_double(table.values(u, j)) << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace pfcd
