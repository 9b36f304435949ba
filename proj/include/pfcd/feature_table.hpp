#pragma once

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "pfcd/graph.hpp"
#include "pfcd/types.hpp"

namespace pfcd {

// Dense node-by-feature matrix produced by the loader. Categorical columns
// have already been one-hot expanded ("name=value"); entries missing from
// the input file are 0.
struct RawFeatureTable {
  Matrix values;                   // n x p
  std::vector<std::string> names;  // p column names

  Eigen::Index n() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

// The model-facing split: S drives memberships through the assortative map,
// F is the binary generative block. Column sets are disjoint; either side
// may be empty.
struct FeatureTable {
  Matrix assortative;  // S: n x |S|, real-valued
  Matrix generative;   // F: n x |F|, entries in {0, 1}
  std::vector<std::string> assortative_names;
  std::vector<std::string> generative_names;

  Eigen::Index n() const { return assortative.rows(); }

  static FeatureTable empty(Eigen::Index n) {
    FeatureTable t;
    t.assortative.resize(n, 0);
    t.generative.resize(n, 0);
    return t;
  }
};

namespace detail {

inline bool parse_double(const std::string& tok, double& out) {
  if (tok.empty()) return false;
  char* end = nullptr;
  out = std::strtod(tok.c_str(), &end);
  return end == tok.c_str() + tok.size();
}

inline std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace detail

// Reads "node <TAB> feature <TAB> value" rows into a dense table aligned
// with g's node ids. An optional header line (unknown node label with a
// non-numeric value field, first data line only) is skipped. Columns whose
// values all parse as numbers stay numeric; columns with no numeric value
// are one-hot expanded as "name=value" with categories sorted; a mix is an
// error. A later row for the same (node, feature) overwrites the earlier
// one. Unknown node labels are rejected.
inline RawFeatureTable load_feature_table(const std::string& path, const Graph& g) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_feature_table: cannot open '" + path + "'");

  struct Cell {
    int node;
    std::string value;
  };
  std::vector<std::string> feature_order;
  std::unordered_map<std::string, std::vector<Cell>> cells;

  std::string line;
  std::size_t lineno = 0;
  bool saw_data = false;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::strip_cr(line);
    if (detail::is_comment_or_blank(line)) continue;

    std::string node, feature, value;
    {
      std::istringstream ss(line);
      if (!std::getline(ss, node, '\t') || !std::getline(ss, feature, '\t') ||
          !std::getline(ss, value, '\t') || ss.rdbuf()->in_avail() > 0) {
        throw std::runtime_error("load_feature_table: parse error at " + path + ":" +
                                 std::to_string(lineno) + ": expected node<TAB>feature<TAB>value");
      }
    }

    auto it = g.label_to_id.find(node);
    if (it == g.label_to_id.end()) {
      double ignored;
      if (!saw_data && !detail::parse_double(value, ignored)) continue;  // header line
      throw std::runtime_error("load_feature_table: unknown node '" + node + "' at " + path +
                               ":" + std::to_string(lineno));
    }
    saw_data = true;

    auto [cit, fresh] = cells.emplace(feature, std::vector<Cell>{});
    if (fresh) feature_order.push_back(feature);
    cit->second.push_back({it->second, value});
  }

  // Type each column, then materialize. Numeric columns occupy one output
  // column; categorical columns expand to one column per distinct value.
  struct Column {
    std::string name;
    bool numeric;
  };
  std::vector<Column> typed;
  for (const auto& name : feature_order) {
    const auto& col = cells.at(name);
    std::size_t numeric_count = 0;
    double parsed;
    for (const auto& c : col)
      if (detail::parse_double(c.value, parsed)) ++numeric_count;
    if (numeric_count == col.size()) {
      typed.push_back({name, true});
    } else if (numeric_count == 0) {
      typed.push_back({name, false});
    } else {
      throw std::runtime_error("load_feature_table: non-numeric value in numeric column '" +
                               name + "'");
    }
  }

  RawFeatureTable table;
  std::vector<std::string> out_names;
  std::vector<std::vector<double>> out_cols;
  for (const auto& col : typed) {
    const auto& entries = cells.at(col.name);
    if (col.numeric) {
      std::vector<double> dense(static_cast<std::size_t>(g.n), 0.0);
      for (const auto& c : entries) {
        double v;
        detail::parse_double(c.value, v);
        dense[static_cast<std::size_t>(c.node)] = v;
      }
      out_names.push_back(col.name);
      out_cols.push_back(std::move(dense));
    } else {
      std::map<std::string, std::size_t> categories;  // sorted category -> output column
      for (const auto& c : entries) categories.emplace(c.value, 0);
      const std::size_t base = out_cols.size();
      std::size_t slot = 0;
      for (auto& [cat, idx] : categories) {
        idx = base + slot++;
        out_names.push_back(col.name + "=" + cat);
        out_cols.emplace_back(static_cast<std::size_t>(g.n), 0.0);
      }
      // Clear the whole group before setting, so an overwriting row moves
      // the node between categories instead of landing in both.
      for (const auto& c : entries) {
        for (std::size_t j = 0; j < categories.size(); ++j)
          out_cols[base + j][static_cast<std::size_t>(c.node)] = 0.0;
        out_cols[categories.at(c.value)][static_cast<std::size_t>(c.node)] = 1.0;
      }
    }
  }

  table.names = std::move(out_names);
  table.values.resize(g.n, static_cast<Eigen::Index>(out_cols.size()));
  for (Eigen::Index j = 0; j < table.values.cols(); ++j)
    for (int u = 0; u < g.n; ++u)
      table.values(u, j) = out_cols[static_cast<std::size_t>(j)][static_cast<std::size_t>(u)];
  return table;
}

// Partitions the table's columns into the assortative block S (listed names)
// and the generative block F (everything else, binarized at value > 0).
// A requested name matches its exact column or, for one-hot groups, every
// column spelled "name=...". Unknown names are rejected.
inline FeatureTable split_features(const RawFeatureTable& table,
                                   const std::vector<std::string>& assortative_names) {
  std::unordered_set<std::string> requested(assortative_names.begin(), assortative_names.end());
  std::unordered_set<std::string> matched;

  std::vector<Eigen::Index> s_cols, f_cols;
  for (Eigen::Index j = 0; j < table.cols(); ++j) {
    const std::string& name = table.names[static_cast<std::size_t>(j)];
    std::string group = name;
    if (auto pos = name.find('='); pos != std::string::npos) group = name.substr(0, pos);
    if (requested.count(name)) {
      s_cols.push_back(j);
      matched.insert(name);
    } else if (requested.count(group)) {
      s_cols.push_back(j);
      matched.insert(group);
    } else {
      f_cols.push_back(j);
    }
  }
  for (const auto& name : assortative_names)
    if (!matched.count(name))
      throw std::invalid_argument("split_features: unknown assortative feature '" + name + "'");

  FeatureTable out;
  out.assortative.resize(table.n(), static_cast<Eigen::Index>(s_cols.size()));
  out.generative.resize(table.n(), static_cast<Eigen::Index>(f_cols.size()));
  for (std::size_t i = 0; i < s_cols.size(); ++i) {
    out.assortative.col(static_cast<Eigen::Index>(i)) = table.values.col(s_cols[i]);
    out.assortative_names.push_back(table.names[static_cast<std::size_t>(s_cols[i])]);
  }
  for (std::size_t i = 0; i < f_cols.size(); ++i) {
    out.generative.col(static_cast<Eigen::Index>(i)) =
        (table.values.col(f_cols[i]).array() > 0.0).cast<double>();
    out.generative_names.push_back(table.names[static_cast<std::size_t>(f_cols[i])]);
  }
  return out;
}

}  // namespace pfcd
