#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "pfcd/metrics.hpp"
#include "pfcd/model.hpp"
#include "pfcd/types.hpp"

namespace pfcd {

struct ThresholdResult {
  CommunityAssignment assignment;
  // Set when M is identically zero: no column mean is exceeded anywhere and
  // every node lands in community 0 through the argmax tie rule.
  bool degenerate = false;
};

// Turns soft memberships into communities. Node u joins community c when
// M(u,c) strictly exceeds column c's mean; a node above no mean falls back
// to its argmax column (ties -> lowest index). Empty columns are dropped;
// labels carry the argmax assignment for every node.
inline ThresholdResult threshold_memberships(const Matrix& M) {
  const Eigen::Index n = M.rows(), k = M.cols();
  if (k < 1) throw std::invalid_argument("threshold_memberships: membership has no columns");

  ThresholdResult result;
  result.degenerate = n > 0 && (M.array() == 0.0).all();

  const Vector means = n > 0 ? Vector(M.colwise().mean().transpose()) : Vector(Vector::Zero(k));
  std::vector<std::vector<int>> sets(static_cast<std::size_t>(k));
  result.assignment.labels.resize(static_cast<std::size_t>(n));

  for (Eigen::Index u = 0; u < n; ++u) {
    Eigen::Index arg = 0;
    bool placed = false;
    for (Eigen::Index c = 0; c < k; ++c) {
      if (M(u, c) > M(u, arg)) arg = c;
      if (M(u, c) > means[c]) {
        sets[static_cast<std::size_t>(c)].push_back(static_cast<int>(u));
        placed = true;
      }
    }
    result.assignment.labels[static_cast<std::size_t>(u)] = static_cast<int>(arg);
    if (!placed) sets[static_cast<std::size_t>(arg)].push_back(static_cast<int>(u));
  }

  for (Eigen::Index c = 0; c < k; ++c) {
    auto& s = sets[static_cast<std::size_t>(c)];
    if (s.empty()) continue;
    std::sort(s.begin(), s.end());
    result.assignment.communities.push_back(std::move(s));
    result.assignment.community_ids.push_back(static_cast<int>(c));
  }
  return result;
}

struct InfluenceEntry {
  std::string feature;
  int community = 0;
  double weight = 0.0;
};

// Per-community feature influence: for community c, every assortative row
// I(j,c) and generative row W(f,c), grouped by community and ordered inside
// each group by |weight| descending (ties by name).
inline std::vector<InfluenceEntry> feature_influence_report(
    const ModelParams& params, const std::vector<std::string>& assortative_names,
    const std::vector<std::string>& generative_names) {
  if (params.assortative_weights.rows() != static_cast<Eigen::Index>(assortative_names.size()))
    throw std::invalid_argument("feature_influence_report: assortative name count mismatch");
  if (params.generative_weights.rows() != static_cast<Eigen::Index>(generative_names.size()))
    throw std::invalid_argument("feature_influence_report: generative name count mismatch");

  std::vector<InfluenceEntry> report;
  for (Eigen::Index c = 0; c < params.k(); ++c) {
    std::vector<InfluenceEntry> block;
    for (std::size_t j = 0; j < assortative_names.size(); ++j)
      block.push_back({assortative_names[j], static_cast<int>(c),
                       params.assortative_weights(static_cast<Eigen::Index>(j), c)});
    for (std::size_t f = 0; f < generative_names.size(); ++f)
      block.push_back({generative_names[f], static_cast<int>(c),
                       params.generative_weights(static_cast<Eigen::Index>(f), c)});
    std::sort(block.begin(), block.end(), [](const InfluenceEntry& a, const InfluenceEntry& b) {
      const double wa = std::abs(a.weight), wb = std::abs(b.weight);
      if (wa != wb) return wa > wb;
      return a.feature < b.feature;
    });
    report.insert(report.end(), block.begin(), block.end());
  }
  return report;
}

}  // namespace pfcd
