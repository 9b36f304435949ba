#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "pfcd/feature_table.hpp"
#include "pfcd/types.hpp"

namespace pfcd {

// A detected or ground-truth community structure. communities holds sorted
// node-id sets (possibly overlapping, never empty); community_ids gives each
// set's id (a membership column or an input label); labels is the hard
// assignment used by partition metrics.
struct CommunityAssignment {
  std::vector<std::vector<int>> communities;
  std::vector<int> community_ids;
  std::vector<int> labels;
};

namespace detail {

inline double pairwise_f1(const std::vector<int>& a, const std::vector<int>& b) {
  std::size_t inter = 0, i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) ++i;
    else if (b[j] < a[i]) ++j;
    else { ++inter; ++i; ++j; }
  }
  if (a.empty() && b.empty()) return 0.0;
  return 2.0 * static_cast<double>(inter) / static_cast<double>(a.size() + b.size());
}

inline double best_match_average(const std::vector<std::vector<int>>& from,
                                 const std::vector<std::vector<int>>& to) {
  double acc = 0.0;
  for (const auto& s : from) {
    double best = 0.0;
    for (const auto& t : to) best = std::max(best, pairwise_f1(s, t));
    acc += best;
  }
  return acc / static_cast<double>(from.size());
}

}  // namespace detail

// Symmetric average best-match F1 between two community covers:
// each side's communities are matched to their best F1 counterpart on the
// other side, the two directional averages are themselves averaged.
inline double f1_score(const CommunityAssignment& detected, const CommunityAssignment& truth) {
  if (detected.communities.empty() || truth.communities.empty())
    throw std::invalid_argument("f1_score: empty community list");
  return 0.5 * (detail::best_match_average(truth.communities, detected.communities) +
                detail::best_match_average(detected.communities, truth.communities));
}

// Normalized mutual information 2*I/(H1+H2) between two hard labelings,
// natural logarithms, 0*log(0) = 0. Both sides single-cluster -> 1 (equal
// trivial partitions); exactly one side single-cluster -> 0.
inline double nmi(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("nmi: labelings differ in length");
  if (a.empty()) throw std::invalid_argument("nmi: empty labelings");
  const double n = static_cast<double>(a.size());

  auto compact = [](const std::vector<int>& xs) {
    std::vector<int> sorted(xs);
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<int> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
      out[i] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), xs[i]) -
                                sorted.begin());
    return std::pair{out, static_cast<int>(sorted.size())};
  };
  auto [ca, ka] = compact(a);
  auto [cb, kb] = compact(b);

  std::vector<double> joint(static_cast<std::size_t>(ka) * static_cast<std::size_t>(kb), 0.0);
  std::vector<double> ma(static_cast<std::size_t>(ka), 0.0), mbv(static_cast<std::size_t>(kb), 0.0);
  for (std::size_t i = 0; i < ca.size(); ++i) {
    joint[static_cast<std::size_t>(ca[i]) * static_cast<std::size_t>(kb) +
          static_cast<std::size_t>(cb[i])] += 1.0;
    ma[static_cast<std::size_t>(ca[i])] += 1.0;
    mbv[static_cast<std::size_t>(cb[i])] += 1.0;
  }

  auto entropy = [n](const std::vector<double>& counts) {
    double h = 0.0;
    for (double c : counts)
      if (c > 0.0) h -= (c / n) * std::log(c / n);
    return h;
  };
  const double ha = entropy(ma), hb = entropy(mbv);
  if (ha == 0.0 && hb == 0.0) return 1.0;
  if (ha == 0.0 || hb == 0.0) return 0.0;

  double info = 0.0;
  for (int i = 0; i < ka; ++i)
    for (int j = 0; j < kb; ++j) {
      const double c = joint[static_cast<std::size_t>(i) * static_cast<std::size_t>(kb) +
                             static_cast<std::size_t>(j)];
      if (c > 0.0)
        info += (c / n) * std::log(c * n / (ma[static_cast<std::size_t>(i)] *
                                            mbv[static_cast<std::size_t>(j)]));
    }
  return std::clamp(2.0 * info / (ha + hb), 0.0, 1.0);
}

struct FeatureRank {
  std::string name;
  int column = 0;
  double score = 0.0;  // NMI between the binned feature and the labels
};

namespace detail {

// Four equal-frequency bins split at the 25/50/75 percentiles (nearest-rank
// on the sorted column); bin(v) counts the strict quartile boundaries below
// v, so constant and binary columns collapse to one or two bins naturally.
inline std::vector<int> quartile_bins(const Vector& column) {
  std::vector<double> sorted(column.begin(), column.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = sorted.size();
  auto quantile = [&](double q) {
    std::size_t idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n))) - 1;
    return sorted[std::min(idx, n - 1)];
  };
  const double q25 = quantile(0.25), q50 = quantile(0.50), q75 = quantile(0.75);
  std::vector<int> bins(static_cast<std::size_t>(column.size()));
  for (Eigen::Index i = 0; i < column.size(); ++i) {
    const double v = column[i];
    bins[static_cast<std::size_t>(i)] = (v > q25) + (v > q50) + (v > q75);
  }
  return bins;
}

}  // namespace detail

// Ranks every raw feature by NMI between its quartile-binned values and the
// given hard community labels, best first. Ties keep column order.
inline std::vector<FeatureRank> rank_assortative(const RawFeatureTable& table,
                                                 const std::vector<int>& labels) {
  if (static_cast<Eigen::Index>(labels.size()) != table.n())
    throw std::invalid_argument("rank_assortative: labels length != node count");
  std::vector<FeatureRank> ranks;
  for (Eigen::Index j = 0; j < table.cols(); ++j) {
    const Vector col = table.values.col(j);
    ranks.push_back({table.names[static_cast<std::size_t>(j)], static_cast<int>(j),
                     nmi(detail::quartile_bins(col), labels)});
  }
  std::stable_sort(ranks.begin(), ranks.end(),
                   [](const FeatureRank& x, const FeatureRank& y) { return x.score > y.score; });
  return ranks;
}

}  // namespace pfcd
