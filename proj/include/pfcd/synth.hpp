#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pfcd/feature_table.hpp"
#include "pfcd/graph.hpp"
#include "pfcd/metrics.hpp"
#include "pfcd/types.hpp"

namespace pfcd {

// Degree-corrected planted-partition generator. Nodes split into equal
// blocks; a seeded per-block shuffle promotes the first ceil(hub_fraction *
// block) nodes to hubs with weight theta_hub. Pair (u,v) becomes an edge
// with probability min(1, rate * theta_u * theta_v), where rate is beta_in
// within a block and r * beta_in across blocks.
struct SynthConfig {
  int n = 0;
  int communities = 2;
  double beta_in = 0.1;
  double r = 0.25;
  double hub_fraction = 0.10;
  double theta_hub = 10.0;
  double theta_normal = 1.0;
  double mu = 1.0;  // feature mean separation
  int p = 1;        // independent feature draws per node
  std::uint64_t seed = 0;

  void validate() const {
    if (n < 2) throw std::invalid_argument("SynthConfig: n must be >= 2");
    if (communities < 2) throw std::invalid_argument("SynthConfig: communities must be >= 2");
    if (n % communities != 0)
      throw std::invalid_argument("SynthConfig: n must be divisible by the community count");
    if (beta_in < 0.0 || beta_in > 1.0)
      throw std::invalid_argument("SynthConfig: beta_in must lie in [0, 1]");
    if (r < 0.0 || r > 1.0) throw std::invalid_argument("SynthConfig: r must lie in [0, 1]");
    if (hub_fraction < 0.0 || hub_fraction > 1.0)
      throw std::invalid_argument("SynthConfig: hub_fraction must lie in [0, 1]");
    if (theta_hub <= 0.0 || theta_normal <= 0.0)
      throw std::invalid_argument("SynthConfig: theta weights must be > 0");
    if (p < 0) throw std::invalid_argument("SynthConfig: p must be >= 0");
    if (mu < 0.0) throw std::invalid_argument("SynthConfig: mu must be >= 0");
  }
};

struct SynthNetwork {
  Graph graph;
  CommunityAssignment ground_truth;
  std::vector<double> theta;  // per-node degree weight actually used
};

inline SynthNetwork generate_network(const SynthConfig& cfg) {
  cfg.validate();
  const int block = cfg.n / cfg.communities;
  const int hubs = static_cast<int>(std::ceil(cfg.hub_fraction * static_cast<double>(block)));

  std::mt19937_64 rng(cfg.seed);

  SynthNetwork net;
  net.theta.assign(static_cast<std::size_t>(cfg.n), cfg.theta_normal);
  net.ground_truth.labels.resize(static_cast<std::size_t>(cfg.n));

  for (int c = 0; c < cfg.communities; ++c) {
    std::vector<int> members(static_cast<std::size_t>(block));
    std::iota(members.begin(), members.end(), c * block);
    for (int u : members) net.ground_truth.labels[static_cast<std::size_t>(u)] = c;
    net.ground_truth.communities.push_back(members);
    net.ground_truth.community_ids.push_back(c);
    std::shuffle(members.begin(), members.end(), rng);
    for (int i = 0; i < std::min(hubs, block); ++i)
      net.theta[static_cast<std::size_t>(members[static_cast<std::size_t>(i)])] = cfg.theta_hub;
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < cfg.n; ++u) {
    const int cu = net.ground_truth.labels[static_cast<std::size_t>(u)];
    for (int v = u + 1; v < cfg.n; ++v) {
      const int cv = net.ground_truth.labels[static_cast<std::size_t>(v)];
      const double rate = (cu == cv ? cfg.beta_in : cfg.r * cfg.beta_in) *
                          net.theta[static_cast<std::size_t>(u)] *
                          net.theta[static_cast<std::size_t>(v)];
      if (unit(rng) < std::min(1.0, rate)) edges.emplace_back(u, v);
    }
  }
  net.graph = make_graph(cfg.n, edges);
  return net;
}

// Per-node feature draws: community c's nodes sample p values from
// N(mean_c, 1), with means spread evenly over [+mu, -mu] (so two blocks get
// +mu and -mu). Columns are named f0..f{p-1}.
inline RawFeatureTable generate_features(const CommunityAssignment& truth, double mu, int p,
                                         std::uint64_t seed) {
  if (p < 0) throw std::invalid_argument("generate_features: p must be >= 0");
  const auto n = truth.labels.size();
  if (n == 0) throw std::invalid_argument("generate_features: no labels");
  int max_label = 0;
  for (int l : truth.labels) max_label = std::max(max_label, l);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  RawFeatureTable table;
  table.values.resize(static_cast<Eigen::Index>(n), p);
  for (int j = 0; j < p; ++j) table.names.push_back("f" + std::to_string(j));

  for (std::size_t u = 0; u < n; ++u) {
    const int c = truth.labels[u];
    const double mean =
        max_label == 0 ? mu : mu * (1.0 - 2.0 * static_cast<double>(c) / static_cast<double>(max_label));
    for (int j = 0; j < p; ++j)
      table.values(static_cast<Eigen::Index>(u), j) = mean + noise(rng);
  }
  return table;
}

}  // namespace pfcd
