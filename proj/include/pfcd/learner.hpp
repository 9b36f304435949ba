#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pfcd/feature_table.hpp"
#include "pfcd/graph.hpp"
#include "pfcd/model.hpp"
#include "pfcd/numeric.hpp"
#include "pfcd/types.hpp"

namespace pfcd {

struct FitResult {
  ModelParams params;
  std::vector<double> ll_trace;  // ll_trace[0] is the initial value, one entry per iteration after
  int iterations = 0;
  bool converged = false;
};

// Raised when the objective turns non-finite mid-fit; carries the offending
// iteration's parameter state so callers can dump it for diagnosis.
struct FitDivergedError : std::runtime_error {
  int iteration;
  ModelParams params;

  FitDivergedError(int it, ModelParams p, const std::string& msg)
      : std::runtime_error("fit diverged at iteration " + std::to_string(it) + ": " + msg),
        iteration(it),
        params(std::move(p)) {}
};

// Conductance of the closed neighborhood N[u] = {u} + adj(u):
// cut(N[u]) / min(vol(N[u]), 2m - vol(N[u])). Degenerate neighborhoods
// (empty or full volume) score +infinity.
inline double neighborhood_conductance(const Graph& g, int u) {
  if (u < 0 || u >= g.n) throw std::invalid_argument("neighborhood_conductance: bad node id");
  std::vector<char> in_set(static_cast<std::size_t>(g.n), 0);
  in_set[static_cast<std::size_t>(u)] = 1;
  for (int v : g.adjacency[u]) in_set[static_cast<std::size_t>(v)] = 1;

  std::int64_t vol = 0, cut = 0;
  auto scan = [&](int w) {
    vol += g.degree(w);
    for (int x : g.adjacency[w])
      if (!in_set[static_cast<std::size_t>(x)]) ++cut;
  };
  scan(u);
  for (int v : g.adjacency[u]) scan(v);

  const std::int64_t denom = std::min(vol, 2 * g.m - vol);
  if (denom <= 0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(cut) / static_cast<double>(denom);
}

namespace detail {

// The k seed neighborhoods: scan nodes by ascending (conductance, id); take
// N[u] whenever u is not yet covered by a chosen neighborhood. If coverage
// exhausts candidates before k seeds exist, continue down the same ranking
// through the remaining unused centers.
inline std::vector<std::vector<int>> conductance_seeds(const Graph& g, int k) {
  std::vector<double> phi(static_cast<std::size_t>(g.n));
  for (int u = 0; u < g.n; ++u) phi[static_cast<std::size_t>(u)] = neighborhood_conductance(g, u);

  std::vector<int> order(static_cast<std::size_t>(g.n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return phi[static_cast<std::size_t>(a)] < phi[static_cast<std::size_t>(b)];
  });

  auto closed_neighborhood = [&](int u) {
    std::vector<int> s(g.adjacency[u]);
    s.insert(std::lower_bound(s.begin(), s.end(), u), u);
    return s;
  };

  std::vector<std::vector<int>> seeds;
  std::vector<char> covered(static_cast<std::size_t>(g.n), 0), used(static_cast<std::size_t>(g.n), 0);
  for (int u : order) {
    if (static_cast<int>(seeds.size()) == k) break;
    if (covered[static_cast<std::size_t>(u)]) continue;
    used[static_cast<std::size_t>(u)] = 1;
    seeds.push_back(closed_neighborhood(u));
    for (int w : seeds.back()) covered[static_cast<std::size_t>(w)] = 1;
  }
  for (int u : order) {
    if (static_cast<int>(seeds.size()) == k) break;
    if (used[static_cast<std::size_t>(u)]) continue;
    used[static_cast<std::size_t>(u)] = 1;
    seeds.push_back(closed_neighborhood(u));
  }
  return seeds;
}

}  // namespace detail

// Starting state: column c of M is 1 on the c-th lowest-conductance seed
// neighborhood and uniform noise in [0, 0.1] elsewhere (drawn row-major over
// the non-seed cells); beta starts at 1 on the diagonal and 0.05 off it;
// both weight blocks start at zero.
inline ModelParams initialize(const Graph& g, const FeatureTable& features, int k,
                              std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("initialize: k must be >= 1");
  if (k > g.n) throw std::invalid_argument("initialize: k exceeds the node count");
  if (features.assortative.rows() != g.n || features.generative.rows() != g.n)
    throw std::invalid_argument("initialize: feature tables not aligned with the graph");

  const auto seeds = detail::conductance_seeds(g, k);
  std::vector<char> in_seed(static_cast<std::size_t>(g.n) * static_cast<std::size_t>(k), 0);
  for (int c = 0; c < static_cast<int>(seeds.size()); ++c)
    for (int u : seeds[static_cast<std::size_t>(c)])
      in_seed[static_cast<std::size_t>(u) * static_cast<std::size_t>(k) +
              static_cast<std::size_t>(c)] = 1;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> noise(0.0, 0.1);

  ModelParams p;
  p.membership.resize(g.n, k);
  for (int u = 0; u < g.n; ++u)
    for (int c = 0; c < k; ++c)
      p.membership(u, c) = in_seed[static_cast<std::size_t>(u) * static_cast<std::size_t>(k) +
                                   static_cast<std::size_t>(c)]
                               ? 1.0
                               : noise(rng);

  p.beta = Matrix::Constant(k, k, 0.05);
  p.beta.diagonal().setConstant(1.0);
  p.assortative_weights = Matrix::Zero(features.assortative.cols(), k);
  p.generative_weights = Matrix::Zero(features.generative.cols(), k);
  return p;
}

namespace detail {

// d ll / d M.row(u), given total = sum of all membership rows. Neighbor
// terms attach the edge ratio; the non-neighbor mass enters through the
// cached total; the feature term adds (F_uf - sigmoid(z_uf)) w_f.
// O(deg(u) k + k^2 + |F| k).
inline void membership_gradient_cached(const Graph& g, const Matrix& gen_features,
                                       const ModelParams& p, int u, const Vector& total,
                                       Vector& grad) {
  const Matrix& M = p.membership;
  const Eigen::Index k = M.cols();

  const Eigen::RowVectorXd row_beta = M.row(u) * p.beta;
  Vector pull = Vector::Zero(k);
  Vector adj_sum = Vector::Zero(k);
  for (int v : g.adjacency[u]) {
    const double x = std::max(row_beta.dot(M.row(v)), num::kAffinityFloor);
    pull += num::edge_ratio(x) * M.row(v).transpose();
    adj_sum += M.row(v).transpose();
  }
  const Vector rest = total - M.row(u).transpose() - adj_sum;
  grad = p.beta * (pull - rest);

  const Matrix& W = p.generative_weights;
  for (Eigen::Index f = 0; f < gen_features.cols(); ++f) {
    const double z = M.row(u).dot(W.row(f));
    grad += (gen_features(u, f) - num::sigmoid(z)) * W.row(f).transpose();
  }
}

// Symmetrized gradient of ll with respect to beta, using the membership
// column total for the non-edge mass: O((n + m) k^2).
inline Matrix beta_gradient_sym(const Graph& g, const ModelParams& p) {
  const Matrix& M = p.membership;
  const Eigen::Index k = M.cols();

  Matrix edge_ratio_sum = Matrix::Zero(k, k);  // sum over edges of ratio * m_u m_v^T
  Matrix edge_outer_sum = Matrix::Zero(k, k);  // sum over edges of m_u m_v^T
  const Matrix mb = M * p.beta;
  for (int u = 0; u < g.n; ++u) {
    for (int v : g.adjacency[u]) {
      if (v <= u) continue;
      const double x = std::max(mb.row(u).dot(M.row(v)), num::kAffinityFloor);
      const Matrix outer = M.row(u).transpose() * M.row(v);
      edge_ratio_sum += num::edge_ratio(x) * outer;
      edge_outer_sum += outer;
    }
  }

  const Vector total = M.colwise().sum().transpose();
  const Matrix all_pairs_sym = 0.5 * (total * total.transpose() - M.transpose() * M);
  const Matrix sym_ratio = 0.5 * (edge_ratio_sum + edge_ratio_sum.transpose());
  const Matrix sym_outer = 0.5 * (edge_outer_sum + edge_outer_sum.transpose());
  return sym_ratio - (all_pairs_sym - sym_outer);
}

}  // namespace detail

// d ll / d M.row(u). One-off form; the fit loop keeps the column total
// incrementally instead of recomputing it per node.
inline Vector grad_membership(const Graph& g, const Matrix& gen_features, const ModelParams& p,
                              int u) {
  detail::check_params(g, gen_features, p);
  if (u < 0 || u >= g.n) throw std::invalid_argument("grad_membership: bad node id");
  const Vector total = p.membership.colwise().sum().transpose();
  Vector grad;
  detail::membership_gradient_cached(g, gen_features, p, u, total, grad);
  return grad;
}

// Projected ascent step on one membership row: M.row(u) <- max(0, row + alpha * grad).
inline void update_membership(ModelParams& p, int u, const Vector& grad, double alpha) {
  if (u < 0 || u >= p.n()) throw std::invalid_argument("update_membership: bad node id");
  if (grad.size() != p.k()) throw std::invalid_argument("update_membership: gradient size mismatch");
  p.membership.row(u) = (p.membership.row(u) + alpha * grad.transpose()).cwiseMax(0.0);
}

// Raw (unsymmetrized) gradient of ll with respect to beta, pairs oriented
// u < v. Quadratic in n; meant for verification and small problems. The fit
// loop uses the O((n + m) k^2) symmetrized form directly.
inline Matrix grad_beta(const Graph& g, const ModelParams& p) {
  if (p.membership.rows() != g.n) throw std::invalid_argument("grad_beta: membership rows != node count");
  if (p.beta.rows() != p.k() || p.beta.cols() != p.k())
    throw std::invalid_argument("grad_beta: beta must be k x k");
  const Matrix& M = p.membership;
  const Eigen::Index k = M.cols();
  Matrix grad = Matrix::Zero(k, k);
  const Matrix mb = M * p.beta;
  for (int u = 0; u < g.n; ++u) {
    for (int v = u + 1; v < g.n; ++v) {
      const Matrix outer = M.row(u).transpose() * M.row(v);
      if (g.has_edge(u, v)) {
        const double x = std::max(mb.row(u).dot(M.row(v)), num::kAffinityFloor);
        grad += num::edge_ratio(x) * outer;
      } else {
        grad -= outer;
      }
    }
  }
  return grad;
}

// beta <- max(0, beta + alpha * (G + G^T)/2), elementwise.
inline void update_beta(const Graph& g, ModelParams& p, double alpha) {
  const Matrix grad = detail::beta_gradient_sym(g, p);
  p.beta = (p.beta + alpha * grad).cwiseMax(0.0);
}

// d ll / d W: row f is sum_u (F_uf - sigmoid(z_uf)) m_u.
inline Matrix grad_generative_weights(const Matrix& gen_features, const ModelParams& p) {
  const Matrix& M = p.membership;
  if (gen_features.rows() != M.rows())
    throw std::invalid_argument("grad_generative_weights: row mismatch");
  const Matrix z = M * p.generative_weights.transpose();  // n x |F|
  Matrix coef(z.rows(), z.cols());
  for (Eigen::Index u = 0; u < z.rows(); ++u)
    for (Eigen::Index f = 0; f < z.cols(); ++f)
      coef(u, f) = gen_features(u, f) - num::sigmoid(z(u, f));
  return coef.transpose() * M;  // |F| x k
}

inline void update_generative_weights(const Matrix& gen_features, ModelParams& p, double alpha) {
  if (p.generative_weights.rows() == 0) return;
  p.generative_weights += alpha * grad_generative_weights(gen_features, p);
}

// d ll / d I by the chain rule through the assortative map: each membership
// gradient is routed back through sigma'(z_uc) and the feature value S_uj.
// The map only defines the direction of this block; M itself stays free.
inline Matrix grad_assortative_weights(const Graph& g, const FeatureTable& features,
                                       const ModelParams& p) {
  detail::check_params(g, features.generative, p);
  const Matrix& S = features.assortative;
  if (S.rows() != g.n)
    throw std::invalid_argument("grad_assortative_weights: assortative rows != node count");
  if (p.assortative_weights.rows() != S.cols())
    throw std::invalid_argument("grad_assortative_weights: assortative_weights must be |S| x k");

  const Eigen::Index k = p.k();
  Matrix grad = Matrix::Zero(S.cols(), k);
  const Vector total = p.membership.colwise().sum().transpose();
  Vector node_grad(k);
  for (int u = 0; u < g.n; ++u) {
    detail::membership_gradient_cached(g, features.generative, p, u, total, node_grad);
    const Eigen::RowVectorXd z = S.row(u) * p.assortative_weights;
    Eigen::RowVectorXd chain(k);
    for (Eigen::Index c = 0; c < k; ++c) {
      const double s = num::sigmoid(z[c]);
      chain[c] = node_grad[c] * s * (1.0 - s);
    }
    grad += S.row(u).transpose() * chain;
  }
  return grad;
}

inline void update_assortative_weights(const Graph& g, const FeatureTable& features,
                                       ModelParams& p, double alpha) {
  if (p.assortative_weights.rows() == 0) return;
  p.assortative_weights += alpha * grad_assortative_weights(g, features, p);
}

// Block-coordinate ascent on the joint log-likelihood. Each outer iteration
// sweeps the membership rows in ascending node order against the live state
// (or against a frozen copy when jacobi_sweep is set), then steps the
// assortative weights, the generative weights, and beta, and records the
// objective. Stops when the objective moves by at most ll_threshold, or
// after max_iters iterations.
inline FitResult fit(const Graph& g, const FeatureTable& features, const FitConfig& cfg) {
  cfg.validate();
  if (features.assortative.rows() != g.n || features.generative.rows() != g.n)
    throw std::invalid_argument("fit: feature tables not aligned with the graph");

  FitResult result;
  result.params = initialize(g, features, cfg.k, cfg.seed);
  ModelParams& p = result.params;
  const Matrix& F = features.generative;

  auto objective = [&](int iteration) {
    try {
      return log_likelihood(g, F, p);
    } catch (const std::domain_error& e) {
      throw FitDivergedError(iteration, p, e.what());
    }
  };

  double ll = objective(0);
  result.ll_trace.push_back(ll);

  Vector total = p.membership.colwise().sum().transpose();
  Vector grad(cfg.k);
  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    if (!cfg.jacobi_sweep) {
      for (int u = 0; u < g.n; ++u) {
        detail::membership_gradient_cached(g, F, p, u, total, grad);
        const Vector old_row = p.membership.row(u).transpose();
        p.membership.row(u) = (p.membership.row(u) + cfg.alpha * grad.transpose()).cwiseMax(0.0);
        total += p.membership.row(u).transpose() - old_row;
      }
    } else {
      Matrix grads(g.n, cfg.k);
      for (int u = 0; u < g.n; ++u) {
        detail::membership_gradient_cached(g, F, p, u, total, grad);
        grads.row(u) = grad.transpose();
      }
      p.membership = (p.membership + cfg.alpha * grads).cwiseMax(0.0);
    }
    total = p.membership.colwise().sum().transpose();

    update_assortative_weights(g, features, p, cfg.alpha);
    update_generative_weights(F, p, cfg.alpha);
    update_beta(g, p, cfg.alpha);

    const double next = objective(iter);
    result.ll_trace.push_back(next);
    result.iterations = iter;
    result.converged = std::abs(next - ll) <= cfg.ll_threshold;
    ll = next;
    if (result.converged) break;
  }
  return result;
}

}  // namespace pfcd
