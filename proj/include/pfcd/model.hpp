#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "pfcd/feature_table.hpp"
#include "pfcd/graph.hpp"
#include "pfcd/numeric.hpp"
#include "pfcd/types.hpp"

namespace pfcd {

// Model state. membership (M, n x k) is the free nonnegative latent block;
// beta (k x k, symmetric nonnegative) couples communities in the edge rate;
// assortative_weights (I, |S| x k) parameterize the logistic map from S to
// memberships; generative_weights (W, |F| x k) parameterize the logistic
// model of the binary features.
struct ModelParams {
  Matrix membership;
  Matrix beta;
  Matrix assortative_weights;
  Matrix generative_weights;

  Eigen::Index n() const { return membership.rows(); }
  Eigen::Index k() const { return membership.cols(); }
};

struct FitConfig {
  int k = 2;
  double alpha = 1e-3;          // constant ascent step
  double ll_threshold = 1e-3;   // stop when |delta log-likelihood| <= this
  int max_iters = 1000;
  std::uint64_t seed = 0;
  bool jacobi_sweep = false;    // stale-read membership sweep; default is in-place

  void validate() const {
    if (k < 1) throw std::invalid_argument("FitConfig: k must be >= 1");
    if (!(alpha > 0.0)) throw std::invalid_argument("FitConfig: alpha must be > 0");
    if (!(ll_threshold > 0.0)) throw std::invalid_argument("FitConfig: ll_threshold must be > 0");
    if (max_iters < 1) throw std::invalid_argument("FitConfig: max_iters must be >= 1");
  }
};

namespace detail {

inline void check_params(const Graph& g, const Matrix& gen_features, const ModelParams& p) {
  const Eigen::Index k = p.k();
  if (p.membership.rows() != g.n)
    throw std::invalid_argument("model: membership rows != node count");
  if (p.beta.rows() != k || p.beta.cols() != k)
    throw std::invalid_argument("model: beta must be k x k");
  if (gen_features.rows() != g.n)
    throw std::invalid_argument("model: generative feature rows != node count");
  if (p.generative_weights.rows() != gen_features.cols() ||
      (gen_features.cols() > 0 && p.generative_weights.cols() != k))
    throw std::invalid_argument("model: generative_weights must be |F| x k");
}

}  // namespace detail

// P((u,v) in E) = 1 - exp(-m_u^T B m_v).
inline double edge_probability(const Eigen::Ref<const Vector>& mu,
                               const Eigen::Ref<const Vector>& mv, const Matrix& beta) {
  if (mu.size() != beta.rows() || mv.size() != beta.cols())
    throw std::invalid_argument("edge_probability: dimension mismatch");
  return -std::expm1(-mu.dot(beta * mv));
}

// P(F_uk = 1) = sigmoid(m_u . w_k).
inline double generative_feature_probability(const Eigen::Ref<const Vector>& mu,
                                             const Eigen::Ref<const Vector>& wk) {
  if (mu.size() != wk.size())
    throw std::invalid_argument("generative_feature_probability: dimension mismatch");
  return num::sigmoid(mu.dot(wk));
}

// The assortative map: M_uc = sigmoid(sum_j I_jc * S_uj). With no
// assortative features every coordinate sits at sigmoid(0) = 1/2.
inline Vector membership_from_assortative(const Eigen::Ref<const Vector>& su, const Matrix& I) {
  if (su.size() != I.rows())
    throw std::invalid_argument("membership_from_assortative: dimension mismatch");
  Vector z = I.transpose() * su;
  for (Eigen::Index c = 0; c < z.size(); ++c) z[c] = num::sigmoid(z[c]);
  return z;
}

// Joint log-likelihood of the graph and the binary features:
//   sum over pairs u<v of  log(1 - exp(-x_uv))              if (u,v) in E
//                          -x_uv                            otherwise
//   + sum over nodes/features of the Bernoulli log-mass,
// with x_uv = m_u^T B m_v floored at kAffinityFloor in edge terms only.
// The non-edge total is computed from the membership column sum rather than
// by pair enumeration, so the cost is O((n + m) k^2 + n |F| k).
inline double log_likelihood(const Graph& g, const Matrix& gen_features, const ModelParams& p) {
  detail::check_params(g, gen_features, p);
  const Matrix& M = p.membership;

  // sum over ALL unordered pairs of x_uv, via the column total.
  const Vector total = M.colwise().sum().transpose();
  const Matrix mb = M * p.beta;  // row u holds m_u^T B
  const double self_terms = (mb.array() * M.array()).sum();  // sum_u x_uu
  const double all_pairs = 0.5 * (total.dot(p.beta * total) - self_terms);

  double edge_terms = 0.0;
  double edge_x_sum = 0.0;
  for (int u = 0; u < g.n; ++u) {
    for (int v : g.adjacency[u]) {
      if (v <= u) continue;
      const double x = mb.row(u).dot(M.row(v));
      edge_x_sum += x;
      edge_terms += num::log1mexp(std::max(x, num::kAffinityFloor));
    }
  }
  double ll = edge_terms - (all_pairs - edge_x_sum);

  if (gen_features.cols() > 0) {
    const Matrix z = M * p.generative_weights.transpose();  // n x |F|
    for (int u = 0; u < g.n; ++u)
      for (Eigen::Index f = 0; f < gen_features.cols(); ++f)
        ll += gen_features(u, f) > 0.5 ? num::log_sigmoid(z(u, f))
                                       : num::log_sigmoid(-z(u, f));
  }

  if (!std::isfinite(ll)) {
    for (int u = 0; u < g.n; ++u)
      for (int v : g.adjacency[u])
        if (v > u && !std::isfinite(num::log1mexp(
                         std::max(mb.row(u).dot(M.row(v)), num::kAffinityFloor))))
          throw std::domain_error("log_likelihood: non-finite edge term for pair (" +
                                  g.node_labels[u] + ", " + g.node_labels[v] + ")");
    throw std::domain_error("log_likelihood: non-finite result");
  }
  return ll;
}

}  // namespace pfcd
