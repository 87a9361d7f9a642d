// SPDX-License-Identifier: Apache-2.0

// Sorting and thresholding baselines plus the greedy forward-selection paths.
// Both greedy variants work on a square root A of Sigma (Sigma = A^T A) and
// never form more than the k x k Gram block of the current pattern, so a data
// matrix with q < n rows can be passed directly.

#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <string_view>

#include "spca/component.hpp"

namespace spca {

/// Nested sequence of patterns I_1 c I_2 c ... with their pattern solutions.
struct GreedyPath {
  std::vector<SparsityPattern> patterns;
  std::vector<SparseComponent> components;
  std::vector<double> variances;
  // Score that selected the index added at each step: the exact lambda_max for
  // the full search, (x_k^T a_i)^2 for the approximate one. Entry 0 is the
  // diagonal value of the initial index.
  std::vector<double> selection_scores;

  size_t size() const { return patterns.size(); }

  /// Indices in the order they entered the path.
  std::vector<Index> inclusion_order() const {
    std::vector<Index> order;
    for (size_t k = 0; k < patterns.size(); ++k) {
      for (Index i : patterns[k].indices()) {
        if (k == 0 || !patterns[k - 1].contains(i)) order.push_back(i);
      }
    }
    return order;
  }
};

/// Variables ordered by decreasing diagonal; ties keep the lower index first.
inline std::vector<Index> sort_by_variance(const SymmetricMatrix& sigma) {
  const Vector d = sigma.diagonal();
  std::vector<Index> order(static_cast<size_t>(d.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return d[a] > d[b]; });
  return order;
}

namespace detail {

inline std::vector<Index> order_by_magnitude(const Vector& v) {
  std::vector<Index> order(static_cast<size_t>(v.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return std::abs(v[a]) > std::abs(v[b]); });
  return order;
}

inline void check_cardinality(Index k, Index n) {
  if (k < 1 || k > n) {
    throw Error(ErrorCode::BadCardinality,
                "cardinality " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  }
}

// Pattern solution computed from the Gram block of A; also returns the unit
// vector x = A_I z / ||A_I z|| (zero when the pattern carries no variance).
struct FactorPatternSolution {
  SparseComponent component;
  Vector x;
};

inline FactorPatternSolution factor_pattern_solution(const FactorMatrix& a, const SparsityPattern& pattern) {
  const Index n = a.dimension();
  const auto& idx = pattern.indices();
  const auto lead = leading_eig(SymmetricMatrix(a.gram_block(idx)));
  Vector z = Vector::Zero(n);
  Vector x = Vector::Zero(a.rows());
  for (size_t j = 0; j < idx.size(); ++j) {
    z[idx[j]] = lead.vector[static_cast<Index>(j)];
    x.noalias() += lead.vector[static_cast<Index>(j)] * a.column(idx[j]);
  }
  const double xn = x.norm();
  if (lead.value > 0.0 && xn > 0.0) {
    x /= xn;
  } else {
    x.setZero();
  }
  return {{std::move(z), pattern, lead.value, lead.value}, std::move(x)};
}

inline double candidate_lambda_max(const FactorMatrix& a, const SparsityPattern& pattern, Index i) {
  auto idx = pattern.indices();
  idx.push_back(i);
  return detail::lambda_max_raw(a.gram_block(idx));
}

enum class Selection { full, approximate };

inline GreedyPath greedy_path(const FactorMatrix& a, Index k_target, Selection mode, Index candidate_width) {
  const Index n = a.dimension();
  check_cardinality(k_target, n);
  if (candidate_width < 1) throw Error(ErrorCode::InvalidArgument, "candidate_width must be >= 1");

  // Initial index: largest diagonal entry, lowest index on ties.
  const Vector diag = a.column_norms_squared();
  Index first = 0;
  for (Index i = 1; i < n; ++i) {
    if (diag[i] > diag[first]) first = i;
  }

  GreedyPath path;
  SparsityPattern current({first}, n);
  auto sol = factor_pattern_solution(a, current);
  path.patterns.push_back(current);
  path.variances.push_back(sol.component.variance);
  path.components.push_back(sol.component);
  path.selection_scores.push_back(diag[first]);

  for (Index k = 1; k < k_target; ++k) {
    const auto rest = current.complement();
    Index chosen = -1;
    double chosen_score = -std::numeric_limits<double>::infinity();

    if (mode == Selection::full) {
      for (Index i : rest) {
        const double lam = candidate_lambda_max(a, current, i);
        if (lam > chosen_score) {
          chosen_score = lam;
          chosen = i;
        }
      }
    } else {
      const Vector proj = a.matrix().transpose() * sol.x;
      std::vector<Index> ranked = rest;
      std::stable_sort(ranked.begin(), ranked.end(),
                       [&](Index l, Index r) { return proj[l] * proj[l] > proj[r] * proj[r]; });
      chosen = ranked.front();
      chosen_score = proj[chosen] * proj[chosen];
      const auto width = std::min<size_t>(static_cast<size_t>(candidate_width), ranked.size());
      if (width > 1) {
        double best_lam = -std::numeric_limits<double>::infinity();
        for (size_t c = 0; c < width; ++c) {
          const double lam = candidate_lambda_max(a, current, ranked[c]);
          if (lam > best_lam || (lam == best_lam && ranked[c] < chosen)) {
            best_lam = lam;
            chosen = ranked[c];
            chosen_score = proj[chosen] * proj[chosen];
          }
        }
      }
    }

    current = current.with(chosen);
    sol = factor_pattern_solution(a, current);
    path.patterns.push_back(current);
    path.variances.push_back(sol.component.variance);
    path.components.push_back(sol.component);
    path.selection_scores.push_back(chosen_score);
  }
  return path;
}

}  // namespace detail

/// Full greedy search: each step adds the index maximizing the exact
/// lambda_max of the enlarged pattern.
inline GreedyPath greedy_full(const FactorMatrix& a, Index k_target) {
  return detail::greedy_path(a, k_target, detail::Selection::full, 1);
}

inline GreedyPath greedy_full(const SymmetricMatrix& sigma, Index k_target) {
  return greedy_full(square_root_factor(sigma), k_target);
}

/// Approximate greedy search: each step adds the index maximizing (x_k^T a_i)^2,
/// the guaranteed variance increase. With candidate_width p > 1 the top p
/// candidates are re-scored by their exact lambda_max.
inline GreedyPath greedy_approx(const FactorMatrix& a, Index k_target, Index candidate_width = 1) {
  return detail::greedy_path(a, k_target, detail::Selection::approximate, candidate_width);
}

inline GreedyPath greedy_approx(const SymmetricMatrix& sigma, Index k_target, Index candidate_width = 1) {
  return greedy_approx(square_root_factor(sigma), k_target, candidate_width);
}

/// Nested path from thresholding the leading eigenvector of Sigma at each cardinality.
inline GreedyPath threshold_path(const SymmetricMatrix& sigma, Index k_target) {
  const Index n = sigma.size();
  detail::check_cardinality(k_target, n);
  const auto lead = leading_eig(sigma);
  const auto order = detail::order_by_magnitude(lead.vector);

  GreedyPath path;
  std::vector<Index> chosen;
  for (Index k = 0; k < k_target; ++k) {
    chosen.push_back(order[static_cast<size_t>(k)]);
    SparsityPattern p(chosen, n);
    auto c = pattern_solution(sigma, p);
    path.patterns.push_back(p);
    path.variances.push_back(c.variance);
    path.components.push_back(std::move(c));
    path.selection_scores.push_back(std::abs(lead.vector[order[static_cast<size_t>(k)]]));
  }
  return path;
}

/// Keeps the k largest-magnitude entries of the leading eigenvector and
/// re-solves on that support.
inline SparseComponent threshold_leading(const SymmetricMatrix& sigma, Index k) {
  detail::check_cardinality(k, sigma.size());
  const auto lead = leading_eig(sigma);
  const auto order = detail::order_by_magnitude(lead.vector);
  std::vector<Index> keep(order.begin(), order.begin() + k);
  return pattern_solution(sigma, SparsityPattern(std::move(keep), sigma.size()));
}

enum class PathMethod { greedy_full, greedy_approx, threshold };

inline PathMethod parse_path_method(std::string_view name) {
  if (name == "greedy" || name == "greedy_full" || name == "greedy-full") return PathMethod::greedy_full;
  if (name == "greedy-approx" || name == "greedy_approx") return PathMethod::greedy_approx;
  if (name == "threshold" || name == "threshold_pca") return PathMethod::threshold;
  throw Error(ErrorCode::UnknownMethod, "unknown path method '" + std::string(name) + "'");
}

struct PenalizedSolution {
  SparseComponent component;
  GreedyPath path;  // path over the surviving variables, original indexing
};

/// Maximizes z^T Sigma z - rho * Card(z) along a path. Variables with
/// Sigma_ii <= rho are removed first; when none survive the answer is z = 0.
inline PenalizedSolution penalized_path(const SymmetricMatrix& sigma, double rho, PathMethod method,
                                        Index candidate_width = 1) {
  if (!(rho >= 0.0)) throw Error(ErrorCode::InvalidArgument, "rho must be >= 0");
  const Index n = sigma.size();
  std::vector<Index> survivors;
  for (Index i = 0; i < n; ++i) {
    if (sigma(i, i) > rho) survivors.push_back(i);
  }
  if (survivors.empty()) return {SparseComponent::zero(n), {}};

  const SymmetricMatrix reduced(sigma.principal(survivors));
  const auto m = static_cast<Index>(survivors.size());
  GreedyPath local;
  switch (method) {
    case PathMethod::greedy_full: local = greedy_full(reduced, m); break;
    case PathMethod::greedy_approx: local = greedy_approx(reduced, m, candidate_width); break;
    case PathMethod::threshold: local = threshold_path(reduced, m); break;
  }

  GreedyPath path;
  path.variances = local.variances;
  path.selection_scores = local.selection_scores;
  for (const auto& p : local.patterns) {
    std::vector<Index> idx;
    for (Index j : p.indices()) idx.push_back(survivors[static_cast<size_t>(j)]);
    SparsityPattern mapped(std::move(idx), n);
    path.components.push_back(pattern_solution(sigma, mapped, rho));
    path.patterns.push_back(std::move(mapped));
  }

  size_t best = 0;
  for (size_t k = 1; k < path.size(); ++k) {
    if (path.components[k].penalized_objective > path.components[best].penalized_objective) best = k;
  }
  if (path.components[best].penalized_objective <= 0.0) return {SparseComponent::zero(n), std::move(path)};
  auto comp = path.components[best];
  return {std::move(comp), std::move(path)};
}

}  // namespace spca
