// SPDX-License-Identifier: Apache-2.0

// Optimality certificates and upper bounds for the l0-penalized problem
//
//   phi(rho) = max_{||z|| <= 1} z^T Sigma z - rho Card(z)
//            = max_{||x|| = 1} sum_i ((a_i^T x)^2 - rho)_+ ,  Sigma = A^T A.
//
// A pattern I is certified at rho* by building dual matrices Y_i for the
// semidefinite relaxation of the right-hand side; when the Y_i are feasible,
// lambda_max(sum_i Y_i) also bounds phi(rho*) from above whether or not the
// certificate closes.

#pragma once

#include <cmath>
#include <limits>
#include <optional>

#include "spca/component.hpp"
#include "spca/dspca.hpp"

namespace spca {

namespace tol {
inline constexpr double cert = 1e-8;
}  // namespace tol

/// sum_i ((a_i^T x)^2 - rho)_+ for a unit vector x.
inline double nonconvex_objective(const FactorMatrix& a, const Vector& x, double rho) {
  if (x.size() != a.rows()) throw Error(ErrorCode::DimensionMismatch, "x must have one entry per row of A");
  if (std::abs(x.norm() - 1.0) > 1e-8) throw Error(ErrorCode::NotUnitNorm, "x must have unit norm");
  const Vector proj = a.matrix().transpose() * x;
  return (proj.array().square() - rho).cwiseMax(0.0).sum();
}

/// Variables that can appear in an optimal pattern: ||a_i||^2 = Sigma_ii > rho.
inline SparsityPattern prune_variables(const FactorMatrix& a, double rho) {
  const Vector d = a.column_norms_squared();
  std::vector<Index> keep;
  for (Index i = 0; i < d.size(); ++i) {
    if (d[i] > rho) keep.push_back(i);
  }
  return SparsityPattern(std::move(keep), a.dimension());
}

struct CertificateReport {
  SparsityPattern pattern;
  double rho_star = std::numeric_limits<double>::quiet_NaN();
  double eig_gap_lhs = std::numeric_limits<double>::infinity();  // lambda_max(sum Y_i)
  double eig_gap_rhs = -std::numeric_limits<double>::infinity(); // sum_{i in I} ((a_i^T x)^2 - rho*)
  double interval_low = 0.0;   // max over the complement of (a_i^T x)^2
  double interval_high = 0.0;  // min over the pattern of (a_i^T x)^2
  bool interval_ok = false;
  bool dual_feasible = false;  // Y_i >= B_i and Y_i >= 0 verified numerically
  bool certified = false;

  bool interval_nonempty() const { return interval_low < interval_high; }

  /// Upper bound on phi(rho*) carried by the dual matrices, if they are feasible.
  std::optional<double> phi_upper_bound() const {
    if (!dual_feasible) return std::nullopt;
    return std::max(0.0, eig_gap_lhs);
  }
};

struct CertificateDuals {
  Vector x;                   // leading eigenvector of sum_{i in I} a_i a_i^T
  Vector scores;              // (a_i^T x)^2 for every i
  std::vector<Matrix> duals;  // Y_i, one per variable (empty if not built)
};

namespace detail {

inline Vector pattern_direction(const FactorMatrix& a, const SparsityPattern& pattern) {
  Matrix m = Matrix::Zero(a.rows(), a.rows());
  for (Index i : pattern.indices()) m.noalias() += a.column(i) * a.column(i).transpose();
  return leading_eig(SymmetricMatrix(m)).vector;
}

}  // namespace detail

/// Builds the dual matrices Y_i for pattern I at rho*. Requires
/// (a_i^T x)^2 - rho* > tol for every i in I.
inline CertificateDuals certificate_duals(const FactorMatrix& a, const SparsityPattern& pattern, double rho_star) {
  if (pattern.empty()) throw Error(ErrorCode::EmptyPattern, "certificate needs a non-empty pattern");
  const Index q = a.rows();
  CertificateDuals out;
  out.x = detail::pattern_direction(a, pattern);
  const Vector proj = a.matrix().transpose() * out.x;
  out.scores = proj.array().square().matrix();

  const Matrix projector = Matrix::Identity(q, q) - out.x * out.x.transpose();
  for (Index i = 0; i < a.dimension(); ++i) {
    const Vector ai = a.column(i);
    if (pattern.contains(i)) {
      const double denom = out.scores[i] - rho_star;  // x^T B_i x
      if (denom <= tol::cert) {
        throw Error(ErrorCode::DegenerateDenominator,
                    "x^T B_i x = " + std::to_string(denom) + " for variable " + std::to_string(i + 1));
      }
      const Vector bx = ai * proj[i] - rho_star * out.x;  // B_i x
      out.duals.push_back(bx * bx.transpose() / denom);
    } else {
      const Vector pa = projector * ai;
      const double pn2 = pa.squaredNorm();
      const double coeff = rho_star * (ai.squaredNorm() - rho_star) / (rho_star - out.scores[i]);
      if (pn2 <= 0.0 || !(coeff > 0.0)) {
        out.duals.push_back(Matrix::Zero(q, q));
      } else {
        out.duals.push_back(coeff * pa * pa.transpose() / pn2);
      }
    }
  }
  return out;
}

/// Sufficient global-optimality test for pattern I. Without rho_star the
/// midpoint of the admissible open interval is used. A failed certificate is
/// reported through `certified = false`, never by throwing.
inline CertificateReport certify_pattern(const FactorMatrix& a, const SparsityPattern& pattern,
                                         std::optional<double> rho_star = std::nullopt) {
  if (pattern.empty()) throw Error(ErrorCode::EmptyPattern, "certificate needs a non-empty pattern");
  if (pattern.dimension() != a.dimension()) throw Error(ErrorCode::DimensionMismatch, "pattern size");

  CertificateReport rep;
  rep.pattern = pattern;
  const Vector x = detail::pattern_direction(a, pattern);
  const Vector scores = (a.matrix().transpose() * x).array().square().matrix();

  rep.interval_low = 0.0;
  rep.interval_high = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < a.dimension(); ++i) {
    if (pattern.contains(i)) {
      rep.interval_high = std::min(rep.interval_high, scores[i]);
    } else {
      rep.interval_low = std::max(rep.interval_low, scores[i]);
    }
  }
  if (!rho_star) {
    if (!rep.interval_nonempty()) return rep;
    rho_star = 0.5 * (rep.interval_low + rep.interval_high);
  }
  rep.rho_star = *rho_star;
  rep.interval_ok = rep.interval_low < rep.rho_star && rep.rho_star < rep.interval_high;
  if (!rep.interval_ok) return rep;

  const auto duals = certificate_duals(a, pattern, rep.rho_star);
  Matrix total = Matrix::Zero(a.rows(), a.rows());
  for (const auto& y : duals.duals) total += y;
  rep.eig_gap_lhs = lambda_max(SymmetricMatrix(total));
  rep.eig_gap_rhs = 0.0;
  for (Index i : pattern.indices()) rep.eig_gap_rhs += duals.scores[i] - rep.rho_star;

  // Dual feasibility of each Y_i: Y_i >= 0 and Y_i >= a_i a_i^T - rho* I.
  const Index q = a.rows();
  bool feasible = true;
  for (Index i = 0; i < a.dimension() && feasible; ++i) {
    const Matrix& y = duals.duals[static_cast<size_t>(i)];
    const double scale = std::max(1.0, a.column(i).squaredNorm());
    const Matrix b = a.column(i) * a.column(i).transpose() - rep.rho_star * Matrix::Identity(q, q);
    const double min_y = detail::sym_eigenvalues_raw(0.5 * (y + y.transpose())).minCoeff();
    const double min_yb = detail::sym_eigenvalues_raw(0.5 * ((y - b) + (y - b).transpose())).minCoeff();
    feasible = min_y >= -1e-9 * scale && min_yb >= -1e-9 * scale;
  }
  rep.dual_feasible = feasible;
  rep.certified = feasible && rep.eig_gap_lhs <= rep.eig_gap_rhs + tol::cert;
  return rep;
}

/// Tries the midpoint and then `points` evenly spaced interior values of the
/// admissible interval; returns the first certified report, or else the one
/// with the smallest lambda_max(sum Y_i) - rhs.
inline CertificateReport certify_pattern_scan(const FactorMatrix& a, const SparsityPattern& pattern,
                                              int points = 24) {
  auto best = certify_pattern(a, pattern);
  if (best.certified || !best.interval_nonempty()) return best;
  const double lo = best.interval_low;
  const double hi = best.interval_high;
  for (int j = 1; j <= points; ++j) {
    const double r = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(points + 1);
    auto rep = certify_pattern(a, pattern, r);
    if (rep.certified) return rep;
    if (rep.interval_ok && rep.eig_gap_lhs - rep.eig_gap_rhs < best.eig_gap_lhs - best.eig_gap_rhs) {
      best = std::move(rep);
    }
  }
  return best;
}

/// Penalty values paired with upper bounds (or exact values) of phi(rho).
struct PenaltyGrid {
  std::vector<double> rho_values;
  std::vector<double> phi_values;

  void add(double rho, double phi) {
    auto it = std::lower_bound(rho_values.begin(), rho_values.end(), rho);
    const auto pos = it - rho_values.begin();
    rho_values.insert(it, rho);
    phi_values.insert(phi_values.begin() + pos, phi);
  }
  bool empty() const { return rho_values.empty(); }
  size_t size() const { return rho_values.size(); }
};

/// min over the grid of phi(rho) + rho k: an upper bound on the largest
/// variance reachable with at most k nonzero loadings.
inline double weak_duality_bound(const PenaltyGrid& grid, Index k) {
  if (grid.empty()) throw Error(ErrorCode::EmptyGrid, "penalty grid is empty");
  if (grid.rho_values.size() != grid.phi_values.size()) {
    throw Error(ErrorCode::DimensionMismatch, "grid columns differ in length");
  }
  double best = std::numeric_limits<double>::infinity();
  for (size_t j = 0; j < grid.size(); ++j) {
    best = std::min(best, grid.phi_values[j] + grid.rho_values[j] * static_cast<double>(k));
  }
  return best;
}

/// Solves the l1 relaxation at each rho and records max(0, lambda_max(Sigma + U*)),
/// a valid upper bound on phi(rho) for any feasible U*.
inline PenaltyGrid dspca_penalty_grid(const SymmetricMatrix& sigma, const std::vector<double>& rhos,
                                      DspcaConfig cfg = {}) {
  PenaltyGrid grid;
  for (double rho : rhos) {
    cfg.rho = rho;
    const auto res = dspca_solve(sigma, cfg);
    grid.add(rho, std::max(0.0, res.dual_value));
  }
  return grid;
}

struct ExhaustiveResult {
  double value = 0.0;
  SparsityPattern pattern;
};

inline double binomial(Index n, Index k) {
  double c = 1.0;
  for (Index j = 1; j <= k; ++j) c = c * static_cast<double>(n - k + j) / static_cast<double>(j);
  return c;
}

/// Largest lambda_max over all principal submatrices of size k, enumerated in
/// lexicographic order; the first maximizer wins ties.
inline ExhaustiveResult exhaustive_sparse_eig(const SymmetricMatrix& sigma, Index k, double cap = 2e6) {
  const Index n = sigma.size();
  if (k < 1 || k > n) throw Error(ErrorCode::BadCardinality, "k outside [1, n]");
  if (binomial(n, k) > cap) {
    throw Error(ErrorCode::TooLarge, "C(" + std::to_string(n) + "," + std::to_string(k) + ") exceeds the cap");
  }
  detail::require_finite(sigma.matrix(), "Sigma contains NaN or Inf");

  std::vector<Index> comb(static_cast<size_t>(k));
  std::iota(comb.begin(), comb.end(), Index{0});
  ExhaustiveResult best{-std::numeric_limits<double>::infinity(), {}};
  while (true) {
    const double lam = detail::lambda_max_raw(sigma.principal(comb));
    if (lam > best.value) best = {lam, SparsityPattern(comb, n)};

    Index pos = k - 1;
    while (pos >= 0 && comb[static_cast<size_t>(pos)] == n - k + pos) --pos;
    if (pos < 0) break;
    ++comb[static_cast<size_t>(pos)];
    for (Index j = pos + 1; j < k; ++j) comb[static_cast<size_t>(j)] = comb[static_cast<size_t>(j - 1)] + 1;
  }
  return best;
}

}  // namespace spca
