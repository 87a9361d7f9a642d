// SPDX-License-Identifier: Apache-2.0

// l1-penalized semidefinite relaxation
//
//   maximize  Tr(Sigma X) - rho * 1^T |X| 1   s.t.  Tr X = 1, X psd
//
// solved through its dual  min { lambda_max(Sigma + U) : |U_ij| <= rho }
// with a smoothed objective and an optimal first-order (estimate sequence)
// scheme. The smoothed dual objective is
//
//   f_mu(U) = mu log Tr exp((Sigma + U) / mu) - mu log n,
//
// whose gradient is the unit-trace matrix exponential; that gradient is also
// the running primal estimate X.

#pragma once

#include <cmath>
#include <limits>
#include <optional>

#include "spca/component.hpp"

namespace spca {

struct DspcaConfig {
  double rho = 0.0;
  double epsilon = 1e-3;
  long gap_check_stride = 100;
  long max_iter = 0;  // 0 selects default_max_iter()
  std::optional<double> mu_override;
  double zero_tol = 1e-3;

  void validate() const {
    if (!(rho >= 0.0) || !std::isfinite(rho)) throw Error(ErrorCode::InvalidArgument, "rho must be >= 0");
    if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be > 0");
    if (gap_check_stride < 1) throw Error(ErrorCode::InvalidArgument, "gap_check_stride must be >= 1");
    if (max_iter < 0) throw Error(ErrorCode::InvalidArgument, "max_iter must be >= 0");
    if (mu_override && !(*mu_override > 0.0)) throw Error(ErrorCode::NonPositiveMu, "mu override must be > 0");
    if (!(zero_tol >= 0.0 && zero_tol < 1.0)) throw Error(ErrorCode::InvalidArgument, "zero_tol must be in [0,1)");
  }
};

/// Iteration cap: ten times rho * n * sqrt(log n) / epsilon, or 10000 when rho = 0.
inline long default_max_iter(Index n, double rho, double epsilon) {
  if (rho == 0.0) return 10000;
  const double dn = static_cast<double>(n);
  const double base = std::ceil(rho * dn * std::sqrt(std::log(std::max(dn, 1.0))) / epsilon);
  return std::max(10L, 10L * static_cast<long>(std::min(base, 1e15)));
}

/// Smoothing parameter epsilon / (2 log n); n = 1 has no smoothing error so epsilon is used.
inline double default_mu(Index n, double epsilon) {
  if (n <= 1) return epsilon;
  return epsilon / (2.0 * std::log(static_cast<double>(n)));
}

struct SmoothEvaluation {
  double value = 0.0;       // f_mu(U)
  double lambda_max = 0.0;  // lambda_max(Sigma + U)
  SymmetricMatrix gradient;
};

namespace detail {
inline void check_mu_and_dims(const SymmetricMatrix& sigma, const SymmetricMatrix& u, double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw Error(ErrorCode::NonPositiveMu, "mu must be > 0");
  if (sigma.size() != u.size()) throw Error(ErrorCode::DimensionMismatch, "Sigma and U differ in size");
}
}  // namespace detail

/// Value, gradient and lambda_max from a single eigendecomposition of Sigma + U.
inline SmoothEvaluation smooth_evaluate(const SymmetricMatrix& sigma, const SymmetricMatrix& u, double mu) {
  detail::check_mu_and_dims(sigma, u, mu);
  auto e = sym_expm_scaled(sigma + u, mu);
  const double n = static_cast<double>(sigma.size());
  return {mu * e.logtrace - mu * std::log(n), e.lambda_max, std::move(e.softmax_matrix)};
}

inline double smooth_value(const SymmetricMatrix& sigma, const SymmetricMatrix& u, double mu) {
  detail::check_mu_and_dims(sigma, u, mu);
  const auto d = sym_eig(sigma + u).values;
  const double dmax = d[0];
  const double sum = ((d.array() - dmax) / mu).exp().sum();
  return dmax + mu * std::log(sum) - mu * std::log(static_cast<double>(sigma.size()));
}

inline SymmetricMatrix smooth_gradient(const SymmetricMatrix& sigma, const SymmetricMatrix& u, double mu) {
  return smooth_evaluate(sigma, u, mu).gradient;
}

/// Tr(Sigma X) - rho * 1^T |X| 1.
inline double primal_objective(const SymmetricMatrix& sigma, const SymmetricMatrix& x, double rho) {
  return sigma.matrix().cwiseProduct(x.matrix()).sum() - rho * x.matrix().cwiseAbs().sum();
}

namespace detail {
inline void check_dual_feasible(const SymmetricMatrix& u, double rho) {
  const double slack = 1e-12 * std::max(1.0, rho);
  if (u.matrix().cwiseAbs().maxCoeff() > rho + slack) {
    throw Error(ErrorCode::InfeasibleDual, "|U_ij| exceeds rho");
  }
}

inline void check_primal_feasible(const SymmetricMatrix& x) {
  const double tr = x.matrix().trace();
  if (std::abs(tr - 1.0) > 1e-9) {
    throw Error(ErrorCode::InfeasiblePrimal, "Tr X = " + std::to_string(tr) + " differs from 1");
  }
  const double lmin = sym_eig(x).values.minCoeff();
  if (lmin < -1e-9) throw Error(ErrorCode::InfeasiblePrimal, "X is not positive semidefinite");
}
}  // namespace detail

/// lambda_max(Sigma + U) - Tr(Sigma X) + rho * 1^T |X| 1 for a feasible pair.
inline double duality_gap(const SymmetricMatrix& sigma, const SymmetricMatrix& u, const SymmetricMatrix& x,
                          double rho) {
  if (sigma.size() != u.size() || sigma.size() != x.size()) {
    throw Error(ErrorCode::DimensionMismatch, "Sigma, U and X must share a size");
  }
  detail::check_dual_feasible(u, rho);
  detail::check_primal_feasible(x);
  return lambda_max(sigma + u) - primal_objective(sigma, x, rho);
}

/// Dominant eigenvector of X, truncated below zero_tol * max |x_i| and then
/// re-solved on the surviving support.
inline SparseComponent extract_component(const SymmetricMatrix& x, const SymmetricMatrix& sigma,
                                         double zero_tol = 1e-3, double rho = 0.0) {
  if (x.size() != sigma.size()) throw Error(ErrorCode::DimensionMismatch, "X and Sigma differ in size");
  const auto lead = leading_eig(x);
  const double vmax = lead.vector.cwiseAbs().maxCoeff();
  std::vector<Index> keep;
  for (Index i = 0; i < lead.vector.size(); ++i) {
    if (vmax > 0.0 && std::abs(lead.vector[i]) >= zero_tol * vmax) keep.push_back(i);
  }
  return pattern_solution(sigma, SparsityPattern(std::move(keep), sigma.size()), rho);
}

struct GapRecord {
  long iteration = 0;
  double gap = 0.0;  // best dual value minus best primal value so far
};

struct DspcaResult {
  SymmetricMatrix u_star;  // best dual point seen
  SymmetricMatrix x_star;  // best primal point seen
  double dual_value = 0.0;    // lambda_max(Sigma + U_star), upper bound on the relaxation
  double primal_value = 0.0;  // objective at X_star, lower bound on the relaxation
  double gap = 0.0;
  long iterations = 0;
  double mu = 0.0;
  bool converged = false;
  SparseComponent component;
  std::vector<GapRecord> gap_history;
};

namespace detail {

// rho >= max_i Sigma_ii on a matrix whose entries are bounded by its diagonal:
// X = e_i e_i^T and U = -Sigma off the diagonal, -rho on it, are an exact
// primal-dual pair (both equal max_i Sigma_ii - rho), and the sparse problem's
// solution is z = 0.
inline std::optional<DspcaResult> zero_solution_shortcut(const SymmetricMatrix& sigma, const DspcaConfig& cfg) {
  const Matrix& s = sigma.matrix();
  Index top = 0;
  const double dmax = s.diagonal().maxCoeff(&top);
  if (cfg.rho < dmax || s.cwiseAbs().maxCoeff() > cfg.rho) return std::nullopt;

  const Index n = sigma.size();
  Matrix u = -s;
  u.diagonal().setConstant(-cfg.rho);
  Matrix x = Matrix::Zero(n, n);
  x(top, top) = 1.0;

  DspcaResult r;
  r.u_star = SymmetricMatrix(u);
  r.x_star = SymmetricMatrix(x);
  r.dual_value = lambda_max(r.u_star + sigma);
  r.primal_value = primal_objective(sigma, r.x_star, cfg.rho);
  r.gap = std::max(0.0, r.dual_value - r.primal_value);
  r.iterations = 0;
  r.mu = cfg.mu_override.value_or(default_mu(n, cfg.epsilon));
  r.converged = r.gap <= cfg.epsilon;
  r.component = SparseComponent::zero(n);
  r.gap_history.push_back({0, r.gap});
  return r;
}

}  // namespace detail

/// Smoothed first-order solver for the penalized relaxation. Each iteration
/// takes a gradient-mapping step Y, an estimate-sequence step W built from the
/// weighted gradient sum, and sets U <- 2/(i+3) W + (i+1)/(i+3) Y, all
/// projected onto |U_ij| <= rho with Lipschitz constant L = 1/mu.
///
/// Every gap_check_stride iterations the duality gap is evaluated using the
/// dual candidates {U_i, Y_i} and the primal candidates {grad f_mu(U_i), the
/// weighted gradient average}; the best of each are kept, so the recorded gap
/// never increases.
inline DspcaResult dspca_solve(const SymmetricMatrix& sigma, const DspcaConfig& cfg) {
  cfg.validate();
  detail::require_finite(sigma.matrix(), "Sigma contains NaN or Inf");
  const Index n = sigma.size();

  if (auto shortcut = detail::zero_solution_shortcut(sigma, cfg)) return *shortcut;

  const double mu = cfg.mu_override.value_or(default_mu(n, cfg.epsilon));
  const double step = mu;  // 1 / L
  const long max_iter = cfg.max_iter > 0 ? cfg.max_iter : default_max_iter(n, cfg.rho, cfg.epsilon);

  SymmetricMatrix u = SymmetricMatrix::zero(n);
  Matrix accumulator = Matrix::Zero(n, n);
  double weight_total = 0.0;

  DspcaResult r;
  r.mu = mu;
  r.dual_value = std::numeric_limits<double>::infinity();
  r.primal_value = -std::numeric_limits<double>::infinity();

  auto offer_dual = [&](const SymmetricMatrix& cand, double value) {
    if (value < r.dual_value) {
      r.dual_value = value;
      r.u_star = cand;
    }
  };
  auto offer_primal = [&](const SymmetricMatrix& cand) {
    const double value = primal_objective(sigma, cand, cfg.rho);
    if (value > r.primal_value) {
      r.primal_value = value;
      r.x_star = cand;
    }
  };

  long i = 0;
  for (; i < max_iter; ++i) {
    const auto eval = smooth_evaluate(sigma, u, mu);
    if (!std::isfinite(eval.value) || !all_finite(eval.gradient.matrix())) {
      throw Error(ErrorCode::NonFiniteIterate, "non-finite smoothed objective at iteration " + std::to_string(i));
    }
    const Matrix& grad = eval.gradient.matrix();

    const SymmetricMatrix y = project_box(SymmetricMatrix(u.matrix() - step * grad), cfg.rho);
    const double w = 0.5 * static_cast<double>(i + 1);
    accumulator += w * grad;
    weight_total += w;
    const SymmetricMatrix wpt = project_box(SymmetricMatrix(-step * accumulator), cfg.rho);

    const bool last = (i + 1 == max_iter);
    if (i % cfg.gap_check_stride == 0 || last) {
      offer_dual(u, eval.lambda_max);
      offer_dual(y, lambda_max(sigma + y));
      offer_primal(eval.gradient);
      offer_primal(SymmetricMatrix(accumulator / weight_total));
      r.gap = r.dual_value - r.primal_value;
      r.gap_history.push_back({i, r.gap});
      if (r.gap <= cfg.epsilon) {
        r.converged = true;
        ++i;
        break;
      }
    }

    const double ip = static_cast<double>(i);
    u = SymmetricMatrix((2.0 / (ip + 3.0)) * wpt.matrix() + ((ip + 1.0) / (ip + 3.0)) * y.matrix());
  }
  r.iterations = i;

  r.component = extract_component(r.x_star, sigma, cfg.zero_tol, cfg.rho);
  return r;
}

}  // namespace spca
