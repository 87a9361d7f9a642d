// SPDX-License-Identifier: Apache-2.0

// Dense symmetric kernel shared by every solver: eigendecomposition with a
// deterministic sign convention, the shifted matrix exponential used by the
// smoothed eigenvalue objective, square-root factors and box projection.

#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "spca/error.hpp"

namespace spca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

namespace tol {
inline constexpr double eig = 1e-10;
inline constexpr double fact = 1e-10;
inline constexpr double psd = 1e-8;
}  // namespace tol

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

/// Dense symmetric matrix. Construction symmetrizes as (M + M^T) / 2, so the
/// stored entries are exactly symmetric.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;

  explicit SymmetricMatrix(const Matrix& m) {
    if (m.rows() != m.cols()) {
      throw Error(ErrorCode::DimensionMismatch, "symmetric matrix must be square");
    }
    if (m.rows() < 1) {
      throw Error(ErrorCode::BadShape, "symmetric matrix must have n >= 1");
    }
    m_ = 0.5 * (m + m.transpose());
  }

  static SymmetricMatrix identity(Index n) { return SymmetricMatrix(Matrix::Identity(n, n)); }
  static SymmetricMatrix zero(Index n) { return SymmetricMatrix(Matrix::Zero(n, n)); }
  static SymmetricMatrix diagonal(const Vector& d) {
    return SymmetricMatrix(Matrix(d.asDiagonal()));
  }

  Index size() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  double operator()(Index i, Index j) const { return m_(i, j); }
  Vector diagonal() const { return m_.diagonal(); }

  SymmetricMatrix operator+(const SymmetricMatrix& o) const { return SymmetricMatrix(m_ + o.m_); }
  SymmetricMatrix operator-(const SymmetricMatrix& o) const { return SymmetricMatrix(m_ - o.m_); }
  SymmetricMatrix operator*(double s) const { return SymmetricMatrix(m_ * s); }

  /// Principal submatrix on the given (0-based) indices.
  Matrix principal(const std::vector<Index>& idx) const {
    const auto k = static_cast<Index>(idx.size());
    Matrix out(k, k);
    for (Index a = 0; a < k; ++a) {
      for (Index b = 0; b < k; ++b) out(a, b) = m_(idx[a], idx[b]);
    }
    return out;
  }

 private:
  Matrix m_;
};

struct EigenDecomposition {
  Vector values;   // descending
  Matrix vectors;  // orthonormal columns matching `values`
};

/// Flips `v` so that its entry of largest magnitude is positive. Entries within
/// a relative 1e-12 of the maximum count as tied; the lowest index wins.
inline void fix_sign(Eigen::Ref<Vector> v) {
  if (v.size() == 0) return;
  const double vmax = v.cwiseAbs().maxCoeff();
  if (vmax == 0.0) return;
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) >= vmax * (1.0 - 1e-12)) {
      if (v[i] < 0.0) v = -v;
      return;
    }
  }
}

namespace detail {

inline void require_finite(const Matrix& m, const char* what) {
  if (!all_finite(m)) throw Error(ErrorCode::NonFiniteInput, what);
}

// Descending eigendecomposition of a raw symmetric matrix. Equal eigenvalues
// keep the order the solver produced them in.
inline EigenDecomposition sym_eig_raw(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(s, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NonFiniteInput, "eigendecomposition failed to converge");
  }
  const Index n = s.rows();
  std::vector<Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  const Vector& ev = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return ev[a] > ev[b]; });

  EigenDecomposition out{Vector(n), Matrix(n, n)};
  for (Index j = 0; j < n; ++j) {
    out.values[j] = ev[order[j]];
    out.vectors.col(j) = solver.eigenvectors().col(order[j]);
    fix_sign(out.vectors.col(j));
  }
  return out;
}

inline Vector sym_eigenvalues_raw(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(s, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NonFiniteInput, "eigendecomposition failed to converge");
  }
  return solver.eigenvalues().reverse();
}

inline double lambda_max_raw(const Matrix& s) {
  if (s.rows() == 1) return s(0, 0);
  return sym_eigenvalues_raw(s)[0];
}

}  // namespace detail

inline EigenDecomposition sym_eig(const SymmetricMatrix& s) {
  detail::require_finite(s.matrix(), "sym_eig input contains NaN or Inf");
  return detail::sym_eig_raw(s.matrix());
}

/// Largest eigenvalue only (no eigenvectors).
inline double lambda_max(const SymmetricMatrix& s) {
  detail::require_finite(s.matrix(), "lambda_max input contains NaN or Inf");
  return detail::lambda_max_raw(s.matrix());
}

struct LeadingEigenpair {
  double value = 0.0;
  Vector vector;
};

inline LeadingEigenpair leading_eig(const SymmetricMatrix& s) {
  auto d = sym_eig(s);
  return {d.values[0], d.vectors.col(0)};
}

struct ScaledExponential {
  double logtrace = 0.0;          // log Tr exp(S / mu)
  double lambda_max = 0.0;        // largest eigenvalue of S
  SymmetricMatrix softmax_matrix; // exp(S / mu) / Tr exp(S / mu)
};

/// exp(S/mu) normalized to unit trace, evaluated through the eigenvalues of S
/// shifted by their maximum so no exponent is positive.
inline ScaledExponential sym_expm_scaled(const SymmetricMatrix& s, double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw Error(ErrorCode::NonPositiveMu, "mu must be a positive finite number");
  }
  const auto eig = sym_eig(s);
  const double dmax = eig.values[0];
  // Terms below exp(-700) cannot move a sum that is at least 1; zeroing them
  // keeps subnormals out of the reconstruction below.
  const Eigen::ArrayXd arg = (eig.values.array() - dmax) / mu;
  Vector w = (arg < -700.0).select(0.0, arg.exp()).matrix();
  const double total = w.sum();  // >= 1 because the top term is exp(0)
  w /= total;
  Matrix soft = eig.vectors * w.asDiagonal() * eig.vectors.transpose();
  return {dmax / mu + std::log(total), dmax, SymmetricMatrix(soft)};
}

/// Square root A (q x n) of a positive semidefinite matrix, Sigma = A^T A.
/// Column i of A is the vector a_i.
class FactorMatrix {
 public:
  FactorMatrix() = default;
  explicit FactorMatrix(Matrix a) : a_(std::move(a)) {
    if (a_.cols() < 1 || a_.rows() < 1) throw Error(ErrorCode::BadShape, "empty factor");
    detail::require_finite(a_, "factor contains NaN or Inf");
  }

  Index dimension() const { return a_.cols(); }
  Index rows() const { return a_.rows(); }
  const Matrix& matrix() const { return a_; }
  auto column(Index i) const { return a_.col(i); }

  Vector column_norms_squared() const { return a_.colwise().squaredNorm().transpose(); }

  SymmetricMatrix gram() const { return SymmetricMatrix(a_.transpose() * a_); }

  /// Gram submatrix A_J^T A_J on 0-based column indices.
  Matrix gram_block(const std::vector<Index>& idx) const {
    Matrix cols(a_.rows(), static_cast<Index>(idx.size()));
    for (Index j = 0; j < cols.cols(); ++j) cols.col(j) = a_.col(idx[static_cast<size_t>(j)]);
    return cols.transpose() * cols;
  }

 private:
  Matrix a_;
};

/// Cholesky when S is numerically positive definite, otherwise an eigenvalue
/// square root with slightly negative eigenvalues clipped to zero.
inline FactorMatrix square_root_factor(const SymmetricMatrix& s) {
  detail::require_finite(s.matrix(), "square_root_factor input contains NaN or Inf");
  const double scale = std::max(1.0, s.matrix().norm());

  Eigen::LLT<Matrix> llt(s.matrix());
  if (llt.info() == Eigen::Success) {
    Matrix upper = llt.matrixU();
    if ((upper.transpose() * upper - s.matrix()).norm() <= tol::fact * scale &&
        upper.diagonal().minCoeff() > 0.0) {
      return FactorMatrix(std::move(upper));
    }
  }

  const auto eig = detail::sym_eig_raw(s.matrix());
  const double top = eig.values[0];
  const double floor = -tol::psd * std::abs(top);
  if (eig.values.minCoeff() < floor || (top < 0.0)) {
    throw Error(ErrorCode::NotPositiveSemidefinite,
                "smallest eigenvalue " + std::to_string(eig.values.minCoeff()) +
                    " is below -tol_psd * lambda_max");
  }
  Vector root = eig.values.cwiseMax(0.0).cwiseSqrt();
  return FactorMatrix(root.asDiagonal() * eig.vectors.transpose());
}

/// Entrywise clamp onto {Y : |Y_ij| <= rho}, the Frobenius projection onto the box.
inline SymmetricMatrix project_box(const SymmetricMatrix& v, double rho) {
  if (!(rho >= 0.0)) throw Error(ErrorCode::InvalidArgument, "rho must be >= 0");
  detail::require_finite(v.matrix(), "project_box input contains NaN or Inf");
  return SymmetricMatrix(v.matrix().cwiseMax(-rho).cwiseMin(rho));
}

}  // namespace spca
