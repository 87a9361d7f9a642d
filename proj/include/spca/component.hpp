// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "spca/linalg.hpp"

namespace spca {

/// Strictly increasing set of 0-based variable indices within {0..n-1}.
/// User-facing output converts to 1-based through one_based().
class SparsityPattern {
 public:
  SparsityPattern() = default;

  SparsityPattern(std::vector<Index> indices, Index n) : idx_(std::move(indices)), n_(n) {
    std::sort(idx_.begin(), idx_.end());
    if (std::adjacent_find(idx_.begin(), idx_.end()) != idx_.end()) {
      throw Error(ErrorCode::InvalidArgument, "duplicate index in sparsity pattern");
    }
    if (!idx_.empty() && (idx_.front() < 0 || idx_.back() >= n_)) {
      throw Error(ErrorCode::InvalidArgument, "pattern index out of range");
    }
  }

  static SparsityPattern from_one_based(const std::vector<long>& one_based, Index n) {
    std::vector<Index> idx;
    idx.reserve(one_based.size());
    for (long i : one_based) idx.push_back(static_cast<Index>(i - 1));
    return SparsityPattern(std::move(idx), n);
  }

  const std::vector<Index>& indices() const { return idx_; }
  Index dimension() const { return n_; }
  size_t size() const { return idx_.size(); }
  bool empty() const { return idx_.empty(); }
  bool contains(Index i) const { return std::binary_search(idx_.begin(), idx_.end(), i); }

  std::vector<long> one_based() const {
    std::vector<long> out;
    out.reserve(idx_.size());
    for (Index i : idx_) out.push_back(static_cast<long>(i) + 1);
    return out;
  }

  /// Indices not in the pattern.
  std::vector<Index> complement() const {
    std::vector<Index> out;
    for (Index i = 0; i < n_; ++i) {
      if (!contains(i)) out.push_back(i);
    }
    return out;
  }

  SparsityPattern with(Index i) const {
    auto idx = idx_;
    idx.push_back(i);
    return SparsityPattern(std::move(idx), n_);
  }

  bool operator==(const SparsityPattern& o) const { return n_ == o.n_ && idx_ == o.idx_; }

 private:
  std::vector<Index> idx_;
  Index n_ = 0;
};

/// Unit-norm loading vector (or exactly zero) together with the variance it
/// explains and, when a penalty applies, variance - rho * |support|.
struct SparseComponent {
  Vector z;
  SparsityPattern support;
  double variance = 0.0;
  double penalized_objective = 0.0;

  bool is_zero() const { return support.empty(); }

  static SparseComponent zero(Index n) { return {Vector::Zero(n), SparsityPattern({}, n), 0.0, 0.0}; }
};

/// Leading eigenvector of the principal submatrix on `pattern`, padded with
/// zeros. An empty pattern yields the zero component with objective 0.
inline SparseComponent pattern_solution(const SymmetricMatrix& sigma, const SparsityPattern& pattern,
                                        double rho = 0.0) {
  const Index n = sigma.size();
  if (pattern.dimension() != n) {
    throw Error(ErrorCode::DimensionMismatch, "pattern dimension differs from matrix size");
  }
  if (pattern.empty()) return SparseComponent::zero(n);

  const auto& idx = pattern.indices();
  const auto lead = leading_eig(SymmetricMatrix(sigma.principal(idx)));
  Vector z = Vector::Zero(n);
  for (size_t a = 0; a < idx.size(); ++a) z[idx[a]] = lead.vector[static_cast<Index>(a)];
  const double k = static_cast<double>(idx.size());
  return {std::move(z), pattern, lead.value, lead.value - rho * k};
}

}  // namespace spca
