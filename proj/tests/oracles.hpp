// SPDX-License-Identifier: Apache-2.0

// Reference computations for the test suite. Everything here uses plain loops
// over Eigen storage and never calls a library decomposition.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Cyclic Jacobi rotations; eigenvalues sorted descending.
inline Vec jacobi_eigenvalues(Mat a, int sweeps = 100) {
  const auto n = a.rows();
  for (int s = 0; s < sweeps; ++s) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30 * std::max(1.0, a.squaredNorm())) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
      }
    }
  }
  Vec d = a.diagonal();
  std::sort(d.data(), d.data() + d.size(), std::greater<>());
  return d;
}

inline double jacobi_lambda_max(const Mat& a) { return jacobi_eigenvalues(a)[0]; }

/// exp(A) by scaling, a 30-term Taylor series and repeated squaring.
inline Mat taylor_expm(const Mat& a) {
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  while (norm / std::pow(2.0, squarings) > 0.5) ++squarings;
  const Mat s = a / std::pow(2.0, squarings);
  Mat term = Mat::Identity(a.rows(), a.cols());
  Mat sum = term;
  for (int k = 1; k <= 30; ++k) {
    term = term * s / static_cast<double>(k);
    sum += term;
  }
  for (int j = 0; j < squarings; ++j) sum = sum * sum;
  return sum;
}

inline Mat principal(const Mat& s, const std::vector<Eigen::Index>& idx) {
  Mat out(idx.size(), idx.size());
  for (size_t a = 0; a < idx.size(); ++a)
    for (size_t b = 0; b < idx.size(); ++b) out(a, b) = s(idx[a], idx[b]);
  return out;
}

struct SubsetOptimum {
  double value = 0.0;
  std::vector<Eigen::Index> subset;  // 0-based, increasing
};

/// max over every subset I of lambda_max(Sigma_I) - rho |I|, the empty set
/// scoring 0. Subsets visited by bitmask; the first maximizer is kept.
inline SubsetOptimum penalized_bruteforce(const Mat& sigma, double rho) {
  const auto n = sigma.rows();
  SubsetOptimum best{0.0, {}};
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < n; ++i)
      if (mask >> i & 1U) idx.push_back(i);
    const double v = jacobi_lambda_max(principal(sigma, idx)) - rho * static_cast<double>(idx.size());
    if (v > best.value + 1e-12) best = {v, idx};
  }
  return best;
}

/// max over subsets of size exactly k of lambda_max(Sigma_I).
inline double cardinality_bruteforce(const Mat& sigma, Eigen::Index k) {
  const auto n = sigma.rows();
  double best = -std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < n; ++i)
      if (mask >> i & 1U) idx.push_back(i);
    if (static_cast<Eigen::Index>(idx.size()) != k) continue;
    best = std::max(best, jacobi_lambda_max(principal(sigma, idx)));
  }
  return best;
}

/// Covariance from explicit means then explicit deviations, 1/(m-1).
inline Mat two_pass_covariance(const Mat& d) {
  const auto m = d.rows();
  const auto n = d.cols();
  std::vector<double> mean(n, 0.0);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index t = 0; t < m; ++t) mean[j] += d(t, j);
    mean[j] /= static_cast<double>(m);
  }
  Mat c = Mat::Zero(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) {
      double s = 0.0;
      for (Eigen::Index t = 0; t < m; ++t) s += (d(t, a) - mean[a]) * (d(t, b) - mean[b]);
      c(a, b) = s / static_cast<double>(m - 1);
    }
  return c;
}

/// Central difference (f(x + hH) - f(x - hH)) / 2h.
template <class F>
double central_difference(F&& f, double h = 1e-5) {
  return (f(h) - f(-h)) / (2.0 * h);
}

/// Random symmetric matrix with N(0,1) entries.
inline Mat random_symmetric(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Mat a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = g(rng);
  return 0.5 * (a + a.transpose());
}

/// G^T G with G of size q x n standard normal.
inline Mat random_psd(Eigen::Index n, std::mt19937_64& rng, Eigen::Index q = -1) {
  if (q < 0) q = n;
  std::normal_distribution<double> g;
  Mat a(q, n);
  for (Eigen::Index i = 0; i < q; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = g(rng);
  return a.transpose() * a;
}

inline Mat random_orthogonal(Eigen::Index n, std::mt19937_64& rng) {
  // Gram-Schmidt on a Gaussian matrix.
  std::normal_distribution<double> g;
  Mat q(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) q(i, j) = g(rng);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < j; ++k) q.col(j) -= q.col(k).dot(q.col(j)) * q.col(k);
    q.col(j) /= q.col(j).norm();
  }
  return q;
}

}  // namespace oracle
