// SPDX-License-Identifier: Apache-2.0

// Synthetic generators and evaluation harness: spiked covariance, Gaussian
// Gram and rank-one-plus-noise matrices, projection deflation, per-variable
// support scores, ROC curves, bound sweeps and the spiked recovery study.
//
// Random streams come from std::mt19937_64 seeded with the run seed (or
// seed ^ trial for per-trial streams); normals and uniforms use the standard
// library distributions. Streams are bit-reproducible for a given toolchain.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <string>
#include <thread>

#include "spca/certificates.hpp"
#include "spca/dspca.hpp"
#include "spca/greedy.hpp"

namespace spca {

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

inline Matrix standard_normal(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
  }
  return m;
}

inline Matrix uniform_01(Index rows, Index cols, Rng& rng) {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Spiked covariance

enum class SpikeValues { random_signs, ones };

/// Normalization of the noise Gram V V^T. `per_m` divides by m, which makes the
/// noise a sample covariance whose fluctuations shrink as m grows; `per_sqrt_m`
/// divides by sqrt(m), whose off-diagonal noise stays O(1) for every m.
enum class NoiseScaling { per_m, per_sqrt_m };

struct SpikedInstance {
  SymmetricMatrix sigma_hat;
  Vector u_true;
  SparsityPattern support_true;
  Index n = 0;
  Index m = 0;
  Index k = 0;
  std::uint64_t seed = 0;
};

/// u u^T + V V^T / m  (or / sqrt(m)), V is n x m.
inline SymmetricMatrix spiked_covariance(const Vector& u, const Matrix& v, NoiseScaling scaling) {
  if (v.rows() != u.size()) throw Error(ErrorCode::BadShape, "V must have one row per variable");
  Matrix s = u * u.transpose();
  if (v.cols() > 0) {
    const double m = static_cast<double>(v.cols());
    const double scale = scaling == NoiseScaling::per_m ? m : std::sqrt(m);
    s.noalias() += (v * v.transpose()) / scale;
  }
  return SymmetricMatrix(s);
}

/// Draw order: support (shuffle of 0..n-1, first k kept), then signs, then V
/// column by column.
inline SpikedInstance make_spiked(Index n, Index m, Index k, std::uint64_t seed,
                                  SpikeValues values = SpikeValues::random_signs,
                                  NoiseScaling scaling = NoiseScaling::per_m) {
  if (n < 1 || k < 1 || k > n || m < 1) {
    throw Error(ErrorCode::BadShape, "spiked model needs 1 <= k <= n and m >= 1");
  }
  Rng rng = make_rng(seed);
  std::vector<Index> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<Index> support(perm.begin(), perm.begin() + k);

  Vector u = Vector::Zero(n);
  const double mag = 1.0 / std::sqrt(static_cast<double>(k));
  std::bernoulli_distribution coin(0.5);
  std::sort(support.begin(), support.end());
  for (Index i : support) {
    const bool negative = values == SpikeValues::random_signs && coin(rng);
    u[i] = negative ? -mag : mag;
  }
  const Matrix v = standard_normal(n, m, rng);

  SpikedInstance inst;
  inst.sigma_hat = spiked_covariance(u, v, scaling);
  inst.u_true = std::move(u);
  inst.support_true = SparsityPattern(std::move(support), n);
  inst.n = n;
  inst.m = m;
  inst.k = k;
  inst.seed = seed;
  return inst;
}

// ---------------------------------------------------------------------------
// Random matrices for sparse eigenvalue bounds

/// F^T F with F a q x n standard normal matrix.
inline SymmetricMatrix make_gaussian_gram(Index n, Index q, std::uint64_t seed) {
  if (n < 1 || q < 1) throw Error(ErrorCode::BadShape, "gaussian gram needs n, q >= 1");
  Rng rng = make_rng(seed);
  const Matrix f = standard_normal(q, n, rng);
  return SymmetricMatrix(f.transpose() * f);
}

/// u u^T / ||u||^2 + 2 V^T V with u_i = 1/i.
inline SymmetricMatrix rank_one_plus_noise(const Matrix& v) {
  const Index n = v.cols();
  Vector u(n);
  for (Index i = 0; i < n; ++i) u[i] = 1.0 / static_cast<double>(i + 1);
  return SymmetricMatrix(u * u.transpose() / u.squaredNorm() + 2.0 * v.transpose() * v);
}

/// rank_one_plus_noise with V an n x n matrix of uniform [0,1] entries.
inline SymmetricMatrix make_rank_one_noise(Index n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::BadShape, "n must be >= 1");
  Rng rng = make_rng(seed);
  return rank_one_plus_noise(uniform_01(n, n, rng));
}

// ---------------------------------------------------------------------------
// Deflation

/// Projection deflation (I - z z^T) Sigma (I - z z^T).
inline SymmetricMatrix deflate(const SymmetricMatrix& sigma, const SparseComponent& comp) {
  if (comp.is_zero() || comp.z.norm() == 0.0) {
    throw Error(ErrorCode::ZeroComponent, "cannot deflate by a zero component");
  }
  if (comp.z.size() != sigma.size()) throw Error(ErrorCode::DimensionMismatch, "component size");
  if (std::abs(comp.z.norm() - 1.0) > 1e-8) throw Error(ErrorCode::NotUnitNorm, "component must be unit norm");
  const Index n = sigma.size();
  const Matrix p = Matrix::Identity(n, n) - comp.z * comp.z.transpose();
  return SymmetricMatrix(p * sigma.matrix() * p);
}

using ComponentSolver = std::function<SparseComponent(const SymmetricMatrix&)>;

struct DeflationRun {
  std::vector<SparseComponent> components;     // variances measured on the deflated matrix
  std::vector<SymmetricMatrix> deflated;        // matrix each component was extracted from
};

/// Extracts up to `count` components, deflating after each. Stops early if the
/// solver returns a zero component.
inline DeflationRun extract_sequential(const SymmetricMatrix& sigma, int count, const ComponentSolver& solve) {
  DeflationRun run;
  SymmetricMatrix current = sigma;
  for (int j = 0; j < count; ++j) {
    auto comp = solve(current);
    run.deflated.push_back(current);
    if (comp.is_zero()) break;
    current = deflate(current, comp);
    run.components.push_back(std::move(comp));
  }
  return run;
}

// ---------------------------------------------------------------------------
// Support recovery

enum class ScoreMethod { threshold_pca, greedy_approx, greedy_full, dspca };

inline std::string_view to_string(ScoreMethod m) {
  switch (m) {
    case ScoreMethod::threshold_pca: return "threshold_pca";
    case ScoreMethod::greedy_approx: return "greedy_approx";
    case ScoreMethod::greedy_full: return "greedy_full";
    case ScoreMethod::dspca: return "dspca";
  }
  return "unknown";
}

inline ScoreMethod parse_score_method(std::string_view name) {
  if (name == "threshold_pca" || name == "threshold") return ScoreMethod::threshold_pca;
  if (name == "greedy_approx" || name == "greedy-approx") return ScoreMethod::greedy_approx;
  if (name == "greedy_full" || name == "greedy") return ScoreMethod::greedy_full;
  if (name == "dspca") return ScoreMethod::dspca;
  throw Error(ErrorCode::UnknownMethod, "unknown score method '" + std::string(name) + "'");
}

struct ScoreBudget {
  // Penalty for the relaxation; a value <= 0 selects rho_scale / k_hint.
  double dspca_rho = 0.0;
  double rho_scale = 0.5;
  Index k_hint = 1;
  double dspca_epsilon = 1e-2;
  long dspca_max_iter = 300;
  Index path_length = 0;  // 0: full path
  Index candidate_width = 1;
};

/// Per-variable inclusion scores (higher means more likely in the support).
inline Vector support_scores(ScoreMethod method, const SymmetricMatrix& sigma, const ScoreBudget& budget = {}) {
  const Index n = sigma.size();
  switch (method) {
    case ScoreMethod::threshold_pca:
      return leading_eig(sigma).vector.cwiseAbs();
    case ScoreMethod::greedy_approx:
    case ScoreMethod::greedy_full: {
      const Index len = budget.path_length > 0 ? std::min(budget.path_length, n) : n;
      const auto path = method == ScoreMethod::greedy_full
                            ? greedy_full(sigma, len)
                            : greedy_approx(sigma, len, budget.candidate_width);
      Vector s = Vector::Zero(n);
      const auto order = path.inclusion_order();
      for (size_t r = 0; r < order.size(); ++r) s[order[r]] = static_cast<double>(n - static_cast<Index>(r));
      return s;
    }
    case ScoreMethod::dspca: {
      DspcaConfig cfg;
      cfg.rho = budget.dspca_rho > 0.0 ? budget.dspca_rho
                                       : budget.rho_scale / static_cast<double>(std::max<Index>(1, budget.k_hint));
      cfg.epsilon = budget.dspca_epsilon;
      cfg.max_iter = budget.dspca_max_iter;
      const auto res = dspca_solve(sigma, cfg);
      return leading_eig(res.x_star).vector.cwiseAbs();
    }
  }
  throw Error(ErrorCode::UnknownMethod, "unknown score method");
}

struct RocCurve {
  std::vector<std::pair<double, double>> points;  // (specificity, sensitivity)
  double auroc = 0.0;
};

/// ROC from the n+1 prefixes of the score ordering (descending, lower index
/// first on ties). AUROC is the trapezoidal area under sensitivity versus
/// 1 - specificity.
inline RocCurve roc_curve(const Vector& scores, const SparsityPattern& truth) {
  const Index n = scores.size();
  if (truth.dimension() != n) throw Error(ErrorCode::DimensionMismatch, "truth dimension");
  const auto pos = static_cast<double>(truth.size());
  const double neg = static_cast<double>(n) - pos;
  if (pos == 0.0 || neg == 0.0) throw Error(ErrorCode::DegenerateTruth, "truth must be non-empty and not full");

  std::vector<Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return scores[a] > scores[b]; });

  RocCurve roc;
  double tp = 0.0;
  double fp = 0.0;
  roc.points.emplace_back(1.0, 0.0);
  for (Index i : order) {
    if (truth.contains(i)) {
      tp += 1.0;
    } else {
      fp += 1.0;
    }
    roc.points.emplace_back(1.0 - fp / neg, tp / pos);
  }
  for (size_t j = 1; j < roc.points.size(); ++j) {
    const double dx = roc.points[j - 1].first - roc.points[j].first;  // step in 1 - specificity
    roc.auroc += dx * 0.5 * (roc.points[j - 1].second + roc.points[j].second);
  }
  return roc;
}

// ---------------------------------------------------------------------------
// Bound sweeps

struct BoundSweepOptions {
  std::vector<double> rho_grid;  // empty: grid_points values spread over (0, max Sigma_ii), plus 0
  int grid_points = 10;
  // Any dual iterate gives a valid bound, so the solves are capped.
  DspcaConfig dspca{.max_iter = 20000};
  int certificate_points = 24;
  double exhaustive_cap = 2e6;
};

struct BoundSweep {
  std::vector<Index> cardinalities;
  std::map<std::string, std::vector<double>> lower_bounds;
  std::map<std::string, std::vector<double>> upper_bounds;
  std::vector<bool> certified;  // a pattern of this cardinality was certified optimal

  double min_upper(size_t j) const {
    double v = std::numeric_limits<double>::infinity();
    for (const auto& [name, vals] : upper_bounds) v = std::min(v, vals[j]);
    return v;
  }
  double max_greedy_lower(size_t j) const {
    double v = -std::numeric_limits<double>::infinity();
    for (const auto& [name, vals] : lower_bounds) {
      if (name != "exhaustive") v = std::max(v, vals[j]);
    }
    return v;
  }
};

/// Lower bounds from exhaustive search and both greedy paths; upper bounds
/// from weak duality over an l1-relaxation penalty grid and over the
/// (rho*, lambda_max(sum Y_i)) pairs of certificate duals built on every
/// pattern the lower-bound methods produced.
inline BoundSweep bound_sweep(const SymmetricMatrix& sigma, Index k_max, const BoundSweepOptions& opt = {}) {
  const Index n = sigma.size();
  if (k_max < 1 || k_max > n) throw Error(ErrorCode::BadCardinality, "k_max outside [1, n]");
  for (Index k = 1; k <= k_max; ++k) {
    if (binomial(n, k) > opt.exhaustive_cap) throw Error(ErrorCode::TooLarge, "exhaustive search infeasible");
  }

  BoundSweep out;
  const auto factor = square_root_factor(sigma);
  const auto full = greedy_full(factor, k_max);
  const auto approx = greedy_approx(factor, k_max);

  std::vector<SparsityPattern> candidates;
  auto& ex = out.lower_bounds["exhaustive"];
  auto& gf = out.lower_bounds["greedy_full"];
  auto& ga = out.lower_bounds["greedy_approx"];
  for (Index k = 1; k <= k_max; ++k) {
    const auto e = exhaustive_sparse_eig(sigma, k, opt.exhaustive_cap);
    out.cardinalities.push_back(k);
    ex.push_back(e.value);
    gf.push_back(full.variances[static_cast<size_t>(k - 1)]);
    ga.push_back(approx.variances[static_cast<size_t>(k - 1)]);
    candidates.push_back(e.pattern);
    candidates.push_back(full.patterns[static_cast<size_t>(k - 1)]);
    candidates.push_back(approx.patterns[static_cast<size_t>(k - 1)]);
  }

  std::vector<double> rhos = opt.rho_grid;
  if (rhos.empty()) {
    const double dmax = sigma.diagonal().maxCoeff();
    rhos.push_back(0.0);
    for (int j = 1; j <= opt.grid_points; ++j) {
      rhos.push_back(dmax * static_cast<double>(j) / static_cast<double>(opt.grid_points + 1));
    }
  }
  const auto dgrid = dspca_penalty_grid(sigma, rhos, opt.dspca);

  PenaltyGrid cgrid;
  std::vector<Index> certified_sizes;
  for (const auto& pat : candidates) {
    const auto mid = certify_pattern(factor, pat);
    if (!mid.interval_nonempty()) continue;
    const double lo = mid.interval_low;
    const double hi = mid.interval_high;
    for (int j = 0; j <= opt.certificate_points; ++j) {
      const double r = j == 0 ? mid.rho_star
                              : lo + (hi - lo) * static_cast<double>(j) / (opt.certificate_points + 1.0);
      const auto rep = j == 0 ? mid : certify_pattern(factor, pat, r);
      if (auto ub = rep.phi_upper_bound()) cgrid.add(rep.rho_star, *ub);
      if (rep.certified) certified_sizes.push_back(static_cast<Index>(pat.size()));
    }
  }

  auto& du = out.upper_bounds["dspca"];
  auto& cu = out.upper_bounds["certificate"];
  for (Index k = 1; k <= k_max; ++k) {
    du.push_back(weak_duality_bound(dgrid, k));
    cu.push_back(cgrid.empty() ? std::numeric_limits<double>::infinity() : weak_duality_bound(cgrid, k));
    out.certified.push_back(std::find(certified_sizes.begin(), certified_sizes.end(), k) != certified_sizes.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Spiked recovery study

struct SpikedStudyConfig {
  Index n = 100;
  Index k = 10;
  std::vector<Index> m_values{25, 50, 100, 200, 400};
  int trials = 20;
  std::vector<ScoreMethod> methods{ScoreMethod::threshold_pca, ScoreMethod::greedy_approx,
                                   ScoreMethod::greedy_full, ScoreMethod::dspca};
  std::uint64_t seed = 0;
  ScoreBudget budget;
  NoiseScaling scaling = NoiseScaling::per_m;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct SpikedStudyRow {
  Index m = 0;
  ScoreMethod method = ScoreMethod::threshold_pca;
  int trial = 0;
  double auroc = 0.0;
};

struct SpikedStudyResult {
  std::vector<SpikedStudyRow> rows;  // ordered by (m, trial, method)
  // mean AUROC keyed by (m, method)
  std::map<std::pair<Index, ScoreMethod>, double> mean_auroc;
};

/// Runs every (m, trial) cell as an independent job; the trial's generator is
/// seeded with seed ^ trial. Results are merged in a fixed order.
inline SpikedStudyResult spiked_study(const SpikedStudyConfig& cfg) {
  struct Job {
    Index m;
    int trial;
  };
  std::vector<Job> jobs;
  for (Index m : cfg.m_values) {
    for (int t = 0; t < cfg.trials; ++t) jobs.push_back({m, t});
  }
  std::vector<std::vector<SpikedStudyRow>> results(jobs.size());

  ScoreBudget budget = cfg.budget;
  budget.k_hint = cfg.k;
  std::atomic<size_t> next{0};
  std::mutex fail_mutex;
  std::exception_ptr failure;
  auto worker = [&]() {
    for (size_t j = next++; j < jobs.size(); j = next++) {
      try {
      const auto inst = make_spiked(cfg.n, jobs[j].m, cfg.k, cfg.seed ^ static_cast<std::uint64_t>(jobs[j].trial),
                                    SpikeValues::random_signs, cfg.scaling);
      for (auto method : cfg.methods) {
        const auto scores = support_scores(method, inst.sigma_hat, budget);
        results[j].push_back({jobs[j].m, method, jobs[j].trial, roc_curve(scores, inst.support_true).auroc});
      }
      } catch (...) {
        std::lock_guard lock(fail_mutex);
        if (!failure) failure = std::current_exception();
        next = jobs.size();
      }
    }
  };
  unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<size_t>(1, jobs.size())));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  SpikedStudyResult out;
  std::map<std::pair<Index, ScoreMethod>, int> counts;
  for (const auto& cell : results) {
    for (const auto& row : cell) {
      out.rows.push_back(row);
      out.mean_auroc[{row.m, row.method}] += row.auroc;
      counts[{row.m, row.method}] += 1;
    }
  }
  for (auto& [key, v] : out.mean_auroc) v /= counts[key];
  return out;
}

}  // namespace spca
