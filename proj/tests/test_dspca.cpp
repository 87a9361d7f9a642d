// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "spca/certificates.hpp"
#include "spca/dspca.hpp"
#include "spca/experiments.hpp"

using namespace spca;

namespace {

SymmetricMatrix diag(std::initializer_list<double> d) {
  Vector v(static_cast<Index>(d.size()));
  Index i = 0;
  for (double x : d) v[i++] = x;
  return SymmetricMatrix::diagonal(v);
}

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no exception";
  return ErrorCode::IoError;
}

// Random feasible primal point: normalized Gram of a Gaussian matrix.
SymmetricMatrix random_density(Index n, std::mt19937_64& rng) {
  Matrix g = oracle::random_psd(n, rng, 2);
  return SymmetricMatrix(g / g.trace());
}

}  // namespace

TEST(SmoothValue, Examples) {
  EXPECT_NEAR(smooth_value(SymmetricMatrix::identity(2), SymmetricMatrix::zero(2), 1.0), 1.0, 1e-14);
  for (double mu : {1e-3, 0.5, 7.0}) {
    EXPECT_NEAR(smooth_value(SymmetricMatrix::zero(3), SymmetricMatrix::zero(3), mu), 0.0, 1e-14);
  }
  const auto s = diag({2, 0});
  const Matrix ex = oracle::taylor_expm(s.matrix() / 0.5);
  EXPECT_NEAR(smooth_value(s, SymmetricMatrix::zero(2), 0.5), 0.5 * std::log(ex.trace()) - 0.5 * std::log(2.0),
              1e-10);
}

TEST(SmoothValue, AgreesWithEvaluate) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 10; ++t) {
    const SymmetricMatrix s(oracle::random_psd(5, rng));
    const SymmetricMatrix u(0.1 * oracle::random_symmetric(5, rng));
    const auto e = smooth_evaluate(s, u, 0.05);
    EXPECT_NEAR(e.value, smooth_value(s, u, 0.05), 1e-12);
    EXPECT_NEAR(e.lambda_max, oracle::jacobi_lambda_max((s + u).matrix()), 1e-10);
  }
}

TEST(SmoothValue, Errors) {
  EXPECT_EQ(code_of([] { smooth_value(SymmetricMatrix::identity(2), SymmetricMatrix::zero(2), 0.0); }),
            ErrorCode::NonPositiveMu);
  EXPECT_EQ(code_of([] { smooth_value(SymmetricMatrix::identity(2), SymmetricMatrix::zero(3), 1.0); }),
            ErrorCode::DimensionMismatch);
  EXPECT_EQ(code_of([] { smooth_gradient(SymmetricMatrix::identity(2), SymmetricMatrix::zero(2), -1.0); }),
            ErrorCode::NonPositiveMu);
}

// f_mu(U) - lambda_max lies in [-mu log n, 0].
TEST(SmoothValue, UniformApproximation) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 100; ++t) {
    const Index n = 1 + static_cast<Index>(t % 12);
    const SymmetricMatrix s(oracle::random_symmetric(n, rng));
    const SymmetricMatrix u(oracle::random_symmetric(n, rng));
    const double mu = std::pow(10.0, -3.0 + 3.0 * (t % 7) / 6.0);
    const double f = smooth_value(s, u, mu);
    const double lam = oracle::jacobi_lambda_max((s + u).matrix());
    EXPECT_LE(f, lam + 1e-10);
    EXPECT_GE(f, lam - mu * std::log(static_cast<double>(n)) - 1e-10);
  }
}

TEST(SmoothGradient, Examples) {
  for (Index n : {1, 3, 6}) {
    const auto g = smooth_gradient(SymmetricMatrix::identity(n), SymmetricMatrix::zero(n), 0.3);
    EXPECT_LE((g.matrix() - Matrix::Identity(n, n) / static_cast<double>(n)).cwiseAbs().maxCoeff(), 1e-14);
  }
  const auto g = smooth_gradient(diag({1, -50}), SymmetricMatrix::zero(2), 0.1);
  Matrix e11 = Matrix::Zero(2, 2);
  e11(0, 0) = 1.0;
  EXPECT_LE((g.matrix() - e11).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SmoothGradient, PsdUnitTrace) {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 30; ++t) {
    const SymmetricMatrix s(oracle::random_symmetric(7, rng));
    const auto g = smooth_gradient(s, SymmetricMatrix::zero(7), 0.01 + 0.1 * t);
    EXPECT_NEAR(g.matrix().trace(), 1.0, 1e-12);
    EXPECT_GE(oracle::jacobi_eigenvalues(g.matrix()).minCoeff(), -1e-12);
  }
}

TEST(SmoothGradient, FiniteDifferences) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 20; ++t) {
    const SymmetricMatrix s(oracle::random_psd(6, rng));
    const SymmetricMatrix u(0.2 * oracle::random_symmetric(6, rng));
    const SymmetricMatrix h(oracle::random_symmetric(6, rng));
    const double mu = 0.5;
    const double fd = oracle::central_difference(
        [&](double step) { return smooth_value(s, SymmetricMatrix(u.matrix() + step * h.matrix()), mu); });
    const double an = smooth_gradient(s, u, mu).matrix().cwiseProduct(h.matrix()).sum();
    EXPECT_LE(std::abs(fd - an), 1e-5 * std::max(1.0, std::abs(an)));
  }
}

TEST(DualityGap, Examples) {
  const auto s = diag({3, 1});
  Matrix e11 = Matrix::Zero(2, 2);
  e11(0, 0) = 1.0;
  EXPECT_NEAR(duality_gap(s, SymmetricMatrix::zero(2), SymmetricMatrix(e11), 0.0), 0.0, 1e-14);
  EXPECT_NEAR(duality_gap(s, SymmetricMatrix::zero(2), SymmetricMatrix::identity(2) * 0.5, 0.0), 1.0, 1e-14);
}

TEST(DualityGap, NonNegativeOnFeasiblePairs) {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 100; ++t) {
    const SymmetricMatrix s(oracle::random_psd(8, rng));
    const double rho = 0.05 * (t % 20);
    const auto u = project_box(SymmetricMatrix(oracle::random_symmetric(8, rng)), rho);
    EXPECT_GE(duality_gap(s, u, random_density(8, rng), rho), -1e-9);
  }
}

TEST(DualityGap, Infeasibility) {
  const auto s = diag({3, 1});
  EXPECT_EQ(code_of([&] { duality_gap(s, SymmetricMatrix::identity(2), SymmetricMatrix::identity(2) * 0.5, 0.5); }),
            ErrorCode::InfeasibleDual);
  EXPECT_EQ(code_of([&] { duality_gap(s, SymmetricMatrix::zero(2), SymmetricMatrix::identity(2), 0.0); }),
            ErrorCode::InfeasiblePrimal);
  EXPECT_EQ(code_of([&] { duality_gap(s, SymmetricMatrix::zero(2), diag({1.5, -0.5}), 0.0); }),
            ErrorCode::InfeasiblePrimal);
}

TEST(ExtractComponent, Examples) {
  Matrix e11 = Matrix::Zero(3, 3);
  e11(0, 0) = 1.0;
  const auto s = diag({3, 2, 1});
  const auto c = extract_component(SymmetricMatrix(e11), s);
  EXPECT_EQ(c.support.one_based(), std::vector<long>{1});
  EXPECT_TRUE(c.z.isApprox(Vector::Unit(3, 0)));

  const auto d = extract_component(SymmetricMatrix::identity(3) * (1.0 / 3.0), s);
  EXPECT_EQ(d.support.one_based(), std::vector<long>{1});
  EXPECT_DOUBLE_EQ(d.variance, 3.0);
}

TEST(DspcaSolve, ZeroPenaltyIsLeadingEigenvector) {
  DspcaConfig cfg;
  cfg.epsilon = 1e-4;
  const auto r = dspca_solve(diag({3, 1, 1}), cfg);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.gap, 1e-4);
  Matrix e11 = Matrix::Zero(3, 3);
  e11(0, 0) = 1.0;
  EXPECT_LE((r.x_star.matrix() - e11).cwiseAbs().maxCoeff(), 1e-3);
  EXPECT_EQ(r.component.support.one_based(), std::vector<long>{1});
  EXPECT_NEAR(r.component.variance, 3.0, 1e-12);
}

TEST(DspcaSolve, LargePenaltyGivesZero) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 10; ++t) {
    const SymmetricMatrix s(oracle::random_psd(6, rng));
    DspcaConfig cfg;
    cfg.rho = s.diagonal().maxCoeff() * (1.0 + 0.1 * t);
    const auto r = dspca_solve(s, cfg);
    EXPECT_TRUE(r.component.is_zero());
    EXPECT_EQ(r.component.penalized_objective, 0.0);
    EXPECT_TRUE(r.component.z.isZero(0.0));
    EXPECT_LE(r.gap, cfg.epsilon);
  }
  DspcaConfig cfg;
  cfg.rho = 3.5;
  EXPECT_TRUE(dspca_solve(diag({3, 2, 1}), cfg).component.is_zero());
}

TEST(DspcaSolve, SpikedSupportMatchesExhaustive) {
  const auto inst = make_spiked(30, 200, 5, 7);
  DspcaConfig cfg;
  cfg.rho = 0.1;
  cfg.epsilon = 1e-3;
  const auto r = dspca_solve(inst.sigma_hat, cfg);
  const auto ex = exhaustive_sparse_eig(inst.sigma_hat, 5);
  EXPECT_EQ(r.component.support, inst.support_true);
  EXPECT_EQ(r.component.support, ex.pattern);
}

TEST(DspcaSolve, IterateInvariants) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 6; ++t) {
    const SymmetricMatrix s(oracle::random_psd(6, rng));
    DspcaConfig cfg;
    cfg.rho = 0.2 * (t + 1);
    cfg.epsilon = 1e-2;
    cfg.gap_check_stride = 10;
    const auto r = dspca_solve(s, cfg);
    EXPECT_LE(r.u_star.matrix().cwiseAbs().maxCoeff(), cfg.rho);
    EXPECT_NEAR(r.x_star.matrix().trace(), 1.0, 1e-9);
    EXPECT_GE(oracle::jacobi_eigenvalues(r.x_star.matrix()).minCoeff(), -1e-9);
    EXPECT_GE(duality_gap(s, r.u_star, r.x_star, cfg.rho), -1e-9);
    for (size_t j = 1; j < r.gap_history.size(); ++j) {
      EXPECT_LE(r.gap_history[j].gap, r.gap_history[j - 1].gap);
    }
    if (r.converged) EXPECT_LE(r.gap, cfg.epsilon);
  }
}

TEST(DspcaSolve, DualBoundsPenalizedOptimum) {
  std::mt19937_64 rng(29);
  for (int t = 0; t < 5; ++t) {
    const SymmetricMatrix s(oracle::random_psd(8, rng, 3));
    for (double frac : {0.1, 0.3, 0.6}) {
      DspcaConfig cfg;
      cfg.rho = frac * s.diagonal().maxCoeff();
      cfg.epsilon = 1e-2;
      cfg.max_iter = 2000;
      const auto r = dspca_solve(s, cfg);
      const auto phi = oracle::penalized_bruteforce(s.matrix(), cfg.rho);
      EXPECT_GE(oracle::jacobi_lambda_max((s + r.u_star).matrix()), phi.value - 1e-9);
    }
  }
}

TEST(DspcaSolve, NotConvergedKeepsBestIterate) {
  std::mt19937_64 rng(5);
  const SymmetricMatrix s(oracle::random_psd(10, rng));
  DspcaConfig cfg;
  cfg.rho = 0.5;
  cfg.epsilon = 1e-9;
  cfg.max_iter = 50;
  const auto r = dspca_solve(s, cfg);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 50);
  EXPECT_GE(r.gap, 0.0);
  EXPECT_NEAR(r.dual_value, lambda_max(s + r.u_star), 1e-10);
}

TEST(DspcaConfig, Validation) {
  auto bad = [](auto mutate) {
    DspcaConfig c;
    mutate(c);
    return code_of([&] { c.validate(); });
  };
  EXPECT_EQ(bad([](DspcaConfig& c) { c.epsilon = 0.0; }), ErrorCode::InvalidArgument);
  EXPECT_EQ(bad([](DspcaConfig& c) { c.rho = -1.0; }), ErrorCode::InvalidArgument);
  EXPECT_EQ(bad([](DspcaConfig& c) { c.gap_check_stride = 0; }), ErrorCode::InvalidArgument);
  EXPECT_EQ(bad([](DspcaConfig& c) { c.mu_override = -1.0; }), ErrorCode::NonPositiveMu);
}

TEST(DspcaConfig, Defaults) {
  EXPECT_EQ(default_max_iter(15, 0.0, 1e-3), 10000);
  EXPECT_EQ(default_max_iter(10, 1.0, 1.0), 10 * static_cast<long>(std::ceil(10 * std::sqrt(std::log(10.0)))));
  EXPECT_NEAR(default_mu(10, 1e-3), 1e-3 / (2 * std::log(10.0)), 1e-18);
  EXPECT_EQ(default_mu(1, 1e-3), 1e-3);
}
