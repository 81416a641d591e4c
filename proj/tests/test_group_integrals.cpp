/*
 * Copyright 2026 The ginoe-lab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "ginoe/group_integrals.hpp"
#include "ginoe/sampler.hpp"

namespace ginoe {
namespace {

double closed_pair_moment(int n, double x1, double x2) {
  const double p = x1 * x2;
  double total = 0.0, binom = 1.0, fact = 1.0;
  for (int k = 0; k <= n; ++k) {
    if (k > 0) {
      binom = binom * (n - k + 1) / k;
      fact *= k;
    }
    total += binom * std::pow(p, n - k) * fact / std::pow(2.0, k);
  }
  return total;
}

TEST(Haar, IsUnitary) {
  StreamRng rng(51, 0);
  for (int k = 1; k <= 8; ++k) {
    const auto u = haar_unitary(k, rng);
    EXPECT_LT((u.u * u.u.adjoint() - ComplexMatrix::Identity(k, k)).cwiseAbs().maxCoeff(), 1e-12);
  }
  EXPECT_THROW(haar_unitary(0, rng), DomainError);
}

TEST(Haar, FirstMoments) {
  Accumulator sq, re;
  for (std::uint64_t i = 0; i < 100000; ++i) {
    StreamRng rng(52, i);
    const auto u = haar_unitary(3, rng);
    sq.add(std::norm(u.u(0, 0)));
    re.add(u.u(1, 2).real());
  }
  EXPECT_LT(sq.estimate(52).z_score(1.0 / 3.0), 3.0);
  EXPECT_LT(re.estimate(52).z_score(0.0), 3.0);
}

TEST(SkewUnitary, IdentityGivesJ) {
  const HaarUnitary id{ComplexMatrix::Identity(4, 4)};
  const auto w = to_skew_unitary(id);
  EXPECT_LT((w.matrix() - canonical_symplectic(4).cast<cdouble>()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(SkewUnitary, RandomDrawsAreSkewUnitaryWithUnitPfaffian) {
  StreamRng rng(53, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 2 + 2 * (trial % 4);
    const auto w = to_skew_unitary(haar_unitary(k, rng));
    EXPECT_LT((w.matrix() + w.matrix().transpose()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(std::abs(pfaffian(SkewComplexMatrix(w.matrix()))), 1.0, 1e-12);
  }
  EXPECT_THROW(to_skew_unitary(haar_unitary(3, rng)), DomainError);
  EXPECT_THROW(SkewUnitary(ComplexMatrix::Identity(2, 2)), DomainError);
}

TEST(SymplecticDual, PreservesTraceOfSquare) {
  StreamRng rng(54, 0);
  for (int trial = 0; trial < 50; ++trial) {
    ComplexMatrix a(4, 4);
    for (Eigen::Index i = 0; i < 16; ++i) a.data()[i] = {rng.normal(), rng.normal()};
    const ComplexMatrix h = a + a.adjoint();
    const ComplexMatrix hr = symplectic_dual(h);
    EXPECT_NEAR((hr * hr).trace().real(), (h * h).trace().real(), 1e-12 * (h * h).trace().real());
  }
}

TEST(It, ZeroConfigurationGivesOne) {
  const std::vector<double> zero(4, 0.0);
  EXPECT_EQ(I_t_mc(zero, 1.0, 200, 55).mean, 1.0);
}

TEST(It, TwoPointQuadratureMatchesClosedForm) {
  for (double t : {0.5, 1.0, 2.0})
    for (auto [a, b] : {std::pair{0.0, 0.7}, std::pair{-1.0, 0.4}, std::pair{0.2, 0.3}})
      EXPECT_NEAR(I_t_quadrature_K2(a, b, t), std::exp(-(a - b) * (a - b) / t), 1e-12);
  EXPECT_NEAR(I_t_quadrature_K2(0.4, 0.4, 1.0), 1.0, 1e-15);
}

TEST(It, TwoPointIntegrandIsConstantOnTheGroup) {
  // For K = 2, H - H^R is twice the traceless part of H, so every draw gives the same value.
  const std::vector<double> x{0.0, 0.7};
  for (double t : {0.5, 1.0, 2.0}) {
    const auto e = I_t_mc(x, t, 2000, 56);
    EXPECT_LT(e.std_error, 1e-14) << t;
    EXPECT_NEAR(e.mean, I_t_quadrature_K2(x[0], x[1], t), 1e-13) << t;
  }
}

TEST(It, LongTimeLimitIsOne) {
  const std::vector<double> x{-0.5, 0.1, 0.4, 1.2};
  const auto e = I_t_mc(x, 1e3, 4000, 57);
  EXPECT_LT(std::abs(e.mean - 1.0), 5e-3);
}

TEST(It, GridReusesDraws) {
  const std::vector<std::pair<std::vector<double>, double>> grid{{{0.0, 0.7}, 1.0}, {{0.0, 0.7}, 1.0}};
  const auto e = I_t_mc_grid(grid, 500, 58);
  EXPECT_EQ(e[0].mean, e[1].mean);
  EXPECT_EQ(e[0].mean, I_t_mc(grid[0].first, 1.0, 500, 58).mean);
  EXPECT_THROW(I_t_mc(std::vector<double>{0.0, 1.0, 2.0}, 1.0, 100, 1), DomainError);
  EXPECT_THROW(I_t_mc(std::vector<double>{0.0, 1.0}, 0.0, 100, 1), DomainError);
}

TEST(It, LeftInvariance) {
  // Averages over U and over V U agree for a fixed unitary V.
  StreamRng vr(59, 0);
  const auto v = haar_unitary(4, vr);
  const std::vector<double> x{-0.6, 0.0, 0.5, 1.1};
  Accumulator plain, rotated;
  for (std::uint64_t i = 0; i < 20000; ++i) {
    StreamRng rng(60, i);
    const auto u = haar_unitary(4, rng);
    plain.add(it_integrand(u, x, 1.0));
    StreamRng rng2(61, i);
    rotated.add(it_integrand(HaarUnitary{v.u * haar_unitary(4, rng2).u}, x, 1.0));
  }
  EXPECT_LT(std::abs(plain.mean() - rotated.mean()), 3.0 * std::hypot(plain.std_error(), rotated.std_error()));
}

TEST(ExactShape, TwoPointIsGaussian) {
  EXPECT_NEAR(exact_shape(std::vector<double>{0.0, 0.7}, 1.0), std::exp(-0.49), 1e-15);
}

TEST(ExactShape, ScalingAndSymmetry) {
  const std::vector<double> x{-0.7, -0.1, 0.4, 1.3};
  const double base = exact_shape(x, 0.8);
  EXPECT_GT(base, 0.0);
  for (double lambda : {0.5, 2.0, 3.0}) {
    std::vector<double> y = x;
    for (double& v : y) v *= lambda;
    EXPECT_NEAR(exact_shape(y, 0.8 * lambda * lambda), base, 1e-12 * base);
  }
  std::vector<double> p{0.4, -0.7, 1.3, -0.1};
  EXPECT_NEAR(exact_shape(p, 0.8), base, 1e-14 * base);
  EXPECT_THROW(exact_shape(std::vector<double>{0.0, 0.0}, 1.0), DomainError);
  EXPECT_THROW(exact_shape(std::vector<double>{0.0, 1.0}, -1.0), DomainError);
}

TEST(ExactShape, FitThenVerifyTwoPoint) {
  std::vector<double> measured, shape;
  for (double d : {0.1, 0.3, 0.6, 1.0, 1.5})
    for (double t : {0.5, 0.8, 1.0, 1.5, 2.0}) {
      measured.push_back(I_t_quadrature_K2(0.0, d, t));
      shape.push_back(exact_shape(std::vector<double>{0.0, d}, t));
    }
  const auto rep = fit_then_verify(measured, shape);
  EXPECT_LT(rep.max_relative_deviation, 1e-6);
  EXPECT_NEAR(rep.fitted_constant, 1.0, 1e-12);
  EXPECT_THROW(fit_then_verify(measured, std::vector<double>{1.0}), DomainError);
}

TEST(ExactShape, FourPointMonteCarloHasConstantRatio) {
  const std::vector<std::pair<std::vector<double>, double>> grid{
      {{-0.6, 0.0, 0.5, 1.1}, 1.0}, {{-1.0, -0.3, 0.2, 0.9}, 1.0}, {{-0.6, 0.0, 0.5, 1.1}, 2.0}};
  const auto est = I_t_mc_grid(grid, 40000, 62);
  std::vector<double> measured, shape;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    measured.push_back(est[i].mean);
    shape.push_back(exact_shape(grid[i].first, grid[i].second));
  }
  const auto rep = fit_then_verify(measured, shape);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double rel = est[i].std_error / est[i].mean + est[0].std_error / est[0].mean;
    EXPECT_LT(std::abs(rep.ratios[i] / rep.fitted_constant - 1.0), 4.0 * rel) << i;
  }
}

TEST(IntegrandEquivalence, ZeroConfiguration) {
  StreamRng rng(63, 0);
  const auto pair = theorem1_integrand_equivalence(haar_unitary(4, rng), std::vector<double>(4, 0.0));
  EXPECT_NEAR(pair.unitary_form, 1.0, 1e-15);
  EXPECT_NEAR(pair.skew_form, 1.0, 1e-15);
}

TEST(IntegrandEquivalence, PointwiseAtTransposedSkewUnitary) {
  StreamRng rng(64, 0);
  for (int k : {2, 4, 6}) {
    std::vector<double> x(k);
    for (auto& v : x) v = rng.normal();
    for (int trial = 0; trial < 20; ++trial) {
      const auto u = haar_unitary(k, rng);
      const double a = it_integrand(u, x, 1.0);
      const double b = skew_integrand(transposed_skew_unitary(u), x, 1.0);
      EXPECT_NEAR(a, b, 1e-12 * std::max(1.0, a));
    }
  }
}

TEST(IntegrandEquivalence, HaarAveragesAgree) {
  for (int k : {2, 4}) {
    std::vector<double> x;
    for (int i = 0; i < k; ++i) x.push_back(-0.8 + 0.55 * i);
    Accumulator ua, sa;
    for (std::uint64_t i = 0; i < 10000; ++i) {
      StreamRng rng(65, i);
      const auto pair = theorem1_integrand_equivalence(haar_unitary(k, rng), x);
      ua.add(pair.unitary_form);
      sa.add(pair.skew_form);
    }
    EXPECT_LT(std::abs(ua.mean() - sa.mean()), 3.0 * std::hypot(ua.std_error(), sa.std_error())) << k;
  }
}

TEST(HsOracle, MatchesClosedFormForSmallN) {
  EXPECT_NEAR(hs_charpoly_oracle(0, 0.3, -0.7), 1.0, 1e-10);
  for (int n = 1; n <= 6; ++n)
    for (auto [a, b] : {std::pair{0.3, -0.7}, std::pair{1.0, 1.2}, std::pair{0.0, 0.0}})
      EXPECT_NEAR(hs_charpoly_oracle(n, a, b), closed_pair_moment(n, a, b), 1e-8 * std::max(1.0, closed_pair_moment(n, a, b)))
          << n;
}

TEST(HsOracle, PositiveAtCoincidentPoints) {
  for (int n = 2; n <= 10; n += 2) EXPECT_GT(hs_charpoly_oracle(n, 0.0, 0.0), 0.0);
}

TEST(HsOracle, AgreesWithMonteCarlo) {
  SamplerOptions o;
  o.samples = 20000;
  o.seed = 66;
  const std::vector<double> x{0.2, -0.5};
  const auto e = estimate_charpoly_moment(8, x, o);
  EXPECT_LT(e.z_score(hs_charpoly_oracle(8, x[0], x[1])), 3.0);
  EXPECT_THROW(hs_charpoly_oracle(31, 0.0, 0.0), DomainError);
}

}  // namespace
}  // namespace ginoe
