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
#include <numeric>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "ginoe/sampler.hpp"

namespace ginoe {
namespace {

using boost::math::quadrature::gauss_kronrod;

GinOESample diagonal_sample(std::vector<double> d) {
  GinOESample s;
  s.matrix = RealMatrix(Eigen::Map<Eigen::VectorXd>(d.data(), static_cast<Eigen::Index>(d.size())).asDiagonal());
  s.spectrum = real_schur(s.matrix);
  return s;
}

SamplerOptions options(std::uint64_t samples, std::uint64_t seed = kDefaultSeed) {
  SamplerOptions o;
  o.samples = samples;
  o.seed = seed;
  return o;
}

// E[det(M - x1) det(M - x2)] by expanding both determinants over permutations.
// Rows are independent; within a row the two chosen entries are either the
// same N(0, 1/2) variable or independent ones.
double charpoly_pair_oracle(int n, double x1, double x2) {
  std::vector<int> s(n), t(n);
  auto parity = [](const std::vector<int>& p) {
    int inv = 0;
    for (std::size_t a = 0; a < p.size(); ++a)
      for (std::size_t b = a + 1; b < p.size(); ++b) inv += p[a] > p[b];
    return inv % 2 == 0 ? 1.0 : -1.0;
  };
  double total = 0.0;
  std::iota(s.begin(), s.end(), 0);
  do {
    std::iota(t.begin(), t.end(), 0);
    do {
      double term = parity(s) * parity(t);
      for (int i = 0; i < n && term != 0.0; ++i) {
        const double a = s[i] == i ? x1 : 0.0;
        const double b = t[i] == i ? x2 : 0.0;
        term *= (s[i] == t[i] ? kEntryVariance : 0.0) + a * b;
      }
      total += term;
    } while (std::next_permutation(t.begin(), t.end()));
  } while (std::next_permutation(s.begin(), s.end()));
  return total;
}

TEST(Sampler, EntryVariance) {
  StreamRng rng(41, 0);
  const RealMatrix m = ginoe_matrix(1000, rng);
  Accumulator acc;
  for (Eigen::Index i = 0; i < m.size(); ++i) acc.add(m.data()[i] * m.data()[i]);
  EXPECT_LT(acc.estimate(41).z_score(kEntryVariance), 3.0);
}

TEST(Sampler, ExpectedFrobeniusNorm) {
  Accumulator acc;
  for (std::uint64_t i = 0; i < 20000; ++i) {
    StreamRng rng(42, i);
    acc.add(ginoe_matrix(8, rng).squaredNorm());
  }
  EXPECT_LT(acc.estimate(42).z_score(32.0), 3.0);
}

TEST(Sampler, StreamsAreReproducible) {
  const auto a = sample_ginoe(6, 5, 17);
  const auto b = sample_ginoe(6, 5, 17);
  const auto c = sample_ginoe(6, 5, 18);
  EXPECT_EQ(a.matrix, b.matrix);
  EXPECT_NE(a.matrix, c.matrix);
}

TEST(Spin, DiagonalExamples) {
  const auto s = diagonal_sample({-1.0, 0.5, 2.0});
  EXPECT_EQ(spin(s, -2.0), 1);
  EXPECT_EQ(spin(s, 0.0), -1);
  EXPECT_EQ(spin(s, 1.0), 1);
  EXPECT_EQ(spin(s, 3.0), -1);
  EXPECT_THROW(spin(s, 0.5), DegenerateSpinError);
}

TEST(Spin, ParityAgreesWithDeterminantSign) {
  StreamRng pick(43, 0);
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const auto s = sample_ginoe(10, 43, i);
    const double x = -3.0 + 6.0 * pick.uniform();
    ASSERT_EQ(spin_parity(s.spectrum, x), sign_det(shifted(s.matrix, x))) << "draw " << i;
  }
}

TEST(Spin, FlipsExactlyAtRealEigenvalues) {
  for (std::uint64_t i = 0; i < 500; ++i) {
    const auto s = sample_ginoe(12, 44, i);
    const auto& ev = s.spectrum.real_eigenvalues;
    // Even n may have no real eigenvalue at all.
    std::vector<double> probes{ev.empty() ? -10.0 : ev.front() - 1.0};
    for (std::size_t k = 1; k < ev.size(); ++k) probes.push_back(0.5 * (ev[k - 1] + ev[k]));
    probes.push_back(ev.empty() ? 10.0 : ev.back() + 1.0);
    int flips = 0;
    for (std::size_t k = 1; k < probes.size(); ++k)
      flips += sign_det(shifted(s.matrix, probes[k])) != sign_det(shifted(s.matrix, probes[k - 1]));
    EXPECT_EQ(flips, static_cast<int>(ev.size()));
    EXPECT_EQ(spin(s, probes.front()), 1);
  }
}

TEST(SpinMoments, CoincidentPointsGiveOne) {
  const auto e = estimate_spin_moment(20, std::vector<double>{0.3, 0.3}, options(200));
  EXPECT_EQ(e.mean, 1.0);
  EXPECT_EQ(e.std_error, 0.0);
}

TEST(SpinMoments, ApproachBulkLimit) {
  const std::vector<std::vector<double>> configs{{0.0, 0.25}, {0.0, 0.5}, {-0.5, 0.5}};
  const auto est = estimate_spin_moments(40, configs, options(2000));
  ASSERT_EQ(est.size(), 3u);
  for (std::size_t i = 0; i < configs.size(); ++i) {
    EXPECT_LT(est[i].z_score(spin_moment(configs[i])), 3.0) << i;
    EXPECT_EQ(est[i].n_samples, 2000u);
  }
}

TEST(SpinMoments, SeedsAgreeWithinError) {
  const std::vector<double> x{0.0, 0.7};
  const auto a = estimate_spin_moment(30, x, options(2000, 1));
  const auto b = estimate_spin_moment(30, x, options(2000, 2));
  EXPECT_LT(std::abs(a.mean - b.mean), 3.0 * std::hypot(a.std_error, b.std_error));
}

TEST(SpinMoments, IndependentOfWorkerCount) {
  const std::vector<std::vector<double>> configs{{0.0, 0.5}};
  auto o1 = options(1000);
  auto o3 = o1;
  o3.parallelism.workers = 3;
  const auto a = estimate_spin_moments(16, configs, o1);
  const auto b = estimate_spin_moments(16, configs, o3);
  EXPECT_EQ(a[0].mean, b[0].mean);
  EXPECT_EQ(a[0].std_error, b[0].std_error);
}

TEST(SpinMoments, Preconditions) {
  EXPECT_THROW(estimate_spin_moment(10, std::vector<double>{0.0, 1.0}, options(50)), DomainError);
  EXPECT_THROW(estimate_spin_moment(10, std::vector<double>{0.0, 0.5, 1.0}, options(200)), DomainError);
}

TEST(RealCount, ClosedFormSmallN) {
  EXPECT_NEAR(expected_real_count(1), 1.0, 1e-15);
  EXPECT_NEAR(expected_real_count(2), std::sqrt(2.0), 1e-14);
}

TEST(RealCount, MonteCarloMatchesClosedForm) {
  for (int n : {5, 10, 25}) {
    const auto e = estimate_real_count(n, options(1000, 45));
    EXPECT_LT(e.z_score(expected_real_count(n)), 3.0) << n;
  }
}

TEST(BinSigns, ConstructedSpectrum) {
  const auto s = diagonal_sample({-1.0, 0.5, 2.0});
  std::vector<double> signs;
  std::vector<std::uint64_t> counts;
  detail::bin_signs(s.spectrum, {-2.0, 0.0, 1.0, 3.0}, signs, counts);
  EXPECT_EQ(signs, (std::vector<double>{1.0, -1.0, 1.0}));
  EXPECT_EQ(counts, (std::vector<std::uint64_t>{1, 1, 1}));
}

TEST(Density, SwapOfBinsIsExact) {
  const std::vector<double> b1{-0.8, -0.5, -0.2}, b2{0.2, 0.5, 0.8};
  const auto a = estimate_rho_tilde(20, {b1, b2}, options(500));
  const auto b = estimate_rho_tilde(20, {b2, b1}, options(500));
  ASSERT_EQ(a.cells(), 4u);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(a.values[2 * i + j], b.values[2 * j + i]);
}

TEST(Density, MatchesBinAveragedModifiedDensity) {
  const double lo1 = -0.6, hi1 = -0.2, lo2 = 0.2, hi2 = 0.6;
  const auto d = estimate_rho_tilde(40, {{lo1, hi1}, {lo2, hi2}}, options(4000, 46));
  auto inner = [&](double y1) {
    return gauss_kronrod<double, 15>::integrate([&](double y2) { return modified_density(std::vector<double>{y1, y2}); },
                                                lo2, hi2);
  };
  const double avg = gauss_kronrod<double, 15>::integrate(inner, lo1, hi1) / ((hi1 - lo1) * (hi2 - lo2));
  ASSERT_GT(d.std_errors[0], 0.0);
  EXPECT_LT(std::abs(d.values[0] - avg) / d.std_errors[0], 3.0) << d.values[0] << " vs " << avg;
  EXPECT_GT(d.tuples[0], 100u);
}

TEST(Density, Preconditions) {
  EXPECT_THROW(estimate_rho_tilde(10, {{0.0, 1.0}, {0.5, 1.5}}, options(200)), DomainError);
  EXPECT_THROW(estimate_rho_tilde(10, {{0.0, 1.0}, {1.5, 2.0}, {3.0, 4.0}}, options(200)), DomainError);
  EXPECT_THROW(estimate_rho_tilde(10, {{0.0, 1.0}, {2.0, 1.5}}, options(200)), DomainError);
}

TEST(Charpoly, SmallSizeOracle) {
  EXPECT_NEAR(charpoly_pair_oracle(1, 0.4, 2.0), 0.4 * 2.0 + 0.5, 1e-14);
  for (int n = 1; n <= 4; ++n) {
    // Closed form sum_k C(n,k) (x1 x2)^{n-k} k! / 2^k.
    const double x1 = 0.3, x2 = -0.7, p = x1 * x2;
    double closed = 0.0, binom = 1.0, fact = 1.0;
    for (int k = 0; k <= n; ++k) {
      if (k > 0) {
        binom = binom * (n - k + 1) / k;
        fact *= k;
      }
      closed += binom * std::pow(p, n - k) * fact / std::pow(2.0, k);
    }
    EXPECT_NEAR(charpoly_pair_oracle(n, x1, x2), closed, 1e-12) << n;
  }
}

TEST(Charpoly, MonteCarloMatchesOracle) {
  const std::vector<double> one{0.6};
  EXPECT_LT(estimate_charpoly_moment(1, one, options(20000, 47)).z_score(-0.6), 3.0);
  for (int n : {2, 3, 4}) {
    const std::vector<double> x{0.3, -0.7};
    const auto e = estimate_charpoly_moment(n, x, options(20000, 48));
    EXPECT_LT(e.z_score(charpoly_pair_oracle(n, x[0], x[1])), 3.0) << n;
  }
  EXPECT_EQ(estimate_charpoly_moment(0, one, options(100)).mean, 1.0);
}

TEST(Charpoly, OverflowIsReportedAndLogDomainWorks) {
  const std::vector<double> far(2, 1e3);
  EXPECT_THROW(estimate_charpoly_moment(200, far, options(100)), OverflowError);
  const auto le = estimate_charpoly_log_moment(200, far, options(100));
  EXPECT_GT(le.log_scale, 700.0);
  EXPECT_TRUE(std::isfinite(le.scaled.mean));
  EXPECT_GT(le.scaled.mean, 0.0);
}

TEST(Lemma1, PrefactorGeometry) {
  EXPECT_NEAR(sphere_area(1), 2.0 * std::numbers::pi, 1e-14);
  EXPECT_NEAR(sphere_area(2), 4.0 * std::numbers::pi, 1e-14);
  const std::vector<double> ab{-0.3, 0.8}, ba{0.8, -0.3};
  EXPECT_NEAR(lemma1_prefactor(10, ab), -lemma1_prefactor(10, ba), 1e-15);
  EXPECT_GT(lemma1_prefactor(10, ab), 0.0);
}

TEST(Lemma1, RatioIsConfigurationIndependent) {
  Lemma1Options o;
  o.density_samples = 100000;
  o.charpoly_samples = 20000;
  o.seed = 49;
  const std::vector<PointConfig> configs{PointConfig({-0.5, 0.3}), PointConfig({0.0, 0.8})};
  const auto rows = lemma1_check(6, configs, o);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_TRUE(std::isfinite(r.ratio));
    EXPECT_GT(r.ratio_std_error, 0.0);
    EXPECT_GE(r.tuples, o.min_tuples);
  }
  EXPECT_LT(lemma1_max_pairwise_z(rows), 4.0);
}

TEST(Lemma1, EmptyBinsReportRequiredSamples) {
  Lemma1Options o;
  o.density_samples = 200;
  o.charpoly_samples = 200;
  try {
    lemma1_check(6, {PointConfig({4.0, 4.5})}, o);
    FAIL() << "expected InsufficientSamplesError";
  } catch (const InsufficientSamplesError& e) {
    EXPECT_GT(e.required_samples(), o.density_samples);
  }
}

TEST(Lemma1, Preconditions) {
  Lemma1Options o;
  o.density_samples = 200;
  o.charpoly_samples = 200;
  EXPECT_THROW(lemma1_check(2, {PointConfig({0.0, 1.0})}, o), DomainError);
  EXPECT_THROW(lemma1_check(6, {PointConfig({0.0, 0.1})}, o), DomainError);
  EXPECT_THROW(lemma1_check(6, {PointConfig({0.0, 0.5, 1.0})}, o), DomainError);
}

}  // namespace
}  // namespace ginoe
