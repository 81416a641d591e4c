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

/**
 * @file group_integrals.hpp
 * @brief Haar sampling on U(K), skew-symmetric unitaries, the Gaussian
 *        integral I_t over U(K) and its closed Pfaffian shape, and a
 *        quadrature oracle for second characteristic-polynomial moments.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ginoe/errors.hpp"
#include "ginoe/kernel.hpp"
#include "ginoe/linalg.hpp"
#include "ginoe/pfaffian.hpp"
#include "ginoe/quadrature.hpp"
#include "ginoe/random.hpp"
#include "ginoe/statistics.hpp"

namespace ginoe {

inline constexpr double kUnitaryTolerance = 1e-12;

/// Haar-distributed element of U(K).
struct HaarUnitary {
  ComplexMatrix u;
  Eigen::Index dim() const { return u.rows(); }
};

/// QR of a complex Gaussian matrix with the phases of diag(R) moved back into Q.
inline HaarUnitary haar_unitary(int k, StreamRng& rng) {
  if (k < 1) throw DomainError("haar_unitary: k must be >= 1");
  ComplexMatrix z(k, k);
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < k; ++i) {
      const double re = rng.normal();
      const double im = rng.normal();
      z(i, j) = cdouble(re, im) * (1.0 / std::numbers::sqrt2);
    }
  auto [q, r] = complex_qr(z);
  for (Eigen::Index j = 0; j < k; ++j) q.col(j) *= r(j, j) / std::abs(r(j, j));
  return {std::move(q)};
}

/// Skew-symmetric unitary K x K matrix: W^T = -W, W W^+ = I.
class SkewUnitary {
 public:
  explicit SkewUnitary(ComplexMatrix w) : w_(std::move(w)) {
    const auto k = w_.rows();
    if (w_.cols() != k) throw DomainError("SkewUnitary: matrix must be square");
    const double skew = (w_ + w_.transpose()).cwiseAbs().maxCoeff();
    const double unit = (w_ * w_.adjoint() - ComplexMatrix::Identity(k, k)).cwiseAbs().maxCoeff();
    if (skew > kUnitaryTolerance || unit > kUnitaryTolerance) {
      throw DomainError("SkewUnitary: defect " + std::to_string(std::max(skew, unit)) + " exceeds tolerance");
    }
  }
  const ComplexMatrix& matrix() const { return w_; }
  Eigen::Index dim() const { return w_.rows(); }

 private:
  ComplexMatrix w_;
};

/// W = U J U^T.
inline SkewUnitary to_skew_unitary(const HaarUnitary& u) {
  if (u.dim() % 2 != 0) throw DomainError("to_skew_unitary: K must be even");
  const ComplexMatrix j = canonical_symplectic(u.dim()).cast<cdouble>();
  return SkewUnitary(u.u * j * u.u.transpose());
}

namespace detail {

inline void require_even_dim(std::size_t k, const char* who) {
  if (k == 0 || k % 2 != 0) throw DomainError(std::string(who) + ": K must be even and positive");
}

inline void require_positive_time(double t, const char* who) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError(std::string(who) + ": t must be positive and finite");
}

inline ComplexMatrix diag(std::span<const double> x) {
  ComplexMatrix d = ComplexMatrix::Zero(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = x[i];
  return d;
}

}  // namespace detail

/// H^R = J H^T J^T, the quaternionic dual of H.
inline ComplexMatrix symplectic_dual(const ComplexMatrix& h) {
  const RealMatrix j = canonical_symplectic(h.rows());
  return j * h.transpose() * j.transpose();
}

/// exp(-(1/2t) Tr(H - H^R)^2) with H = U X U^+.
inline double it_integrand(const HaarUnitary& u, std::span<const double> x, double t) {
  const ComplexMatrix h = u.u * detail::diag(x) * u.u.adjoint();
  const ComplexMatrix d = h - symplectic_dual(h);
  return std::exp(-(d * d).trace().real() / (2.0 * t));
}

/// prod_k e^{-x_k^2/t} exp((1/t) Tr(W^+ X W X)).
inline double skew_integrand(const SkewUnitary& w, std::span<const double> x, double t) {
  const ComplexMatrix xm = detail::diag(x);
  const double tr = (w.matrix().adjoint() * xm * w.matrix() * xm).trace().real();
  double sq = 0.0;
  for (double v : x) sq += v * v;
  return std::exp((tr - sq) / t);
}

/**
 * Monte Carlo I_t for several (configuration, t) pairs from the same Haar
 * draws; draw i uses StreamRng(seed, i).
 */
inline std::vector<Estimate> I_t_mc_grid(const std::vector<std::pair<std::vector<double>, double>>& grid,
                                         std::uint64_t samples, std::uint64_t seed, Parallelism par = {}) {
  if (grid.empty()) return {};
  const std::size_t k = grid.front().first.size();
  for (const auto& [x, t] : grid) {
    detail::require_even_dim(x.size(), "I_t_mc");
    if (x.size() != k) throw DomainError("I_t_mc: all configurations must have the same size");
    detail::require_positive_time(t, "I_t_mc");
    detail::require_finite_points(x, "I_t_mc");
  }
  if (samples < 1) throw DomainError("I_t_mc: samples must be >= 1");
  auto total = reduce_blocks<AccumulatorVector>(samples, par, [&](std::uint64_t i, AccumulatorVector& st) {
    st.ensure(grid.size());
    StreamRng rng(seed, i);
    const auto u = haar_unitary(static_cast<int>(k), rng);
    for (std::size_t g = 0; g < grid.size(); ++g) st.acc[g].add(it_integrand(u, grid[g].first, grid[g].second));
  });
  total.ensure(grid.size());
  std::vector<Estimate> out;
  for (const auto& a : total.acc) out.push_back(a.estimate(seed));
  return out;
}

inline Estimate I_t_mc(std::span<const double> x, double t, std::uint64_t samples, std::uint64_t seed, Parallelism par = {}) {
  return I_t_mc_grid({{std::vector<double>(x.begin(), x.end()), t}}, samples, seed, par).front();
}

inline constexpr int kCirclePoints = 64;

/**
 * I_t for K = 2 as the normalized integral over the circle aU(2) =
 * {e^{i phi} J}, by the trapezoid rule (spectrally accurate for periodic
 * integrands).
 */
inline double I_t_quadrature_K2(double x1, double x2, double t, int points = kCirclePoints) {
  detail::require_positive_time(t, "I_t_quadrature_K2");
  if (!std::isfinite(x1) || !std::isfinite(x2)) throw DomainError("I_t_quadrature_K2: non-finite point");
  const double x[2] = {x1, x2};
  const ComplexMatrix j = canonical_symplectic(2).cast<cdouble>();
  double sum = 0.0;
  for (int p = 0; p < points; ++p) {
    const double phi = 2.0 * std::numbers::pi * p / points;
    sum += skew_integrand(SkewUnitary(std::polar(1.0, phi) * j), x, t);
  }
  return sum / points;
}

/// Sign making exact_shape positive: (-1)^{K/2}.
inline double exact_shape_orientation(std::size_t k) { return (k / 2) % 2 == 0 ? 1.0 : -1.0; }

/**
 * (-1)^{K/2} Pf[((x_i - x_j)/sqrt t) e^{-(x_i - x_j)^2/t}] / V(x / sqrt t),
 * without the normalization constant. Symmetric in the points.
 */
inline double exact_shape(std::span<const double> x, double t) {
  detail::require_even_dim(x.size(), "exact_shape");
  detail::require_positive_time(t, "exact_shape");
  detail::require_finite_points(x, "exact_shape");
  const double s = 1.0 / std::sqrt(t);
  std::vector<double> y(x.begin(), x.end());
  for (double& v : y) v *= s;
  auto sorted = detail::sort_with_parity(y);
  detail::require_distinct(sorted.x, "exact_shape");
  const auto a = SkewRealMatrix::from_upper(static_cast<Eigen::Index>(y.size()), [&](auto i, auto j) {
    const double d = y[i] - y[j];
    return d * std::exp(-d * d);
  });
  return exact_shape_orientation(x.size()) * pfaffian(a) / vandermonde(y);
}

struct IntegrandPair {
  double unitary_form;  // exp(-(1/2) Tr(H - H^R)^2), H = U X U^+
  double skew_form;     // e^{-Tr X^2} exp(Tr(W^+ X W X)), W = U J U^T
};

/**
 * Both integrands at t = 1 for the same draw U. Their Haar averages agree;
 * pointwise, unitary_form equals the skew form at U^T J U instead.
 */
inline IntegrandPair theorem1_integrand_equivalence(const HaarUnitary& u, std::span<const double> x) {
  detail::require_even_dim(x.size(), "theorem1_integrand_equivalence");
  if (static_cast<std::size_t>(u.dim()) != x.size()) {
    throw DomainError("theorem1_integrand_equivalence: size mismatch");
  }
  return {it_integrand(u, x, 1.0), skew_integrand(to_skew_unitary(u), x, 1.0)};
}

/// U^T J U, the skew unitary at which the two integrands coincide pointwise.
inline SkewUnitary transposed_skew_unitary(const HaarUnitary& u) {
  const ComplexMatrix j = canonical_symplectic(u.dim()).cast<cdouble>();
  return SkewUnitary(u.u.transpose() * j * u.u);
}

inline constexpr int kHsMaxN = 30;

struct HsOptions {
  double tolerance = 1e-12;  // relative change between panel doublings
  int initial_panels = 8;
  int max_doublings = 10;
  int angle_points = 16;
};

/**
 * E_n[det(M - x1) det(M - x2)] over GinOE(n) from the auxiliary-field
 * representation (1/pi) int d^2z e^{-|z|^2} Pf([[Z/sqrt2, X], [-X, Z^+/sqrt2]])^n,
 * Z = [[0, z], [-z, 0]], times (-1)^n so that z = 0 reproduces det(X)^n.
 * Polar coordinates: Gauss-Legendre panels in r on [0, R], trapezoid in angle.
 */
inline double hs_charpoly_oracle(int n, double x1, double x2, const HsOptions& opts = {}) {
  if (n < 0 || n > kHsMaxN) throw DomainError("hs_charpoly_oracle: n must be in [0, 30]");
  if (!std::isfinite(x1) || !std::isfinite(x2)) throw DomainError("hs_charpoly_oracle: non-finite point");
  const double sign_fix = n % 2 == 0 ? 1.0 : -1.0;

  auto block_pf = [&](cdouble z) {
    ComplexMatrix a = ComplexMatrix::Zero(4, 4);
    const double r2 = (1.0 / std::numbers::sqrt2);
    a(0, 1) = z * r2;
    a(1, 0) = -z * r2;
    a(2, 3) = -std::conj(z) * r2;
    a(3, 2) = std::conj(z) * r2;
    a(0, 2) = x1;
    a(1, 3) = x2;
    a(2, 0) = -x1;
    a(3, 1) = -x2;
    return pfaffian(SkewComplexMatrix(a));
  };
  auto radial = [&](double r) {
    if (r == 0.0) return 0.0;
    cdouble s = 0.0;
    for (int p = 0; p < opts.angle_points; ++p) {
      const double phi = 2.0 * std::numbers::pi * p / opts.angle_points;
      s += std::pow(block_pf(std::polar(r, phi)), n);
    }
    // (1/pi) * 2 pi * mean over angle * r e^{-r^2}
    return 2.0 * r * std::exp(-r * r) * (s / static_cast<double>(opts.angle_points)).real();
  };

  // Truncate where the radial integrand has fallen below 1e-16 of its peak.
  double peak = 0.0;
  for (double r = 0.0; r < 12.0; r += 0.01) peak = std::max(peak, std::abs(radial(r)));
  double radius = 1.0;
  while (std::abs(radial(radius)) > 1e-16 * peak || radius < std::sqrt(0.5 * n) + 1.0) radius += 0.25;

  const GaussRule rule = gauss_legendre(8);
  double prev = integrate_panels(radial, 0.0, radius, opts.initial_panels, rule);
  int panels = opts.initial_panels;
  for (int d = 0; d < opts.max_doublings; ++d) {
    panels *= 2;
    const double cur = integrate_panels(radial, 0.0, radius, panels, rule);
    if (std::abs(cur - prev) <= opts.tolerance * std::max(std::abs(cur), peak)) return sign_fix * cur;
    prev = cur;
  }
  throw ConvergenceError("hs_charpoly_oracle: quadrature did not converge after " +
                         std::to_string(opts.max_doublings) + " panel doublings");
}

/// Fit one constant at a reference point, then measure agreement elsewhere.
struct FitReport {
  double fitted_constant = 0.0;
  std::vector<double> ratios;       // measured / shape
  double max_relative_deviation = 0.0;  // max |ratio / constant - 1|
};

inline FitReport fit_then_verify(std::span<const double> measured, std::span<const double> shape, std::size_t reference = 0) {
  if (measured.size() != shape.size() || measured.empty() || reference >= measured.size()) {
    throw DomainError("fit_then_verify: mismatched or empty inputs");
  }
  FitReport rep;
  for (std::size_t i = 0; i < measured.size(); ++i) rep.ratios.push_back(measured[i] / shape[i]);
  rep.fitted_constant = rep.ratios[reference];
  for (double r : rep.ratios) rep.max_relative_deviation = std::max(rep.max_relative_deviation, std::abs(r / rep.fitted_constant - 1.0));
  return rep;
}

}  // namespace ginoe
