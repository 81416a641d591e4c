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
 * @file kernel.hpp
 * @brief Bulk-limit objects of the real-eigenvalue point process: the
 *        function F, the 2x2 kernel block H, K-point correlations, the
 *        modified density and spin product moments.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ginoe/errors.hpp"
#include "ginoe/pfaffian.hpp"

namespace ginoe {

/// Strictly increasing tuple x_1 < ... < x_K (a point of the Weyl chamber).
class PointConfig {
 public:
  explicit PointConfig(std::vector<double> points) : x_(std::move(points)) {
    if (x_.empty()) throw DomainError("PointConfig: at least one point is required");
    for (std::size_t i = 0; i < x_.size(); ++i) {
      if (!std::isfinite(x_[i])) throw DomainError("PointConfig: non-finite point");
      if (i > 0 && !(x_[i - 1] < x_[i])) {
        throw DomainError("PointConfig: points must be strictly increasing");
      }
    }
  }

  std::size_t size() const { return x_.size(); }
  double operator[](std::size_t i) const { return x_[i]; }
  std::span<const double> points() const { return x_; }
  operator std::span<const double>() const { return x_; }  // NOLINT(google-explicit-constructor)
  const std::vector<double>& vector() const { return x_; }

 private:
  std::vector<double> x_;
};

/// V(x) = prod_{i<j} (x_j - x_i).
inline double vandermonde(std::span<const double> x) {
  double v = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) v *= x[j] - x[i];
  return v;
}

namespace detail {

struct SortedPoints {
  std::vector<double> x;
  int parity = 1;  // sign of the sorting permutation
};

inline SortedPoints sort_with_parity(std::span<const double> in) {
  SortedPoints out{{in.begin(), in.end()}, 1};
  // Insertion sort: the swap count gives the permutation parity directly.
  for (std::size_t i = 1; i < out.x.size(); ++i) {
    for (std::size_t j = i; j > 0 && out.x[j - 1] > out.x[j]; --j) {
      std::swap(out.x[j - 1], out.x[j]);
      out.parity = -out.parity;
    }
  }
  return out;
}

inline void require_distinct(const std::vector<double>& sorted, const char* who) {
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i] == sorted[i - 1]) throw DomainError(std::string(who) + ": coincident points");
  }
}

inline void require_even_count(std::size_t k, const char* who) {
  if (k == 0 || k % 2 != 0) {
    throw DomainError(std::string(who) + ": number of points must be even and positive, got " +
                      std::to_string(k));
  }
}

inline void require_finite_points(std::span<const double> x, const char* who) {
  for (double v : x)
    if (!std::isfinite(v)) throw DomainError(std::string(who) + ": non-finite point");
}

}  // namespace detail

/// C_K = (4/pi)^{K/4} for even K.
inline double C_K(int k) {
  if (k <= 0 || k % 2 != 0) throw DomainError("C_K: K must be even and positive, got " + std::to_string(k));
  return std::pow(4.0 / std::numbers::pi, k / 4.0);
}

/// F(x) = pi^{-1/2} int_x^inf e^{-z^2} dz.
inline double F(double x) { return 0.5 * std::erfc(x); }

/// F'(x) = -pi^{-1/2} e^{-x^2}.
inline double F_prime(double x) { return -std::exp(-x * x) * std::numbers::inv_sqrtpi; }

/// F''(x) = 2x pi^{-1/2} e^{-x^2}.
inline double F_second(double x) { return 2.0 * x * std::exp(-x * x) * std::numbers::inv_sqrtpi; }

/// sgn with sgn(0) = 0.
inline double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

using KernelBlock = Eigen::Matrix2d;

/// H(z) = [[-F''(z), -F'(z)], [F'(z), sgn(z) F(|z|)]].
inline KernelBlock H_block(double z) {
  KernelBlock h;
  h << -F_second(z), -F_prime(z), F_prime(z), sgn(z) * F(std::abs(z));
  return h;
}

/// The 2K x 2K kernel matrix whose (i, j) block is H(x_j - x_i), in the given point order.
inline RealMatrix kernel_matrix(std::span<const double> x) {
  const auto k = static_cast<Eigen::Index>(x.size());
  RealMatrix a(2 * k, 2 * k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) a.block<2, 2>(2 * i, 2 * j) = H_block(x[j] - x[i]);
  return a;
}

/// K-point correlation function of the bulk limit: Pf[H(x_j - x_i)]. Symmetric in the points.
inline double rho(std::span<const double> points) {
  detail::require_finite_points(points, "rho");
  if (points.empty()) throw DomainError("rho: at least one point is required");
  auto sorted = detail::sort_with_parity(points);
  detail::require_distinct(sorted.x, "rho");
  return pfaffian(SkewRealMatrix(kernel_matrix(sorted.x)));
}

/**
 * C_K Pf[(x_i - x_j) e^{-(x_i - x_j)^2}]_{i<j}, extended antisymmetrically
 * to unordered arguments.
 */
inline double rho_tilde(std::span<const double> points) {
  detail::require_finite_points(points, "rho_tilde");
  detail::require_even_count(points.size(), "rho_tilde");
  auto sorted = detail::sort_with_parity(points);
  const auto& x = sorted.x;
  const auto a = SkewRealMatrix::from_upper(static_cast<Eigen::Index>(x.size()), [&](auto i, auto j) {
    const double d = x[i] - x[j];
    return d * std::exp(-d * d);
  });
  return sorted.parity * C_K(static_cast<int>(x.size())) * pfaffian(a);
}

/**
 * Modified density normalized so that (-1/2)^K prod_k d/dx_k of
 * spin_moment reproduces it: 2^{-K/2} rho_tilde. On the Weyl chamber this
 * is the quantity estimated by the spin-weighted counting measure.
 */
inline double modified_density(std::span<const double> points) {
  return std::pow(2.0, -0.5 * static_cast<double>(points.size())) * rho_tilde(points);
}

/// C_K Pf[int_{x_j - x_i}^inf e^{-z^2} dz]_{i<j}, evaluated in the given order.
inline double spin_moment_analytic(std::span<const double> x) {
  detail::require_finite_points(x, "spin_moment");
  detail::require_even_count(x.size(), "spin_moment");
  const double half_sqrt_pi = 0.5 / std::numbers::inv_sqrtpi;
  const auto a = SkewRealMatrix::from_upper(static_cast<Eigen::Index>(x.size()), [&](auto i, auto j) {
    return half_sqrt_pi * std::erfc(x[j] - x[i]);
  });
  return C_K(static_cast<int>(x.size())) * pfaffian(a);
}

/// Bulk-limit E[prod_k s_{x_k}]; symmetric in the points, coincident points allowed.
inline double spin_moment(std::span<const double> points) {
  auto sorted = detail::sort_with_parity(points);
  return spin_moment_analytic(sorted.x);
}

}  // namespace ginoe
