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
 * @file stationary_phase.hpp
 * @brief Critical tori of the phase Tr(W^+ X W X) on skew unitaries,
 *        indexed by perfect matchings: critical values, Hessian spectra,
 *        signatures, determinants, the matchings sum and its Laplace limit.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ginoe/errors.hpp"
#include "ginoe/kernel.hpp"
#include "ginoe/pfaffian.hpp"

namespace ginoe {

namespace detail {

inline void require_matching_size(const Matching& m, std::span<const double> x, const char* who) {
  if (static_cast<std::size_t>(m.points()) != x.size()) {
    throw DomainError(std::string(who) + ": matching covers " + std::to_string(m.points()) + " points, configuration has " +
                      std::to_string(x.size()));
  }
}

inline std::vector<double> checked_points(std::span<const double> x, const char* who) {
  detail::require_even_count(x.size(), who);
  detail::require_finite_points(x, who);
  auto s = detail::sort_with_parity(x).x;
  detail::require_distinct(s, who);
  return {x.begin(), x.end()};
}

}  // namespace detail

/// 2 sum_k x_{i_k} x_{j_k}.
inline double critical_value(const Matching& m, std::span<const double> x) {
  detail::require_matching_size(m, x, "critical_value");
  double s = 0.0;
  for (auto [i, j] : m.pairs) s += x[i - 1] * x[j - 1];
  return 2.0 * s;
}

/// Exhaustive argmax of critical_value; a tie throws.
inline Matching find_max_matching(std::span<const double> x) {
  detail::checked_points(x, "find_max_matching");
  if (x.size() > static_cast<std::size_t>(kMatchingsPfaffianCap)) {
    throw DomainError("find_max_matching: at most 12 points");
  }
  const auto all = enumerate_matchings(static_cast<int>(x.size()));
  std::size_t best = 0;
  double best_value = critical_value(all[0], x);
  double scale = 0.0;
  for (double v : x) scale += v * v;
  const double tie_tol = 1e-14 * std::max(scale, 1.0);
  std::optional<std::size_t> tied;
  for (std::size_t a = 1; a < all.size(); ++a) {
    const double v = critical_value(all[a], x);
    if (v > best_value + tie_tol) {
      best = a;
      best_value = v;
      tied.reset();
    } else if (std::abs(v - best_value) <= tie_tol) {
      tied = a;
    }
  }
  if (tied) {
    throw DomainError("find_max_matching: tie between " + all[best].to_string() + " and " + all[*tied].to_string());
  }
  return all[best];
}

/// One distinct Hessian eigenvalue; each has multiplicity 2.
struct HessianEigenvalue {
  double value;
  int pair_k;  // 0-based pair indices, k < l
  int pair_l;
  int multiplicity = 2;
};

/**
 * For each k < l the two eigenvalues 2(x_{i_k} - x_{j_l})(x_{i_l} - x_{j_k})
 * and 2(x_{i_k} - x_{i_l})(x_{j_l} - x_{j_k}).
 */
inline std::vector<HessianEigenvalue> hessian_spectrum(const Matching& m, std::span<const double> x) {
  detail::require_matching_size(m, x, "hessian_spectrum");
  std::vector<HessianEigenvalue> out;
  const int k = static_cast<int>(m.pairs.size());
  auto at = [&](int idx) { return x[idx - 1]; };
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b) {
      const auto [ia, ja] = m.pairs[a];
      const auto [ib, jb] = m.pairs[b];
      out.push_back({2.0 * (at(ia) - at(jb)) * (at(ib) - at(ja)), a, b});
      out.push_back({2.0 * (at(ia) - at(ib)) * (at(jb) - at(ja)), a, b});
    }
  }
  return out;
}

/// (#positive - #negative) Hessian eigenvalues counted with multiplicity.
inline int signature(const Matching& m, std::span<const double> x) {
  int s = 0;
  for (const auto& e : hessian_spectrum(m, x)) {
    if (e.value == 0.0) throw DomainError("signature: zero Hessian eigenvalue at " + m.to_string());
    s += e.value > 0.0 ? e.multiplicity : -e.multiplicity;
  }
  return s;
}

/// 4 inv(sigma) - 2K(K-1) with K pairs.
inline int predicted_signature(const Matching& m) {
  const int k = static_cast<int>(m.pairs.size());
  return 4 * inversions(m) - 2 * k * (k - 1);
}

/// sqrt|det Hess| = product of |distinct eigenvalues| (multiplicity 2 per value).
inline double sqrt_abs_hessian_det(const Matching& m, std::span<const double> x) {
  double p = 1.0;
  for (const auto& e : hessian_spectrum(m, x)) {
    if (e.value == 0.0) throw DomainError("sqrt_abs_hessian_det: degenerate configuration");
    p *= std::abs(e.value);
  }
  return p;
}

struct HessianDetReport {
  double sqrt_abs_det = 0.0;
  double factor_product = 0.0;     // prod_{k<l} |four differences|
  double vandermonde_ratio = 0.0;  // |V(x)| / prod_k |x_{j_k} - x_{i_k}|
  double identity_relative_error = 0.0;
  double measured_two_power = 0.0;  // log2(sqrt_abs_det / factor_product)
  int eigenvalue_two_power = 0;     // K(K-1): one factor 2 per distinct eigenvalue
  int quoted_two_power = 0;         // 2K(K-1)
};

inline HessianDetReport hessian_det_report(const Matching& m, std::span<const double> x) {
  detail::require_matching_size(m, x, "hessian_det_report");
  HessianDetReport r;
  const int k = static_cast<int>(m.pairs.size());
  r.sqrt_abs_det = sqrt_abs_hessian_det(m, x);
  auto at = [&](int idx) { return x[idx - 1]; };
  double prod = 1.0;
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b) {
      const auto [ia, ja] = m.pairs[a];
      const auto [ib, jb] = m.pairs[b];
      prod *= std::abs((at(ia) - at(jb)) * (at(ib) - at(ja)) * (at(ia) - at(ib)) * (at(jb) - at(ja)));
    }
  r.factor_product = prod;
  double pairs = 1.0;
  for (auto [i, j] : m.pairs) pairs *= std::abs(at(j) - at(i));
  r.vandermonde_ratio = std::abs(vandermonde(x)) / pairs;
  r.identity_relative_error = std::abs(r.factor_product - r.vandermonde_ratio) / r.vandermonde_ratio;
  r.measured_two_power = std::log2(r.sqrt_abs_det / r.factor_product);
  r.eigenvalue_two_power = k * (k - 1);
  r.quoted_two_power = 2 * k * (k - 1);
  return r;
}

/// 1/(i t) = -i/t, principal branch; used by both sides of the exactness identity.
inline std::complex<double> inverse_imaginary_time(double t) { return {0.0, -1.0 / t}; }

inline constexpr int kStationaryPhaseMaxPoints = 10;

/**
 * t^{K(K-1)} prod_k e^{-x_k^2/(it)} sum_sigma sign(sigma) prod_k (x_{j_k} - x_{i_k})
 * e^{2 x_{i_k} x_{j_k}/(it)} / V(x), for 2K points.
 */
inline std::complex<double> stationary_phase_sum(std::span<const double> x, double t) {
  detail::checked_points(x, "stationary_phase_sum");
  if (!(t > 0.0)) throw DomainError("stationary_phase_sum: t must be positive");
  if (x.size() > static_cast<std::size_t>(kStationaryPhaseMaxPoints)) {
    throw DomainError("stationary_phase_sum: at most 10 points");
  }
  const auto w = inverse_imaginary_time(t);
  const int k = static_cast<int>(x.size()) / 2;
  std::complex<double> sum = 0.0;
  for (const auto& m : enumerate_matchings(static_cast<int>(x.size()))) {
    std::complex<double> term = static_cast<double>(matching_sign(m));
    for (auto [i, j] : m.pairs) term *= (x[j - 1] - x[i - 1]) * std::exp(2.0 * x[i - 1] * x[j - 1] * w);
    sum += term;
  }
  double sq = 0.0;
  for (double v : x) sq += v * v;
  return std::pow(t, k * (k - 1)) * std::exp(-sq * w) * sum / vandermonde(x);
}

/**
 * t^{K(K-1)} sum_sigma prod_k |x_{j_k} - x_{i_k}| / |V(x)|: the sum of the
 * moduli of the terms of stationary_phase_sum, the natural scale for its
 * rounding error.
 */
inline double stationary_phase_term_scale(std::span<const double> x, double t) {
  detail::checked_points(x, "stationary_phase_term_scale");
  const int two_k = static_cast<int>(x.size());
  double sum = 0.0;
  for (const auto& m : enumerate_matchings(two_k)) {
    double p = 1.0;
    for (auto [i, j] : m.pairs) p *= std::abs(x[j - 1] - x[i - 1]);
    sum += p;
  }
  const int k = two_k / 2;
  return std::pow(t, k * (k - 1)) * sum / std::abs(vandermonde(x));
}

/// Pf[((x_j - x_i)/sqrt t) e^{-(x_i - x_j)^2/(it)}] / V(x / sqrt t).
inline std::complex<double> stationary_phase_pfaffian(std::span<const double> x, double t) {
  detail::checked_points(x, "stationary_phase_pfaffian");
  if (!(t > 0.0)) throw DomainError("stationary_phase_pfaffian: t must be positive");
  const auto w = inverse_imaginary_time(t);
  const double s = 1.0 / std::sqrt(t);
  const auto a = SkewComplexMatrix::from_upper(static_cast<Eigen::Index>(x.size()), [&](auto i, auto j) {
    const double d = x[i] - x[j];
    return std::complex<double>((x[j] - x[i]) * s) * std::exp(-d * d * w);
  });
  std::vector<double> y(x.begin(), x.end());
  for (double& v : y) v *= s;
  return pfaffian(a) / vandermonde(y);
}

/**
 * Leading small-t term without the normalization constant:
 * prod_k (x_{2k} - x_{2k-1}) / V(x) * exp(-(1/t) sum_k (x_{2k} - x_{2k-1})^2).
 */
inline double laplace_leading(std::span<const double> x, double t) {
  detail::checked_points(x, "laplace_leading");
  // Adjacent pairs dominate only inside the Weyl chamber.
  if (!std::is_sorted(x.begin(), x.end())) throw DomainError("laplace_leading: points must be increasing");
  if (!(t > 0.0)) throw DomainError("laplace_leading: t must be positive");
  double num = 1.0, ex = 0.0;
  for (std::size_t k = 0; k + 1 < x.size(); k += 2) {
    const double d = x[k + 1] - x[k];
    num *= d;
    ex += d * d;
  }
  return num / vandermonde(x) * std::exp(-ex / t);
}

/**
 * If some partner exchange between two pairs of m strictly increases the
 * critical value, returns the first such rematch (canonical form).
 */
inline std::optional<Matching> improving_rematch(const Matching& m, std::span<const double> x) {
  detail::require_matching_size(m, x, "improving_rematch");
  const double base = critical_value(m, x);
  const auto k = m.pairs.size();
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a + 1; b < k; ++b) {
      const auto [ia, ja] = m.pairs[a];
      const auto [ib, jb] = m.pairs[b];
      for (auto [p, q] : {std::pair{std::pair{ia, jb}, std::pair{ib, ja}}, std::pair{std::pair{ia, ib}, std::pair{ja, jb}}}) {
        Matching r = m;
        r.pairs[a] = {std::min(p.first, p.second), std::max(p.first, p.second)};
        r.pairs[b] = {std::min(q.first, q.second), std::max(q.first, q.second)};
        std::sort(r.pairs.begin(), r.pairs.end());
        if (critical_value(r, x) > base) return r;
      }
    }
  return std::nullopt;
}

struct CriticalDatum {
  Matching matching;
  double critical_value = 0.0;
  std::vector<HessianEigenvalue> hessian;
  int signature = 0;
  int inversions = 0;
  double sqrt_abs_det = 0.0;
};

/// One row per matching, in enumeration order.
inline std::vector<CriticalDatum> critical_table(std::span<const double> x) {
  detail::checked_points(x, "critical_table");
  std::vector<CriticalDatum> rows;
  for (const auto& m : enumerate_matchings(static_cast<int>(x.size()))) {
    rows.push_back({m, critical_value(m, x), hessian_spectrum(m, x), signature(m, x), inversions(m),
                    sqrt_abs_hessian_det(m, x)});
  }
  return rows;
}

}  // namespace ginoe
