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
 * @file sampler.hpp
 * @brief GinOE(N) sampling, spin variables and Monte Carlo estimators of
 *        spin moments, spin-weighted eigenvalue densities, real-eigenvalue
 *        counts and characteristic-polynomial moments.
 *
 * Draw i under seed s always uses StreamRng(s, i), and partial results are
 * reduced in fixed blocks, so every estimator is bit-reproducible for a
 * given (seed, samples) regardless of the worker count.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "ginoe/errors.hpp"
#include "ginoe/kernel.hpp"
#include "ginoe/linalg.hpp"
#include "ginoe/quadrature.hpp"
#include "ginoe/random.hpp"
#include "ginoe/statistics.hpp"

namespace ginoe {

/// Entry variance of GinOE(N): the density is proportional to exp(-Tr M M^T).
inline constexpr double kEntryVariance = 0.5;

inline constexpr std::uint64_t kMinSamples = 100;

struct GinOESample {
  RealMatrix matrix;
  Spectrum spectrum;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;  // stream identifier within the seed
};

/// N x N matrix with i.i.d. N(0, 1/2) entries.
inline RealMatrix ginoe_matrix(int n, StreamRng& rng) {
  if (n < 1) throw DomainError("ginoe_matrix: n must be >= 1");
  const double scale = std::sqrt(kEntryVariance);
  RealMatrix m(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) m(i, j) = scale * rng.normal();
  return m;
}

inline GinOESample sample_ginoe(int n, std::uint64_t seed, std::uint64_t index) {
  StreamRng rng(seed, index);
  GinOESample s;
  s.matrix = ginoe_matrix(n, rng);
  s.spectrum = real_schur(s.matrix);
  s.seed = seed;
  s.index = index;
  return s;
}

/// (-1)^{#real eigenvalues strictly below x}.
inline int spin_parity(const Spectrum& spectrum, double x) {
  return spectrum.count_below(x) % 2 == 0 ? 1 : -1;
}

/// s_x(M), computed from the spectrum and cross-checked against sgn det(M - xI).
inline int spin(const GinOESample& sample, double x) {
  const int by_parity = spin_parity(sample.spectrum, x);
  const int by_det = sign_det(shifted(sample.matrix, x));
  if (by_det == 0) {
    throw DegenerateSpinError("spin: x = " + std::to_string(x) + " is numerically an eigenvalue");
  }
  if (by_det != by_parity) {
    throw DegenerateSpinError("spin: eigenvalue parity and determinant sign disagree at x = " +
                              std::to_string(x));
  }
  return by_parity;
}

namespace detail {

inline void require_samples(std::uint64_t samples, const char* who) {
  if (samples < kMinSamples) {
    throw DomainError(std::string(who) + ": at least " + std::to_string(kMinSamples) +
                      " samples are required, got " + std::to_string(samples));
  }
}

}  // namespace detail

struct SamplerOptions {
  std::uint64_t samples = 4000;
  std::uint64_t seed = kDefaultSeed;
  Parallelism parallelism{};
  /// Also evaluate every spin through sgn det(M - xI) and fail on disagreement.
  bool verify_spins = true;
};

/**
 * E[prod_k s_{x_k}] for several configurations, all from the same draws.
 * Configurations need an even number of points; coincident points are allowed.
 */
inline std::vector<Estimate> estimate_spin_moments(int n, const std::vector<std::vector<double>>& configs,
                                                   const SamplerOptions& opts) {
  detail::require_samples(opts.samples, "estimate_spin_moments");
  for (const auto& c : configs) {
    detail::require_even_count(c.size(), "estimate_spin_moments");
    detail::require_finite_points(c, "estimate_spin_moments");
  }
  auto total = reduce_blocks<AccumulatorVector>(opts.samples, opts.parallelism, [&](std::uint64_t i, AccumulatorVector& st) {
    st.ensure(configs.size());
    const auto s = sample_ginoe(n, opts.seed, i);
    for (std::size_t c = 0; c < configs.size(); ++c) {
      int prod = 1;
      for (double x : configs[c]) prod *= opts.verify_spins ? spin(s, x) : spin_parity(s.spectrum, x);
      st.acc[c].add(prod);
    }
  });
  total.ensure(configs.size());
  std::vector<Estimate> out;
  for (const auto& a : total.acc) out.push_back(a.estimate(opts.seed));
  return out;
}

inline Estimate estimate_spin_moment(int n, std::span<const double> points, const SamplerOptions& opts) {
  return estimate_spin_moments(n, {std::vector<double>(points.begin(), points.end())}, opts).front();
}

/// Mean number of real eigenvalues.
inline Estimate estimate_real_count(int n, const SamplerOptions& opts) {
  detail::require_samples(opts.samples, "estimate_real_count");
  auto total = reduce_blocks<Accumulator>(opts.samples, opts.parallelism, [&](std::uint64_t i, Accumulator& acc) {
    acc.add(static_cast<double>(sample_ginoe(n, opts.seed, i).spectrum.real_eigenvalues.size()));
  });
  return total.estimate(opts.seed);
}

/// Exact E[#real eigenvalues] = 1/2 + sqrt(2) 2F1(1, -1/2; N; 1/2) / B(N, 1/2).
inline double expected_real_count(int n) {
  if (n < 1) throw DomainError("expected_real_count: n must be >= 1");
  // 2F1(1, -1/2; N; 1/2) = sum_m (-1/2)_m / (N)_m 2^{-m}; terms shrink geometrically.
  double term = 1.0, sum = 1.0;
  for (int m = 0; m < 200; ++m) {
    term *= (m - 0.5) / (n + m) * 0.5;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return 0.5 + std::numbers::sqrt2 * sum / std::beta(static_cast<double>(n), 0.5);
}

/// Half-open interval [lo, hi).
struct Interval {
  double lo;
  double hi;
  double length() const { return hi - lo; }
  bool contains(double x) const { return lo <= x && x < hi; }
};

/**
 * Spin-weighted K-point counting measure on a product of bins, divided by
 * samples and bin volume. Each ordered tuple of real eigenvalues with
 * lambda_k in the k-th coordinate bin contributes prod_k (-1)^{#real
 * eigenvalues strictly below lambda_k}. Cells are stored row-major, last
 * coordinate fastest.
 */
struct BinnedDensity {
  std::vector<std::vector<double>> edges;  // per coordinate, ascending
  std::vector<double> weighted_counts;     // raw sums of tuple weights
  std::vector<double> values;              // weighted_counts * normalization
  std::vector<double> std_errors;
  std::vector<double> normalization;       // 1 / (samples * cell volume)
  std::vector<std::uint64_t> tuples;       // unweighted tuple counts
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  int n = 0;
  double entry_variance = kEntryVariance;

  std::size_t cells() const { return values.size(); }
  std::size_t coordinates() const { return edges.size(); }

  std::vector<std::size_t> cell_indices(std::size_t flat) const {
    std::vector<std::size_t> idx(edges.size());
    for (std::size_t k = edges.size(); k-- > 0;) {
      const std::size_t bins = edges[k].size() - 1;
      idx[k] = flat % bins;
      flat /= bins;
    }
    return idx;
  }

  std::vector<double> cell_center(std::size_t flat) const {
    const auto idx = cell_indices(flat);
    std::vector<double> c(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) c[k] = 0.5 * (edges[k][idx[k]] + edges[k][idx[k] + 1]);
    return c;
  }
};

namespace detail {

/// Per-cell sums of the weight and its square over samples.
struct CellMoments {
  std::vector<double> sum;
  std::vector<double> sum_sq;
  std::vector<std::uint64_t> tuples;

  void ensure(std::size_t n) {
    if (sum.size() < n) {
      sum.resize(n, 0.0);
      sum_sq.resize(n, 0.0);
      tuples.resize(n, 0);
    }
  }
  void merge(const CellMoments& o) {
    ensure(o.sum.size());
    for (std::size_t i = 0; i < o.sum.size(); ++i) {
      sum[i] += o.sum[i];
      sum_sq[i] += o.sum_sq[i];
      tuples[i] += o.tuples[i];
    }
  }
};

inline void require_disjoint(const std::vector<Interval>& ranges, const char* who) {
  for (std::size_t a = 0; a < ranges.size(); ++a) {
    if (!(ranges[a].lo < ranges[a].hi)) throw DomainError(std::string(who) + ": empty coordinate range");
    for (std::size_t b = a + 1; b < ranges.size(); ++b) {
      if (ranges[a].lo < ranges[b].hi && ranges[b].lo < ranges[a].hi) {
        throw DomainError(std::string(who) + ": coordinate ranges " + std::to_string(a) + " and " +
                          std::to_string(b) + " overlap; only products of disjoint intervals are supported");
      }
    }
  }
}

/// Sum of (-1)^{rank} and count of real eigenvalues in each bin of one coordinate.
inline void bin_signs(const Spectrum& spec, const std::vector<double>& edges, std::vector<double>& signed_sum,
                      std::vector<std::uint64_t>& count) {
  const std::size_t bins = edges.size() - 1;
  signed_sum.assign(bins, 0.0);
  count.assign(bins, 0);
  const auto& ev = spec.real_eigenvalues;
  auto it = std::lower_bound(ev.begin(), ev.end(), edges.front());
  for (; it != ev.end() && *it < edges.back(); ++it) {
    const auto b = static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), *it) - edges.begin()) - 1;
    const std::size_t below = spec.count_below(*it);
    signed_sum[b] += below % 2 == 0 ? 1.0 : -1.0;
    ++count[b];
  }
}

}  // namespace detail

/**
 * Estimates the spin-weighted K-point density of GinOE(n) on the product of
 * the given per-coordinate bin grids (K = edges.size() in {2, 4}). Coordinate
 * ranges must be pairwise disjoint.
 */
inline BinnedDensity estimate_rho_tilde(int n, const std::vector<std::vector<double>>& edges, const SamplerOptions& opts) {
  detail::require_samples(opts.samples, "estimate_rho_tilde");
  const std::size_t k = edges.size();
  if (k != 2 && k != 4) throw DomainError("estimate_rho_tilde: K must be 2 or 4, got " + std::to_string(k));
  std::vector<Interval> ranges;
  std::size_t cells = 1;
  for (const auto& e : edges) {
    if (e.size() < 2) throw DomainError("estimate_rho_tilde: each coordinate needs at least one bin");
    for (std::size_t i = 1; i < e.size(); ++i)
      if (!(e[i - 1] < e[i])) throw DomainError("estimate_rho_tilde: bin edges must be strictly increasing");
    ranges.push_back({e.front(), e.back()});
    cells *= e.size() - 1;
  }
  detail::require_disjoint(ranges, "estimate_rho_tilde");

  auto moments = reduce_blocks<detail::CellMoments>(opts.samples, opts.parallelism, [&](std::uint64_t i, detail::CellMoments& st) {
    st.ensure(cells);
    const auto s = sample_ginoe(n, opts.seed, i);
    std::vector<std::vector<double>> signs(k);
    std::vector<std::vector<std::uint64_t>> counts(k);
    bool any_empty = false;
    for (std::size_t c = 0; c < k; ++c) {
      detail::bin_signs(s.spectrum, edges[c], signs[c], counts[c]);
      if (std::all_of(counts[c].begin(), counts[c].end(), [](auto v) { return v == 0; })) any_empty = true;
    }
    if (any_empty) return;
    // Disjoint coordinate ranges: the tuple sum over a cell factorizes per coordinate.
    std::vector<std::size_t> idx(k, 0);
    for (std::size_t flat = 0; flat < cells; ++flat) {
      double w = 1.0;
      std::uint64_t t = 1;
      for (std::size_t c = 0; c < k; ++c) {
        w *= signs[c][idx[c]];
        t *= counts[c][idx[c]];
      }
      st.sum[flat] += w;
      st.sum_sq[flat] += w * w;
      st.tuples[flat] += t;
      for (std::size_t c = k; c-- > 0;) {
        if (++idx[c] < edges[c].size() - 1) break;
        idx[c] = 0;
      }
    }
  });
  moments.ensure(cells);

  BinnedDensity out;
  out.edges = edges;
  out.samples = opts.samples;
  out.seed = opts.seed;
  out.n = n;
  out.weighted_counts = moments.sum;
  out.tuples = moments.tuples;
  const double ns = static_cast<double>(opts.samples);
  for (std::size_t flat = 0; flat < cells; ++flat) {
    const auto idx = out.cell_indices(flat);
    double volume = 1.0;
    for (std::size_t c = 0; c < k; ++c) volume *= edges[c][idx[c] + 1] - edges[c][idx[c]];
    const double norm = 1.0 / (ns * volume);
    const double mean = moments.sum[flat] / ns;
    const double var = std::max(0.0, (moments.sum_sq[flat] - ns * mean * mean) / (ns - 1.0));
    out.normalization.push_back(norm);
    out.values.push_back(moments.sum[flat] * norm);
    out.std_errors.push_back(std::sqrt(var / ns) / volume);
  }
  return out;
}

/// Largest log|value| accepted before the linear-domain estimators refuse.
inline constexpr double kMaxLogMagnitude = 700.0;

/// E[prod_l det(M - x_l I)] over GinOE(n). n = 0 gives the empty product 1.
inline Estimate estimate_charpoly_moment(int n, std::span<const double> points, const SamplerOptions& opts) {
  detail::require_samples(opts.samples, "estimate_charpoly_moment");
  detail::require_finite_points(points, "estimate_charpoly_moment");
  if (n < 0) throw DomainError("estimate_charpoly_moment: n must be >= 0");
  auto total = reduce_blocks<Accumulator>(opts.samples, opts.parallelism, [&](std::uint64_t i, Accumulator& acc) {
    if (n == 0) {
      acc.add(1.0);
      return;
    }
    StreamRng rng(opts.seed, i);
    const RealMatrix m = ginoe_matrix(n, rng);
    int sign = 1;
    double log_abs = 0.0;
    for (double x : points) {
      const auto ld = log_det(shifted(m, x));
      sign *= ld.sign;
      log_abs += ld.log_abs;
    }
    if (sign == 0) {
      acc.add(0.0);
      return;
    }
    if (log_abs > kMaxLogMagnitude) {
      throw OverflowError("estimate_charpoly_moment: |product of determinants| = exp(" + std::to_string(log_abs) +
                          ") overflows; use estimate_charpoly_log_moment");
    }
    acc.add(sign * std::exp(log_abs));
  });
  return total.estimate(opts.seed);
}

/// value = exp(log_scale) * scaled.mean, std error likewise.
struct LogEstimate {
  double log_scale = 0.0;
  Estimate scaled;
};

/// Log-domain variant of estimate_charpoly_moment for sizes where the linear one overflows.
inline LogEstimate estimate_charpoly_log_moment(int n, std::span<const double> points, const SamplerOptions& opts) {
  detail::require_samples(opts.samples, "estimate_charpoly_log_moment");
  if (n < 1) throw DomainError("estimate_charpoly_log_moment: n must be >= 1");
  std::vector<int> signs(opts.samples);
  std::vector<double> logs(opts.samples);
  struct Max {
    double v = -INFINITY;
    void merge(const Max& o) { v = std::max(v, o.v); }
  };
  const auto peak = reduce_blocks<Max>(opts.samples, opts.parallelism, [&](std::uint64_t i, Max& st) {
    StreamRng rng(opts.seed, i);
    const RealMatrix m = ginoe_matrix(n, rng);
    int sign = 1;
    double log_abs = 0.0;
    for (double x : points) {
      const auto ld = log_det(shifted(m, x));
      sign *= ld.sign;
      log_abs += ld.log_abs;
    }
    signs[i] = sign;
    logs[i] = log_abs;
    if (sign != 0) st.v = std::max(st.v, log_abs);
  });
  LogEstimate out;
  out.log_scale = std::isfinite(peak.v) ? peak.v : 0.0;
  Accumulator acc;
  for (std::uint64_t i = 0; i < opts.samples; ++i) acc.add(signs[i] == 0 ? 0.0 : signs[i] * std::exp(logs[i] - out.log_scale));
  out.scaled = acc.estimate(opts.seed);
  return out;
}

/// Surface area of the unit sphere in R^{m+1}: 2 pi^{(m+1)/2} / Gamma((m+1)/2).
inline double sphere_area(int m) {
  if (m < 0) throw DomainError("sphere_area: dimension must be >= 0");
  const double h = 0.5 * (m + 1);
  return 2.0 * std::pow(std::numbers::pi, h) / std::tgamma(h);
}

/**
 * Explicit factor multiplying E_{n-d}[prod det(M - x_l)] in the Edelman-type
 * representation of the d-point (d = 2K) spin-weighted density of GinOE(n):
 * V(x) / 16^K prod_{k=1}^{d} |S_{n-k}| pi^{-(n-k)/2} e^{-x_k^2}.
 */
inline double lemma1_prefactor(int n, std::span<const double> x) {
  const int d = static_cast<int>(x.size());
  double f = vandermonde(x) * std::pow(16.0, -0.5 * d);
  for (int k = 1; k <= d; ++k) {
    f *= sphere_area(n - k) * std::pow(std::numbers::pi, -0.5 * (n - k)) * std::exp(-x[k - 1] * x[k - 1]);
  }
  return f;
}

struct Lemma1Options {
  /// Each coordinate is averaged over [x_k - half_width, x_k + half_width).
  double half_width = 0.1;
  int nodes_per_axis = 3;
  std::uint64_t density_samples = 1'000'000;
  std::uint64_t charpoly_samples = 200'000;
  std::uint64_t seed = kDefaultSeed;
  Parallelism parallelism{};
  std::uint64_t min_tuples = 100;
};

struct Lemma1Row {
  std::vector<double> points;
  Estimate lhs;      // bin-averaged spin-weighted density
  Estimate rhs;      // prefactor * E_{n-2K}[prod det], bin-averaged
  Estimate rhs_alt;  // same with E_{n-K}
  double ratio = 0.0;
  double ratio_std_error = 0.0;
  double ratio_alt = 0.0;
  double ratio_alt_std_error = 0.0;
  std::uint64_t tuples = 0;
};

namespace detail {

inline void ratio_with_error(const Estimate& num, const Estimate& den, double& r, double& se) {
  r = num.mean / den.mean;
  const double a = num.std_error / num.mean;
  const double b = den.std_error / den.mean;
  se = std::abs(r) * std::sqrt(a * a + b * b);
}

/// Per-sample bin-averaged sum over Gauss nodes of prefactor(y) * prod_l det(M - y_l) for each config.
inline std::vector<Estimate> charpoly_bin_average(int n_total, int n_det, const std::vector<std::vector<double>>& configs,
                                                  const Lemma1Options& opts, std::uint64_t seed) {
  const GaussRule rule = gauss_legendre(opts.nodes_per_axis);
  const std::size_t q = rule.nodes.size();
  // Node tuples and their prefactor weights are sample independent.
  struct Grid {
    std::vector<std::vector<double>> axis_nodes;  // per coordinate
    std::vector<double> weights;                  // per node tuple, row-major
  };
  std::vector<Grid> grids;
  for (const auto& x : configs) {
    Grid g;
    const std::size_t d = x.size();
    for (double c : x) {
      std::vector<double> nodes;
      for (double u : rule.nodes) nodes.push_back(c + opts.half_width * u);
      g.axis_nodes.push_back(nodes);
    }
    std::vector<std::size_t> idx(d, 0);
    std::size_t tuples = 1;
    for (std::size_t c = 0; c < d; ++c) tuples *= q;
    std::vector<double> y(d);
    for (std::size_t flat = 0; flat < tuples; ++flat) {
      double w = 1.0;
      for (std::size_t c = 0; c < d; ++c) {
        y[c] = g.axis_nodes[c][idx[c]];
        w *= 0.5 * rule.weights[idx[c]];
      }
      g.weights.push_back(w * lemma1_prefactor(n_total, y));
      for (std::size_t c = d; c-- > 0;) {
        if (++idx[c] < q) break;
        idx[c] = 0;
      }
    }
    grids.push_back(std::move(g));
  }

  auto total = reduce_blocks<AccumulatorVector>(opts.charpoly_samples, opts.parallelism, [&](std::uint64_t i, AccumulatorVector& st) {
    st.ensure(configs.size());
    StreamRng rng(seed, i);
    const RealMatrix m = n_det > 0 ? ginoe_matrix(n_det, rng) : RealMatrix();
    for (std::size_t ci = 0; ci < configs.size(); ++ci) {
      const auto& g = grids[ci];
      const std::size_t d = g.axis_nodes.size();
      std::vector<std::vector<double>> dets(d, std::vector<double>(q, 1.0));
      if (n_det > 0) {
        for (std::size_t c = 0; c < d; ++c)
          for (std::size_t j = 0; j < q; ++j) {
            const auto ld = log_det(shifted(m, g.axis_nodes[c][j]));
            if (ld.log_abs > kMaxLogMagnitude) throw OverflowError("lemma1_check: determinant overflow");
            dets[c][j] = ld.sign * std::exp(ld.log_abs);
          }
      }
      std::vector<std::size_t> idx(d, 0);
      double s = 0.0;
      for (std::size_t flat = 0; flat < g.weights.size(); ++flat) {
        double p = g.weights[flat];
        for (std::size_t c = 0; c < d; ++c) p *= dets[c][idx[c]];
        s += p;
        for (std::size_t c = d; c-- > 0;) {
          if (++idx[c] < q) break;
          idx[c] = 0;
        }
      }
      st.acc[ci].add(s);
    }
  });
  total.ensure(configs.size());
  std::vector<Estimate> out;
  for (const auto& a : total.acc) out.push_back(a.estimate(seed));
  return out;
}

}  // namespace detail

/// Seed offset separating the determinant draws from the density draws.
inline constexpr std::uint64_t kCharpolySeedOffset = 0x5bd1e995ULL;

/**
 * Compares the Monte Carlo spin-weighted density of GinOE(n) at each
 * 2K-point configuration with prefactor * E_{n-2K}[prod det(M - x_l)].
 * Both sides are averaged over the same bin product. The n-K variant is
 * reported alongside.
 */
inline std::vector<Lemma1Row> lemma1_check(int n, const std::vector<PointConfig>& configs, const Lemma1Options& opts) {
  if (configs.empty()) throw DomainError("lemma1_check: at least one configuration is required");
  detail::require_samples(opts.density_samples, "lemma1_check");
  detail::require_samples(opts.charpoly_samples, "lemma1_check");
  if (!(opts.half_width > 0.0)) throw DomainError("lemma1_check: half_width must be positive");
  std::vector<std::vector<double>> pts;
  for (const auto& c : configs) {
    detail::require_even_count(c.size(), "lemma1_check");
    if (static_cast<int>(c.size()) >= n) {
      throw DomainError("lemma1_check: need 2K < n, got 2K = " + std::to_string(c.size()) + ", n = " + std::to_string(n));
    }
    if (c.size() > 4) throw DomainError("lemma1_check: at most 4 points are supported");
    for (std::size_t k = 1; k < c.size(); ++k) {
      if (c[k] - c[k - 1] <= 2.0 * opts.half_width) {
        throw DomainError("lemma1_check: points closer than the bin width; bins must be disjoint");
      }
    }
    pts.push_back(c.vector());
  }

  // Left-hand side: one bin product per configuration, all from the same draws.
  struct Lhs {
    AccumulatorVector acc;
    std::vector<std::uint64_t> tuples;
    void merge(const Lhs& o) {
      acc.merge(o.acc);
      if (tuples.size() < o.tuples.size()) tuples.resize(o.tuples.size(), 0);
      for (std::size_t i = 0; i < o.tuples.size(); ++i) tuples[i] += o.tuples[i];
    }
  };
  const double w = opts.half_width;
  auto lhs = reduce_blocks<Lhs>(opts.density_samples, opts.parallelism, [&](std::uint64_t i, Lhs& st) {
    st.acc.ensure(pts.size());
    st.tuples.resize(pts.size(), 0);
    const auto s = sample_ginoe(n, opts.seed, i);
    for (std::size_t ci = 0; ci < pts.size(); ++ci) {
      double weight = 1.0;
      std::uint64_t t = 1;
      for (double x : pts[ci]) {
        std::vector<double> signs;
        std::vector<std::uint64_t> counts;
        detail::bin_signs(s.spectrum, {x - w, x + w}, signs, counts);
        weight *= signs[0];
        t *= counts[0];
      }
      st.acc.acc[ci].add(weight);
      st.tuples[ci] += t;
    }
  });
  lhs.acc.ensure(pts.size());
  lhs.tuples.resize(pts.size(), 0);

  for (std::size_t ci = 0; ci < pts.size(); ++ci) {
    if (lhs.tuples[ci] < opts.min_tuples) {
      const double per_sample = static_cast<double>(std::max<std::uint64_t>(lhs.tuples[ci], 1)) /
                                static_cast<double>(opts.density_samples);
      const auto required = static_cast<std::uint64_t>(std::ceil(static_cast<double>(opts.min_tuples) / per_sample));
      throw InsufficientSamplesError("lemma1_check: only " + std::to_string(lhs.tuples[ci]) +
                                         " eigenvalue tuples fell in the bins of configuration " + std::to_string(ci) +
                                         "; about " + std::to_string(required) + " samples are needed",
                                     required);
    }
  }

  const std::uint64_t cp_seed = opts.seed + kCharpolySeedOffset;
  std::vector<Lemma1Row> rows(pts.size());
  // Configurations may differ in size; group by point count.
  for (int size : {2, 4}) {
    std::vector<std::vector<double>> group;
    std::vector<std::size_t> where;
    for (std::size_t ci = 0; ci < pts.size(); ++ci)
      if (static_cast<int>(pts[ci].size()) == size) {
        group.push_back(pts[ci]);
        where.push_back(ci);
      }
    if (group.empty()) continue;
    const auto rhs = detail::charpoly_bin_average(n, n - size, group, opts, cp_seed);
    const auto alt = detail::charpoly_bin_average(n, n - size / 2, group, opts, cp_seed);
    for (std::size_t g = 0; g < group.size(); ++g) {
      rows[where[g]].rhs = rhs[g];
      rows[where[g]].rhs_alt = alt[g];
    }
  }

  for (std::size_t ci = 0; ci < pts.size(); ++ci) {
    auto& row = rows[ci];
    row.points = pts[ci];
    row.tuples = lhs.tuples[ci];
    const double vol = std::pow(2.0 * w, static_cast<double>(pts[ci].size()));
    row.lhs = lhs.acc.acc[ci].estimate(opts.seed);
    row.lhs.mean /= vol;
    row.lhs.std_error /= vol;
    detail::ratio_with_error(row.lhs, row.rhs, row.ratio, row.ratio_std_error);
    detail::ratio_with_error(row.lhs, row.rhs_alt, row.ratio_alt, row.ratio_alt_std_error);
  }
  return rows;
}

/// Largest pairwise |r_i - r_j| / sqrt(se_i^2 + se_j^2) over the rows.
inline double lemma1_max_pairwise_z(const std::vector<Lemma1Row>& rows) {
  double worst = 0.0;
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = a + 1; b < rows.size(); ++b) {
      const double se = std::hypot(rows[a].ratio_std_error, rows[b].ratio_std_error);
      worst = std::max(worst, std::abs(rows[a].ratio - rows[b].ratio) / se);
    }
  return worst;
}

inline bool lemma1_ratios_consistent(const std::vector<Lemma1Row>& rows, double n_sigma = 3.0) {
  return lemma1_max_pairwise_z(rows) <= n_sigma;
}

}  // namespace ginoe
