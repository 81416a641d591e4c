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
 * @file statistics.hpp
 * @brief Monte Carlo estimates and a worker-count independent block reduction.
 */

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "ginoe/errors.hpp"

namespace ginoe {

/// Monte Carlo result: sample mean, standard error of the mean, sample count and seed.
struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;

  /// |mean - target| / stderr, with 0/0 treated as agreement.
  double z_score(double target) const {
    const double d = std::abs(mean - target);
    if (std_error == 0.0) return d == 0.0 ? 0.0 : INFINITY;
    return d / std_error;
  }
};

/// Streaming mean / variance (Welford) with an order-respecting merge (Chan et al.).
class Accumulator {
 public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }

  void merge(const Accumulator& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) {
      *this = o;
      return;
    }
    const double n = static_cast<double>(n_ + o.n_);
    const double d = o.mean_ - mean_;
    mean_ += d * static_cast<double>(o.n_) / n;
    m2_ += o.m2_ + d * d * static_cast<double>(n_) * static_cast<double>(o.n_) / n;
    n_ += o.n_;
  }

  std::uint64_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double std_error() const { return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

  Estimate estimate(std::uint64_t seed) const { return {mean(), std_error(), n_, seed}; }

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Draws are grouped in blocks of this size; blocks are merged in index order.
inline constexpr std::uint64_t kReductionBlock = 256;

struct Parallelism {
  /// 0 selects std::thread::hardware_concurrency().
  unsigned workers = 1;

  unsigned resolved() const {
    if (workers != 0) return workers;
    return std::max(1u, std::thread::hardware_concurrency());
  }
};

/**
 * Runs body(index, state) for every index in [0, count) and merges
 * per-block states in block order. `State` must be default constructible
 * and provide merge(const State&). The result is independent of the
 * number of workers.
 */
template <typename State, typename Body>
State reduce_blocks(std::uint64_t count, Parallelism par, Body&& body) {
  const std::uint64_t blocks = (count + kReductionBlock - 1) / kReductionBlock;
  std::vector<State> partial(blocks);
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&]() {
    for (;;) {
      const std::uint64_t b = next.fetch_add(1);
      if (b >= blocks) return;
      try {
        const std::uint64_t lo = b * kReductionBlock;
        const std::uint64_t hi = std::min(count, lo + kReductionBlock);
        for (std::uint64_t i = lo; i < hi; ++i) body(i, partial[b]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(blocks);
        return;
      }
    }
  };

  const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(par.resolved(), std::max<std::uint64_t>(blocks, 1)));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  State total{};
  for (const auto& p : partial) total.merge(p);
  return total;
}

/// A fixed-size vector of accumulators that merges elementwise.
struct AccumulatorVector {
  std::vector<Accumulator> acc;

  void ensure(std::size_t n) {
    if (acc.size() < n) acc.resize(n);
  }
  void merge(const AccumulatorVector& o) {
    ensure(o.acc.size());
    for (std::size_t i = 0; i < o.acc.size(); ++i) acc[i].merge(o.acc[i]);
  }
};

}  // namespace ginoe
