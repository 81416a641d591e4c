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
 * @file pfaffian.hpp
 * @brief Pfaffians of skew-symmetric matrices and perfect matchings of {1..2K}.
 *
 * The numerical route is the Parlett-Reid skew tridiagonalization with
 * partial pivoting; the combinatorial route sums over all perfect matchings
 * and serves as an oracle for small dimensions.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ginoe/errors.hpp"
#include "ginoe/linalg.hpp"

namespace ginoe {

/**
 * Even-dimensional skew-symmetric matrix.
 *
 * Construction antisymmetrizes the input and zeroes the diagonal; inputs
 * whose skew defect max|A_ij + A_ji| exceeds kTolerance * max|A| are
 * rejected.
 */
template <typename Scalar>
class SkewMatrix {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  static constexpr double kTolerance = 1e-12;

  explicit SkewMatrix(const Matrix& a) {
    const Eigen::Index n = a.rows();
    if (a.cols() != n) throw DomainError("SkewMatrix: matrix must be square");
    if (n % 2 != 0) throw DomainError("SkewMatrix: dimension must be even, got " + std::to_string(n));
    detail::require_finite(a, "SkewMatrix");
    const double scale = n == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
    const double defect = n == 0 ? 0.0 : (a + a.transpose()).cwiseAbs().maxCoeff();
    if (defect > kTolerance * scale) {
      throw DomainError("SkewMatrix: input is not skew-symmetric (defect " + std::to_string(defect) +
                        ")");
    }
    a_ = Scalar(0.5) * (a - a.transpose());
    a_.diagonal().setZero();
  }

  /// Builds the matrix from its strict upper triangle, entry(i, j) for i < j (0-based).
  template <typename Fn>
  static SkewMatrix from_upper(Eigen::Index dim, Fn&& entry) {
    if (dim % 2 != 0) throw DomainError("SkewMatrix: dimension must be even, got " + std::to_string(dim));
    Matrix a = Matrix::Zero(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      for (Eigen::Index j = i + 1; j < dim; ++j) {
        const Scalar v = entry(i, j);
        a(i, j) = v;
        a(j, i) = -v;
      }
    }
    return SkewMatrix(std::move(a), Trusted{});
  }

  Eigen::Index dim() const { return a_.rows(); }
  const Matrix& matrix() const { return a_; }
  Scalar operator()(Eigen::Index i, Eigen::Index j) const { return a_(i, j); }

 private:
  struct Trusted {};
  SkewMatrix(Matrix a, Trusted) : a_(std::move(a)) {}

  Matrix a_;
};

using SkewComplexMatrix = SkewMatrix<cdouble>;
using SkewRealMatrix = SkewMatrix<double>;

/// Block-diagonal J with 2x2 blocks [[0, 1], [-1, 0]].
inline RealMatrix canonical_symplectic(Eigen::Index dim) {
  if (dim < 0 || dim % 2 != 0) throw DomainError("canonical_symplectic: dimension must be even");
  RealMatrix j = RealMatrix::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; i += 2) {
    j(i, i + 1) = 1.0;
    j(i + 1, i) = -1.0;
  }
  return j;
}

/// Pfaffian by skew tridiagonalization with partial pivoting. Pf(A)^2 = det(A).
template <typename Scalar>
Scalar pfaffian(const SkewMatrix<Scalar>& skew) {
  using Matrix = typename SkewMatrix<Scalar>::Matrix;
  const Eigen::Index n = skew.dim();
  if (n == 0) return Scalar(1);
  Matrix a = skew.matrix();
  Scalar result(1);

  for (Eigen::Index k = 0; k + 1 < n; k += 2) {
    // Largest entry below the diagonal in column k becomes the (k+1, k) pivot.
    Eigen::Index kp = 0;
    a.col(k).tail(n - k - 1).cwiseAbs().maxCoeff(&kp);
    kp += k + 1;
    if (kp != k + 1) {
      a.row(k + 1).swap(a.row(kp));
      a.col(k + 1).swap(a.col(kp));
      result = -result;
    }
    if (a(k + 1, k) == Scalar(0)) return Scalar(0);
    result *= a(k, k + 1);

    if (k + 2 < n) {
      const auto m = n - k - 2;
      const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> tau = a.row(k).tail(m).transpose() / a(k, k + 1);
      const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> pivot_col = a.col(k + 1).tail(m);
      a.bottomRightCorner(m, m).noalias() += tau * pivot_col.transpose();
      a.bottomRightCorner(m, m).noalias() -= pivot_col * tau.transpose();
    }
  }
  return result;
}

/**
 * Perfect matching of {1, ..., 2K} in canonical form: pairs (i_k, j_k) with
 * i_k < j_k and i_1 < i_2 < ... < i_K. Indices are 1-based.
 */
struct Matching {
  std::vector<std::pair<int, int>> pairs;

  int points() const { return 2 * static_cast<int>(pairs.size()); }

  /// The word (i_1, j_1, ..., i_K, j_K).
  std::vector<int> word() const {
    std::vector<int> w;
    w.reserve(2 * pairs.size());
    for (auto [i, j] : pairs) {
      w.push_back(i);
      w.push_back(j);
    }
    return w;
  }

  bool is_canonical() const {
    std::vector<bool> seen(2 * pairs.size() + 1, false);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      auto [i, j] = pairs[k];
      if (i < 1 || j > points() || i >= j) return false;
      if (k > 0 && pairs[k - 1].first >= i) return false;
      if (seen[i] || seen[j]) return false;
      seen[i] = seen[j] = true;
    }
    return true;
  }

  std::string to_string() const {
    std::string s;
    for (auto [i, j] : pairs) s += "(" + std::to_string(i) + "," + std::to_string(j) + ")";
    return s;
  }

  friend bool operator==(const Matching&, const Matching&) = default;
};

/// The matching (1,2)(3,4)...(2K-1,2K).
inline Matching identity_matching(int two_k) {
  if (two_k < 0 || two_k % 2 != 0) throw DomainError("identity_matching: size must be even");
  Matching m;
  for (int i = 1; i < two_k; i += 2) m.pairs.emplace_back(i, i + 1);
  return m;
}

inline constexpr int kMaxEnumeratedPoints = 16;

namespace detail {

inline void extend_matchings(std::vector<bool>& used, Matching& partial, std::vector<Matching>& out) {
  const int n = static_cast<int>(used.size()) - 1;
  int first = 1;
  while (first <= n && used[first]) ++first;
  if (first > n) {
    out.push_back(partial);
    return;
  }
  used[first] = true;
  for (int j = first + 1; j <= n; ++j) {
    if (used[j]) continue;
    used[j] = true;
    partial.pairs.emplace_back(first, j);
    extend_matchings(used, partial, out);
    partial.pairs.pop_back();
    used[j] = false;
  }
  used[first] = false;
}

}  // namespace detail

/// All (2K-1)!! canonical matchings of {1..2K}, in lexicographic order of their words.
inline std::vector<Matching> enumerate_matchings(int two_k) {
  if (two_k < 0 || two_k % 2 != 0) {
    throw DomainError("enumerate_matchings: size must be even, got " + std::to_string(two_k));
  }
  if (two_k > kMaxEnumeratedPoints) {
    throw DomainError("enumerate_matchings: size " + std::to_string(two_k) + " exceeds cap " +
                      std::to_string(kMaxEnumeratedPoints));
  }
  std::vector<Matching> out;
  std::vector<bool> used(two_k + 1, false);
  Matching partial;
  detail::extend_matchings(used, partial, out);
  return out;
}

/// Inversions of the word (i_1, j_1, ..., i_K, j_K) read as a permutation of (1..2K).
inline int inversions(const Matching& m) {
  const auto w = m.word();
  int count = 0;
  for (std::size_t a = 0; a < w.size(); ++a)
    for (std::size_t b = a + 1; b < w.size(); ++b)
      if (w[a] > w[b]) ++count;
  return count;
}

/// sign(pi(sigma)) = (-1)^inversions.
inline int matching_sign(const Matching& m) { return inversions(m) % 2 == 0 ? 1 : -1; }

inline constexpr int kMatchingsPfaffianCap = 12;

/// Pfaffian as the signed sum over perfect matchings; cost (2K-1)!!.
template <typename Scalar>
Scalar pfaffian_matchings(const SkewMatrix<Scalar>& a, int max_dim = kMatchingsPfaffianCap) {
  const int n = static_cast<int>(a.dim());
  if (n > max_dim) {
    throw DomainError("pfaffian_matchings: dimension " + std::to_string(n) + " exceeds cap " +
                      std::to_string(max_dim));
  }
  Scalar total(0);
  for (const auto& m : enumerate_matchings(n)) {
    Scalar term(matching_sign(m));
    for (auto [i, j] : m.pairs) term *= a(i - 1, j - 1);
    total += term;
  }
  return total;
}

}  // namespace ginoe
