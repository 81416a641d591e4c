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
 * @file linalg.hpp
 * @brief Dense real and complex kernels: real Schur spectra, determinant
 *        signs and logarithms, complex QR.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ginoe/errors.hpp"

namespace ginoe {

using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using cdouble = std::complex<double>;

/// a ± ib with b > 0.
struct ConjugatePair {
  double re;
  double im;
};

/// Eigenvalues of a real matrix, split by the block structure of its real Schur form.
struct Spectrum {
  std::vector<double> real_eigenvalues;  // ascending
  std::vector<ConjugatePair> complex_pairs;

  std::size_t dimension() const { return real_eigenvalues.size() + 2 * complex_pairs.size(); }

  double eigenvalue_sum() const {
    double s = 0.0;
    for (double x : real_eigenvalues) s += x;
    for (const auto& p : complex_pairs) s += 2.0 * p.re;
    return s;
  }

  /// Number of real eigenvalues strictly below x.
  std::size_t count_below(double x) const {
    return static_cast<std::size_t>(
        std::lower_bound(real_eigenvalues.begin(), real_eigenvalues.end(), x) -
        real_eigenvalues.begin());
  }
};

struct SchurOptions {
  /// Total QR sweep budget is sweeps_per_row * n.
  int sweeps_per_row = 30;
};

namespace detail {

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* who) {
  if (!m.allFinite()) throw DomainError(std::string(who) + ": matrix has non-finite entries");
}

}  // namespace detail

/**
 * Spectrum of a real square matrix from its quasi-triangular real Schur form.
 *
 * 1x1 diagonal blocks are real eigenvalues, 2x2 blocks are conjugate pairs.
 * The classification is read off the block structure only; no threshold on
 * imaginary parts is involved.
 */
inline Spectrum real_schur(const RealMatrix& m, const SchurOptions& opts = {}) {
  const Eigen::Index n = m.rows();
  if (n < 1 || m.cols() != n) throw DomainError("real_schur: matrix must be square with n >= 1");
  detail::require_finite(m, "real_schur");

  Spectrum spec;
  if (n == 1) {
    spec.real_eigenvalues.push_back(m(0, 0));
    return spec;
  }

  Eigen::RealSchur<RealMatrix> schur(n);
  schur.setMaxIterations(static_cast<Eigen::Index>(opts.sweeps_per_row) * n);
  schur.compute(m, /*computeU=*/false);
  if (schur.info() != Eigen::Success) {
    throw ConvergenceError("real_schur: QR iteration did not converge within " +
                           std::to_string(opts.sweeps_per_row * n) + " sweeps");
  }

  const RealMatrix& t = schur.matrixT();
  Eigen::Index i = 0;
  while (i < n) {
    if (i + 1 < n && t(i + 1, i) != 0.0) {
      // Eigen splits 2x2 blocks with real eigenvalues, so the discriminant is negative here.
      const double p = 0.5 * (t(i, i) - t(i + 1, i + 1));
      const double q = p * p + t(i, i + 1) * t(i + 1, i);
      const double re = 0.5 * (t(i, i) + t(i + 1, i + 1));
      spec.complex_pairs.push_back({re, std::sqrt(std::max(-q, 0.0))});
      i += 2;
    } else {
      spec.real_eigenvalues.push_back(t(i, i));
      i += 1;
    }
  }
  std::sort(spec.real_eigenvalues.begin(), spec.real_eigenvalues.end());
  return spec;
}

/// Relative pivot threshold below which a determinant is reported as zero.
inline constexpr double kSingularPivotTolerance = 1e-13;

/// sign(det) and log|det| from one pivoted elimination.
struct LogDet {
  int sign = 0;  // -1, 0 or +1
  double log_abs = -std::numeric_limits<double>::infinity();
};

/**
 * Gaussian elimination with partial pivoting, tracking the parity of row
 * swaps and the signs of the pivots. A pivot smaller than
 * kSingularPivotTolerance * max|entry| yields sign 0.
 */
inline LogDet log_det(RealMatrix a) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw DomainError("log_det: matrix must be square");
  detail::require_finite(a, "log_det");
  LogDet out;
  if (n == 0) return {1, 0.0};

  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return out;
  const double tol = kSingularPivotTolerance * scale;

  int sign = 1;
  double log_abs = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index piv = k;
    a.col(k).tail(n - k).cwiseAbs().maxCoeff(&piv);
    piv += k;
    if (std::abs(a(piv, k)) < tol) return out;
    if (piv != k) {
      a.row(k).swap(a.row(piv));
      sign = -sign;
    }
    const double p = a(k, k);
    if (p < 0) sign = -sign;
    log_abs += std::log(std::abs(p));
    if (k + 1 < n) {
      a.col(k).tail(n - k - 1) /= p;
      a.bottomRightCorner(n - k - 1, n - k - 1).noalias() -=
          a.col(k).tail(n - k - 1) * a.row(k).tail(n - k - 1);
    }
  }
  out.sign = sign;
  out.log_abs = log_abs;
  return out;
}

/// Exact sign of det(m); 0 only when a pivot falls below the singularity tolerance.
inline int sign_det(const RealMatrix& m) { return log_det(m).sign; }

/// m - x I.
inline RealMatrix shifted(const RealMatrix& m, double x) {
  RealMatrix out = m;
  out.diagonal().array() -= x;
  return out;
}

struct ComplexQR {
  ComplexMatrix q;
  ComplexMatrix r;
};

/// m = QR with Q unitary and R upper triangular. Throws on rank deficiency.
inline ComplexQR complex_qr(const ComplexMatrix& m) {
  const Eigen::Index n = m.rows();
  if (n < 1 || m.cols() != n) throw DomainError("complex_qr: matrix must be square with n >= 1");
  detail::require_finite(m, "complex_qr");
  Eigen::HouseholderQR<ComplexMatrix> qr(m);
  ComplexQR out;
  out.r = qr.matrixQR().triangularView<Eigen::Upper>();
  out.q = qr.householderQ() * ComplexMatrix::Identity(n, n);
  const double scale = m.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(std::abs(out.r(i, i)) > kSingularPivotTolerance * scale * static_cast<double>(n))) {
      throw SingularMatrixError("complex_qr: matrix is rank deficient (|R(" + std::to_string(i) +
                                "," + std::to_string(i) + ")| below tolerance)");
    }
  }
  return out;
}

}  // namespace ginoe
