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
 * @file heat.hpp
 * @brief Heat kernel of d/dt - (1/8) Laplacian, the time-dependent Pfaffian
 *        density, finite-difference residuals, Gaussian solutions built on
 *        orthogonal projectors, and small-time pairings with test functions.
 */

#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ginoe/errors.hpp"
#include "ginoe/group_integrals.hpp"
#include "ginoe/kernel.hpp"
#include "ginoe/pfaffian.hpp"
#include "ginoe/quadrature.hpp"

namespace ginoe {

/// g_t(x) = (pi t / 2)^{-1/2} e^{-2 x^2 / t}.
inline double g(double t, double x) {
  if (!(t > 0.0)) throw DomainError("g: t must be positive");
  return std::exp(-2.0 * x * x / t) / std::sqrt(0.5 * std::numbers::pi * t);
}

/// d/dx g_t(x).
inline double g_prime(double t, double x) { return -4.0 * x / t * g(t, x); }

/// (C_K / K!) Pf[g'_{2t}(y_i - y_j)]; antisymmetric in the points.
inline double rho_tilde_t(std::span<const double> y, double t) {
  detail::require_even_count(y.size(), "rho_tilde_t");
  detail::require_finite_points(y, "rho_tilde_t");
  if (!(t > 0.0)) throw DomainError("rho_tilde_t: t must be positive");
  const auto a = SkewRealMatrix::from_upper(static_cast<Eigen::Index>(y.size()),
                                            [&](auto i, auto j) { return g_prime(2.0 * t, y[i] - y[j]); });
  const int k = static_cast<int>(y.size());
  return C_K(k) / std::tgamma(k + 1.0) * pfaffian(a);
}

using SpaceTimeFunction = std::function<double(std::span<const double>, double)>;

/**
 * Central-difference value of (d/dt - diffusivity * Laplacian) f at (x, t)
 * with the same step h in time and space.
 */
inline double heat_residual(const SpaceTimeFunction& f, std::span<const double> x, double t, double h,
                            double diffusivity = 0.125) {
  if (!(t > h) || !(h > 0.0)) throw DomainError("heat_residual: need 0 < h < t");
  std::vector<double> y(x.begin(), x.end());
  const double f0 = f(y, t);
  const double dt = (f(y, t + h) - f(y, t - h)) / (2.0 * h);
  double lap = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double keep = y[k];
    y[k] = keep + h;
    const double up = f(y, t);
    y[k] = keep - h;
    const double down = f(y, t);
    y[k] = keep;
    lap += (up - 2.0 * f0 + down) / (h * h);
  }
  return dt - diffusivity * lap;
}

/// Residual of the 1/8-Laplacian heat operator on rho_tilde_t.
inline double heat_residual(std::span<const double> x, double t, double h) {
  return heat_residual([](std::span<const double> y, double s) { return rho_tilde_t(y, s); }, x, t, h);
}

/// log2(|r(h)| / |r(h/2)|).
inline double convergence_order(double residual_h, double residual_half) {
  return std::log2(std::abs(residual_h) / std::abs(residual_half));
}

/// t^{-3/2} V(x) I_t(x) for two points, with I_t from circle quadrature.
inline double integral_solution_K2(std::span<const double> x, double t) {
  if (x.size() != 2) throw DomainError("integral_solution_K2: exactly two points");
  return std::pow(t, -1.5) * vandermonde(x) * I_t_quadrature_K2(x[0], x[1], t);
}

/// Orthogonal projector on R^n: P^2 = P, P^T = P to 1e-12.
class OrthogonalProjector {
 public:
  explicit OrthogonalProjector(RealMatrix p) : p_(std::move(p)) {
    const auto n = p_.rows();
    if (p_.cols() != n || n < 1) throw DomainError("OrthogonalProjector: matrix must be square");
    detail::require_finite(p_, "OrthogonalProjector");
    const double sym = (p_ - p_.transpose()).cwiseAbs().maxCoeff();
    const double idem = (p_ * p_ - p_).cwiseAbs().maxCoeff();
    if (sym > kTolerance || idem > kTolerance) {
      throw DomainError("OrthogonalProjector: not an orthogonal projector (defect " + std::to_string(std::max(sym, idem)) +
                        ")");
    }
    rank_ = static_cast<int>(std::lround(p_.trace()));
  }

  static constexpr double kTolerance = 1e-12;

  const RealMatrix& matrix() const { return p_; }
  int rank() const { return rank_; }
  Eigen::Index dim() const { return p_.rows(); }

 private:
  RealMatrix p_;
  int rank_ = 0;
};

/// Phi_t(x | P) = (2 pi t)^{-rank/2} exp(-<x, P x> / (2t)).
inline double projector_solution(const OrthogonalProjector& p, double t, std::span<const double> x) {
  if (!(t > 0.0)) throw DomainError("projector_solution: t must be positive");
  if (static_cast<Eigen::Index>(x.size()) != p.dim()) throw DomainError("projector_solution: size mismatch");
  const Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
  const double q = v.dot(p.matrix() * v);
  return std::pow(2.0 * std::numbers::pi * t, -0.5 * p.rank()) * std::exp(-q / (2.0 * t));
}

/// Residual of d/dt - (1/2) Laplacian on Phi_t(. | P).
inline double projector_residual(const OrthogonalProjector& p, std::span<const double> x, double t, double h) {
  return heat_residual([&](std::span<const double> y, double s) { return projector_solution(p, s, y); }, x, t, h, 0.5);
}

/// Orthonormal basis of K x K Hermitian matrices under <A, B> = Tr(AB).
inline std::vector<ComplexMatrix> hermitian_basis(int k) {
  std::vector<ComplexMatrix> basis;
  const double r = (1.0 / std::numbers::sqrt2);
  for (int a = 0; a < k; ++a) {
    ComplexMatrix e = ComplexMatrix::Zero(k, k);
    e(a, a) = 1.0;
    basis.push_back(e);
    for (int b = a + 1; b < k; ++b) {
      ComplexMatrix s = ComplexMatrix::Zero(k, k);
      s(a, b) = s(b, a) = r;
      basis.push_back(s);
      ComplexMatrix q = ComplexMatrix::Zero(k, k);
      q(a, b) = cdouble(0.0, r);
      q(b, a) = cdouble(0.0, -r);
      basis.push_back(q);
    }
  }
  return basis;
}

/// P_W(H) = H - W H^T W^+ on Hermitian matrices.
inline ComplexMatrix skew_reflection_complement(const SkewUnitary& w, const ComplexMatrix& h) {
  return h - w.matrix() * h.transpose() * w.matrix().adjoint();
}

/// Matrix of P_W / 2 in the orthonormal Hermitian basis; an orthogonal projector of rank (K^2 + K)/2.
inline RealMatrix skew_projector_matrix(const SkewUnitary& w) {
  const auto basis = hermitian_basis(static_cast<int>(w.dim()));
  const auto n = static_cast<Eigen::Index>(basis.size());
  RealMatrix p(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const ComplexMatrix img = 0.5 * skew_reflection_complement(w, basis[j]);
    for (Eigen::Index i = 0; i < n; ++i) p(i, j) = (basis[i] * img).trace().real();
  }
  return p;
}

/// Smooth rapidly decaying test function on R^2 with the box it lives in.
struct TestFunction {
  std::string name;
  std::function<double(double, double)> fn;
  double half_width = 8.0;  // [-half_width, half_width]^2 contains the support up to 1e-12
};

/// Odd in x2 - x1 about the diagonal: (x2 - x1) e^{-(x1^2 + x2^2)/2}. Diagonal derivative integral sqrt(pi).
inline TestFunction odd_test_function() {
  return {"odd", [](double a, double b) { return (b - a) * std::exp(-0.5 * (a * a + b * b)); }, 9.0};
}

/// Symmetric bump e^{-(x1^2 + x2^2)/2}.
inline TestFunction even_test_function() {
  return {"even", [](double a, double b) { return std::exp(-0.5 * (a * a + b * b)); }, 9.0};
}

/// Narrow bump centred at (-2, 2), about e^{-32} on the diagonal.
inline TestFunction off_diagonal_test_function() {
  return {"off_diagonal",
          [](double a, double b) { return std::exp(-4.0 * ((a + 2.0) * (a + 2.0) + (b - 2.0) * (b - 2.0))); }, 6.0};
}

struct PairingRow {
  double t;
  double pairing;
};

struct InitialConditionReport {
  std::string test_function;
  std::vector<PairingRow> rows;
  double extrapolated = 0.0;     // Richardson from the two smallest t, assuming O(t) error
  double delta_prime_value = 0.0;  // <delta'(x2 - x1), phi> = -int d/du phi(v, v + u)|_{u=0} dv
  double measured_constant = 0.0;  // extrapolated / delta_prime_value, 0 when the latter vanishes
};

namespace detail {

inline void require_decay(const TestFunction& f) {
  const double l = f.half_width;
  double edge = 0.0, peak = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const double s = -l + 2.0 * l * i / 200.0;
    edge = std::max({edge, std::abs(f.fn(s, l)), std::abs(f.fn(s, -l)), std::abs(f.fn(l, s)), std::abs(f.fn(-l, s))});
    for (int j = 0; j <= 200; j += 4) peak = std::max(peak, std::abs(f.fn(s, -l + 2.0 * l * j / 200.0)));
  }
  if (edge > 1e-12 * std::max(peak, 1.0)) {
    throw DomainError("initial_condition_check: test function '" + f.name + "' does not decay inside its box");
  }
}

}  // namespace detail

/// int int rho_tilde_t(x1, x2) phi(x1, x2) dx1 dx2 in coordinates v = x1, u = x2 - x1.
inline double pairing_K2(const TestFunction& f, double t) {
  const double l = f.half_width;
  const GaussRule rule = gauss_legendre(8);
  const double width = std::sqrt(t);
  const int u_panels = static_cast<int>(std::ceil(4.0 * l / (0.5 * width)));
  const int v_panels = 96;
  const double c = C_K(2) / 2.0;
  auto inner = [&](double v) {
    return integrate_panels([&](double u) { return c * g_prime(2.0 * t, -u) * f.fn(v, v + u); }, -2.0 * l, 2.0 * l, u_panels,
                            rule);
  };
  return integrate_panels(inner, -l, l, v_panels, rule);
}

/// <delta'(x2 - x1), phi> by quadrature of a central difference across the diagonal.
inline double delta_prime_pairing(const TestFunction& f) {
  const double h = 1e-4;
  const GaussRule rule = gauss_legendre(8);
  return -integrate_panels([&](double v) { return (f.fn(v, v + h) - f.fn(v, v - h)) / (2.0 * h); }, -f.half_width,
                           f.half_width, 96, rule);
}

/**
 * Pairings of rho_tilde_t with phi along a decreasing time sequence (two
 * points, so no tensorization), a Richardson limit and the constant
 * relating it to the delta' pairing.
 */
inline InitialConditionReport initial_condition_check(const TestFunction& f, std::span<const double> t_sequence) {
  if (t_sequence.size() < 2) throw DomainError("initial_condition_check: need at least two times");
  for (std::size_t i = 0; i < t_sequence.size(); ++i) {
    if (!(t_sequence[i] > 0.0)) throw DomainError("initial_condition_check: times must be positive");
    if (i > 0 && !(t_sequence[i] < t_sequence[i - 1])) {
      throw DomainError("initial_condition_check: times must decrease");
    }
  }
  detail::require_decay(f);
  InitialConditionReport rep;
  rep.test_function = f.name;
  for (double t : t_sequence) rep.rows.push_back({t, pairing_K2(f, t)});
  const auto& a = rep.rows[rep.rows.size() - 2];
  const auto& b = rep.rows.back();
  rep.extrapolated = (a.t * b.pairing - b.t * a.pairing) / (a.t - b.t);
  rep.delta_prime_value = delta_prime_pairing(f);
  rep.measured_constant = std::abs(rep.delta_prime_value) > 1e-10 ? rep.extrapolated / rep.delta_prime_value : 0.0;
  return rep;
}

/**
 * Solution of the 1/8-Laplacian heat equation from the initial datum
 * -(C_2/2) delta'(x2 - x1), by quadrature of the two-fold convolution with g_t.
 */
inline double convolution_solution_K2(std::span<const double> y, double t) {
  if (y.size() != 2) throw DomainError("convolution_solution_K2: exactly two points");
  if (!(t > 0.0)) throw DomainError("convolution_solution_K2: t must be positive");
  const double w = std::sqrt(t);
  const double lo = std::min(y[0], y[1]) - 12.0 * w;
  const double hi = std::max(y[0], y[1]) + 12.0 * w;
  const GaussRule rule = gauss_legendre(10);
  const int panels = static_cast<int>(std::ceil((hi - lo) / (0.25 * w)));
  const double integral =
      integrate_panels([&](double x) { return g(t, y[0] - x) * g_prime(t, y[1] - x); }, lo, hi, panels, rule);
  return -0.5 * C_K(2) * integral;
}

}  // namespace ginoe
