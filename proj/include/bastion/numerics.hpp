#pragma once

/// @file numerics.hpp
/// Dense linear-algebra aliases plus the three numeric kernels the rest of
/// the library builds on: a symmetric eigensolver, trapezoid integration of
/// sampled signals, and a fixed-step RK4 integrator.

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <vector>

#include "bastion/errors.hpp"

namespace bastion {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline bool all_finite(double x) { return std::isfinite(x); }
inline bool all_finite(const Vec& v) { return v.allFinite(); }
inline bool all_finite(const Mat& m) { return m.allFinite(); }

/// Eigendecomposition of a symmetric matrix: M = V * diag(values) * V^T,
/// eigenvalues ascending, V orthonormal columns.
struct SymEigen {
  Vec values;
  Mat vectors;
};

/// Cyclic-Jacobi eigensolver for small symmetric matrices.
/// Validates |M - M^T|_max <= 1e-9, then works on the symmetrized average.
/// Sweeps until the off-diagonal Frobenius norm drops below 1e-12 (with a
/// stagnation guard for matrices whose scale puts that below rounding noise).
SymEigen jacobi_sym_eigen(const Mat& M);

/// Smallest eigenvalue of a symmetric matrix via jacobi_sym_eigen.
double sym_min_eig(const Mat& M);

/// Base-b radical inverse (van der Corput); Halton coordinates are
/// radical_inverse(base_d, i) across prime bases.
double radical_inverse(unsigned base, unsigned long long index);

namespace detail {
template <class V>
V trapezoid_impl(std::span<const double> t, std::span<const V> v) {
  if (t.size() != v.size())
    throw DimensionError("trapezoid_accumulate: time/value length mismatch");
  if (t.size() < 2)
    throw InsufficientDataError("trapezoid_accumulate: need at least two samples");
  for (size_t i = 1; i < t.size(); ++i)
    if (!(t[i] > t[i - 1]))
      throw Error("trapezoid_accumulate: times must be strictly increasing");
  if constexpr (!std::is_arithmetic_v<V>) {
    for (size_t i = 1; i < v.size(); ++i)
      if (v[i].rows() != v[0].rows() || v[i].cols() != v[0].cols())
        throw DimensionError("trapezoid_accumulate: sample shape mismatch");
  }
  V acc = 0.5 * (t[1] - t[0]) * (v[0] + v[1]);
  for (size_t i = 2; i < t.size(); ++i) acc += 0.5 * (t[i] - t[i - 1]) * (v[i - 1] + v[i]);
  return acc;
}
}  // namespace detail

/// Trapezoid-rule integral of a sampled signal over its time span.
/// Works for scalar, vector, and matrix samples of consistent shape.
inline double trapezoid_accumulate(std::span<const double> t, std::span<const double> v) {
  return detail::trapezoid_impl(t, v);
}
inline Vec trapezoid_accumulate(std::span<const double> t, std::span<const Vec> v) {
  return detail::trapezoid_impl(t, v);
}
inline Mat trapezoid_accumulate(std::span<const double> t, std::span<const Mat> v) {
  return detail::trapezoid_impl(t, v);
}

/// One classic RK4 step of y' = f(t, y). Every stage derivative and the
/// result are checked for finiteness; a non-finite value raises
/// IntegrationBlowupError carrying t and the offending stage (1..4).
Vec rk4_step(const std::function<Vec(double, const Vec&)>& f, double t, const Vec& y,
             double dt);

}  // namespace bastion
