#include "bastion/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bastion {

namespace {

double off_diagonal_norm(const Mat& A) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      if (i != j) s += A(i, j) * A(i, j);
  return std::sqrt(s);
}

}  // namespace

SymEigen jacobi_sym_eigen(const Mat& M) {
  if (M.rows() != M.cols() || M.rows() == 0)
    throw DimensionError("jacobi_sym_eigen: matrix must be square and non-empty");
  if (!all_finite(M)) throw Error("jacobi_sym_eigen: non-finite input");
  const double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-9) throw Error("jacobi_sym_eigen: matrix is not symmetric (max |M - M^T| = " +
                               std::to_string(asym) + ")");

  const Eigen::Index n = M.rows();
  Mat A = 0.5 * (M + M.transpose());
  Mat V = Mat::Identity(n, n);

  constexpr double kOffTol = 1e-12;
  constexpr int kMaxSweeps = 64;
  double prev_off = std::numeric_limits<double>::infinity();
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    const double off = off_diagonal_norm(A);
    if (off < kOffTol) break;
    // Rounding floor: once a sweep stops shrinking the off-norm we are at
    // machine precision for this scale, even if above the absolute tol.
    if (off >= prev_off && off < 1e-9 * (1.0 + A.norm())) break;
    if (sweep == kMaxSweeps - 1)
      throw Error("jacobi_sym_eigen: no convergence after max sweeps");
    prev_off = off;

    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = A(p, q);
        if (apq == 0.0) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
        const double t_abs = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double t = theta >= 0.0 ? t_abs : -t_abs;
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = A(k, p), akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = A(p, k), aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
        A(p, q) = 0.0;
        A(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = V(k, p), vkq = V(k, q);
          V(k, p) = c * vkp - s * vkq;
          V(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  SymEigen out;
  out.values = A.diagonal();
  out.vectors = V;
  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return out.values[a] < out.values[b]; });
  Vec vals(n);
  Mat vecs(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    vals[i] = out.values[order[static_cast<size_t>(i)]];
    vecs.col(i) = out.vectors.col(order[static_cast<size_t>(i)]);
  }
  out.values = std::move(vals);
  out.vectors = std::move(vecs);
  return out;
}

double sym_min_eig(const Mat& M) { return jacobi_sym_eigen(M).values[0]; }

double radical_inverse(unsigned base, unsigned long long index) {
  if (base < 2) throw Error("radical_inverse: base must be >= 2");
  double result = 0.0;
  double digit_weight = 1.0 / static_cast<double>(base);
  while (index > 0) {
    result += static_cast<double>(index % base) * digit_weight;
    index /= base;
    digit_weight /= static_cast<double>(base);
  }
  return result;
}

Vec rk4_step(const std::function<Vec(double, const Vec&)>& f, double t, const Vec& y,
             double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error("rk4_step: dt must be positive and finite");
  const auto stage = [&](int idx, double ts, const Vec& ys) {
    Vec k = f(ts, ys);
    if (k.size() != y.size())
      throw DimensionError("rk4_step: derivative size mismatch");
    if (!all_finite(k))
      throw IntegrationBlowupError(t, idx, "rk4_step: non-finite derivative at stage " +
                                               std::to_string(idx));
    return k;
  };
  const Vec k1 = stage(1, t, y);
  const Vec k2 = stage(2, t + 0.5 * dt, y + (0.5 * dt) * k1);
  const Vec k3 = stage(3, t + 0.5 * dt, y + (0.5 * dt) * k2);
  const Vec k4 = stage(4, t + dt, y + dt * k3);
  Vec out = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!all_finite(out))
    throw IntegrationBlowupError(t, 4, "rk4_step: non-finite state after step");
  return out;
}

}  // namespace bastion
