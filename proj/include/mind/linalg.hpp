#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace mind::linalg {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

inline double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

struct CGResult {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

using LinearMap = std::function<void(std::span<const double>, std::span<double>)>;

/// Preconditioned conjugate gradients for a symmetric positive (semi)definite
/// operator. `x` holds the initial guess on entry. Stops at
/// ||b - A x|| <= tol * ||b||. An empty `inv_diag` means no preconditioner.
inline CGResult conjugate_gradient(const LinearMap& apply, std::span<const double> b,
                                   std::span<double> x, double tol, int max_iter,
                                   std::span<const double> inv_diag = {}) {
  const std::size_t n = b.size();
  std::vector<double> r(n), z(n), p(n), ap(n);
  apply(x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  const double bnorm = norm2(b);
  CGResult res;
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    res.converged = true;
    return res;
  }
  auto precondition = [&] {
    if (inv_diag.empty())
      z = r;
    else
      for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  };
  precondition();
  p = z;
  double rz = dot(r, z);
  double rnorm = norm2(r);
  while (rnorm > tol * bnorm && res.iterations < max_iter) {
    apply(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) break;
    const double alpha = rz / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    ++res.iterations;
    rnorm = norm2(r);
    precondition();
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  res.relative_residual = rnorm / bnorm;
  res.converged = rnorm <= tol * bnorm;
  return res;
}

}  // namespace mind::linalg
