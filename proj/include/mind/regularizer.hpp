#pragma once

// Regularization functionals: isotropic TV, squared H1 seminorm and Huber-TV,
// all built on forward differences with Neumann boundary.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "mind/image.hpp"
#include "mind/linalg.hpp"

namespace mind {

enum class RegularizerKind { TV, H1Squared, HuberTV };

inline const char* to_string(RegularizerKind k) {
  switch (k) {
    case RegularizerKind::TV: return "tv";
    case RegularizerKind::H1Squared: return "h1";
    case RegularizerKind::HuberTV: return "huber-tv";
  }
  return "?";
}

inline RegularizerKind regularizer_kind_from_string(const std::string& s) {
  if (s == "tv" || s == "TV") return RegularizerKind::TV;
  if (s == "h1" || s == "H1" || s == "h1-squared") return RegularizerKind::H1Squared;
  if (s == "huber-tv" || s == "huber") return RegularizerKind::HuberTV;
  throw std::invalid_argument("unknown regularizer kind: " + s);
}

class UnsupportedForNonsmooth : public std::logic_error {
 public:
  UnsupportedForNonsmooth() : std::logic_error("gradient is undefined for the nonsmooth TV seminorm") {}
};

struct Regularizer {
  RegularizerKind kind = RegularizerKind::TV;
  double beta = 0.05;  // Huber transition, HuberTV only
  double prox_tol = 1e-6;
  int prox_max_iter = 200;

  void validate() const {
    if (kind == RegularizerKind::HuberTV && !(beta > 0.0))
      throw std::invalid_argument("Regularizer: HuberTV needs beta > 0");
    if (!(prox_tol > 0.0)) throw std::invalid_argument("Regularizer: prox_tol must be > 0");
    if (prox_max_iter < 1) throw std::invalid_argument("Regularizer: prox_max_iter must be >= 1");
  }
  [[nodiscard]] bool smooth() const { return kind != RegularizerKind::TV; }
};

/// Forward differences; the difference leaving the grid is 0 (Neumann).
struct GradientField {
  std::vector<double> dx;  // along columns: v(r, c+1) - v(r, c)
  std::vector<double> dy;  // along rows:    v(r+1, c) - v(r, c)
};

inline void forward_gradient(const ImageGrid& g, std::span<const double> v, std::span<double> dx,
                             std::span<double> dy) {
  for (int r = 0; r < g.height; ++r)
    for (int c = 0; c < g.width; ++c) {
      const std::size_t i = g.index(r, c);
      dx[i] = c + 1 < g.width ? v[i + 1] - v[i] : 0.0;
      dy[i] = r + 1 < g.height ? v[i + g.width] - v[i] : 0.0;
    }
}

inline GradientField gradient_field(const Image& v) {
  GradientField f{std::vector<double>(v.size()), std::vector<double>(v.size())};
  forward_gradient(v.grid(), v.values(), f.dx, f.dy);
  return f;
}

/// Transpose of forward_gradient (minus the discrete divergence).
inline void gradient_transpose(const ImageGrid& g, std::span<const double> px,
                               std::span<const double> py, std::span<double> out) {
  for (int r = 0; r < g.height; ++r)
    for (int c = 0; c < g.width; ++c) {
      const std::size_t i = g.index(r, c);
      double s = 0.0;
      if (c + 1 < g.width) s -= px[i];
      if (c > 0) s += px[i - 1];
      if (r + 1 < g.height) s -= py[i];
      if (r > 0) s += py[i - g.width];
      out[i] = s;
    }
}

/// Neumann graph Laplacian L = grad^T grad.
inline void laplacian(const ImageGrid& g, std::span<const double> v, std::span<double> out) {
  std::vector<double> dx(v.size()), dy(v.size());
  forward_gradient(g, v, dx, dy);
  gradient_transpose(g, dx, dy, out);
}

namespace detail {

// Convex Huber profile with quadratic branch t^2 / beta on t <= beta / 2 and
// linear branch t - beta / 4 beyond; slope 1 is reached at the junction.
inline double huber(double t, double beta) {
  return t <= 0.5 * beta ? t * t / beta : t - 0.25 * beta;
}

// d huber(|g|) / d g, returned as a scale s with gradient s * g.
inline double huber_scale(double t, double beta) {
  return t <= 0.5 * beta ? 2.0 / beta : 1.0 / t;
}

inline std::vector<double> huber_gradient(const ImageGrid& g, std::span<const double> v,
                                          double beta) {
  std::vector<double> dx(v.size()), dy(v.size()), out(v.size());
  forward_gradient(g, v, dx, dy);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double s = huber_scale(std::hypot(dx[i], dy[i]), beta);
    dx[i] *= s;
    dy[i] *= s;
  }
  gradient_transpose(g, dx, dy, out);
  return out;
}

}  // namespace detail

inline double value(const Regularizer& R, const Image& v) {
  const auto f = gradient_field(v);
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double sq = f.dx[i] * f.dx[i] + f.dy[i] * f.dy[i];
    switch (R.kind) {
      case RegularizerKind::TV: s += std::sqrt(sq); break;
      case RegularizerKind::H1Squared: s += 0.5 * sq; break;
      case RegularizerKind::HuberTV: s += detail::huber(std::sqrt(sq), R.beta); break;
    }
  }
  return s;
}

/// Gradient of a smooth regularizer: L v for H1Squared, grad^T psi(grad v) for HuberTV.
inline Image gradient(const Regularizer& R, const Image& v) {
  switch (R.kind) {
    case RegularizerKind::TV: throw UnsupportedForNonsmooth();
    case RegularizerKind::H1Squared: {
      Image out(v.grid());
      laplacian(v.grid(), v.values(), out.values());
      return out;
    }
    case RegularizerKind::HuberTV:
      return Image(v.grid(), detail::huber_gradient(v.grid(), v.values(), R.beta));
  }
  throw std::logic_error("unreachable");
}

/// Generalized Hessian of a smooth regularizer at v applied to u.
inline void hessian_apply(const Regularizer& R, const ImageGrid& g, std::span<const double> v,
                          std::span<const double> u, std::span<double> out) {
  if (R.kind == RegularizerKind::TV) throw UnsupportedForNonsmooth();
  if (R.kind == RegularizerKind::H1Squared) {
    laplacian(g, u, out);
    return;
  }
  std::vector<double> gx(v.size()), gy(v.size()), ux(v.size()), uy(v.size());
  forward_gradient(g, v, gx, gy);
  forward_gradient(g, u, ux, uy);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double t = std::hypot(gx[i], gy[i]);
    if (t <= 0.5 * R.beta) {
      ux[i] *= 2.0 / R.beta;
      uy[i] *= 2.0 / R.beta;
    } else {
      // (I - n n^T) / t with n = g / t
      const double nx = gx[i] / t, ny = gy[i] / t;
      const double proj = nx * ux[i] + ny * uy[i];
      ux[i] = (ux[i] - proj * nx) / t;
      uy[i] = (uy[i] - proj * ny) / t;
    }
  }
  gradient_transpose(g, ux, uy, out);
}

/// Diagonal of the generalized Hessian (used as a Jacobi preconditioner).
inline std::vector<double> hessian_diagonal(const Regularizer& R, const ImageGrid& g,
                                            std::span<const double> v) {
  std::vector<double> w(v.size(), 1.0);  // per-pixel isotropic weight
  if (R.kind == RegularizerKind::HuberTV) {
    std::vector<double> gx(v.size()), gy(v.size());
    forward_gradient(g, v, gx, gy);
    for (std::size_t i = 0; i < v.size(); ++i)
      w[i] = detail::huber_scale(std::hypot(gx[i], gy[i]), R.beta);
  }
  std::vector<double> d(v.size(), 0.0);
  for (int r = 0; r < g.height; ++r)
    for (int c = 0; c < g.width; ++c) {
      const std::size_t i = g.index(r, c);
      if (c + 1 < g.width) {
        d[i] += w[i];
        d[i + 1] += w[i];
      }
      if (r + 1 < g.height) {
        d[i] += w[i];
        d[i + g.width] += w[i];
      }
    }
  return d;
}

/// Warm-start storage carried between successive prox calls on one grid.
struct ProxState {
  std::vector<double> dual;    // TV: 2n dual field
  std::vector<double> primal;  // H1Squared / HuberTV: previous solution
};

struct ProxResult {
  Image x;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

// Dual projected gradient (accelerated) for argmin ||x-v||^2/(2 tau) + TV(x):
// x = v - tau grad^T p with |p_i| <= 1, dual step 1/(8 tau).
inline ProxResult prox_tv(const Regularizer& R, const Image& v, double tau, ProxState* state) {
  const ImageGrid& g = v.grid();
  const std::size_t n = v.size();
  std::vector<double> p(2 * n, 0.0);
  if (state && state->dual.size() == 2 * n) p = state->dual;
  std::vector<double> q = p, p_prev(2 * n), x(n), dx(n), dy(n), gt(n);
  const double step = 1.0 / (8.0 * tau);
  double t = 1.0;
  ProxResult res;
  auto primal_from = [&](const std::vector<double>& d) {
    gradient_transpose(g, std::span<const double>(d.data(), n),
                       std::span<const double>(d.data() + n, n), gt);
    for (std::size_t i = 0; i < n; ++i) x[i] = v[i] - tau * gt[i];
  };
  for (int it = 1; it <= R.prox_max_iter; ++it) {
    primal_from(q);
    forward_gradient(g, x, dx, dy);
    p_prev = p;
    double change = 0.0, mag = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double px = q[i] + step * dx[i], py = q[n + i] + step * dy[i];
      const double m = std::hypot(px, py);
      if (m > 1.0) {
        px /= m;
        py /= m;
      }
      p[i] = px;
      p[n + i] = py;
      change += (px - p_prev[i]) * (px - p_prev[i]) + (py - p_prev[n + i]) * (py - p_prev[n + i]);
      mag += px * px + py * py;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    for (std::size_t i = 0; i < 2 * n; ++i) q[i] = p[i] + ((t - 1.0) / t_next) * (p[i] - p_prev[i]);
    t = t_next;
    res.iterations = it;
    if (change <= R.prox_tol * R.prox_tol * mag) {
      res.converged = true;
      break;
    }
  }
  primal_from(p);
  if (state) state->dual = p;
  res.x = Image(g, x);
  return res;
}

inline ProxResult prox_h1(const Regularizer& R, const Image& v, double tau, ProxState* state) {
  const ImageGrid& g = v.grid();
  std::vector<double> x(v.data());
  if (state && state->primal.size() == v.size()) x = state->primal;
  auto apply = [&](std::span<const double> u, std::span<double> out) {
    laplacian(g, u, out);
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] + tau * out[i];
  };
  // The system is solved to near machine precision; prox_tol does not loosen it.
  const auto cg = linalg::conjugate_gradient(apply, v.values(), x, std::min(R.prox_tol, 1e-12),
                                             10 * R.prox_max_iter);
  if (state) state->primal = x;
  return ProxResult{Image(g, std::move(x)), cg.iterations, cg.converged};
}

// Accelerated gradient on the strongly convex smooth objective
// ||x - v||^2 / (2 tau) + HuberTV(x); mu = 1/tau, L <= 1/tau + 16/beta.
inline ProxResult prox_huber(const Regularizer& R, const Image& v, double tau, ProxState* state) {
  const ImageGrid& g = v.grid();
  const std::size_t n = v.size();
  std::vector<double> x(v.data());
  if (state && state->primal.size() == n) x = state->primal;
  std::vector<double> y = x, x_prev(n);
  const double mu = 1.0 / tau, L = mu + 16.0 / R.beta;
  const double kappa = L / mu;
  const double momentum = (std::sqrt(kappa) - 1.0) / (std::sqrt(kappa) + 1.0);
  ProxResult res;
  for (int it = 1; it <= R.prox_max_iter; ++it) {
    const auto hg = huber_gradient(g, y, R.beta);
    x_prev = x;
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] - ((y[i] - v[i]) * mu + hg[i]) / L;
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + momentum * (x[i] - x_prev[i]);
    res.iterations = it;
    const double change = linalg::distance(x, x_prev), mag = linalg::norm2(x);
    if (change <= R.prox_tol * std::max(mag, 1e-300)) {
      res.converged = true;
      break;
    }
  }
  if (state) state->primal = x;
  res.x = Image(g, std::move(x));
  return res;
}

}  // namespace detail

/// argmin_x ||x - v||^2 / (2 tau) + R(x).
inline ProxResult prox(const Regularizer& R, const Image& v, double tau, ProxState* state = nullptr) {
  if (!(tau > 0.0)) throw std::invalid_argument("prox: tau must be > 0");
  R.validate();
  switch (R.kind) {
    case RegularizerKind::TV: return detail::prox_tv(R, v, tau, state);
    case RegularizerKind::H1Squared: return detail::prox_h1(R, v, tau, state);
    case RegularizerKind::HuberTV: return detail::prox_huber(R, v, tau, state);
  }
  throw std::logic_error("unreachable");
}

}  // namespace mind
