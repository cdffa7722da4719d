#include "fissura/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fissura {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

std::vector<double> residual(const LinearSystem& system, std::span<const double> x) {
  std::vector<double> r(x.size());
  system.apply(x, r);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = system.rhs[i] - r[i];
  return r;
}

CgResult pcg(const LinearSystem& system, std::span<double> x, double rel_tol, int max_iter) {
  const std::size_t n = x.size();
  if (system.rhs.size() != n) throw std::invalid_argument("pcg: rhs size mismatch");

  std::vector<double> inv_diag(n, 1.0);
  if (!system.diagonal.empty()) {
    for (std::size_t i = 0; i < n; ++i) {
      const double d = system.diagonal[i];
      inv_diag[i] = d > 0.0 ? 1.0 / d : 1.0;
    }
  }

  CgResult res;
  res.rhs_norm = norm2(system.rhs);
  const double target = rel_tol * (res.rhs_norm > 0.0 ? res.rhs_norm : 1.0);

  std::vector<double> r = residual(system, x);
  std::vector<double> z(n), p(n), ap(n);
  res.residual_norm = norm2(r);
  if (res.residual_norm <= target) {
    res.converged = true;
    return res;
  }
  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = dot(r, z);

  for (int it = 1; it <= max_iter; ++it) {
    system.apply(p, ap);
    const double curvature = dot(p, ap);
    if (!(curvature > 0.0)) {
      res.breakdown = true;
      res.iterations = it - 1;
      return res;
    }
    const double alpha = rz / curvature;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    res.iterations = it;
    res.residual_norm = norm2(r);
    if (res.residual_norm <= target) {
      res.converged = true;
      return res;
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  return res;
}

}  // namespace fissura
