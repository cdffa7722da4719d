#pragma once

#include <functional>
#include <span>
#include <vector>

namespace fissura {

// y = A x for a matrix-free symmetric operator.
using LinearOperator = std::function<void(std::span<const double> x, std::span<double> y)>;

struct LinearSystem {
  LinearOperator apply;
  std::vector<double> rhs;
  std::vector<double> diagonal;  // for Jacobi preconditioning; may be empty
};

struct CgResult {
  int iterations = 0;
  double residual_norm = 0.0;  // final ||b - Ax||
  double rhs_norm = 0.0;
  bool converged = false;
  bool breakdown = false;  // non-positive curvature p·Ap <= 0 encountered
};

// Jacobi-preconditioned conjugate gradients started from x. Converges when
// ||r|| <= rel_tol ||b|| (or ||r|| <= rel_tol when b = 0).
CgResult pcg(const LinearSystem& system, std::span<double> x, double rel_tol, int max_iter);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm_inf(std::span<const double> a);

// Residual b - A x.
std::vector<double> residual(const LinearSystem& system, std::span<const double> x);

}  // namespace fissura
