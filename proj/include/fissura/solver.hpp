#pragma once

#include <string>
#include <vector>

#include "fissura/energy.hpp"
#include "fissura/grid.hpp"

namespace fissura {

enum class LinearSolver {
  Direct,  // sparse Cholesky of the reduced Newton system; PCG if factorization fails
  Cg,      // Jacobi-preconditioned conjugate gradients
};

struct SolveOptions {
  // Newton stops when ||grad_u E|| <= tol_grad * max(1, ||grad_u E(u0)||).
  double tol_grad = 1e-8;
  double tol_energy = 1e-10;  // relative energy change between outer iterations
  double tol_dv = 1e-6;       // ||v_new - v_old||_inf between outer iterations
  int max_outer = 200;
  int max_newton = 50;
  double cg_tol = 1e-10;  // relative residual of the linear solves
  int cg_max_iter = 20000;
  double ls_factor = 0.5;
  double ls_sufficient_decrease = 1e-4;
  int ls_max_steps = 40;
  LinearSolver u_solver = LinearSolver::Direct;

  void validate() const;  // throws std::invalid_argument
};

struct UStepReport {
  int newton_iterations = 0;
  int cg_iterations = 0;
  int factorizations = 0;
  double initial_residual = 0.0;
  double residual = 0.0;  // ||grad_u E|| over free dofs at return
  bool converged = false;
  bool stagnated = false;    // line search failed; best iterate returned
  bool cg_breakdown = false; // fell back to a preconditioned steepest-descent step
};

struct UStepResult {
  Field u;
  UStepReport report;
};

struct VStepReport {
  int cg_iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

struct VStepResult {
  Field v;
  VStepReport report;
};

// Minimizes E(., v) over displacements matching the constraints. The energy
// never increases relative to u0 (with constrained values imposed).
UStepResult minimize_u(const Field& v, const Field& u0, const ModelParams& p, const Constraints& bc,
                       const SolveOptions& opt);

// Exact minimizer of the quadratic E(u, .). Nodes flagged in `pinned` keep the
// value they have in v_start (used for prescribed notches); v_start also seeds
// the iteration.
VStepResult minimize_v(const Field& u, const Field& v_start, const ModelParams& p, const SolveOptions& opt,
                       const std::vector<unsigned char>& pinned = {});

// Gradients of total_energy with respect to nodal u and v (no constraints applied).
std::vector<double> energy_gradient_u(const Field& u, const Field& v, const ModelParams& p);
std::vector<double> energy_gradient_v(const Field& u, const Field& v, const ModelParams& p);

// Residual A v - b of the phase-field optimality system, relative to ||b||.
double phase_equation_residual(const Field& u, const Field& v, const ModelParams& p,
                               const std::vector<unsigned char>& pinned = {});

struct HalfStep {
  std::string kind;  // "init", "u" or "v"
  int outer = 0;
  EnergyBreakdown energy;
};

struct SolveHistory {
  std::vector<HalfStep> steps;
  std::vector<EnergyBreakdown> outer_energy;  // after each outer iteration; [0] is the initial state
  std::vector<double> u_residuals;
  std::vector<double> dv_inf;
  int outer_iterations = 0;
  bool converged = false;
  bool u_step_failed = false;  // some u-step stagnated or hit max_newton
  bool v_step_failed = false;  // some v-step CG did not converge
  bool cg_breakdown = false;

  // Largest energy increase between consecutive half-steps, relative to
  // max(|E|, 1e-300); <= 0 means monotone.
  double max_relative_increase() const;
};

struct AlternateResult {
  Field u;
  Field v;
  SolveHistory history;
};

AlternateResult alternate_minimize(const Field& u0, const Field& v0, const ModelParams& p, const Constraints& bc,
                                   const SolveOptions& opt, const std::vector<unsigned char>& pinned = {});

}  // namespace fissura
