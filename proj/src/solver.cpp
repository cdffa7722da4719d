#include "fissura/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include <Eigen/CholmodSupport>
#include <Eigen/SparseCore>

#include "fissura/linalg.hpp"
#include "fissura/parallel.hpp"

namespace fissura {

void SolveOptions::validate() const {
  if (!(tol_grad > 0.0 && tol_energy > 0.0 && tol_dv > 0.0 && cg_tol > 0.0))
    throw std::invalid_argument("solver tolerances must be positive");
  if (max_outer < 1 || max_newton < 1 || cg_max_iter < 1 || ls_max_steps < 1)
    throw std::invalid_argument("solver iteration limits must be positive");
  if (!(ls_factor > 0.0 && ls_factor < 1.0)) throw std::invalid_argument("line-search factor must lie in (0,1)");
  if (!(ls_sufficient_decrease > 0.0 && ls_sufficient_decrease < 1.0))
    throw std::invalid_argument("sufficient-decrease constant must lie in (0,1)");
}

namespace {

constexpr int kElemDofs = 2 * kNodesPerElement;

// Rows of the strain-displacement matrix at one Gauss point, acting on the
// element vector (ux0, uy0, ux1, uy1, ...).
using BRows = std::array<std::array<double, kElemDofs>, 3>;

std::array<BRows, kQuadPoints> strain_rows(const Grid& g) {
  std::array<BRows, kQuadPoints> out{};
  for (int q = 0; q < kQuadPoints; ++q) {
    const QpShape& s = g.qp_shape(q);
    for (int a = 0; a < kNodesPerElement; ++a) {
      out[q][0][2 * a] = s.dndx[a];
      out[q][1][2 * a + 1] = s.dndy[a];
      out[q][2][2 * a] = 0.5 * s.dndy[a];
      out[q][2][2 * a + 1] = 0.5 * s.dndx[a];
    }
  }
  return out;
}

std::array<int, kElemDofs> element_dofs(const Grid& g, int e) {
  const auto nodes = g.element_nodes(e);
  std::array<int, kElemDofs> d{};
  for (int a = 0; a < kNodesPerElement; ++a) {
    d[2 * a] = 2 * nodes[a];
    d[2 * a + 1] = 2 * nodes[a] + 1;
  }
  return d;
}

SymTensor2 strain_from(const BRows& b, const std::array<double, kElemDofs>& ue) {
  double e[3] = {0.0, 0.0, 0.0};
  for (int r = 0; r < 3; ++r)
    for (int k = 0; k < kElemDofs; ++k) e[r] += b[r][k] * ue[k];
  return {e[0], e[1], e[2]};
}

std::array<double, kElemDofs> gather(const std::vector<double>& x, const std::array<int, kElemDofs>& dofs) {
  std::array<double, kElemDofs> out{};
  for (int k = 0; k < kElemDofs; ++k) out[k] = x[dofs[k]];
  return out;
}

// eta + v² at every Gauss point, element-major.
std::vector<double> phase_moduli(const Field& v, const ModelParams& p) {
  const Grid& g = v.grid;
  std::vector<double> m(static_cast<std::size_t>(g.element_count()) * kQuadPoints);
  for_each_element(g, [&](int e) {
    for (int q = 0; q < kQuadPoints; ++q) {
      const double vq = lumped_value_at_qp(v, e, q);
      m[kQuadPoints * e + q] = p.eta + vq * vq;
    }
  });
  return m;
}

// Displacement part of the energy at fixed phase: ∫ ½[m a(e) + b(e)].
class DisplacementProblem {
 public:
  DisplacementProblem(const Grid& g, const ModelParams& p, std::vector<double> moduli)
      : grid_(g), params_(p), moduli_(std::move(moduli)), rows_(strain_rows(g)) {}

  double energy(const std::vector<double>& u) const {
    const int ne = grid_.element_count();
    std::vector<double> parts(ne);
    const double w = grid_.qp_weight();
    for_each_element(grid_, [&](int e) {
      const auto ue = gather(u, element_dofs(grid_, e));
      double s = 0.0;
      for (int q = 0; q < kQuadPoints; ++q) {
        const BulkBrackets b = bulk_brackets(params_, strain_from(rows_[q], ue));
        s += 0.5 * (moduli_[kQuadPoints * e + q] * b.degradable + b.undegradable);
      }
      parts[e] = w * s;
    });
    return pairwise_sum(parts.data(), parts.size());
  }

  std::vector<double> gradient(const std::vector<double>& u) const {
    std::vector<double> g(u.size(), 0.0);
    const double w = grid_.qp_weight();
    for_each_element_colored(grid_, [&](int e) {
      const auto dofs = element_dofs(grid_, e);
      const auto ue = gather(u, dofs);
      std::array<double, kElemDofs> fe{};
      for (int q = 0; q < kQuadPoints; ++q) {
        const BulkTangent t = bulk_tangent(params_, strain_from(rows_[q], ue));
        const double m = moduli_[kQuadPoints * e + q];
        for (int r = 0; r < 3; ++r) {
          const double s = w * (m * t.degradable.grad[r] + t.undegradable.grad[r]);
          for (int k = 0; k < kElemDofs; ++k) fe[k] += rows_[q][r][k] * s;
        }
      }
      for (int k = 0; k < kElemDofs; ++k) g[dofs[k]] += fe[k];
    });
    return g;
  }

  // Element tangent matrices (generalized Hessian) at u.
  void build_tangent(const std::vector<double>& u) {
    const int ne = grid_.element_count();
    ke_.assign(static_cast<std::size_t>(ne) * kElemDofs * kElemDofs, 0.0);
    const double w = grid_.qp_weight();
    for_each_element(grid_, [&](int e) {
      const auto ue = gather(u, element_dofs(grid_, e));
      double* K = &ke_[static_cast<std::size_t>(e) * kElemDofs * kElemDofs];
      for (int q = 0; q < kQuadPoints; ++q) {
        const BulkTangent t = bulk_tangent(params_, strain_from(rows_[q], ue));
        const double m = moduli_[kQuadPoints * e + q];
        double D[9];
        for (int i = 0; i < 9; ++i) D[i] = w * (m * t.degradable.hess[i] + t.undegradable.hess[i]);
        const BRows& B = rows_[q];
        // DB = D * B (3 x 8)
        double DB[3][kElemDofs];
        for (int r = 0; r < 3; ++r)
          for (int k = 0; k < kElemDofs; ++k)
            DB[r][k] = D[3 * r] * B[0][k] + D[3 * r + 1] * B[1][k] + D[3 * r + 2] * B[2][k];
        for (int i = 0; i < kElemDofs; ++i)
          for (int k = 0; k < kElemDofs; ++k)
            K[i * kElemDofs + k] += B[0][i] * DB[0][k] + B[1][i] * DB[1][k] + B[2][i] * DB[2][k];
      }
    });
  }

  void apply_tangent(std::span<const double> x, std::span<double> y) const {
    std::fill(y.begin(), y.end(), 0.0);
    for_each_element_colored(grid_, [&](int e) {
      const auto dofs = element_dofs(grid_, e);
      const double* K = &ke_[static_cast<std::size_t>(e) * kElemDofs * kElemDofs];
      double xe[kElemDofs];
      for (int k = 0; k < kElemDofs; ++k) xe[k] = x[dofs[k]];
      for (int i = 0; i < kElemDofs; ++i) {
        double s = 0.0;
        for (int k = 0; k < kElemDofs; ++k) s += K[i * kElemDofs + k] * xe[k];
        y[dofs[i]] += s;
      }
    });
  }

  // Tangent restricted to free dofs; `index` maps dofs to free indices or -1.
  Eigen::SparseMatrix<double> reduced_tangent(const std::vector<int>& index, int nfree) const {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(ke_.size());
    for (int e = 0; e < grid_.element_count(); ++e) {
      const auto dofs = element_dofs(grid_, e);
      const double* K = &ke_[static_cast<std::size_t>(e) * kElemDofs * kElemDofs];
      for (int i = 0; i < kElemDofs; ++i) {
        const int r = index[dofs[i]];
        if (r < 0) continue;
        for (int k = 0; k < kElemDofs; ++k) {
          const int c = index[dofs[k]];
          if (c >= 0 && c <= r) trip.emplace_back(r, c, K[i * kElemDofs + k]);
        }
      }
    }
    Eigen::SparseMatrix<double> A(nfree, nfree);
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
  }

  std::vector<double> tangent_diagonal() const {
    std::vector<double> d(2 * static_cast<std::size_t>(grid_.node_count()), 0.0);
    for_each_element_colored(grid_, [&](int e) {
      const auto dofs = element_dofs(grid_, e);
      const double* K = &ke_[static_cast<std::size_t>(e) * kElemDofs * kElemDofs];
      for (int i = 0; i < kElemDofs; ++i) d[dofs[i]] += K[i * kElemDofs + i];
    });
    return d;
  }

 private:
  const Grid& grid_;
  const ModelParams& params_;
  std::vector<double> moduli_;
  std::array<BRows, kQuadPoints> rows_;
  std::vector<double> ke_;
};

Constraints unconstrained(std::size_t ndof) {
  Constraints c;
  c.fixed.assign(ndof, 0);
  c.value.assign(ndof, 0.0);
  return c;
}

}  // namespace

UStepResult minimize_u(const Field& v, const Field& u0, const ModelParams& p, const Constraints& bc_in,
                       const SolveOptions& opt) {
  if (u0.components != 2 || v.components != 1) throw std::invalid_argument("minimize_u: bad field shapes");
  if (!(u0.grid == v.grid)) throw std::invalid_argument("minimize_u: fields live on different grids");
  const Grid& g = u0.grid;
  const std::size_t ndof = u0.values.size();
  const Constraints bc = bc_in.fixed.empty() ? unconstrained(ndof) : bc_in;
  if (bc.fixed.size() != ndof) throw std::invalid_argument("minimize_u: constraints do not match the grid");

  UStepResult out{u0, {}};
  bc.impose(out.u);
  std::vector<double>& u = out.u.values;

  DisplacementProblem prob(g, p, phase_moduli(v, p));
  double energy = prob.energy(u);
  std::vector<double> grad = prob.gradient(u);
  bc.zero_fixed(grad);
  double gn = norm2(grad);
  out.report.initial_residual = gn;
  const double scale = std::max(1.0, gn);
  const double target = opt.tol_grad * scale;

  std::vector<int> index(ndof, -1);
  int nfree = 0;
  for (std::size_t k = 0; k < ndof; ++k)
    if (!bc.is_fixed(k)) index[k] = nfree++;
  // Supernodal Cholesky; a failed factorization (tangent not positive definite)
  // switches this solve to PCG.
  using Factorization = Eigen::CholmodSupernodalLLT<Eigen::SparseMatrix<double>, Eigen::Lower>;
  std::unique_ptr<Factorization> chol;
  bool direct = opt.u_solver == LinearSolver::Direct && nfree > 0;

  std::vector<double> delta(ndof), trial(ndof);
  for (int it = 0; it < opt.max_newton && gn > target; ++it) {
    prob.build_tangent(u);

    bool solved = false;
    if (direct) {
      const Eigen::SparseMatrix<double> A = prob.reduced_tangent(index, nfree);
      if (!chol) {
        chol = std::make_unique<Factorization>();
        chol->analyzePattern(A);
      }
      chol->factorize(A);
      ++out.report.factorizations;
      if (chol->info() == Eigen::Success) {
        Eigen::VectorXd b(nfree);
        for (std::size_t k = 0; k < ndof; ++k)
          if (index[k] >= 0) b[index[k]] = -grad[k];
        const Eigen::VectorXd x = chol->solve(b);
        if (chol->info() == Eigen::Success && x.allFinite()) {
          for (std::size_t k = 0; k < ndof; ++k) delta[k] = index[k] >= 0 ? x[index[k]] : 0.0;
          solved = dot(grad, delta) < 0.0;
        }
      }
      if (!solved) direct = false;  // stay on the iterative path for this solve
    }

    LinearSystem sys;
    sys.apply = [&prob](std::span<const double> x, std::span<double> y) { prob.apply_tangent(x, y); };
    sys.diagonal = prob.tangent_diagonal();
    sys.rhs.resize(ndof);
    for (std::size_t k = 0; k < ndof; ++k) sys.rhs[k] = -grad[k];
    Constraints zero_bc = bc;
    std::fill(zero_bc.value.begin(), zero_bc.value.end(), 0.0);
    sys = apply_dirichlet(zero_bc, std::move(sys));

    bool breakdown = false;
    if (!solved) {
      std::fill(delta.begin(), delta.end(), 0.0);
      const double forcing = std::clamp(gn / scale, opt.cg_tol, 1e-2);
      const CgResult cg = pcg(sys, delta, forcing, opt.cg_max_iter);
      out.report.cg_iterations += cg.iterations;
      breakdown = cg.breakdown;
    }

    double slope = dot(grad, delta);
    if (breakdown || !(slope < 0.0)) {
      out.report.cg_breakdown = true;
      for (std::size_t k = 0; k < ndof; ++k) {
        const double d = sys.diagonal[k] > 0.0 ? sys.diagonal[k] : 1.0;
        delta[k] = bc.is_fixed(k) ? 0.0 : -grad[k] / d;
      }
      slope = dot(grad, delta);
    }

    double alpha = 1.0;
    bool accepted = false;
    double trial_energy = energy;
    for (int ls = 0; ls < opt.ls_max_steps; ++ls) {
      for (std::size_t k = 0; k < ndof; ++k) trial[k] = u[k] + alpha * delta[k];
      trial_energy = prob.energy(trial);
      if (trial_energy <= energy + opt.ls_sufficient_decrease * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= opt.ls_factor;
    }
    if (!accepted) {
      // Near the minimizer the energy difference drowns in round-off; accept
      // the full step only if it is energy-neutral to 1e-14 and reduces the
      // gradient.
      for (std::size_t k = 0; k < ndof; ++k) trial[k] = u[k] + delta[k];
      trial_energy = prob.energy(trial);
      std::vector<double> tg = prob.gradient(trial);
      bc.zero_fixed(tg);
      if (trial_energy <= energy + 1e-14 * std::abs(energy) && norm2(tg) < gn) {
        accepted = true;
      } else {
        out.report.stagnated = true;
        break;
      }
    }
    u.swap(trial);
    if (p.linf_bound) {
      clamp_components(out.u, *p.linf_bound);
      bc.impose(out.u);
      trial_energy = prob.energy(u);
    }
    energy = trial_energy;
    grad = prob.gradient(u);
    bc.zero_fixed(grad);
    gn = norm2(grad);
    out.report.newton_iterations = it + 1;
  }
  out.report.residual = gn;
  out.report.converged = gn <= target;
  return out;
}

// ---- phase field step -----------------------------------------------------------

namespace {

constexpr int kVDofs = kNodesPerElement;

// Element matrices and right-hand side of the quadratic phase-field energy
// ½ vᵀA v - bᵀv at fixed u.
struct PhaseSystem {
  std::vector<double> ae;  // 16 per element
  std::vector<double> rhs;
};

PhaseSystem build_phase_system(const Field& u, const ModelParams& p) {
  const Grid& g = u.grid;
  PhaseSystem sys;
  sys.ae.assign(static_cast<std::size_t>(g.element_count()) * kVDofs * kVDofs, 0.0);
  sys.rhs.assign(g.node_count(), 0.0);
  const double w = g.qp_weight();
  const double well = p.Gc / (2.0 * p.eps);
  const double diffusion = 2.0 * p.eps * p.Gc;

  for_each_element(g, [&](int e) {
    double* A = &sys.ae[static_cast<std::size_t>(e) * kVDofs * kVDofs];
    for (int q = 0; q < kQuadPoints; ++q) {
      const QpShape& s = g.qp_shape(q);
      const double c = bulk_brackets(p, strain_at_qp(u, e, q)).degradable + well;
      A[q * kVDofs + q] += w * c;
      for (int a = 0; a < kVDofs; ++a)
        for (int b = 0; b < kVDofs; ++b)
          A[a * kVDofs + b] += w * diffusion * (s.dndx[a] * s.dndx[b] + s.dndy[a] * s.dndy[b]);
    }
  });
  for_each_element_colored(g, [&](int e) {
    const auto nodes = g.element_nodes(e);
    for (int q = 0; q < kQuadPoints; ++q) sys.rhs[nodes[q]] += w * well;
  });
  return sys;
}

void apply_phase(const Grid& g, const std::vector<double>& ae, std::span<const double> x, std::span<double> y) {
  std::fill(y.begin(), y.end(), 0.0);
  for_each_element_colored(g, [&](int e) {
    const auto nodes = g.element_nodes(e);
    const double* A = &ae[static_cast<std::size_t>(e) * kVDofs * kVDofs];
    for (int a = 0; a < kVDofs; ++a) {
      double s = 0.0;
      for (int b = 0; b < kVDofs; ++b) s += A[a * kVDofs + b] * x[nodes[b]];
      y[nodes[a]] += s;
    }
  });
}

LinearSystem phase_linear_system(const Field& u, const Field& v_start, const ModelParams& p,
                                 const std::vector<unsigned char>& pinned) {
  const Grid& g = u.grid;
  auto ps = std::make_shared<PhaseSystem>(build_phase_system(u, p));
  LinearSystem sys;
  sys.apply = [&g, ps](std::span<const double> x, std::span<double> y) { apply_phase(g, ps->ae, x, y); };
  sys.rhs = ps->rhs;
  sys.diagonal.assign(g.node_count(), 0.0);
  for (int e = 0; e < g.element_count(); ++e) {
    const auto nodes = g.element_nodes(e);
    const double* A = &ps->ae[static_cast<std::size_t>(e) * kVDofs * kVDofs];
    for (int a = 0; a < kVDofs; ++a) sys.diagonal[nodes[a]] += A[a * kVDofs + a];
  }
  if (!pinned.empty()) {
    if (pinned.size() != static_cast<std::size_t>(g.node_count()))
      throw std::invalid_argument("pinned mask does not match the grid");
    Constraints c;
    c.fixed = pinned;
    c.value = v_start.values;
    sys = apply_dirichlet(c, std::move(sys));
  }
  return sys;
}

}  // namespace

VStepResult minimize_v(const Field& u, const Field& v_start, const ModelParams& p, const SolveOptions& opt,
                       const std::vector<unsigned char>& pinned) {
  if (u.components != 2 || v_start.components != 1) throw std::invalid_argument("minimize_v: bad field shapes");
  if (!(u.grid == v_start.grid)) throw std::invalid_argument("minimize_v: fields live on different grids");

  const LinearSystem sys = phase_linear_system(u, v_start, p, pinned);
  VStepResult out{v_start, {}};
  const CgResult cg = pcg(sys, out.v.values, opt.cg_tol, opt.cg_max_iter);
  const std::vector<double> r = residual(sys, out.v.values);
  const double bn = norm2(sys.rhs);
  out.report.cg_iterations = cg.iterations;
  out.report.relative_residual = norm2(r) / (bn > 0.0 ? bn : 1.0);
  out.report.converged = cg.converged && !cg.breakdown;
  return out;
}

double phase_equation_residual(const Field& u, const Field& v, const ModelParams& p,
                               const std::vector<unsigned char>& pinned) {
  const LinearSystem sys = phase_linear_system(u, v, p, pinned);
  const std::vector<double> r = residual(sys, v.values);
  const double bn = norm2(sys.rhs);
  return norm2(r) / (bn > 0.0 ? bn : 1.0);
}

std::vector<double> energy_gradient_u(const Field& u, const Field& v, const ModelParams& p) {
  if (!(u.grid == v.grid)) throw std::invalid_argument("energy_gradient_u: fields live on different grids");
  DisplacementProblem prob(u.grid, p, phase_moduli(v, p));
  return prob.gradient(u.values);
}

std::vector<double> energy_gradient_v(const Field& u, const Field& v, const ModelParams& p) {
  if (!(u.grid == v.grid)) throw std::invalid_argument("energy_gradient_v: fields live on different grids");
  const Grid& g = u.grid;
  std::vector<double> grad(g.node_count(), 0.0);
  const double w = g.qp_weight();
  for_each_element_colored(g, [&](int e) {
    const auto nodes = g.element_nodes(e);
    for (int q = 0; q < kQuadPoints; ++q) {
      const QpShape& s = g.qp_shape(q);
      const ValueGrad vg = value_and_grad_at_qp(v, e, q);
      const double vq = lumped_value_at_qp(v, e, q);
      const double a0 = bulk_brackets(p, strain_at_qp(u, e, q)).degradable;
      grad[nodes[q]] += w * (vq * a0 - p.Gc * (1.0 - vq) / (2.0 * p.eps));
      for (int a = 0; a < kNodesPerElement; ++a)
        grad[nodes[a]] += w * 2.0 * p.Gc * p.eps * (vg.grad.x * s.dndx[a] + vg.grad.y * s.dndy[a]);
    }
  });
  return grad;
}

// ---- staggered scheme --------------------------------------------------------------

double SolveHistory::max_relative_increase() const {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < steps.size(); ++i) {
    const double prev = steps[i - 1].energy.total();
    const double cur = steps[i].energy.total();
    worst = std::max(worst, (cur - prev) / std::max(std::abs(prev), 1e-300));
  }
  return steps.size() < 2 ? 0.0 : worst;
}

AlternateResult alternate_minimize(const Field& u0, const Field& v0, const ModelParams& p, const Constraints& bc,
                                   const SolveOptions& opt, const std::vector<unsigned char>& pinned) {
  opt.validate();
  AlternateResult res{u0, v0, {}};
  if (!bc.fixed.empty()) bc.impose(res.u);
  SolveHistory& h = res.history;

  EnergyBreakdown current = total_energy(res.u, res.v, p);
  h.steps.push_back({"init", 0, current});
  h.outer_energy.push_back(current);

  for (int k = 1; k <= opt.max_outer; ++k) {
    UStepResult us = minimize_u(res.v, res.u, p, bc, opt);
    res.u = std::move(us.u);
    h.u_residuals.push_back(us.report.residual);
    if (!us.report.converged) h.u_step_failed = true;
    if (us.report.cg_breakdown) h.cg_breakdown = true;
    h.steps.push_back({"u", k, total_energy(res.u, res.v, p)});

    VStepResult vs = minimize_v(res.u, res.v, p, opt, pinned);
    if (!vs.report.converged) h.v_step_failed = true;
    double dv = 0.0;
    for (std::size_t i = 0; i < vs.v.values.size(); ++i)
      dv = std::max(dv, std::abs(vs.v.values[i] - res.v.values[i]));
    res.v = std::move(vs.v);
    h.dv_inf.push_back(dv);

    const EnergyBreakdown next = total_energy(res.u, res.v, p);
    h.steps.push_back({"v", k, next});
    h.outer_energy.push_back(next);
    h.outer_iterations = k;

    const double rel = std::abs(current.total() - next.total()) / std::max(std::abs(next.total()), 1e-300);
    current = next;
    if (rel <= opt.tol_energy || dv <= opt.tol_dv) {
      h.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace fissura
