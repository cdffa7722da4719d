#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fissura/solver.hpp"
#include "generators.hpp"

using namespace fissura;
using fissura::testing::Gen;
using fissura::testing::rel_diff;

namespace {

Constraints full_boundary(const Grid& g, const Mat2& W, double t) {
  DirichletSpec spec;
  spec.add_full_boundary([W](Vec2 x, double s) { return s * (W * x); });
  return resolve_dirichlet(spec, t, g);
}

double max_abs_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

double free_norm(const std::vector<double>& g, const Constraints& bc) {
  double s = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k)
    if (!bc.is_fixed(k)) s += g[k] * g[k];
  return std::sqrt(s);
}

Field random_field(const Grid& g, int comps, Gen& gen, double lo, double hi) {
  Field f = Field::zeros(g, comps);
  for (double& x : f.values) x = gen.uniform(lo, hi);
  return f;
}

double min_trace(const Field& u) {
  double m = INFINITY;
  for (int e = 0; e < u.grid.element_count(); ++e)
    for (int q = 0; q < 4; ++q) m = std::min(m, std::abs(strain_at_qp(u, e, q).trace()));
  return m;
}

}  // namespace

TEST_CASE("solve options validation") {
  SolveOptions o;
  CHECK_NOTHROW(o.validate());
  SolveOptions a = o;
  a.tol_grad = 0.0;
  CHECK_THROWS_AS(a.validate(), std::invalid_argument);
  SolveOptions b = o;
  b.max_newton = 0;
  CHECK_THROWS_AS(b.validate(), std::invalid_argument);
  SolveOptions c = o;
  c.ls_factor = 1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("displacement step reproduces affine boundary data") {
  const Grid g(16, 16, 1.0, 1.0);
  ModelParams p;
  p.eta = 0.0;
  const double t = 0.1;
  const Mat2 W{1.0, 0.0, 0.0, 0.0};
  const Constraints bc = full_boundary(g, W, t);
  const Field w = Field::sample(g, [&](Vec2 x) { return t * (W * x); });
  for (LinearSolver ls : {LinearSolver::Direct, LinearSolver::Cg}) {
    SolveOptions o;
    o.u_solver = ls;
    o.tol_grad = 1e-12;
    const UStepResult r = minimize_u(Field::constant(g, 1.0), Field::zeros(g, 2), p, bc, o);
    CHECK(r.report.converged);
    CHECK(max_abs_diff(r.u, w) <= 1e-10);
    CHECK(total_energy(r.u, Field::constant(g, 1.0), p).total() == doctest::Approx(1.5 * t * t).epsilon(1e-10));
  }
}

TEST_CASE("zero boundary data gives zero displacement") {
  const Grid g(8, 8, 1.0, 1.0);
  Gen gen(31);
  const Constraints bc = full_boundary(g, Mat2{}, 0.0);
  const UStepResult r = minimize_u(random_field(g, 1, gen, 0.0, 1.0), random_field(g, 2, gen, -0.1, 0.1),
                                   ModelParams{}, bc, SolveOptions{});
  CHECK(r.report.converged);
  for (double x : r.u.values) CHECK(std::abs(x) <= 1e-10);
}

TEST_CASE("biaxial compression is independent of the phase field") {
  const Grid g(12, 12, 1.0, 1.0);
  Gen gen(32);
  const double t = 0.5;
  const Mat2 W{-1.0, 0.0, 0.0, -1.0};
  const Constraints bc = full_boundary(g, W, t);
  const Field w = Field::sample(g, [&](Vec2 x) { return t * (W * x); });
  const Field v = random_field(g, 1, gen, 0.0, 1.0);
  const UStepResult r = minimize_u(v, Field::zeros(g, 2), ModelParams{}, bc, SolveOptions{});
  CHECK(max_abs_diff(r.u, w) <= 1e-9);
  CHECK(total_energy(r.u, Field::constant(g, 1.0), ModelParams{}).bulk() ==
        doctest::Approx(4 * t * t).epsilon(1e-10));
}

TEST_CASE("displacement step decreases energy and meets the tolerance") {
  Gen gen(33);
  const Grid g(10, 8, 1.0, 0.8);
  for (int trial = 0; trial < 6; ++trial) {
    ModelParams p;
    p.variant = static_cast<Variant>(trial % 3);
    const Mat2 W = gen.mat(1.0);
    const Constraints bc = full_boundary(g, W, 0.3);
    const Field v = random_field(g, 1, gen, 0.0, 1.0);
    Field u0 = random_field(g, 2, gen, -0.05, 0.05);
    bc.impose(u0);
    SolveOptions o;
    o.u_solver = trial < 3 ? LinearSolver::Direct : LinearSolver::Cg;
    const UStepResult r = minimize_u(v, u0, p, bc, o);
    CHECK(total_energy(r.u, v, p).total() <= total_energy(u0, v, p).total());
    CHECK(r.report.converged);
    const double g0 = free_norm(energy_gradient_u(u0, v, p), bc);
    CHECK(free_norm(energy_gradient_u(r.u, v, p), bc) <= o.tol_grad * std::max(1.0, g0) * (1 + 1e-9));
  }
}

TEST_CASE("direct and iterative displacement solves agree") {
  Gen gen(34);
  const Grid g(12, 12, 1.0, 1.0);
  const Constraints bc = full_boundary(g, Mat2{0.4, 0.2, -0.1, 0.3}, 1.0);
  const Field v = random_field(g, 1, gen, 0.2, 1.0);
  SolveOptions d, c;
  c.u_solver = LinearSolver::Cg;
  const UStepResult a = minimize_u(v, Field::zeros(g, 2), ModelParams{}, bc, d);
  const UStepResult b = minimize_u(v, Field::zeros(g, 2), ModelParams{}, bc, c);
  CHECK(a.report.factorizations > 0);
  CHECK(b.report.factorizations == 0);
  CHECK(max_abs_diff(a.u, b.u) <= 1e-7);
}

TEST_CASE("displacement energy is convex along segments") {
  Gen gen(35);
  const Grid g(6, 6, 1.0, 1.0);
  for (int i = 0; i < 60; ++i) {
    ModelParams p;
    p.variant = static_cast<Variant>(i % 3);
    p.lame_lambda = gen.uniform(0.0, 2.0);
    const Field v = random_field(g, 1, gen, 0.0, 1.0);
    const Field u1 = random_field(g, 2, gen, -0.2, 0.2);
    const Field u2 = random_field(g, 2, gen, -0.2, 0.2);
    Field mid = u1;
    for (std::size_t k = 0; k < mid.values.size(); ++k) mid.values[k] = 0.5 * (u1.values[k] + u2.values[k]);
    const double e1 = total_energy(u1, v, p).total(), e2 = total_energy(u2, v, p).total();
    CHECK(total_energy(mid, v, p).total() <= 0.5 * (e1 + e2) + 1e-10);
  }
}

TEST_CASE("phase step examples") {
  const Grid g(10, 10, 1.0, 1.0);
  ModelParams p;
  p.eps = 0.2;
  const Field ones = Field::constant(g, 1.0);

  const VStepResult z = minimize_v(Field::zeros(g, 2), Field::constant(g, 0.3), p, SolveOptions{});
  CHECK(z.report.converged);
  for (double x : z.v.values) CHECK(x == doctest::Approx(1.0).epsilon(1e-9));

  const double t = 0.4;
  const Field tension = Field::sample(g, [t](Vec2 x) { return Vec2{t * x.x, 0.0}; });
  const double v_star = homogeneous_state(p, SymTensor2::diag(t, 0.0)).v_star;
  const VStepResult h = minimize_v(tension, ones, p, SolveOptions{});
  for (double x : h.v.values) CHECK(x == doctest::Approx(v_star).epsilon(1e-9));
  // Scalar stationarity a0 v + Gc (v - 1)/(2 eps) = 0 with a0 = 2|dev e|² + K t².
  const double a0 = 2.0 * (t * t / 2.0) + 2.0 * t * t;
  CHECK(v_star == doctest::Approx(1.0 / (1.0 + 2.0 * p.eps * a0 / p.Gc)).epsilon(1e-15));

  const Field comp = Field::sample(g, [](Vec2 x) { return -0.5 * x; });
  const VStepResult c = minimize_v(comp, Field::constant(g, 0.5), p, SolveOptions{});
  for (double x : c.v.values) CHECK(x == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("phase step is exact, bounded and decreasing") {
  Gen gen(36);
  const Grid g(14, 12, 1.0, 0.9);
  for (int i = 0; i < 20; ++i) {
    ModelParams p;
    p.variant = static_cast<Variant>(i % 3);
    p.eps = gen.uniform(0.06, 0.2);
    const Field u = random_field(g, 2, gen, -0.3, 0.3);
    const Field v0 = random_field(g, 1, gen, 0.0, 1.0);
    SolveOptions o;
    const VStepResult r = minimize_v(u, v0, p, o);
    CHECK(r.report.converged);
    CHECK(phase_equation_residual(u, r.v, p) <= o.cg_tol * 10);
    CHECK(*std::min_element(r.v.values.begin(), r.v.values.end()) >= -1e-8);
    CHECK(*std::max_element(r.v.values.begin(), r.v.values.end()) <= 1.0 + 1e-8);
    CHECK(total_energy(u, r.v, p).total() <= total_energy(u, v0, p).total());
    // Perturbing the minimizer of a quadratic never lowers the energy.
    const double e = total_energy(u, r.v, p).total();
    for (int k = 0; k < 5; ++k) {
      Field w = r.v;
      for (double& x : w.values) x += gen.uniform(-1e-3, 1e-3);
      CHECK(total_energy(u, w, p).total() >= e - 1e-13 * std::abs(e));
    }
  }
}

TEST_CASE("pinned phase nodes keep their values") {
  const Grid g(10, 10, 1.0, 1.0);
  std::vector<unsigned char> pinned(g.node_count(), 0);
  Field v0 = Field::constant(g, 1.0);
  for (int i = 0; i <= 10; ++i) {
    pinned[g.node(i, 5)] = 1;
    v0.values[g.node(i, 5)] = 0.0;
  }
  const VStepResult r = minimize_v(Field::zeros(g, 2), v0, ModelParams{}, SolveOptions{}, pinned);
  for (int i = 0; i <= 10; ++i) CHECK(r.v.values[g.node(i, 5)] == 0.0);
  CHECK(r.v.values[g.node(5, 9)] > 0.0);
  CHECK_THROWS_AS(minimize_v(Field::zeros(g, 2), v0, ModelParams{}, SolveOptions{}, std::vector<unsigned char>(3)),
                  std::invalid_argument);
}

TEST_CASE("gradients match central differences") {
  Gen gen(37);
  const Grid g(5, 4, 1.0, 0.8);
  const double h = 1e-6;
  int checked = 0;
  for (int i = 0; i < 100; ++i) {
    ModelParams p;
    p.variant = static_cast<Variant>(i % 3);
    p.eps = 0.3;
    // Stretched or compressed states keep traces away from zero.
    const double s = gen.coin() ? 1.0 : -1.0;
    Field u = Field::sample(g, [s](Vec2 x) { return s * 0.2 * x; });
    for (double& x : u.values) x += gen.uniform(-0.01, 0.01);
    const Field v = random_field(g, 1, gen, 0.1, 1.0);
    if (p.variant != Variant::Masonry && min_trace(u) < 1e-3) continue;
    ++checked;

    const std::vector<double> gu = energy_gradient_u(u, v, p);
    const std::vector<double> gv = energy_gradient_v(u, v, p);
    Field du = random_field(g, 2, gen, -1.0, 1.0);
    Field dv = random_field(g, 1, gen, -1.0, 1.0);
    double an_u = 0.0, an_v = 0.0;
    for (std::size_t k = 0; k < gu.size(); ++k) an_u += gu[k] * du.values[k];
    for (std::size_t k = 0; k < gv.size(); ++k) an_v += gv[k] * dv.values[k];

    auto shifted = [&](const Field& f, const Field& d, double step) {
      Field r = f;
      for (std::size_t k = 0; k < r.values.size(); ++k) r.values[k] += step * d.values[k];
      return r;
    };
    const double fd_u =
        (total_energy(shifted(u, du, h), v, p).total() - total_energy(shifted(u, du, -h), v, p).total()) / (2 * h);
    const double fd_v =
        (total_energy(u, shifted(v, dv, h), p).total() - total_energy(u, shifted(v, dv, -h), p).total()) / (2 * h);
    CHECK(rel_diff(an_u, fd_u) <= 1e-4);
    CHECK(rel_diff(an_v, fd_v) <= 1e-4);
  }
  CHECK(checked >= 60);
}

TEST_CASE("one-sided derivatives bracket the gradient at a trace kink") {
  const Grid g(4, 4, 1.0, 1.0);
  const ModelParams p;
  // Pure shear: zero trace at every Gauss point.
  const Field u = Field::sample(g, [](Vec2 x) { return Vec2{0.1 * x.y, 0.1 * x.x}; });
  const Field v = Field::constant(g, 0.5);
  const std::vector<double> gu = energy_gradient_u(u, v, p);
  const Field dir = Field::sample(g, [](Vec2 x) { return Vec2{x.x, x.y}; });
  double an = 0.0;
  for (std::size_t k = 0; k < gu.size(); ++k) an += gu[k] * dir.values[k];
  const double h = 1e-7;
  auto e_at = [&](double s) {
    Field w = u;
    for (std::size_t k = 0; k < w.values.size(); ++k) w.values[k] += s * dir.values[k];
    return total_energy(w, v, p).total();
  };
  const double e0 = e_at(0.0);
  const double right = (e_at(h) - e0) / h;
  const double left = (e0 - e_at(-h)) / h;
  CHECK(left <= an + 1e-6);
  CHECK(an <= right + 1e-6);
}

TEST_CASE("alternating minimization: trivial load") {
  const Grid g(8, 8, 1.0, 1.0);
  const AlternateResult r = alternate_minimize(Field::zeros(g, 2), Field::constant(g, 1.0), ModelParams{},
                                               full_boundary(g, Mat2{}, 0.0), SolveOptions{});
  CHECK(r.history.converged);
  CHECK(r.history.outer_iterations == 1);
  CHECK(r.history.outer_energy.back().total() <= 1e-30);
}

TEST_CASE("alternating minimization: homogeneous tension") {
  const Grid g(16, 16, 1.0, 1.0);
  ModelParams p;
  const double t = 0.1;
  const AlternateResult r = alternate_minimize(Field::zeros(g, 2), Field::constant(g, 1.0), p,
                                               full_boundary(g, Mat2{1, 0, 0, 0}, t), SolveOptions{});
  const HomogeneousState hs = homogeneous_state(p, SymTensor2::diag(t, 0.0));
  CHECK(r.history.converged);
  CHECK(r.history.outer_iterations <= 5);
  CHECK(hs.v_star >= 0.9);
  for (double x : r.v.values) CHECK(x == doctest::Approx(hs.v_star).epsilon(1e-6));
  CHECK(r.history.outer_energy.back().total() == doctest::Approx(hs.energy_density).epsilon(1e-6));
  CHECK(r.history.max_relative_increase() <= 1e-12);
}

TEST_CASE("alternating minimization: notched plate prefers the cracked branch") {
  const Grid g(32, 32, 1.0, 1.0);
  ModelParams p;
  p.eps = 0.08;
  p.Gc = 0.2;
  const double t = 0.5;
  const Constraints bc = full_boundary(g, Mat2{1, 0, 0, 1}, t);
  const AlternateResult intact =
      alternate_minimize(Field::zeros(g, 2), Field::constant(g, 1.0), p, bc, SolveOptions{});
  Field v0 = Field::constant(g, 1.0);
  std::vector<unsigned char> pinned(g.node_count(), 0);
  for (int i = 0; i <= 32; ++i) {
    v0.values[g.node(i, 16)] = 0.0;
    pinned[g.node(i, 16)] = 1;
  }
  const AlternateResult cracked = alternate_minimize(Field::zeros(g, 2), v0, p, bc, SolveOptions{}, pinned);
  CHECK(cracked.history.outer_energy.back().total() <= intact.history.outer_energy.back().total());
  CHECK(intact.history.max_relative_increase() <= 1e-12);
  CHECK(cracked.history.max_relative_increase() <= 1e-12);
  for (const HalfStep& s : cracked.history.steps) CHECK(std::isfinite(s.energy.total()));
}

TEST_CASE("optional displacement clamp") {
  const Grid g(6, 6, 1.0, 1.0);
  ModelParams p;
  p.linf_bound = 0.05;
  const UStepResult r =
      minimize_u(Field::constant(g, 1.0), Field::zeros(g, 2), p, full_boundary(g, Mat2{}, 0.0), SolveOptions{});
  for (double x : r.u.values) CHECK(std::abs(x) <= 0.05);
}
