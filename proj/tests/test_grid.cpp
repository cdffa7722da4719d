#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "fissura/grid.hpp"
#include "fissura/parallel.hpp"
#include "fissura/solver.hpp"
#include "generators.hpp"

using namespace fissura;
using fissura::testing::Gen;

namespace {

// Diagonally dominant symmetric tridiagonal operator.
LinearSystem tridiagonal_system(std::size_t n, Gen& g) {
  LinearSystem s;
  s.apply = [n](std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = 3.0 * x[i];
      if (i > 0) y[i] -= x[i - 1];
      if (i + 1 < n) y[i] -= x[i + 1];
    }
  };
  s.rhs.resize(n);
  for (double& b : s.rhs) b = g.uniform(-1, 1);
  s.diagonal.assign(n, 3.0);
  return s;
}

}  // namespace

TEST_CASE("grid construction") {
  const Grid g(4, 3, 2.0, 1.5);
  CHECK(g.node_count() == 20);
  CHECK(g.element_count() == 12);
  CHECK(g.hx() == 0.5);
  CHECK(g.hy() == 0.5);
  CHECK(g.node_position(g.node(4, 3)) == Vec2{2.0, 1.5});
  CHECK(g.element_nodes(0) == std::array<int, 4>{0, 1, 6, 5});
  CHECK(g.on_boundary(g.node(0, 1)));
  CHECK_FALSE(g.on_boundary(g.node(1, 1)));
  CHECK_THROWS_AS(Grid(1, 4, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Grid(4, 4, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("strain at quadrature points") {
  const Grid g(5, 4, 1.0, 1.0);
  const double t = 0.37;
  const Field a = Field::sample(g, [t](Vec2 x) { return Vec2{t * x.x, 0.0}; });
  const double w = 0.8;
  const Field rot = Field::sample(g, [w](Vec2 x) { return Vec2{-w * x.y, w * x.x}; });
  for (int e = 0; e < g.element_count(); ++e)
    for (int q = 0; q < kQuadPoints; ++q) {
      const SymTensor2 s = strain_at_qp(a, e, q);
      CHECK(s.xx == doctest::Approx(t).epsilon(1e-13));
      CHECK(std::abs(s.yy) <= 1e-15);
      CHECK(std::abs(s.xy) <= 1e-15);
      CHECK(strain_at_qp(rot, e, q).norm() <= 1e-14);
    }

  SUBCASE("quadratic field is first-order accurate") {
    const Grid h(10, 10, 1.0, 1.0);
    const Field u = Field::sample(h, [](Vec2 x) { return Vec2{x.x * x.x, 0.0}; });
    for (int e = 0; e < h.element_count(); ++e)
      for (int q = 0; q < kQuadPoints; ++q)
        CHECK(std::abs(strain_at_qp(u, e, q).xx - 2.0 * h.qp_position(e, q).x) <= 0.1 + 1e-12);
  }

  SUBCASE("index errors") {
    CHECK_THROWS_AS(strain_at_qp(a, g.element_count(), 0), std::out_of_range);
    CHECK_THROWS_AS(strain_at_qp(a, 0, 4), std::out_of_range);
    CHECK_THROWS_AS(strain_at_qp(a, -1, 0), std::out_of_range);
  }
}

TEST_CASE("phase value and gradient at quadrature points") {
  const Grid g(6, 5, 1.2, 1.0);
  const Field one = Field::constant(g, 1.0);
  const Field lin = Field::sample(g, [](Vec2 x) { return x.x; });
  const Field bil = Field::sample(g, [](Vec2 x) { return x.x * x.y; });
  for (int e = 0; e < g.element_count(); ++e)
    for (int q = 0; q < kQuadPoints; ++q) {
      const Vec2 x = g.qp_position(e, q);
      const ValueGrad a = value_and_grad_at_qp(one, e, q);
      CHECK(a.value == doctest::Approx(1.0).epsilon(1e-15));
      CHECK(norm(a.grad) <= 1e-13);
      const ValueGrad b = value_and_grad_at_qp(lin, e, q);
      CHECK(std::abs(b.value - x.x) <= 1e-12);
      CHECK(std::abs(b.grad.x - 1.0) <= 1e-12);
      CHECK(std::abs(b.grad.y) <= 1e-12);
      const ValueGrad c = value_and_grad_at_qp(bil, e, q);
      CHECK(std::abs(c.value - x.x * x.y) <= 1e-12);
      CHECK(std::abs(c.grad.x - x.y) <= 1e-12);
      CHECK(std::abs(c.grad.y - x.x) <= 1e-12);
    }
  CHECK_THROWS_AS(value_and_grad_at_qp(lin, 0, kQuadPoints), std::out_of_range);
}

TEST_CASE("lumped value is the nearest corner") {
  const Grid g(3, 3, 1.0, 1.0);
  const Field f = Field::sample(g, [](Vec2 x) { return 10.0 * x.x + x.y; });
  for (int e = 0; e < g.element_count(); ++e)
    for (int q = 0; q < kQuadPoints; ++q) {
      const Vec2 x = g.qp_position(e, q);
      int nearest = -1;
      double best = INFINITY;
      for (int n : g.element_nodes(e))
        if (norm(g.node_position(n) - x) < best) {
          best = norm(g.node_position(n) - x);
          nearest = n;
        }
      CHECK(lumped_value_at_qp(f, e, q) == f.values[nearest]);
    }
}

TEST_CASE("quadrature exactness") {
  const Grid g(7, 9, 1.3, 0.7);
  std::vector<double> parts(g.element_count(), 4.0 * g.qp_weight());
  CHECK(std::abs(pairwise_sum(parts.data(), parts.size()) - 1.3 * 0.7) <= 1e-12);

  // Products of bilinear functions: ∫ x y · x = ∫ x² y = lx³ ly² / 6.
  const Field a = Field::sample(g, [](Vec2 x) { return x.x * x.y; });
  const Field b = Field::sample(g, [](Vec2 x) { return x.x; });
  double s = 0.0;
  for (int e = 0; e < g.element_count(); ++e)
    for (int q = 0; q < kQuadPoints; ++q)
      s += g.qp_weight() * value_and_grad_at_qp(a, e, q).value * value_and_grad_at_qp(b, e, q).value;
  CHECK(s == doctest::Approx(std::pow(1.3, 3) * 0.7 * 0.7 / 6.0).epsilon(1e-12));
}

TEST_CASE("strain operator is linear") {
  Gen gen(21);
  const Grid g(4, 4, 1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Field u = Field::zeros(g, 2), w = Field::zeros(g, 2), c = Field::zeros(g, 2);
    const double al = gen.uniform(-2, 2), be = gen.uniform(-2, 2);
    for (std::size_t k = 0; k < u.values.size(); ++k) {
      u.values[k] = gen.uniform(-1, 1);
      w.values[k] = gen.uniform(-1, 1);
      c.values[k] = al * u.values[k] + be * w.values[k];
    }
    for (int e = 0; e < g.element_count(); ++e)
      for (int q = 0; q < kQuadPoints; ++q) {
        const SymTensor2 lhs = strain_at_qp(c, e, q);
        const SymTensor2 rhs = al * strain_at_qp(u, e, q) + be * strain_at_qp(w, e, q);
        CHECK((lhs - rhs).norm() <= 1e-12);
      }
  }
}

TEST_CASE("dirichlet resolution") {
  const Grid g(4, 4, 1.0, 1.0);
  DirichletSpec spec;
  spec.add(Side::Left, true, true, [](Vec2, double) { return Vec2{}; });
  spec.add(Side::Right, true, false, [](Vec2, double t) { return Vec2{t, 0.0}; });
  const Constraints c = resolve_dirichlet(spec, 0.25, g);
  CHECK(c.fixed_count() == 5 * 2 + 5);
  CHECK(c.is_fixed(2 * g.node(4, 2)));
  CHECK_FALSE(c.is_fixed(2 * g.node(4, 2) + 1));
  CHECK(c.value[2 * g.node(4, 2)] == 0.25);
  CHECK(c.warnings.empty());

  SUBCASE("selector matching nothing warns") {
    DirichletSpec s;
    s.add("nowhere", [](Vec2 x) { return x.x > 5.0; }, true, true, [](Vec2, double) { return Vec2{}; });
    const Constraints w = resolve_dirichlet(s, 0.0, g);
    CHECK(w.fixed_count() == 0);
    REQUIRE(w.warnings.size() == 1);
    CHECK(w.warnings[0].find("nowhere") != std::string::npos);
  }
}

TEST_CASE("symmetric dirichlet elimination") {
  Gen gen(4);
  const Grid g(3, 3, 1.0, 1.0);
  const std::size_t n = 2 * g.node_count();
  DirichletSpec spec;
  spec.add(Side::Left, true, true, [](Vec2, double) { return Vec2{}; });
  spec.add(Side::Right, true, false, [](Vec2, double t) { return Vec2{t, 0.0}; });

  SUBCASE("zero load leaves the zero solution feasible") {
    LinearSystem s = tridiagonal_system(n, gen);
    std::fill(s.rhs.begin(), s.rhs.end(), 0.0);
    const LinearSystem c = apply_dirichlet(spec, 0.0, g, s);
    std::vector<double> x(n, 0.0);
    const auto r = residual(c, x);
    CHECK(norm_inf(r) == 0.0);
  }

  SUBCASE("constrained operator is symmetric and solutions carry the data") {
    const LinearSystem s = tridiagonal_system(n, gen);
    const Constraints cons = resolve_dirichlet(spec, 0.3, g);
    const LinearSystem c = apply_dirichlet(cons, s);
    std::vector<double> x(n), y(n), ax(n), ay(n);
    for (std::size_t k = 0; k < n; ++k) {
      x[k] = gen.uniform(-1, 1);
      y[k] = gen.uniform(-1, 1);
    }
    c.apply(x, ax);
    c.apply(y, ay);
    CHECK(dot(x, ay) == doctest::Approx(dot(y, ax)).epsilon(1e-13));

    std::vector<double> sol(n, 0.0);
    REQUIRE(pcg(c, sol, 1e-13, 1000).converged);
    for (std::size_t k = 0; k < n; ++k)
      if (cons.is_fixed(k)) CHECK(sol[k] == doctest::Approx(cons.value[k]).epsilon(1e-12));
    // The free-dof residual of the original system vanishes.
    const auto r = residual(s, sol);
    for (std::size_t k = 0; k < n; ++k)
      if (!cons.is_fixed(k)) CHECK(std::abs(r[k]) <= 1e-11);
  }

  SUBCASE("empty spec leaves the system unchanged") {
    const LinearSystem s = tridiagonal_system(n, gen);
    const LinearSystem c = apply_dirichlet(DirichletSpec{}, 0.7, g, s);
    CHECK(c.rhs == s.rhs);
    std::vector<double> x(n), a(n), b(n);
    for (double& v : x) v = gen.uniform(-1, 1);
    s.apply(x, a);
    c.apply(x, b);
    CHECK(a == b);
  }
}

TEST_CASE("patch test: affine boundary data is reproduced in the interior") {
  Gen gen(31);
  const Grid g(8, 6, 1.0, 0.75);
  ModelParams p;
  p.eta = 0.0;
  for (int trial = 0; trial < 4; ++trial) {
    const AffineMap A{gen.mat(0.2), gen.vec(0.1)};
    DirichletSpec spec;
    spec.add_full_boundary([A](Vec2 x, double t) { return t * A(x); });
    const Constraints bc = resolve_dirichlet(spec, 1.0, g);
    const UStepResult r = minimize_u(Field::constant(g, 1.0), Field::zeros(g, 2), p, bc, SolveOptions{});
    CHECK(r.report.converged);
    double err = 0.0;
    for (int n = 0; n < g.node_count(); ++n) err = std::max(err, norm(r.u.vec(n) - A(g.node_position(n))));
    CHECK(err <= 1e-10);
  }
}

TEST_CASE("clamping") {
  const Grid g(2, 2, 1.0, 1.0);
  Field u = Field::sample(g, [](Vec2 x) { return Vec2{3.0 * x.x - 1.0, -2.0 * x.y}; });
  clamp_components(u, 1.0);
  for (double v : u.values) CHECK(std::abs(v) <= 1.0);
}
