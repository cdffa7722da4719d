#include <doctest.h>

#include <cmath>

#include "fissura/tensor.hpp"
#include "generators.hpp"

using namespace fissura;
using fissura::testing::Gen;

namespace {

bool near(const SymTensor2& a, const SymTensor2& b, double tol) { return (a - b).norm() <= tol; }

// Nearest PSD tensor by search over rotated diagonal candidates diag(p, q)^+
// with the frame angle on a grid; returns the smallest distance found.
double brute_force_psd_distance(const SymTensor2& t, int angles) {
  double best = INFINITY;
  for (int k = 0; k < angles; ++k) {
    const double th = M_PI * k / angles;
    const Vec2 e1{std::cos(th), std::sin(th)};
    const Vec2 e2{-std::sin(th), std::cos(th)};
    // In this frame the optimal diagonal entries are the clamped diagonal of t.
    const double a = e1.x * (t.xx * e1.x + t.xy * e1.y) + e1.y * (t.xy * e1.x + t.yy * e1.y);
    const double b = e2.x * (t.xx * e2.x + t.xy * e2.y) + e2.y * (t.xy * e2.x + t.yy * e2.y);
    const SymTensor2 cand = from_eigen(std::max(a, 0.0), std::max(b, 0.0), e1, e2);
    best = std::min(best, (t - cand).norm());
  }
  return best;
}

}  // namespace

TEST_CASE("deviatoric examples") {
  CHECK(deviatoric(SymTensor2::diag(0.3, 0.0)) == SymTensor2::diag(0.15, -0.15));
  CHECK(deviatoric(SymTensor2::identity()) == SymTensor2{});
  CHECK(deviatoric(SymTensor2{1.0, -1.0, 3.0}) == SymTensor2{1.0, -1.0, 3.0});
}

TEST_CASE("deviatoric properties") {
  Gen g(11);
  for (int i = 0; i < 10000; ++i) {
    const SymTensor2 t = g.sym(5.0);
    const SymTensor2 d = deviatoric(t);
    CHECK(std::abs(d.trace()) <= 1e-14 * (1 + t.norm()));
    CHECK(near(d + (t.trace() / 2.0) * SymTensor2::identity(), t, 1e-14 * (1 + t.norm())));
    CHECK(std::abs(frobenius(d, SymTensor2::identity())) <= 1e-14 * (1 + t.norm()));
  }
}

TEST_CASE("trace split") {
  auto a = trace_split(SymTensor2::diag(1, 1));
  CHECK(a.plus == 2.0);
  CHECK(a.minus == 0.0);
  auto b = trace_split(SymTensor2::diag(-1, -1));
  CHECK(b.plus == 0.0);
  CHECK(b.minus == 2.0);
  auto c = trace_split(SymTensor2::diag(1, -1));
  CHECK(c.plus == 0.0);
  CHECK(c.minus == 0.0);
  Gen g(5);
  for (int i = 0; i < 1000; ++i) {
    const SymTensor2 t = g.sym();
    const TraceSplit s = trace_split(t);
    CHECK(s.plus - s.minus == doctest::Approx(t.trace()));
    CHECK(s.plus * s.minus == 0.0);
    CHECK(s.plus >= 0.0);
    CHECK(s.minus >= 0.0);
  }
}

TEST_CASE("eigen decomposition") {
  Gen g(3);
  for (int i = 0; i < 10000; ++i) {
    const SymTensor2 t = g.sym(3.0);
    const EigenPair2 e = eigen(t);
    CHECK(e.lambda1 >= e.lambda2);
    CHECK(std::abs(dot(e.e1, e.e2)) <= 1e-12);
    CHECK(std::abs(norm(e.e1) - 1.0) <= 1e-12);
    CHECK(near(from_eigen(e.lambda1, e.lambda2, e.e1, e.e2), t, 1e-10));
  }
  SUBCASE("repeated eigenvalue uses the axis-aligned basis") {
    const EigenPair2 e = eigen(2.5 * SymTensor2::identity());
    CHECK(e.lambda1 == 2.5);
    CHECK(e.lambda2 == 2.5);
    CHECK(e.e1 == Vec2{1.0, 0.0});
    CHECK(e.e2 == Vec2{0.0, 1.0});
  }
}

TEST_CASE("psd projection examples") {
  const PsdSplit a = psd_project(SymTensor2::diag(1, -2));
  CHECK(near(a.plus, SymTensor2::diag(1, 0), 1e-15));
  CHECK(near(a.minus, SymTensor2::diag(0, -2), 1e-15));

  const PsdSplit b = psd_project(SymTensor2{0.0, 0.0, 1.0});
  CHECK(near(b.plus, SymTensor2{0.5, 0.5, 0.5}, 1e-14));
  CHECK(near(b.minus, SymTensor2{-0.5, -0.5, 0.5}, 1e-14));
  CHECK(brute_force_psd_distance(SymTensor2{0.0, 0.0, 1.0}, 1000) ==
        doctest::Approx((SymTensor2{0.0, 0.0, 1.0} - b.plus).norm()).epsilon(1e-5));

  const PsdSplit c = psd_project(SymTensor2::diag(2, 3));
  CHECK(c.plus == SymTensor2::diag(2, 3));
  CHECK(c.minus == SymTensor2{});
}

TEST_CASE("psd projection properties") {
  Gen g(7);
  for (int i = 0; i < 10000; ++i) {
    const SymTensor2 t = g.sym(2.0);
    const PsdSplit s = psd_project(t);
    CHECK(near(s.plus + s.minus, t, 1e-10));
    CHECK(eigen(s.plus).lambda2 >= -1e-10);
    CHECK(eigen(s.minus).lambda1 <= 1e-10);
    CHECK(std::abs(frobenius(s.plus, s.minus)) <= 1e-10);
  }
}

TEST_CASE("psd projection is the nearest PSD tensor") {
  Gen g(8);
  const int angles = 1000;
  // A frame angle off by at most pi/(2 angles) changes the distance by O(|T| pi/angles).
  for (int i = 0; i < 300; ++i) {
    const SymTensor2 t = g.sym(2.0);
    const double d = (t - psd_project(t).plus).norm();
    const double brute = brute_force_psd_distance(t, angles);
    CHECK(d <= brute + 1e-12);
    CHECK(brute - d <= 2.0 * t.norm() * M_PI / angles);
  }
}

TEST_CASE("gradient of |E+|^2 is 2 E+") {
  Gen g(9);
  const double h = 1e-6;
  int checked = 0;
  while (checked < 200) {
    const SymTensor2 t = g.sym(1.0);
    const EigenPair2 e = eigen(t);
    if (std::abs(e.lambda1) < 1e-2 || std::abs(e.lambda2) < 1e-2 || e.lambda1 - e.lambda2 < 1e-2) continue;
    const SymTensor2 p = psd_project(t).plus;
    auto f = [](const SymTensor2& x) { return psd_project(x).plus.norm2(); };
    // Coordinates (xx, yy, xy) with the shear counted twice in the norm.
    const double gxx = (f(t + SymTensor2{h, 0, 0}) - f(t - SymTensor2{h, 0, 0})) / (2 * h);
    const double gyy = (f(t + SymTensor2{0, h, 0}) - f(t - SymTensor2{0, h, 0})) / (2 * h);
    const double gxy = (f(t + SymTensor2{0, 0, h}) - f(t - SymTensor2{0, 0, h})) / (2 * h);
    const double scale = 1e-4 * std::max(1.0, p.norm());
    CHECK(std::abs(gxx - 2 * p.xx) <= scale);
    CHECK(std::abs(gyy - 2 * p.yy) <= scale);
    CHECK(std::abs(gxy - 4 * p.xy) <= scale);
    ++checked;
  }
}

TEST_CASE("symmetrized rank-one product") {
  const SymTensor2 a = sym_rank_one({1, 0}, {0, 1});
  CHECK(a == SymTensor2{0.0, 0.0, 0.5});
  CHECK(a.det() == -0.25);
  const SymTensor2 b = sym_rank_one({1, 0}, {1, 0});
  CHECK(b == SymTensor2::diag(1, 0));
  CHECK(b.det() == 0.0);
  CHECK(sym_rank_one({2, 0}, {1, 0}) == SymTensor2::diag(2, 0));

  Gen g(10);
  for (int i = 0; i < 10000; ++i) {
    const Vec2 u = g.vec(3.0);
    const Vec2 v = g.coin() ? g.vec(3.0) : g.uniform(-2, 2) * u;
    const SymTensor2 s = sym_rank_one(u, v);
    const double c = cross(u, v);
    CHECK(s.det() <= 1e-12);
    CHECK(s.det() == doctest::Approx(-c * c / 4.0).epsilon(1e-12).scale(1.0));
  }
}
