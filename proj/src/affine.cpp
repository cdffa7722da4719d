#include "fissura/affine.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace fissura {

std::vector<Vec2> Square::vertices() const {
  const double h = 0.5 * side;
  return {{center.x - h, center.y - h}, {center.x - h, center.y + h}, {center.x + h, center.y - h},
          {center.x + h, center.y + h}};
}

bool Square::contains(const Vec2& x) const {
  const double h = 0.5 * side;
  return std::abs(x.x - center.x) < h && std::abs(x.y - center.y) < h;
}

VertexMax vertex_max(const AffineMap& A, const Square& q) {
  VertexMax best;
  bool first = true;
  for (const Vec2& v : q.vertices()) {
    const double value = norm(A(v));
    if (first || value > best.value) {
      best = {v, value};
      first = false;
    }
  }
  return best;
}

SampledField SampledField::sample(const Square& domain, int n, const std::function<Vec2(Vec2)>& u,
                                  const std::function<bool(Vec2)>& in_omega) {
  if (n < 1) throw std::invalid_argument("sampling lattice needs at least one cell");
  SampledField f;
  f.domain = domain;
  f.n = n;
  f.values.resize(static_cast<std::size_t>(n) * n);
  f.omega.assign(f.values.size(), 0);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Vec2 x = f.cell_center(i, j);
      f.values[j * n + i] = u(x);
      if (in_omega && in_omega(x)) f.omega[j * n + i] = 1;
    }
  return f;
}

Vec2 SampledField::cell_center(int i, int j) const {
  const double h = domain.side / n;
  const double x0 = domain.center.x - 0.5 * domain.side;
  const double y0 = domain.center.y - 0.5 * domain.side;
  return {x0 + (i + 0.5) * h, y0 + (j + 0.5) * h};
}

double SampledField::cell_area() const {
  const double h = domain.side / n;
  return h * h;
}

double SampledField::sup_norm() const {
  double m = 0.0;
  for (const Vec2& w : values) m = std::max(m, norm(w));
  return m;
}

double SampledField::omega_measure() const {
  return static_cast<double>(std::count(omega.begin(), omega.end(), 1)) * cell_area();
}

double lp_distance(const SampledField& u, const AffineMap& A, double p) {
  double s = 0.0;
  for (int j = 0; j < u.n; ++j)
    for (int i = 0; i < u.n; ++i) {
      const int k = j * u.n + i;
      if (u.omega[k]) continue;
      s += std::pow(norm(u.values[k] - A(u.cell_center(i, j))), p);
    }
  return std::pow(s * u.cell_area(), 1.0 / p);
}

double lemma_constant(double p, double r, double R) {
  constexpr int n = 2;
  return 1.0 + std::pow(std::pow(2.0, n + 1) * std::pow(R, n + p) / (std::pow(r, p) * std::pow(R - r, n)), 1.0 / p);
}

double admissible_omega_measure(double r, double R) { return (R - r) * (R - r) / 8.0; }

namespace {

void check_geometry(const SampledField& u, const Square& inner, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("p must be at least 1");
  if (!(inner.side > 0.0) || !(inner.side < u.domain.side))
    throw std::invalid_argument("inner square must be strictly smaller than the sampled square");
  if (inner.center.x != u.domain.center.x || inner.center.y != u.domain.center.y)
    throw std::invalid_argument("inner and outer squares must be concentric");
  if (u.omega_measure() > admissible_omega_measure(inner.side, u.domain.side))
    throw std::invalid_argument("exceptional set exceeds (R - r)^2 / 8");
}

}  // namespace

RescaleResult rescale_affine(const AffineMap& A, const SampledField& u, const Square& inner, double p) {
  check_geometry(u, inner, p);
  RescaleResult out;
  RescaleCertificate& c = out.certificate;
  const VertexMax vm = vertex_max(A, inner);
  c.vertex = vm.vertex;
  c.sup_u = u.sup_norm();
  c.constant = lemma_constant(p, inner.side, u.domain.side);
  out.a = A;
  if (vm.value > c.sup_u) {
    c.rescaled = true;
    c.scale = c.sup_u / vm.value;
    out.a.W = c.scale * A.W;
    out.a.c = c.scale * A.c;
  }
  c.sup_a = vertex_max(out.a, inner).value;
  c.lp_before = lp_distance(u, A, p);
  c.lp_after = lp_distance(u, out.a, p);
  c.measured_ratio = c.lp_before > 0.0 ? c.lp_after / c.lp_before : (c.lp_after > 0.0 ? INFINITY : 1.0);
  return out;
}

Square outer_cube(const Square& inner, double outer_side, const Vec2& vertex) {
  const double r = inner.side;
  const double R = outer_side;
  const double f = (R + r) / (2.0 * r);
  return {inner.center + f * (vertex - inner.center), 0.5 * (R - r)};
}

KeyInequality key_inequality(const AffineMap& A, const SampledField& u, const Square& inner, double p) {
  check_geometry(u, inner, p);
  const VertexMax vm = vertex_max(A, inner);
  KeyInequality k;
  k.q = outer_cube(inner, u.domain.side, vm.vertex);
  const double gap = vm.value - u.sup_norm();
  k.lhs = 0.5 * k.q.area() * std::pow(std::max(gap, 0.0), p);

  double s = 0.0;
  for (int j = 0; j < u.n; ++j)
    for (int i = 0; i < u.n; ++i) {
      const int idx = j * u.n + i;
      if (u.omega[idx]) continue;
      s += std::pow(norm(A(u.cell_center(i, j)) - u.values[idx]), p);
    }
  k.rhs = s * u.cell_area();

  k.min_growth = INFINITY;
  constexpr int m = 16;
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      const Vec2 y{k.q.center.x - 0.5 * k.q.side + (i + 0.5) * k.q.side / m,
                   k.q.center.y - 0.5 * k.q.side + (j + 0.5) * k.q.side / m};
      k.min_growth = std::min(k.min_growth, norm(A(y)) - vm.value);
    }
  return k;
}

}  // namespace fissura

namespace fissura {

LemmaTrialStats run_lemma_trials(int trials, std::uint64_t seed, int samples, double p, double slack) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> ratio(0.2, 0.8);
  LemmaTrialStats st;
  st.trials = trials;
  st.min_constant = INFINITY;

  for (int trial = 0; trial < trials; ++trial) {
    const double R = 0.5 + 1.5 * (0.5 * (unit(rng) + 1.0));
    const double r = ratio(rng) * R;
    const Vec2 center{unit(rng), unit(rng)};
    const Square outer{center, R};
    const Square inner{center, r};

    const bool skew = trial % 2 == 0;
    AffineMap A;
    const double amp = 3.0 * (0.5 * (unit(rng) + 1.0)) + 0.1;
    if (skew) {
      const double w = amp * unit(rng);
      A.W = Mat2{0.0, -w, w, 0.0};
    } else {
      A.W = amp * Mat2{unit(rng), unit(rng), unit(rng), unit(rng)};
    }
    A.c = amp * Vec2{unit(rng), unit(rng)};

    const double M = 0.2 + 1.8 * (0.5 * (unit(rng) + 1.0));
    const Vec2 k{4.0 * unit(rng), 4.0 * unit(rng)};
    const double phase = 3.0 * unit(rng);
    const Vec2 jump_normal{unit(rng), unit(rng)};
    auto u = [&](Vec2 x) {
      const Vec2 y = x - center;
      const double s = dot(k, y) + phase;
      Vec2 w{std::sin(s), std::cos(1.3 * s)};
      if (dot(jump_normal, y) > 0.0) w = -0.5 * w;
      return (M / std::sqrt(2.0)) * w;
    };

    // Disk ω of measure at most the admissible bound after pixelization.
    const double budget = admissible_omega_measure(r, R);
    const Vec2 oc = center + 0.5 * R * Vec2{unit(rng), unit(rng)};
    double radius = std::sqrt(0.9 * budget / M_PI);
    SampledField field;
    for (;;) {
      field = SampledField::sample(outer, samples, u, [&](Vec2 x) { return norm(x - oc) < radius; });
      if (field.omega_measure() <= budget) break;
      radius *= 0.9;
    }

    const RescaleResult res = rescale_affine(A, field, inner, p);
    const RescaleCertificate& c = res.certificate;
    if (c.rescaled) ++st.rescaled;

    double sup_a = 0.0;
    const int m = samples;
    for (int j = 0; j <= m; ++j)
      for (int i = 0; i <= m; ++i) {
        const Vec2 x{center.x - 0.5 * r + r * i / m, center.y - 0.5 * r + r * j / m};
        sup_a = std::max(sup_a, norm(res.a(x)));
      }
    if (sup_a > c.sup_u * (1.0 + 1e-12)) ++st.linf_violations;
    if (c.lp_after > c.constant * c.lp_before * (1.0 + slack)) ++st.lp_violations;
    if (skew) {
      const SymTensor2 e = SymTensor2::sym(res.a.W);
      if (e.xx != 0.0 || e.yy != 0.0 || e.xy != 0.0) ++st.skew_violations;
    }
    if (c.rescaled) {
      const KeyInequality key = key_inequality(A, field, inner, p);
      const double scale = std::max(1.0, std::abs(vertex_max(A, inner).value));
      if (key.lhs > key.rhs * (1.0 + slack) || key.min_growth < -1e-12 * scale) ++st.key_violations;
    }
    st.max_measured_ratio = std::max(st.max_measured_ratio, c.measured_ratio);
    st.worst_ratio_over_constant = std::max(st.worst_ratio_over_constant, c.measured_ratio / c.constant);
    st.min_constant = std::min(st.min_constant, c.constant);
    st.max_constant = std::max(st.max_constant, c.constant);
  }
  return st;
}

}  // namespace fissura
