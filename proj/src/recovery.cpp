#include "fissura/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fissura/parallel.hpp"

namespace fissura {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double RecoveryParams::delta() const { return std::sqrt(eps * eta); }

double RecoveryParams::lattice_spacing() const {
  return std::min(eps * lattice_eps_fraction, mollifier_radius() / kernel_refinement);
}

RecoveryParams RecoveryParams::standard(double eps) {
  RecoveryParams rp;
  rp.eps = eps;
  rp.eta = eps * eps;
  return rp;
}

void RecoveryParams::validate() const {
  if (!(eps > 0.0)) throw std::invalid_argument("recovery eps must be positive");
  if (!(eta > 0.0)) throw std::invalid_argument("recovery eta must be positive (delta = sqrt(eps eta) > 0)");
  if (!(mollifier_radius_factor > 0.0)) throw std::invalid_argument("mollifier radius factor must be positive");
  if (!(lattice_eps_fraction > 0.0)) throw std::invalid_argument("lattice fraction must be positive");
  if (kernel_refinement < 4) throw std::invalid_argument("kernel refinement must be at least 4");
}

double optimal_profile(double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("optimal profile is defined for t >= 0");
  return -std::expm1(-0.5 * t);
}

double optimal_profile_derivative(double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("optimal profile is defined for t >= 0");
  return 0.5 * std::exp(-0.5 * t);
}

double profile_energy_halfline(double eps, double cutoff) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  auto density = [eps](double x) {
    const double dv = optimal_profile_derivative(x / eps) / eps;
    const double w = 1.0 - optimal_profile(x / eps);
    return eps * dv * dv + w * w / (4.0 * eps);
  };
  // Integrate in units of eps so panel placement does not depend on the scale.
  auto scaled = [&](double s) { return eps * density(eps * s); };
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(scaled, 0.0, cutoff, 20, 1e-15, &err);
}

double crack_distance(const CrackPath& crack, const Vec2& x) {
  double d = kInf;
  for (const CrackSegment& s : crack.segments) d = std::min(d, point_segment_distance(x, s.p, s.q));
  return d;
}

Field distance_field(const CrackPath& crack, const Grid& grid) {
  Field out = Field::zeros(grid, 1);
  parallel_for(grid.node_count(), [&](int n) { out.values[n] = crack_distance(crack, grid.node_position(n)); });
  return out;
}

double v_recovery_at(const CrackPath& crack, const RecoveryParams& rp, const Vec2& x) {
  const double d = crack_distance(crack, x);
  if (d == kInf) return 1.0;
  return optimal_profile(std::max(d - rp.delta(), 0.0) / rp.eps);
}

Vec2 v_recovery_gradient(const CrackPath& crack, const RecoveryParams& rp, const Vec2& x) {
  double best = kInf;
  Vec2 closest;
  for (const CrackSegment& s : crack.segments) {
    const Vec2 c = closest_point_on_segment(x, s.p, s.q);
    const double d = norm(x - c);
    if (d < best) {
      best = d;
      closest = c;
    }
  }
  if (best == kInf || best <= rp.delta()) return {};
  const double slope = optimal_profile_derivative((best - rp.delta()) / rp.eps) / rp.eps;
  return (slope / best) * (x - closest);
}

Field build_v_recovery(const CrackPath& crack, const RecoveryParams& rp, const Grid& grid) {
  Field out = Field::zeros(grid, 1);
  parallel_for(grid.node_count(), [&](int n) { out.values[n] = v_recovery_at(crack, rp, grid.node_position(n)); });
  return out;
}

double bump(double r) {
  if (!(r < 1.0)) return 0.0;
  return std::exp(-1.0 / (1.0 - r * r));
}

Field mollify_u(const std::function<Vec2(Vec2)>& u_sharp, double radius, const Grid& grid) {
  const double hx = grid.hx();
  const double hy = grid.hy();
  if (!(radius >= 4.0 * std::max(hx, hy) * (1.0 - 1e-12)))
    throw std::invalid_argument("mollifier radius is below the sampling lattice resolution (needs >= 4 cells)");

  const int px = static_cast<int>(std::ceil(radius / hx));
  const int py = static_cast<int>(std::ceil(radius / hy));

  struct Tap {
    int di, dj;
    double w;
  };
  std::vector<Tap> taps;
  double total = 0.0;
  for (int dj = -py; dj <= py; ++dj)
    for (int di = -px; di <= px; ++di) {
      const double w = bump(std::hypot(di * hx, dj * hy) / radius);
      if (w > 0.0) {
        taps.push_back({di, dj, w});
        total += w;
      }
    }
  for (Tap& t : taps) t.w /= total;

  // Sharp samples on the padded lattice.
  const int sx = grid.nx() + 1 + 2 * px;
  const int sy = grid.ny() + 1 + 2 * py;
  std::vector<double> samples(2 * static_cast<std::size_t>(sx) * sy);
  parallel_for(sy, [&](int j) {
    for (int i = 0; i < sx; ++i) {
      const Vec2 x{(i - px) * hx, (j - py) * hy};
      const Vec2 w = u_sharp(x);
      const std::size_t k = 2 * (static_cast<std::size_t>(j) * sx + i);
      samples[k] = w.x;
      samples[k + 1] = w.y;
    }
  });

  Field out = Field::zeros(grid, 2);
  const int nx1 = grid.nx() + 1;
  parallel_for(grid.ny() + 1, [&](int j) {
    for (int i = 0; i < nx1; ++i) {
      double ax = 0.0, ay = 0.0;
      for (const Tap& t : taps) {
        const std::size_t k = 2 * (static_cast<std::size_t>(j + py + t.dj) * sx + (i + px + t.di));
        ax += t.w * samples[k];
        ay += t.w * samples[k + 1];
      }
      const int n = grid.node(i, j);
      out.values[2 * n] = ax;
      out.values[2 * n + 1] = ay;
    }
  });
  return out;
}

Field mollify_u(const SharpConfig& config, double radius, const Grid& grid) {
  return mollify_u([&config](Vec2 x) { return config.displacement(x); }, radius, grid);
}

double negative_divergence_l2(const Field& u) {
  const Grid& g = u.grid;
  std::vector<double> parts(g.element_count());
  for_each_element(g, [&](int e) {
    double s = 0.0;
    for (int q = 0; q < kQuadPoints; ++q) {
      const double d = std::min(strain_at_qp(u, e, q).trace(), 0.0);
      s += d * d;
    }
    parts[e] = g.qp_weight() * s;
  });
  return std::sqrt(pairwise_sum(parts.data(), parts.size()));
}

double max_strain_norm(const Field& u) {
  const Grid& g = u.grid;
  std::vector<double> parts(g.element_count());
  for_each_element(g, [&](int e) {
    double m = 0.0;
    for (int q = 0; q < kQuadPoints; ++q) m = std::max(m, strain_at_qp(u, e, q).norm());
    parts[e] = m;
  });
  return parts.empty() ? 0.0 : *std::max_element(parts.begin(), parts.end());
}

double minkowski_estimate(const CrackPath& crack, double t, std::optional<Box> domain, int samples_per_t) {
  if (!(t > 0.0)) throw std::invalid_argument("tube radius must be positive");
  if (samples_per_t < 1) throw std::invalid_argument("samples_per_t must be positive");
  if (crack.empty()) return 0.0;

  Box box{{kInf, kInf}, {-kInf, -kInf}};
  for (const CrackSegment& s : crack.segments)
    for (const Vec2& x : {s.p, s.q}) {
      box.lo = {std::min(box.lo.x, x.x - t), std::min(box.lo.y, x.y - t)};
      box.hi = {std::max(box.hi.x, x.x + t), std::max(box.hi.y, x.y + t)};
    }
  if (domain) {
    box.lo = {std::max(box.lo.x, domain->lo.x), std::max(box.lo.y, domain->lo.y)};
    box.hi = {std::min(box.hi.x, domain->hi.x), std::min(box.hi.y, domain->hi.y)};
    if (box.hi.x <= box.lo.x || box.hi.y <= box.lo.y) return 0.0;
  }

  const double h = t / samples_per_t;
  const int nx = std::max(1, static_cast<int>(std::ceil((box.hi.x - box.lo.x) / h)));
  const int ny = std::max(1, static_cast<int>(std::ceil((box.hi.y - box.lo.y) / h)));
  const double hx = (box.hi.x - box.lo.x) / nx;
  const double hy = (box.hi.y - box.lo.y) / ny;
  std::vector<double> rows(ny);
  parallel_for(ny, [&](int j) {
    long count = 0;
    const double y = box.lo.y + (j + 0.5) * hy;
    for (int i = 0; i < nx; ++i)
      if (crack_distance(crack, {box.lo.x + (i + 0.5) * hx, y}) <= t) ++count;
    rows[j] = static_cast<double>(count);
  });
  const double area = pairwise_sum(rows.data(), rows.size()) * hx * hy;
  return area / (2.0 * t);
}

namespace {

bool segments_intersect(const CrackSegment& a, const CrackSegment& b) {
  const Vec2 r = a.q - a.p;
  const Vec2 s = b.q - b.p;
  const double denom = cross(r, s);
  if (denom == 0.0) return false;
  const double ta = cross(b.p - a.p, s) / denom;
  const double tb = cross(b.p - a.p, r) / denom;
  return ta >= 0.0 && ta <= 1.0 && tb >= 0.0 && tb <= 1.0;
}

double segment_distance(const CrackSegment& a, const CrackSegment& b) {
  if (segments_intersect(a, b)) return 0.0;
  return std::min({point_segment_distance(a.p, b.p, b.q), point_segment_distance(a.q, b.p, b.q),
                   point_segment_distance(b.p, a.p, a.q), point_segment_distance(b.q, a.p, a.q)});
}

}  // namespace

double minkowski_estimate_exact(const CrackPath& crack, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("tube radius must be positive");
  const auto& segs = crack.segments;
  for (std::size_t i = 0; i < segs.size(); ++i)
    for (std::size_t j = i + 1; j < segs.size(); ++j)
      if (segment_distance(segs[i], segs[j]) <= 2.0 * t)
        throw std::invalid_argument("tubes of radius t overlap; exact formula does not apply");
  double area = 0.0;
  for (const CrackSegment& s : segs) area += 2.0 * t * s.length() + M_PI * t * t;
  return area / (2.0 * t);
}

RecoveryReport recovery_energy_check(const SharpConfig& config, const ModelParams& params,
                                     const RecoveryParams& rp) {
  rp.validate();
  const SharpEnergy sharp = sharp_energy(config, params);
  if (!sharp.constraint_ok)
    throw std::invalid_argument("configuration violates the " + to_string(params.variant) +
                                " jump constraint; no recovery bound applies");

  ModelParams pe = params;
  pe.eps = rp.eps;
  pe.eta = rp.eta;

  const double h = rp.lattice_spacing();
  const int nx = std::max(2, static_cast<int>(std::ceil(config.lx / h - 1e-9)));
  const int ny = std::max(2, static_cast<int>(std::ceil(config.ly / h - 1e-9)));
  const Grid lattice(nx, ny, config.lx, config.ly);

  const Field u_eps = mollify_u(config, rp.mollifier_radius(), lattice);
  const Field v_eps = build_v_recovery(config.crack, rp, lattice);

  RecoveryReport rep;
  rep.regularized = total_energy(u_eps, v_eps, pe);
  rep.sharp = sharp;
  rep.ratio_total = rep.regularized.total() / sharp.total();
  rep.ratio_bulk = sharp.bulk > 0.0 ? rep.regularized.bulk() / sharp.bulk : std::nan("");
  rep.ratio_surface = sharp.surface > 0.0 ? rep.regularized.surface() / sharp.surface : std::nan("");
  rep.ell = rp.ell();
  rep.delta = rp.delta();
  rep.lattice_h = std::max(lattice.hx(), lattice.hy());
  rep.lattice_n = std::max(nx, ny);
  rep.div_minus_l2 = negative_divergence_l2(u_eps);

  // ||u||_inf of a piecewise-affine field is attained at polygon vertices.
  double sup = 0.0;
  for (const AffinePiece& piece : config.pieces)
    for (const Vec2& x : piece.region.vertices) sup = std::max(sup, norm(piece.u(x)));
  rep.strain_constant = sup > 0.0 ? max_strain_norm(u_eps) * rp.delta() / sup : 0.0;
  return rep;
}

}  // namespace fissura
