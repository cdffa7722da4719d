#include "fissura/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fissura/parallel.hpp"

namespace fissura {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::NonInterpenetration: return "non_interpenetration";
    case Variant::ShearOnly: return "shear_only";
    case Variant::Masonry: return "masonry";
  }
  return "unknown";
}

Variant parse_variant(const std::string& name) {
  if (name == "non_interpenetration") return Variant::NonInterpenetration;
  if (name == "shear_only") return Variant::ShearOnly;
  if (name == "masonry") return Variant::Masonry;
  throw std::invalid_argument("unknown model variant '" + name + "'");
}

std::vector<std::string> ModelParams::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
  if (!(mu > 0.0)) fail("mu must be positive");
  if (!(lame_lambda > -mu)) fail("lambda must exceed -mu (bulk modulus K = lambda + mu > 0)");
  if (!(Gc > 0.0)) fail("G_c must be positive");
  if (!(eps > 0.0)) fail("eps must be positive");
  if (!(eta >= 0.0)) fail("eta must be non-negative");
  const double K = bulk_modulus();
  if (!(k() >= 0.0 && k() <= K)) fail("k must lie in [0, K]");
  if (linf_bound && !(*linf_bound > 0.0)) fail("L-infinity bound must be positive");

  std::vector<std::string> warnings;
  if (eta > eps) warnings.push_back("eta exceeds eps; the regularization assumes eta << eps");
  if (variant == Variant::Masonry && lame_lambda < 0.0)
    warnings.push_back("masonry density with lambda < 0 may be non-convex in the strain");
  return warnings;
}

// ---- densities ----------------------------------------------------------------

namespace {

double pos(double x) { return x > 0.0 ? x : 0.0; }
double neg_part(double x) { return x < 0.0 ? -x : 0.0; }

// Unhalved PSD-cone bracket 2 mu |P|² + lambda (tr P)² of the projected tensor.
double cone_bracket(const ModelParams& p, const SymTensor2& t) {
  const double tr = t.trace();
  return 2.0 * p.mu * t.norm2() + p.lame_lambda * tr * tr;
}

// Hessian contributions in strain coordinates for the constant 3x3 blocks.
constexpr std::array<double, 9> kDevHess{1.0, -1.0, 0.0, -1.0, 1.0, 0.0, 0.0, 0.0, 4.0};
constexpr std::array<double, 9> kTraceHess{1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0};

void axpy(double a, const std::array<double, 9>& x, std::array<double, 9>& y) {
  for (int i = 0; i < 9; ++i) y[i] += a * x[i];
}

// Isotropic function F(lambda1, lambda2) of the eigenvalues: first and second
// partial derivatives.
struct SpectralDerivs {
  double d1 = 0.0, d2 = 0.0;
  double d11 = 0.0, d12 = 0.0, d22 = 0.0;
};

// F = ½[2 mu (s1² + s2²) + lambda (s1 + s2)²] with s_i the positive (sign = +1)
// or negative (sign = -1) part of lambda_i.
SpectralDerivs cone_derivs(const ModelParams& p, const EigenPair2& ep, int sign) {
  auto active = [sign](double l) { return sign > 0 ? l > 0.0 : !(l > 0.0); };
  const bool a1 = active(ep.lambda1);
  const bool a2 = active(ep.lambda2);
  const double s1 = a1 ? ep.lambda1 : 0.0;
  const double s2 = a2 ? ep.lambda2 : 0.0;
  const double h1 = a1 ? 1.0 : 0.0;
  const double h2 = a2 ? 1.0 : 0.0;
  SpectralDerivs d;
  d.d1 = 2.0 * p.mu * s1 + p.lame_lambda * (s1 + s2) * h1;
  d.d2 = 2.0 * p.mu * s2 + p.lame_lambda * (s1 + s2) * h2;
  d.d11 = 2.0 * p.mu * h1 + p.lame_lambda * h1;
  d.d22 = 2.0 * p.mu * h2 + p.lame_lambda * h2;
  d.d12 = p.lame_lambda * h1 * h2;
  return d;
}

// Gradient and Hessian in strain coordinates of an isotropic spectral function.
BracketTangent spectral_tangent(const EigenPair2& ep, const SpectralDerivs& d) {
  BracketTangent out;
  const SymTensor2 g = from_eigen(d.d1, d.d2, ep.e1, ep.e2);
  out.grad = {g.xx, g.yy, 2.0 * g.xy};

  const double gap = ep.lambda1 - ep.lambda2;
  const double scale = std::abs(ep.lambda1) + std::abs(ep.lambda2);
  const double off = gap > 1e-12 * scale && gap > 0.0 ? (d.d1 - d.d2) / gap : d.d11 - d.d12;

  const SymTensor2 basis[3] = {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}};
  const Vec2& e1 = ep.e1;
  const Vec2& e2 = ep.e2;
  for (int k = 0; k < 3; ++k) {
    const SymTensor2& P = basis[k];
    const Vec2 Pe1{P.xx * e1.x + P.xy * e1.y, P.xy * e1.x + P.yy * e1.y};
    const Vec2 Pe2{P.xx * e2.x + P.xy * e2.y, P.xy * e2.x + P.yy * e2.y};
    const double p11 = dot(e1, Pe1);
    const double p22 = dot(e2, Pe2);
    const double p12 = dot(e1, Pe2);
    const double g11 = d.d11 * p11 + d.d12 * p22;
    const double g22 = d.d12 * p11 + d.d22 * p22;
    const double g12 = off * p12;
    const SymTensor2 dG{g11 * e1.x * e1.x + g22 * e2.x * e2.x + 2.0 * g12 * e1.x * e2.x,
                        g11 * e1.y * e1.y + g22 * e2.y * e2.y + 2.0 * g12 * e1.y * e2.y,
                        g11 * e1.x * e1.y + g22 * e2.x * e2.y + g12 * (e1.x * e2.y + e1.y * e2.x)};
    out.hess[0 * 3 + k] = dG.xx;
    out.hess[1 * 3 + k] = dG.yy;
    out.hess[2 * 3 + k] = 2.0 * dG.xy;
  }
  return out;
}

}  // namespace

BulkBrackets bulk_brackets(const ModelParams& p, const SymTensor2& e) {
  const double d = e.trace();
  switch (p.variant) {
    case Variant::NonInterpenetration: {
      const double K = p.bulk_modulus();
      const double k = p.k();
      const double dp = pos(d);
      const double dm = neg_part(d);
      return {2.0 * p.mu * deviatoric(e).norm2() + (K - k) * d * d + k * dp * dp, k * dm * dm};
    }
    case Variant::ShearOnly:
      return {2.0 * p.mu * deviatoric(e).norm2(), p.bulk_modulus() * d * d};
    case Variant::Masonry: {
      const PsdSplit split = psd_project(e);
      return {cone_bracket(p, split.plus), cone_bracket(p, split.minus)};
    }
  }
  return {};
}

BulkDensity bulk_density(const ModelParams& p, const SymTensor2& e, double v) {
  const BulkBrackets b = bulk_brackets(p, e);
  return {0.5 * (p.eta + v * v) * b.degradable, 0.5 * b.undegradable};
}

double surface_density(const ModelParams& p, double v, const Vec2& grad_v) {
  const double w = 1.0 - v;
  return p.Gc * (p.eps * dot(grad_v, grad_v) + w * w / (4.0 * p.eps));
}

BulkTangent bulk_tangent(const ModelParams& p, const SymTensor2& e) {
  BulkTangent t;
  const double d = e.trace();
  switch (p.variant) {
    case Variant::NonInterpenetration:
    case Variant::ShearOnly: {
      const double K = p.bulk_modulus();
      const SymTensor2 dev = deviatoric(e);
      // ½ 2mu|dev e|²
      t.degradable.grad = {2.0 * p.mu * dev.xx, 2.0 * p.mu * dev.yy, 4.0 * p.mu * dev.xy};
      axpy(p.mu, kDevHess, t.degradable.hess);
      if (p.variant == Variant::ShearOnly) {
        t.undegradable.grad = {K * d, K * d, 0.0};
        axpy(K, kTraceHess, t.undegradable.hess);
        break;
      }
      const double k = p.k();
      const bool opening = d > 0.0;
      const double slope = (K - k) * d + (opening ? k * d : 0.0);
      t.degradable.grad[0] += slope;
      t.degradable.grad[1] += slope;
      axpy((K - k) + (opening ? k : 0.0), kTraceHess, t.degradable.hess);
      const double closing = opening ? 0.0 : k * d;
      t.undegradable.grad = {closing, closing, 0.0};
      axpy(opening ? 0.0 : k, kTraceHess, t.undegradable.hess);
      break;
    }
    case Variant::Masonry: {
      const EigenPair2 ep = eigen(e);
      t.degradable = spectral_tangent(ep, cone_derivs(p, ep, +1));
      t.undegradable = spectral_tangent(ep, cone_derivs(p, ep, -1));
      break;
    }
  }
  return t;
}

double elastic_density(const ModelParams& p, const SymTensor2& e) {
  const double d = e.trace();
  return 0.5 * (2.0 * p.mu * deviatoric(e).norm2() + p.bulk_modulus() * d * d);
}

HomogeneousState homogeneous_state(const ModelParams& p, const SymTensor2& e) {
  const BulkBrackets b = bulk_brackets(p, e);
  HomogeneousState s;
  s.degradable = b.degradable;
  s.undegradable = b.undegradable;
  s.v_star = 1.0 / (1.0 + 2.0 * p.eps * b.degradable / p.Gc);
  s.energy_density = bulk_density(p, e, s.v_star).total() + surface_density(p, s.v_star, {});
  return s;
}

EnergyBreakdown total_energy(const Field& u, const Field& v, const ModelParams& p) {
  if (u.components != 2 || v.components != 1)
    throw std::invalid_argument("total_energy expects a displacement and a phase field");
  if (!(u.grid == v.grid)) throw std::invalid_argument("total_energy: fields live on different grids");

  const Grid& g = u.grid;
  const int ne = g.element_count();
  std::vector<double> parts(4 * static_cast<std::size_t>(ne));
  const double w = g.qp_weight();
  for_each_element(g, [&](int e) {
    double bm = 0.0, bu = 0.0, sg = 0.0, sw = 0.0;
    for (int q = 0; q < kQuadPoints; ++q) {
      const SymTensor2 eps_u = strain_at_qp(u, e, q);
      const ValueGrad vg = value_and_grad_at_qp(v, e, q);
      const double vq = lumped_value_at_qp(v, e, q);
      const BulkDensity b = bulk_density(p, eps_u, vq);
      bm += b.modulated;
      bu += b.unmodulated;
      sg += p.Gc * p.eps * dot(vg.grad, vg.grad);
      const double r = 1.0 - vq;
      sw += p.Gc * r * r / (4.0 * p.eps);
    }
    parts[e] = w * bm;
    parts[ne + e] = w * bu;
    parts[2 * ne + e] = w * sg;
    parts[3 * ne + e] = w * sw;
  });
  EnergyBreakdown out;
  out.bulk_modulated = pairwise_sum(parts.data(), ne);
  out.bulk_unmodulated = pairwise_sum(parts.data() + ne, ne);
  out.surface_gradient = pairwise_sum(parts.data() + 2 * ne, ne);
  out.surface_well = pairwise_sum(parts.data() + 3 * ne, ne);
  return out;
}

// ---- geometry -------------------------------------------------------------------

Vec2 closest_point_on_segment(const Vec2& x, const Vec2& p, const Vec2& q) {
  const Vec2 d = q - p;
  const double len2 = dot(d, d);
  if (len2 == 0.0) return p;
  const double s = std::clamp(dot(x - p, d) / len2, 0.0, 1.0);
  return p + s * d;
}

double point_segment_distance(const Vec2& x, const Vec2& p, const Vec2& q) {
  return norm(x - closest_point_on_segment(x, p, q));
}

double ConvexPolygon::area() const {
  double a = 0.0;
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) a += cross(vertices[i], vertices[(i + 1) % n]);
  return 0.5 * a;
}

bool ConvexPolygon::contains(const Vec2& x, double tol) const {
  const std::size_t n = vertices.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = vertices[i];
    const Vec2& b = vertices[(i + 1) % n];
    const Vec2 edge = b - a;
    if (cross(edge, x - a) < -tol * norm(edge)) return false;
  }
  return true;
}

double ConvexPolygon::distance(const Vec2& x) const {
  if (contains(x, 0.0)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i)
    best = std::min(best, point_segment_distance(x, vertices[i], vertices[(i + 1) % n]));
  return best;
}

double CrackPath::length() const {
  double l = 0.0;
  for (const auto& s : segments) l += s.length();
  return l;
}

CrackPath CrackPath::from_segments(const std::vector<std::pair<Vec2, Vec2>>& segments) {
  CrackPath c;
  for (const auto& [p, q] : segments) {
    const Vec2 d = q - p;
    const double len = norm(d);
    const Vec2 n = len > 0.0 ? Vec2{-d.y / len, d.x / len} : Vec2{0.0, 1.0};
    c.segments.push_back({p, q, n, -1, -1});
  }
  return c;
}

namespace {

ConvexPolygon rectangle(double lx, double ly) { return {{{0.0, 0.0}, {lx, 0.0}, {lx, ly}, {0.0, ly}}}; }

// Keeps the part of poly where (x - p)·n >= 0.
ConvexPolygon clip(const ConvexPolygon& poly, const Vec2& p, const Vec2& n) {
  ConvexPolygon out;
  const std::size_t m = poly.vertices.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2& a = poly.vertices[i];
    const Vec2& b = poly.vertices[(i + 1) % m];
    const double sa = dot(a - p, n);
    const double sb = dot(b - p, n);
    if (sa >= 0.0) out.vertices.push_back(a);
    if ((sa > 0.0 && sb < 0.0) || (sa < 0.0 && sb > 0.0)) {
      const double s = sa / (sa - sb);
      out.vertices.push_back(a + s * (b - a));
    }
  }
  // Drop consecutive duplicates created by vertices lying on the line.
  std::vector<Vec2> clean;
  for (const Vec2& v : out.vertices)
    if (clean.empty() || norm(v - clean.back()) > 1e-14) clean.push_back(v);
  if (clean.size() > 1 && norm(clean.front() - clean.back()) <= 1e-14) clean.pop_back();
  out.vertices = std::move(clean);
  return out;
}

}  // namespace

SharpConfig SharpConfig::uncracked(double lx, double ly, const AffineMap& u) {
  SharpConfig c;
  c.lx = lx;
  c.ly = ly;
  c.pieces.push_back({rectangle(lx, ly), u});
  return c;
}

SharpConfig SharpConfig::straight_crack(double lx, double ly, Vec2 p, Vec2 q, const AffineMap& plus,
                                        const AffineMap& minus) {
  const Vec2 d = q - p;
  const double len = norm(d);
  if (!(len > 0.0)) throw std::invalid_argument("crack line needs two distinct points");
  const Vec2 n{-d.y / len, d.x / len};

  const ConvexPolygon rect = rectangle(lx, ly);
  ConvexPolygon upper = clip(rect, p, n);
  ConvexPolygon lower = clip(rect, p, -n);
  if (upper.vertices.size() < 3 || lower.vertices.size() < 3 || upper.area() <= 0.0 || lower.area() <= 0.0)
    throw std::invalid_argument("crack line does not cut the domain");

  // Chord endpoints: vertices of the clipped piece on the line, farthest apart.
  std::vector<Vec2> on_line;
  const double tol = 1e-12 * std::max(lx, ly);
  for (const Vec2& v : upper.vertices)
    if (std::abs(dot(v - p, n)) <= tol) on_line.push_back(v);
  if (on_line.size() < 2) throw std::invalid_argument("crack line does not cut the domain");
  Vec2 a = on_line[0], b = on_line[1];
  for (std::size_t i = 0; i < on_line.size(); ++i)
    for (std::size_t j = i + 1; j < on_line.size(); ++j)
      if (norm(on_line[i] - on_line[j]) > norm(a - b)) {
        a = on_line[i];
        b = on_line[j];
      }
  if (dot(b - a, d) < 0.0) std::swap(a, b);

  SharpConfig c;
  c.lx = lx;
  c.ly = ly;
  c.pieces.push_back({std::move(upper), plus});
  c.pieces.push_back({std::move(lower), minus});
  c.crack.segments.push_back({a, b, n, 0, 1});
  return c;
}

int SharpConfig::piece_at(const Vec2& x) const {
  if (pieces.empty()) throw std::logic_error("sharp configuration has no pieces");
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const double dist = pieces[i].region.distance(x);
    if (dist == 0.0) return static_cast<int>(i);
    if (dist < best_d) {
      best_d = dist;
      best = static_cast<int>(i);
    }
  }
  return best;
}

Vec2 SharpConfig::jump(const CrackSegment& s, const Vec2& x) const {
  if (s.plus_piece < 0 || s.minus_piece < 0) return {};
  return pieces[s.plus_piece].u(x) - pieces[s.minus_piece].u(x);
}

bool jump_admissible(Variant v, const Vec2& jump, const Vec2& normal) {
  const double tol = 1e-12 * std::max(1.0, norm(jump));
  const double opening = dot(jump, normal);
  switch (v) {
    case Variant::NonInterpenetration: return opening >= -tol;
    case Variant::ShearOnly: return std::abs(opening) <= tol;
    case Variant::Masonry: return opening >= -tol && std::abs(cross(jump, normal)) <= tol;
  }
  return false;
}

SharpEnergy sharp_energy(const SharpConfig& config, const ModelParams& p) {
  const double tol = 1e-12 * std::max(config.lx, config.ly);
  auto inside = [&](const Vec2& x) {
    return x.x >= -tol && x.y >= -tol && x.x <= config.lx + tol && x.y <= config.ly + tol;
  };

  SharpEnergy out;
  double area = 0.0;
  for (const AffinePiece& piece : config.pieces) {
    const double a = piece.region.area();
    area += a;
    out.bulk += a * elastic_density(p, strain_of(piece.u));
  }
  if (std::abs(area - config.lx * config.ly) > 1e-9 * config.lx * config.ly)
    throw std::invalid_argument("sharp configuration pieces do not tile the domain");

  for (const CrackSegment& s : config.crack.segments) {
    if (!inside(s.p) || !inside(s.q)) throw std::invalid_argument("crack segment leaves the domain");
    // The jump is affine along the segment, so its endpoints decide admissibility.
    const Vec2 jp = config.jump(s, s.p);
    const Vec2 jq = config.jump(s, s.q);
    const double scale = std::max({1.0, norm(jp), norm(jq)});
    if (norm(jp) <= 1e-14 * scale && norm(jq) <= 1e-14 * scale) continue;  // no discontinuity
    out.surface += p.Gc * s.length();
    if (!jump_admissible(p.variant, jp, s.normal) || !jump_admissible(p.variant, jq, s.normal))
      out.constraint_ok = false;
  }
  return out;
}

}  // namespace fissura
