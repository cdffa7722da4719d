#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "fissura/grid.hpp"
#include "fissura/tensor.hpp"

namespace fissura {

enum class Variant { NonInterpenetration, ShearOnly, Masonry };

std::string to_string(Variant v);
Variant parse_variant(const std::string& name);  // throws std::invalid_argument

// Material and regularization parameters. Defaults are the normalized setting
// mu = 1, K = 2, G_c = 1 (so lambda = K - mu = 1 in two dimensions).
struct ModelParams {
  double mu = 1.0;
  double lame_lambda = 1.0;
  std::optional<double> k_interp;  // unset: k = K
  double Gc = 1.0;
  double eps = 0.05;
  double eta = 1e-6;
  std::optional<double> linf_bound;  // optional post-step clamp on |u| components
  Variant variant = Variant::NonInterpenetration;

  // Bulk modulus K = lambda + 2 mu / n with n = 2.
  double bulk_modulus() const { return lame_lambda + mu; }
  double k() const { return k_interp.value_or(bulk_modulus()); }
  void set_bulk_modulus(double K) { lame_lambda = K - mu; }

  // Throws std::invalid_argument on inadmissible values; returns warnings.
  std::vector<std::string> validate() const;
};

// Unhalved brackets of the bulk density: density = ½[(eta + v²) degradable + undegradable].
struct BulkBrackets {
  double degradable = 0.0;
  double undegradable = 0.0;
};

BulkBrackets bulk_brackets(const ModelParams& p, const SymTensor2& e);

struct BulkDensity {
  double modulated = 0.0;
  double unmodulated = 0.0;
  double total() const { return modulated + unmodulated; }
};

BulkDensity bulk_density(const ModelParams& p, const SymTensor2& e, double v);

// G_c (eps |grad v|² + (1 - v)²/(4 eps)).
double surface_density(const ModelParams& p, double v, const Vec2& grad_v);

// Gradient and generalized Hessian of ½·bracket with respect to the strain
// coordinates (e_xx, e_yy, e_xy), where e_xy is the tensor shear component. At
// trace or eigenvalue sign changes the positive branch is active only for
// strictly positive values.
struct BracketTangent {
  std::array<double, 3> grad{};
  std::array<double, 9> hess{};  // row-major 3x3, symmetric
};

struct BulkTangent {
  BracketTangent degradable;
  BracketTangent undegradable;
};

BulkTangent bulk_tangent(const ModelParams& p, const SymTensor2& e);

struct EnergyBreakdown {
  double bulk_modulated = 0.0;
  double bulk_unmodulated = 0.0;
  double surface_gradient = 0.0;
  double surface_well = 0.0;

  double bulk() const { return bulk_modulated + bulk_unmodulated; }
  double surface() const { return surface_gradient + surface_well; }
  double total() const { return bulk() + surface(); }
};

// 2x2 Gauss quadrature of bulk + surface densities over the grid.
EnergyBreakdown total_energy(const Field& u, const Field& v, const ModelParams& p);

// Sharp elastic density ½(2 mu |dev e|² + K (tr e)²).
double elastic_density(const ModelParams& p, const SymTensor2& e);

// Homogeneous reference state for a uniform strain: the optimal constant phase
// v* = 1/(1 + 2 eps a0 / G_c) with a0 the degradable bracket, and the energy
// density at (e, v*).
struct HomogeneousState {
  double v_star = 1.0;
  double degradable = 0.0;
  double undegradable = 0.0;
  double energy_density = 0.0;
};

HomogeneousState homogeneous_state(const ModelParams& p, const SymTensor2& e);

// ---- Sharp (limit) configurations ------------------------------------------

struct ConvexPolygon {
  std::vector<Vec2> vertices;  // counter-clockwise

  double area() const;
  bool contains(const Vec2& x, double tol = 1e-12) const;
  double distance(const Vec2& x) const;  // 0 inside
};

Vec2 closest_point_on_segment(const Vec2& x, const Vec2& p, const Vec2& q);
double point_segment_distance(const Vec2& x, const Vec2& p, const Vec2& q);

// Straight crack segment. The normal points to the "plus" side; the jump is
// u(plus) - u(minus).
struct CrackSegment {
  Vec2 p;
  Vec2 q;
  Vec2 normal;
  int plus_piece = -1;
  int minus_piece = -1;

  double length() const { return norm(q - p); }
};

struct CrackPath {
  std::vector<CrackSegment> segments;

  bool empty() const { return segments.empty(); }
  double length() const;
  // Segments only, no displacement pieces (used by distance and tube queries).
  static CrackPath from_segments(const std::vector<std::pair<Vec2, Vec2>>& segments);
};

struct AffinePiece {
  ConvexPolygon region;
  AffineMap u;
};

// Piecewise-affine displacement on (0,lx)x(0,ly) cracked along straight segments.
struct SharpConfig {
  double lx = 1.0;
  double ly = 1.0;
  std::vector<AffinePiece> pieces;
  CrackPath crack;

  static SharpConfig uncracked(double lx, double ly, const AffineMap& u);
  // Line through p and q cutting the rectangle in two. The plus side is the
  // one the left-turned direction (q - p)^⟂ points to.
  static SharpConfig straight_crack(double lx, double ly, Vec2 p, Vec2 q, const AffineMap& plus,
                                    const AffineMap& minus);

  // Index of the containing piece; outside the domain the nearest piece, which
  // extends u affinely past the boundary.
  int piece_at(const Vec2& x) const;
  Vec2 displacement(const Vec2& x) const { return pieces[piece_at(x)].u(x); }
  Vec2 jump(const CrackSegment& s, const Vec2& x) const;
};

// Whether a jump is admissible for the variant's limit constraint:
// [u]·nu >= 0, [u]·nu = 0, or [u] in R+ nu respectively.
bool jump_admissible(Variant v, const Vec2& jump, const Vec2& normal);

struct SharpEnergy {
  double bulk = 0.0;
  double surface = 0.0;
  bool constraint_ok = true;
  double total() const { return bulk + surface; }
};

// Exact limit energy of a piecewise-affine configuration. Throws
// std::invalid_argument if a segment leaves the domain.
SharpEnergy sharp_energy(const SharpConfig& config, const ModelParams& p);

}  // namespace fissura
