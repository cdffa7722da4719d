#pragma once

#include <optional>

#include "fissura/energy.hpp"
#include "fissura/grid.hpp"

namespace fissura {

// Scales of the recovery construction. The tube half-width is
// delta = sqrt(eps eta) and ell = delta / eps.
struct RecoveryParams {
  double eps = 0.02;
  double eta = 4e-4;
  double mollifier_radius_factor = 1.0;  // mollifier support radius = factor * delta
  double lattice_eps_fraction = 0.125;   // lattice spacing <= eps / 8
  int kernel_refinement = 4;             // lattice spacing <= radius / 4

  double delta() const;
  double ell() const { return delta() / eps; }
  double mollifier_radius() const { return mollifier_radius_factor * delta(); }
  // Spacing used by the recovery harness: min(eps * fraction, radius / refinement).
  double lattice_spacing() const;

  // eta = eps², so delta = eps^{3/2} and ell = sqrt(eps).
  static RecoveryParams standard(double eps);
  void validate() const;
};

// 1 - exp(-t/2); throws std::invalid_argument for t < 0.
double optimal_profile(double t);
double optimal_profile_derivative(double t);

// ∫_0^{cutoff·eps} eps |d/dx γ(x/eps)|² + (1 - γ(x/eps))²/(4 eps) dx, i.e. the
// one-sided surface energy of the optimal profile with G_c = 1.
double profile_energy_halfline(double eps, double cutoff = 40.0);

// Exact nodal distance to the crack; +inf for an empty crack.
Field distance_field(const CrackPath& crack, const Grid& grid);
double crack_distance(const CrackPath& crack, const Vec2& x);

// v = γ((dist - delta)^+ / eps).
double v_recovery_at(const CrackPath& crack, const RecoveryParams& rp, const Vec2& x);
// Analytic gradient of v (zero inside the delta tube and for an empty crack).
Vec2 v_recovery_gradient(const CrackPath& crack, const RecoveryParams& rp, const Vec2& x);
Field build_v_recovery(const CrackPath& crack, const RecoveryParams& rp, const Grid& grid);

// Standard C-infinity bump exp(-1/(1 - r²)) on r < 1, unnormalized.
double bump(double r);

// Discrete convolution of the sampled sharp displacement with the normalized
// bump of support radius `radius`, evaluated at the grid nodes. The sharp field
// is sampled on the grid lattice padded past the boundary (extended affinely).
// Throws std::invalid_argument if radius < 4 max(hx, hy).
Field mollify_u(const std::function<Vec2(Vec2)>& u_sharp, double radius, const Grid& grid);
Field mollify_u(const SharpConfig& config, double radius, const Grid& grid);

// L² norm of the negative part of div u over the grid (2x2 Gauss).
double negative_divergence_l2(const Field& u);
// Largest strain norm at any Gauss point.
double max_strain_norm(const Field& u);

struct Box {
  Vec2 lo;
  Vec2 hi;
};

// |{x : dist(x, crack) <= t}| / (2t) by midpoint sampling on a lattice of
// spacing t / samples_per_t; restricted to `domain` when given.
double minkowski_estimate(const CrackPath& crack, double t, std::optional<Box> domain = std::nullopt,
                          int samples_per_t = 64);
// Exact tube formula Σ (2 t L + π t²) / (2t); throws if two tubes overlap.
double minkowski_estimate_exact(const CrackPath& crack, double t);

struct RecoveryReport {
  EnergyBreakdown regularized;  // E_eps(u_eps, v_eps)
  SharpEnergy sharp;
  double ratio_total = 0.0;
  double ratio_bulk = 0.0;     // NaN when the sharp bulk energy vanishes
  double ratio_surface = 0.0;  // NaN for an uncracked configuration
  double ell = 0.0;
  double delta = 0.0;
  double lattice_h = 0.0;
  int lattice_n = 0;
  double div_minus_l2 = 0.0;
  double strain_constant = 0.0;  // max |E(u_eps)| * delta / ||u||_inf
};

// Builds (u_eps, v_eps) for a sharp configuration on a lattice fine enough for
// both eps and the mollifier, and compares E_eps with the sharp energy. Throws
// std::invalid_argument if the configuration violates the variant's constraint.
RecoveryReport recovery_energy_check(const SharpConfig& config, const ModelParams& params, const RecoveryParams& rp);

}  // namespace fissura
