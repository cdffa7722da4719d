#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "fissura/tensor.hpp"

namespace fissura {

// Axis-aligned open square center + (-side/2, side/2)².
struct Square {
  Vec2 center;
  double side = 1.0;

  // Corners in lexicographic order of (x, y).
  std::vector<Vec2> vertices() const;
  bool contains(const Vec2& x) const;
  double area() const { return side * side; }
};

struct VertexMax {
  Vec2 vertex;
  double value = 0.0;
};

// Vertex of q maximizing |A|; the first vertex in lexicographic order wins ties.
VertexMax vertex_max(const AffineMap& A, const Square& q);

// Bounded field sampled at the midpoints of an n x n cell lattice on a square,
// with an optional exceptional set marked per cell.
struct SampledField {
  Square domain;
  int n = 0;
  std::vector<Vec2> values;  // row-major, index j*n + i
  std::vector<char> omega;   // 1 if the cell belongs to the exceptional set

  static SampledField sample(const Square& domain, int n, const std::function<Vec2(Vec2)>& u,
                             const std::function<bool(Vec2)>& in_omega = {});

  Vec2 cell_center(int i, int j) const;
  double cell_area() const;
  double sup_norm() const;
  double omega_measure() const;
};

// (Σ_{cells ∉ ω} |u - A|^p · cell area)^{1/p}.
double lp_distance(const SampledField& u, const AffineMap& A, double p);

// 1 + (2^{n+1} R^{n+p} / (r^p (R - r)^n))^{1/p} with n = 2.
double lemma_constant(double p, double r, double R);

// Largest |ω| allowed for inner side r and outer side R: (R - r)² / 8.
double admissible_omega_measure(double r, double R);

struct RescaleCertificate {
  bool rescaled = false;
  double scale = 1.0;         // a = scale · A
  Vec2 vertex;                // maximizing vertex of the inner square
  double sup_u = 0.0;         // ||u||_inf on the outer square
  double sup_a = 0.0;         // ||a||_inf on the inner square
  double constant = 0.0;      // explicit bound c
  double lp_before = 0.0;     // ||u - A||_p off ω
  double lp_after = 0.0;      // ||u - a||_p off ω
  double measured_ratio = 0.0;
};

struct RescaleResult {
  AffineMap a;
  RescaleCertificate certificate;
};

// Affine map a with ||a||_inf(inner) <= ||u||_inf and ||u - a||_p <= c ||u - A||_p
// off ω. Throws std::invalid_argument if inner is not a concentric strictly
// smaller square, p < 1, or |ω| exceeds the admissible measure.
RescaleResult rescale_affine(const AffineMap& A, const SampledField& u, const Square& inner, double p);

// The auxiliary cube ((R + r)/(2r)) v + (-(R - r)/4, (R - r)/4)² attached to a
// vertex v of the inner square.
Square outer_cube(const Square& inner, double outer_side, const Vec2& vertex);

struct KeyInequality {
  Square q;
  double lhs = 0.0;  // (|q|/2) (|A(v)| - ||u||_inf)^p
  double rhs = 0.0;  // ∫_{Q_R \ ω} |A - u|^p
  double min_growth = 0.0;  // min over sampled y in q of |A(y)| - |A(v)|
};

// Evaluates both sides of the lower bound used to control the rescaling.
KeyInequality key_inequality(const AffineMap& A, const SampledField& u, const Square& inner, double p);

struct LemmaTrialStats {
  int trials = 0;
  int rescaled = 0;
  int linf_violations = 0;     // sampled |a| on the inner square above ||u||_inf
  int lp_violations = 0;       // ||u - a||_p > c ||u - A||_p (1 + slack)
  int skew_violations = 0;     // E(A) = 0 but E(a) != 0
  int key_violations = 0;      // key lower bound fails beyond the slack
  double worst_ratio_over_constant = 0.0;  // max of measured ratio / c
  double max_measured_ratio = 0.0;
  double min_constant = 0.0;
  double max_constant = 0.0;

  int violations() const { return linf_violations + lp_violations + skew_violations + key_violations; }
};

// Randomized trials: concentric squares with r/R in [0.2, 0.8], skew or general
// A, bounded oscillating u with jumps, and a disk-shaped ω of admissible
// measure. Norms are sampled on an n x n lattice.
LemmaTrialStats run_lemma_trials(int trials, std::uint64_t seed, int samples = 64, double p = 2.0,
                                 double slack = 1e-3);

}  // namespace fissura
