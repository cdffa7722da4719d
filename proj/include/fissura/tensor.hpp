#pragma once

#include <array>
#include <cmath>

namespace fissura {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
  constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
  friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
  friend constexpr Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
// Scalar 2-D cross product a×b.
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }

// General (not necessarily symmetric) 2x2 matrix, row-major.
struct Mat2 {
  double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

  constexpr Vec2 operator*(const Vec2& v) const {
    return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y};
  }
  friend constexpr Mat2 operator*(double s, const Mat2& m) {
    return {s * m.a11, s * m.a12, s * m.a21, s * m.a22};
  }
  friend constexpr Mat2 operator-(const Mat2& a, const Mat2& b) {
    return {a.a11 - b.a11, a.a12 - b.a12, a.a21 - b.a21, a.a22 - b.a22};
  }
  friend constexpr bool operator==(const Mat2&, const Mat2&) = default;
};

// A(x) = W x + c.
struct AffineMap {
  Mat2 W;
  Vec2 c;

  constexpr Vec2 operator()(const Vec2& x) const { return W * x + c; }
  friend constexpr bool operator==(const AffineMap&, const AffineMap&) = default;
};

// Symmetric 2x2 tensor. Strains are stored with the tensor (not engineering)
// shear component, so |T|^2 = xx^2 + yy^2 + 2 xy^2.
struct SymTensor2 {
  double xx = 0.0;
  double yy = 0.0;
  double xy = 0.0;

  static constexpr SymTensor2 identity() { return {1.0, 1.0, 0.0}; }
  static constexpr SymTensor2 diag(double a, double b) { return {a, b, 0.0}; }
  // Symmetric part of a general matrix.
  static constexpr SymTensor2 sym(const Mat2& m) {
    return {m.a11, m.a22, 0.5 * (m.a12 + m.a21)};
  }

  constexpr double trace() const { return xx + yy; }
  constexpr double det() const { return xx * yy - xy * xy; }
  constexpr double norm2() const { return xx * xx + yy * yy + 2.0 * xy * xy; }
  double norm() const { return std::sqrt(norm2()); }

  constexpr SymTensor2& operator+=(const SymTensor2& o) {
    xx += o.xx; yy += o.yy; xy += o.xy;
    return *this;
  }
  constexpr SymTensor2& operator-=(const SymTensor2& o) {
    xx -= o.xx; yy -= o.yy; xy -= o.xy;
    return *this;
  }
  constexpr SymTensor2& operator*=(double s) {
    xx *= s; yy *= s; xy *= s;
    return *this;
  }
  friend constexpr SymTensor2 operator+(SymTensor2 a, const SymTensor2& b) { return a += b; }
  friend constexpr SymTensor2 operator-(SymTensor2 a, const SymTensor2& b) { return a -= b; }
  friend constexpr SymTensor2 operator*(double s, SymTensor2 a) { return a *= s; }
  friend constexpr SymTensor2 operator*(SymTensor2 a, double s) { return a *= s; }
  friend constexpr bool operator==(const SymTensor2&, const SymTensor2&) = default;
};

inline SymTensor2 strain_of(const AffineMap& a) { return SymTensor2::sym(a.W); }

// Frobenius inner product A:B.
constexpr double frobenius(const SymTensor2& a, const SymTensor2& b) {
  return a.xx * b.xx + a.yy * b.yy + 2.0 * a.xy * b.xy;
}

// Eigen-decomposition with lambda1 >= lambda2 and e1 ⟂ e2.
struct EigenPair2 {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  Vec2 e1{1.0, 0.0};
  Vec2 e2{0.0, 1.0};
};

struct TraceSplit {
  double plus = 0.0;   // max(tr T, 0)
  double minus = 0.0;  // max(-tr T, 0)
};

struct PsdSplit {
  SymTensor2 plus;   // projection onto the PSD cone
  SymTensor2 minus;  // remainder, negative semidefinite
};

// Trace-free part T - (tr T / 2) I.
SymTensor2 deviatoric(const SymTensor2& t);

TraceSplit trace_split(const SymTensor2& t);

// Closed-form 2x2 eigensolver (mean ± radius). When the eigenvalues coincide
// up to 1e-14 |T| the axis-aligned basis is returned.
EigenPair2 eigen(const SymTensor2& t);

// Rebuilds l1 e1⊗e1 + l2 e2⊗e2 from an eigenbasis.
SymTensor2 from_eigen(double l1, double l2, const Vec2& e1, const Vec2& e2);

PsdSplit psd_project(const SymTensor2& t);

// (a⊗b + b⊗a)/2. Its determinant is -(a×b)^2/4.
SymTensor2 sym_rank_one(const Vec2& a, const Vec2& b);

}  // namespace fissura
