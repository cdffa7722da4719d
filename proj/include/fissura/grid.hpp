#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fissura/linalg.hpp"
#include "fissura/tensor.hpp"

namespace fissura {

inline constexpr int kNodesPerElement = 4;
inline constexpr int kQuadPoints = 4;

// Shape function values and physical derivatives at one Gauss point. On a
// uniform grid these are identical for every element.
struct QpShape {
  std::array<double, kNodesPerElement> n{};
  std::array<double, kNodesPerElement> dndx{};
  std::array<double, kNodesPerElement> dndy{};
};

// Uniform rectangular grid of bilinear (Q1) elements on (0,lx)x(0,ly).
// Nodes are numbered row by row: node(i, j) = j (nx+1) + i.
// Element-local node order is counter-clockwise from the lower-left corner.
class Grid {
 public:
  Grid(int nx, int ny, double lx, double ly);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double lx() const { return lx_; }
  double ly() const { return ly_; }
  double hx() const { return lx_ / nx_; }
  double hy() const { return ly_ / ny_; }
  double area() const { return lx_ * ly_; }

  int node_count() const { return (nx_ + 1) * (ny_ + 1); }
  int element_count() const { return nx_ * ny_; }
  int node(int i, int j) const { return j * (nx_ + 1) + i; }
  Vec2 node_position(int n) const;
  std::array<int, kNodesPerElement> element_nodes(int e) const;

  Vec2 qp_position(int e, int q) const;
  // Quadrature weight of each of the 2x2 Gauss points (hx hy / 4).
  double qp_weight() const { return 0.25 * hx() * hy(); }
  const QpShape& qp_shape(int q) const { return shapes_[q]; }

  bool on_boundary(int n) const;

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.nx_ == b.nx_ && a.ny_ == b.ny_ && a.lx_ == b.lx_ && a.ly_ == b.ly_;
  }

 private:
  int nx_, ny_;
  double lx_, ly_;
  std::array<QpShape, kQuadPoints> shapes_;
};

// Nodal field with 1 (phase) or 2 (displacement) interleaved components.
struct Field {
  Grid grid;
  int components = 1;
  std::vector<double> values;

  static Field zeros(const Grid& g, int components);
  static Field constant(const Grid& g, double value);
  static Field sample(const Grid& g, const std::function<double(Vec2)>& f);
  static Field sample(const Grid& g, const std::function<Vec2(Vec2)>& f);

  double& at(int node, int comp = 0) { return values[node * components + comp]; }
  double at(int node, int comp = 0) const { return values[node * components + comp]; }
  Vec2 vec(int node) const { return {values[2 * node], values[2 * node + 1]}; }
  bool finite() const;
};

// Symmetric gradient of the bilinear interpolant of u at Gauss point q of element e.
SymTensor2 strain_at_qp(const Field& u, int element, int qp);

struct ValueGrad {
  double value = 0.0;
  Vec2 grad;
};

ValueGrad value_and_grad_at_qp(const Field& v, int element, int qp);

// Nodal value at the element corner nearest to Gauss point q (local node q).
// Zero-order phase-field terms use this lumped rule, which keeps the phase
// system an M-matrix on cells with aspect ratio up to sqrt(2).
double lumped_value_at_qp(const Field& v, int element, int qp);

// ---- Dirichlet data --------------------------------------------------------

enum class Side { Left, Right, Bottom, Top };

struct DirichletCondition {
  std::string label;
  std::function<bool(const Grid&, int node)> selects;
  bool fix_x = true;
  bool fix_y = true;
  // Prescribed displacement as a function of position and load parameter t.
  std::function<Vec2(Vec2, double)> value;
};

struct DirichletSpec {
  std::vector<DirichletCondition> conditions;

  DirichletSpec& add(Side side, bool fix_x, bool fix_y, std::function<Vec2(Vec2, double)> value);
  DirichletSpec& add(std::string label, std::function<bool(Vec2)> selects, bool fix_x, bool fix_y,
                     std::function<Vec2(Vec2, double)> value);
  // Every boundary node, both components.
  DirichletSpec& add_full_boundary(std::function<Vec2(Vec2, double)> value);
  bool empty() const { return conditions.empty(); }
};

// Resolved constraints on the 2 (nx+1)(ny+1) displacement dofs at one load value.
struct Constraints {
  std::vector<unsigned char> fixed;
  std::vector<double> value;
  std::vector<std::string> warnings;  // conditions that selected no node

  bool is_fixed(std::size_t dof) const { return fixed[dof] != 0; }
  std::size_t fixed_count() const;
  void impose(Field& u) const;
  void zero_fixed(std::span<double> v) const;
};

Constraints resolve_dirichlet(const DirichletSpec& spec, double t, const Grid& grid);

// Symmetric elimination: the returned operator acts as P A P + (I - P) with P the
// projector onto free dofs, and the right-hand side is P (b - A g) + (I - P) g, so
// the solution carries the prescribed values g on constrained dofs.
LinearSystem apply_dirichlet(const Constraints& constraints, LinearSystem system);
LinearSystem apply_dirichlet(const DirichletSpec& spec, double t, const Grid& grid,
                             LinearSystem system);

// Optional L-infinity bound on nodal displacement components; disabled unless
// a bound is configured.
void clamp_components(Field& u, double bound);

}  // namespace fissura
