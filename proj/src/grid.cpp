#include "fissura/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fissura {

namespace {

constexpr std::array<double, 4> kRefX{-1.0, 1.0, 1.0, -1.0};
constexpr std::array<double, 4> kRefY{-1.0, -1.0, 1.0, 1.0};

// Gauss points in the same counter-clockwise order as the nodes.
const double kGauss = 1.0 / std::sqrt(3.0);

void check_index(const Grid& g, int element, int qp) {
  if (element < 0 || element >= g.element_count())
    throw std::out_of_range("element index " + std::to_string(element) + " out of range");
  if (qp < 0 || qp >= kQuadPoints)
    throw std::out_of_range("quadrature point index " + std::to_string(qp) + " out of range");
}

}  // namespace

Grid::Grid(int nx, int ny, double lx, double ly) : nx_(nx), ny_(ny), lx_(lx), ly_(ly) {
  if (nx < 2 || ny < 2) throw std::invalid_argument("grid needs at least 2 elements per direction");
  if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly))
    throw std::invalid_argument("grid side lengths must be positive and finite");

  const double sx = 2.0 / hx();
  const double sy = 2.0 / hy();
  for (int q = 0; q < kQuadPoints; ++q) {
    const double xi = kRefX[q] * kGauss;
    const double eta = kRefY[q] * kGauss;
    for (int a = 0; a < kNodesPerElement; ++a) {
      shapes_[q].n[a] = 0.25 * (1.0 + kRefX[a] * xi) * (1.0 + kRefY[a] * eta);
      shapes_[q].dndx[a] = 0.25 * kRefX[a] * (1.0 + kRefY[a] * eta) * sx;
      shapes_[q].dndy[a] = 0.25 * kRefY[a] * (1.0 + kRefX[a] * xi) * sy;
    }
  }
}

Vec2 Grid::node_position(int n) const {
  const int i = n % (nx_ + 1);
  const int j = n / (nx_ + 1);
  // Exact endpoints: the last node sits on lx, not on nx * (lx / nx).
  const double x = i == nx_ ? lx_ : i * hx();
  const double y = j == ny_ ? ly_ : j * hy();
  return {x, y};
}

std::array<int, kNodesPerElement> Grid::element_nodes(int e) const {
  const int i = e % nx_;
  const int j = e / nx_;
  return {node(i, j), node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)};
}

Vec2 Grid::qp_position(int e, int q) const {
  const int i = e % nx_;
  const int j = e / nx_;
  return {(i + 0.5 * (1.0 + kRefX[q] * kGauss)) * hx(), (j + 0.5 * (1.0 + kRefY[q] * kGauss)) * hy()};
}

bool Grid::on_boundary(int n) const {
  const int i = n % (nx_ + 1);
  const int j = n / (nx_ + 1);
  return i == 0 || j == 0 || i == nx_ || j == ny_;
}

Field Field::zeros(const Grid& g, int components) {
  if (components != 1 && components != 2) throw std::invalid_argument("field must have 1 or 2 components");
  return {g, components, std::vector<double>(static_cast<std::size_t>(components) * g.node_count(), 0.0)};
}

Field Field::constant(const Grid& g, double value) {
  return {g, 1, std::vector<double>(g.node_count(), value)};
}

Field Field::sample(const Grid& g, const std::function<double(Vec2)>& f) {
  Field out = zeros(g, 1);
  for (int n = 0; n < g.node_count(); ++n) out.values[n] = f(g.node_position(n));
  return out;
}

Field Field::sample(const Grid& g, const std::function<Vec2(Vec2)>& f) {
  Field out = zeros(g, 2);
  for (int n = 0; n < g.node_count(); ++n) {
    const Vec2 w = f(g.node_position(n));
    out.values[2 * n] = w.x;
    out.values[2 * n + 1] = w.y;
  }
  return out;
}

bool Field::finite() const {
  return std::all_of(values.begin(), values.end(), [](double x) { return std::isfinite(x); });
}

SymTensor2 strain_at_qp(const Field& u, int element, int qp) {
  if (u.components != 2) throw std::invalid_argument("strain_at_qp needs a 2-component field");
  check_index(u.grid, element, qp);
  const auto nodes = u.grid.element_nodes(element);
  const QpShape& s = u.grid.qp_shape(qp);
  double uxx = 0.0, uxy = 0.0, uyx = 0.0, uyy = 0.0;
  for (int a = 0; a < kNodesPerElement; ++a) {
    const double ux = u.values[2 * nodes[a]];
    const double uy = u.values[2 * nodes[a] + 1];
    uxx += s.dndx[a] * ux;
    uxy += s.dndy[a] * ux;
    uyx += s.dndx[a] * uy;
    uyy += s.dndy[a] * uy;
  }
  return {uxx, uyy, 0.5 * (uxy + uyx)};
}

double lumped_value_at_qp(const Field& v, int element, int qp) {
  if (v.components != 1) throw std::invalid_argument("lumped_value_at_qp needs a scalar field");
  check_index(v.grid, element, qp);
  return v.values[v.grid.element_nodes(element)[qp]];
}

ValueGrad value_and_grad_at_qp(const Field& v, int element, int qp) {
  if (v.components != 1) throw std::invalid_argument("value_and_grad_at_qp needs a scalar field");
  check_index(v.grid, element, qp);
  const auto nodes = v.grid.element_nodes(element);
  const QpShape& s = v.grid.qp_shape(qp);
  ValueGrad out;
  for (int a = 0; a < kNodesPerElement; ++a) {
    const double va = v.values[nodes[a]];
    out.value += s.n[a] * va;
    out.grad.x += s.dndx[a] * va;
    out.grad.y += s.dndy[a] * va;
  }
  return out;
}

// ---- Dirichlet --------------------------------------------------------------

DirichletSpec& DirichletSpec::add(Side side, bool fix_x, bool fix_y,
                                  std::function<Vec2(Vec2, double)> value) {
  static constexpr const char* names[] = {"left", "right", "bottom", "top"};
  auto selects = [side](const Grid& g, int n) {
    const int i = n % (g.nx() + 1);
    const int j = n / (g.nx() + 1);
    switch (side) {
      case Side::Left: return i == 0;
      case Side::Right: return i == g.nx();
      case Side::Bottom: return j == 0;
      case Side::Top: return j == g.ny();
    }
    return false;
  };
  conditions.push_back({names[static_cast<int>(side)], selects, fix_x, fix_y, std::move(value)});
  return *this;
}

DirichletSpec& DirichletSpec::add(std::string label, std::function<bool(Vec2)> selects, bool fix_x,
                                  bool fix_y, std::function<Vec2(Vec2, double)> value) {
  auto by_position = [selects = std::move(selects)](const Grid& g, int n) {
    return selects(g.node_position(n));
  };
  conditions.push_back({std::move(label), by_position, fix_x, fix_y, std::move(value)});
  return *this;
}

DirichletSpec& DirichletSpec::add_full_boundary(std::function<Vec2(Vec2, double)> value) {
  auto selects = [](const Grid& g, int n) { return g.on_boundary(n); };
  conditions.push_back({"boundary", selects, true, true, std::move(value)});
  return *this;
}

std::size_t Constraints::fixed_count() const {
  return static_cast<std::size_t>(std::count(fixed.begin(), fixed.end(), 1));
}

void Constraints::impose(Field& u) const {
  if (u.values.size() != fixed.size()) throw std::invalid_argument("constraints/field size mismatch");
  for (std::size_t k = 0; k < fixed.size(); ++k)
    if (fixed[k]) u.values[k] = value[k];
}

void Constraints::zero_fixed(std::span<double> v) const {
  for (std::size_t k = 0; k < fixed.size(); ++k)
    if (fixed[k]) v[k] = 0.0;
}

Constraints resolve_dirichlet(const DirichletSpec& spec, double t, const Grid& grid) {
  const std::size_t ndof = 2 * static_cast<std::size_t>(grid.node_count());
  Constraints out;
  out.fixed.assign(ndof, 0);
  out.value.assign(ndof, 0.0);

  for (std::size_t c = 0; c < spec.conditions.size(); ++c) {
    const DirichletCondition& cond = spec.conditions[c];
    int selected = 0;
    for (int n = 0; n < grid.node_count(); ++n) {
      if (!cond.selects || !cond.selects(grid, n)) continue;
      ++selected;
      const Vec2 x = grid.node_position(n);
      const Vec2 w = cond.value ? cond.value(x, t) : Vec2{};
      if (!std::isfinite(w.x) || !std::isfinite(w.y))
        throw std::invalid_argument("Dirichlet condition '" + cond.label + "' is not finite");
      if (cond.fix_x) {
        out.fixed[2 * n] = 1;
        out.value[2 * n] = w.x;
      }
      if (cond.fix_y) {
        out.fixed[2 * n + 1] = 1;
        out.value[2 * n + 1] = w.y;
      }
    }
    if (selected == 0) out.warnings.push_back("Dirichlet condition '" + cond.label + "' selects no node");
  }
  return out;
}

LinearSystem apply_dirichlet(const Constraints& constraints, LinearSystem system) {
  if (constraints.fixed_count() == 0) return system;
  const std::size_t n = constraints.fixed.size();
  if (system.rhs.size() != n) throw std::invalid_argument("apply_dirichlet: system size mismatch");

  // Lift: b <- b - A g on free rows, g on constrained rows.
  std::vector<double> g(n, 0.0);
  for (std::size_t k = 0; k < n; ++k)
    if (constraints.fixed[k]) g[k] = constraints.value[k];
  std::vector<double> ag(n, 0.0);
  system.apply(g, ag);
  for (std::size_t k = 0; k < n; ++k)
    system.rhs[k] = constraints.fixed[k] ? g[k] : system.rhs[k] - ag[k];

  if (!system.diagonal.empty())
    for (std::size_t k = 0; k < n; ++k)
      if (constraints.fixed[k]) system.diagonal[k] = 1.0;

  auto fixed = constraints.fixed;
  system.apply = [inner = std::move(system.apply), fixed = std::move(fixed)](std::span<const double> x,
                                                                            std::span<double> y) {
    std::vector<double> xf(x.begin(), x.end());
    for (std::size_t k = 0; k < xf.size(); ++k)
      if (fixed[k]) xf[k] = 0.0;
    inner(xf, y);
    for (std::size_t k = 0; k < xf.size(); ++k)
      if (fixed[k]) y[k] = x[k];
  };
  return system;
}

LinearSystem apply_dirichlet(const DirichletSpec& spec, double t, const Grid& grid, LinearSystem system) {
  return apply_dirichlet(resolve_dirichlet(spec, t, grid), std::move(system));
}

void clamp_components(Field& u, double bound) {
  if (!(bound > 0.0)) throw std::invalid_argument("clamp bound must be positive");
  for (double& x : u.values) x = std::clamp(x, -bound, bound);
}

}  // namespace fissura
