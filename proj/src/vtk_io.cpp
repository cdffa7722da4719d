#include "fissura/vtk_io.hpp"

#include <fstream>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

namespace fissura {

namespace {

std::ofstream open_for_writing(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("error while writing " + path.string());
}

}  // namespace

void write_fields(const Field& u, const Field& v, const std::filesystem::path& path) {
  if (u.components != 2 || v.components != 1) throw std::invalid_argument("write_fields expects u[2] and v[1]");
  if (!(u.grid == v.grid)) throw std::invalid_argument("write_fields: fields live on different grids");
  const Grid& g = u.grid;
  const int n = g.node_count();

  std::string s;
  auto it = std::back_inserter(s);
  fmt::format_to(it, "# vtk DataFile Version 3.0\nfissura fields\nASCII\nDATASET STRUCTURED_POINTS\n");
  fmt::format_to(it, "DIMENSIONS {} {} 1\nORIGIN 0 0 0\nSPACING {:.17g} {:.17g} 1\n", g.nx() + 1, g.ny() + 1, g.hx(),
                 g.hy());
  fmt::format_to(it, "POINT_DATA {}\nVECTORS displacement double\n", n);
  for (int k = 0; k < n; ++k) fmt::format_to(it, "{:.17g} {:.17g} 0\n", u.values[2 * k], u.values[2 * k + 1]);
  fmt::format_to(it, "SCALARS phase double 1\nLOOKUP_TABLE default\n");
  for (int k = 0; k < n; ++k) fmt::format_to(it, "{:.17g}\n", v.values[k]);

  std::ofstream out = open_for_writing(path);
  out << s;
  finish(out, path);
}

VtkFields read_fields(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  VtkFields f;
  std::string word;
  auto expect = [&](const std::string& w) {
    if (!(in >> word) || word != w) throw std::runtime_error("malformed VTK file: expected " + w);
  };
  std::string line;
  for (int k = 0; k < 4; ++k) std::getline(in, line);
  if (line.rfind("DATASET STRUCTURED_POINTS", 0) != 0) throw std::runtime_error("not a STRUCTURED_POINTS file");
  int nz = 0;
  expect("DIMENSIONS");
  in >> f.nx >> f.ny >> nz;
  f.nx -= 1;
  f.ny -= 1;
  double dummy = 0.0;
  expect("ORIGIN");
  in >> dummy >> dummy >> dummy;
  expect("SPACING");
  in >> f.hx >> f.hy >> dummy;
  int n = 0;
  expect("POINT_DATA");
  in >> n;
  if (!in || n != (f.nx + 1) * (f.ny + 1)) throw std::runtime_error("malformed VTK header");
  expect("VECTORS");
  expect("displacement");
  expect("double");
  f.displacement.resize(2 * static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) in >> f.displacement[2 * k] >> f.displacement[2 * k + 1] >> dummy;
  expect("SCALARS");
  expect("phase");
  expect("double");
  expect("1");
  expect("LOOKUP_TABLE");
  expect("default");
  f.phase.resize(n);
  for (int k = 0; k < n; ++k) in >> f.phase[k];
  if (!in) throw std::runtime_error("truncated VTK file");
  return f;
}

void write_energy_history(const std::vector<EnergyBreakdown>& energies, const std::filesystem::path& path) {
  std::string s = "iter,bulk_mod,bulk_unmod,surf_grad,surf_well,total\n";
  auto it = std::back_inserter(s);
  for (std::size_t k = 0; k < energies.size(); ++k) {
    const EnergyBreakdown& e = energies[k];
    fmt::format_to(it, "{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", k, e.bulk_modulated, e.bulk_unmodulated,
                   e.surface_gradient, e.surface_well, e.total());
  }
  std::ofstream out = open_for_writing(path);
  out << s;
  finish(out, path);
}

}  // namespace fissura
