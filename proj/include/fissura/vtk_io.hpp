#pragma once

#include <filesystem>
#include <vector>

#include "fissura/energy.hpp"
#include "fissura/grid.hpp"

namespace fissura {

// Legacy VTK STRUCTURED_POINTS ASCII file with point data "displacement"
// (padded to 3 components) and "phase". Values carry 17 significant digits,
// so reading the file back reproduces them exactly. Throws std::runtime_error
// if the path cannot be written.
void write_fields(const Field& u, const Field& v, const std::filesystem::path& path);

struct VtkFields {
  int nx = 0;
  int ny = 0;
  double hx = 0.0;
  double hy = 0.0;
  std::vector<double> displacement;  // 2 per node
  std::vector<double> phase;
};

// Parses files produced by write_fields. Throws std::runtime_error on malformed input.
VtkFields read_fields(const std::filesystem::path& path);

// CSV with header iter,bulk_mod,bulk_unmod,surf_grad,surf_well,total; row k is
// energies[k].
void write_energy_history(const std::vector<EnergyBreakdown>& energies, const std::filesystem::path& path);

}  // namespace fissura
